#pragma once

// Comparison planners: centralized RRT over the composite space and
// prioritized RRT against earlier robots' trajectories.

#include "kcbs/kcbs.hpp"

#include <optional>
#include <vector>

namespace kcbs
{

struct BaselineConfig
{
  double dt{0.1};
  int refine{10};
  std::uint64_t seed{0};
  double deadlineSeconds{60.0};
  /// pRRT constraint horizon = slack * sum of earlier durations.
  double horizonSlack{2.0};
  LowLevelParams lowLevel{};

  static BaselineConfig from(const SolverConfig& c);
};

/// Plans all robots as one meta-robot and splits the result.
SolveResult crrtPlan(const std::vector<RobotModel>& models, const Environment& env, const BaselineConfig& config);

/// Plans robots one by one in `order` (input order when empty), each
/// avoiding the trajectories already fixed. No backtracking.
SolveResult prrtPlan(const std::vector<RobotModel>& models, const Environment& env, const BaselineConfig& config,
                     std::vector<std::size_t> order = {});

}  // namespace kcbs
