#pragma once

// Kinodynamic conflict-based search: best-first search over a constraint
// tree, resumable retries for nodes without a plan, and merge-and-restart
// of robot pairs that keep conflicting.

#include "kcbs/low_level.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace kcbs
{

struct SolverConfig
{
  /// Low-level iterations per branch or retry call.
  long iterations{5000};
  /// Merge threshold: a pair merges once its conflict count exceeds it.
  int mergeBound{20};
  /// Conflict-detection resolution.
  double dt{0.1};
  /// Plans are only accepted when also conflict-free at dt / refine.
  int refine{10};
  std::uint64_t seed{0};
  double deadlineSeconds{60.0};
  LowLevelParams lowLevel{};

  void check() const;
  /// Resolution of every collision check inside the planners.
  double fineDt() const { return dt / refine; }
};

/// Symmetric per-pair conflict counts.
class ConflictCounter
{
public:
  explicit ConflictCounter(std::size_t robots = 0) : n_(robots), counts_(robots * robots, 0) {}

  int get(std::size_t i, std::size_t j) const { return counts_[i * n_ + j]; }
  int increment(std::size_t i, std::size_t j)
  {
    ++counts_[j * n_ + i];
    return ++counts_[i * n_ + j];
  }
  std::size_t robots() const { return n_; }
  int max() const;

private:
  std::size_t n_;
  std::vector<int> counts_;
};

/// True when the pair has strictly exceeded the threshold.
bool shouldMerge(const ConflictCounter& counter, std::size_t i, std::size_t j, int bound);

struct MergeEvent
{
  /// Original robot indices on either side of the merge.
  std::vector<int> first;
  std::vector<int> second;
  /// Constraint-tree depth at which the merge was triggered.
  int depth{0};
  /// Conflict count of the pair when it merged.
  int pairCount{0};
};

struct SolveStats
{
  long ctNodesExpanded{0};
  long lowLevelCalls{0};
  long branches{0};
  long retries{0};
  long discardedNodes{0};
  std::vector<MergeEvent> mergeEvents;
  double wallTime{0};
  std::size_t initialRobotCount{0};
  std::size_t finalRobotCount{0};
  /// Largest retry count seen on any constraint-tree node.
  int maxRetryCount{0};
  /// Largest conflict count any pair reached, over all restarts.
  int maxPairCount{0};
};

enum class SolveStatus
{
  Solved,
  Timeout,
  Exhausted,
};

struct SolveResult
{
  SolveStatus status{SolveStatus::Timeout};
  /// One trajectory per input robot (meta-robot trajectories split back).
  std::optional<Plan> plan;
  SolveStats stats;
  std::string message;

  bool solved() const { return status == SolveStatus::Solved; }
};

/// Replaces models i and j with their meta-robot at position min(i, j).
std::vector<RobotModel> mergeModels(const std::vector<RobotModel>& models, std::size_t i, std::size_t j);

/// Per-member trajectories of a (meta-)robot trajectory; same segment
/// timings, sliced controls and start state.
std::vector<std::shared_ptr<const Trajectory>>
splitTrajectory(const Trajectory& composite, const std::vector<std::shared_ptr<const RobotModel>>& originals);

/// Inverse of splitTrajectory.
std::shared_ptr<const Trajectory> composeTrajectories(const std::vector<std::shared_ptr<const Trajectory>>& parts,
                                                      std::shared_ptr<const RobotModel> composite);

SolveResult solve(const std::vector<RobotModel>& models, const Environment& env, const SolverConfig& config);

}  // namespace kcbs
