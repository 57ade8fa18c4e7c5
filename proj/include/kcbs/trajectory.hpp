#pragma once

#include "kcbs/dynamics.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace kcbs
{

/// Constant control held for `duration` seconds.
struct Segment
{
  ControlVec control;
  double duration{0};
};

/// Piecewise-constant-control trajectory starting at t = 0.
///
/// Segment durations must be positive integer multiples of the integration
/// step. States at every integration step are cached on construction, so
/// stateAt costs a lookup plus at most one partial RK4 step. Past the end
/// the final state is held.
class Trajectory
{
public:
  Trajectory(std::shared_ptr<const RobotModel> model, StateVec start, std::vector<Segment> segments, double step);

  const RobotModel& model() const { return *model_; }
  const std::shared_ptr<const RobotModel>& modelPtr() const { return model_; }
  const StateVec& startState() const { return states_.front(); }
  const StateVec& finalState() const { return states_.back(); }
  const std::vector<Segment>& segments() const { return segments_; }
  double step() const { return step_; }
  double duration() const { return duration_; }
  std::size_t stepCount() const { return stepSegment_.size(); }
  /// State after `i` integration steps, i in [0, stepCount()].
  const StateVec& stepState(std::size_t i) const { return states_[i]; }

  StateVec stateAt(double t) const;

  /// States at 0, dt, 2dt, ... and exactly at `horizon` (hold-at-end beyond duration()).
  std::vector<std::pair<double, StateVec>> sampleTimes(double horizon, double dt) const;

private:
  std::shared_ptr<const RobotModel> model_;
  std::vector<Segment> segments_;
  double step_;
  double duration_{0};
  std::vector<StateVec> states_;
  std::vector<std::size_t> stepSegment_;
};

/// Sample grid used everywhere collisions are checked over a horizon:
/// 0, dt, 2dt, ... strictly below horizon, then horizon itself.
std::vector<double> sampleGrid(double horizon, double dt);

/// Number of whole integration steps in `duration`; throws if it is not a
/// positive integer multiple of `step`.
long wholeSteps(double duration, double step);

}  // namespace kcbs
