#pragma once

// Plan validation over sampled continuous time and interval constraints
// that turn another robot's trajectory into a moving obstacle.

#include "kcbs/trajectory.hpp"

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kcbs
{

struct Environment
{
  Workspace workspace;
  std::vector<ConvexPolygon> obstacles;
};

/// Robots i < j collide at every sample in [tStart, tEnd].
struct Conflict
{
  int i{0};
  int j{1};
  double tStart{0};
  double tEnd{0};
};

struct Plan
{
  std::vector<std::shared_ptr<const Trajectory>> trajectories;

  std::size_t size() const { return trajectories.size(); }
  /// Sum of trajectory durations.
  double cost() const;
  double horizon() const;
};

/// Robot `constrainedRobot` must avoid robot `otherRobot`'s bodies, as they
/// move along `shadow`, for every time in [tStart, tEnd].
struct Constraint
{
  int constrainedRobot{0};
  int otherRobot{1};
  double tStart{0};
  double tEnd{0};
  std::shared_ptr<const Trajectory> shadow;

  bool active(double t) const { return t >= tStart - 1e-9 && t <= tEnd + 1e-9; }
  std::vector<ConvexPolygon> shadowAt(double t) const;
};

/// Thrown when a plan touches an obstacle or leaves the workspace.
class InvalidPlanError : public std::runtime_error
{
public:
  InvalidPlanError(int robot, double time, const std::string& what);
  int robot() const { return robot_; }
  double time() const { return time_; }

private:
  int robot_;
  double time_;
};

/// Any footprint of `a` intersects any footprint of `b`.
bool footprintsCollide(std::span<const ConvexPolygon> a, std::span<const ConvexPolygon> b);

/// Body inside the workspace, clear of obstacles and (for meta-robots) of
/// its own other bodies. Ignores state bounds.
bool footprintsValid(std::span<const ConvexPolygon> bodies, const Environment& env);

/// footprintsValid plus state bounds.
bool isStateValid(const RobotModel& model, const StateVec& x, const Environment& env);

/// Robot-robot conflicts sampled at 0, dt, ..., t_f with hold-at-end.
/// Maximal runs of colliding samples become one conflict. Sorted by tStart,
/// then (i, j). Throws InvalidPlanError on any obstacle/workspace violation.
std::vector<Conflict> validatePlan(const Plan& plan, const Environment& env, double dt);

/// (constraint on k.i shadowing k.j, constraint on k.j shadowing k.i).
std::pair<Constraint, Constraint> makeConstraints(const Conflict& k, const Plan& plan);

/// One constant-control motion starting at absolute time `startTime`.
struct Motion
{
  StateVec start;
  ControlVec control;
  double duration{0};
  double startTime{0};
};

/// Index of the constraint violated at the earliest sample time (ties by
/// constraint order). Samples lie on the absolute grid k * dt inside
/// [startTime, startTime + duration].
std::optional<std::size_t> motionViolatesConstraints(const RobotModel& model, const Motion& motion,
                                                     std::span<const Constraint> constraints, double dt,
                                                     double step);

/// Earliest violated constraint (by order) at one absolute time.
std::optional<std::size_t> firstViolated(std::span<const ConvexPolygon> bodies, double t,
                                         std::span<const Constraint> constraints);

/// Post-hoc verdict on a plan, without exceptions.
struct PlanCheck
{
  std::vector<Conflict> conflicts;
  /// (robot, time) of the first obstacle/workspace violation per robot.
  std::vector<std::pair<int, double>> obstacleHits;
  std::vector<int> goalMisses;

  bool ok() const { return conflicts.empty() && obstacleHits.empty() && goalMisses.empty(); }
  std::string summary() const;
};

PlanCheck checkPlan(const Plan& plan, const Environment& env, double dt);

}  // namespace kcbs
