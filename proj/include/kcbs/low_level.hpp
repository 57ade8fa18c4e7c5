#pragma once

// Constrained, resumable kinodynamic RRT for one robot or meta-robot.

#include "kcbs/conflicts.hpp"

#include <chrono>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace kcbs
{

using Rng = std::mt19937_64;
using Clock = std::chrono::steady_clock;

/// Wall-clock budget; a default-constructed deadline never expires.
class Deadline
{
public:
  Deadline() = default;
  explicit Deadline(Clock::time_point at) : at_(at) {}
  static Deadline in(double seconds)
  {
    return Deadline(Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds)));
  }
  static Deadline never() { return Deadline(); }

  bool expired() const { return at_ && Clock::now() >= *at_; }
  double remainingSeconds() const
  {
    if (!at_)
      return std::numeric_limits<double>::infinity();
    return std::chrono::duration<double>(*at_ - Clock::now()).count();
  }

private:
  std::optional<Clock::time_point> at_;
};

struct LowLevelParams
{
  /// Integration step; motion durations are k * step, k in [1, maxSteps].
  double step{0.05};
  int maxSteps{20};
  double goalBias{0.05};
  /// Collision / constraint checking resolution along motions.
  double checkDt{0.01};
  double positionWeight{1.0};
  double headingWeight{0.5};
  double otherWeight{0.2};
};

/// Weighted distance: Euclidean per body position, shortest arc on headings,
/// absolute difference on every remaining dimension.
class StateMetric
{
public:
  StateMetric(const RobotModel& model, const LowLevelParams& params);

  double operator()(const StateVec& a, const StateVec& b) const;
  /// Lower bound on operator() from the first body's position alone.
  double positionWeight() const { return positionWeight_; }
  int anchorX() const { return anchorX_; }
  int anchorY() const { return anchorY_; }

private:
  std::vector<std::pair<int, int>> positions_;
  std::vector<int> headings_;
  std::vector<int> others_;
  double positionWeight_, headingWeight_, otherWeight_;
  int anchorX_, anchorY_;
};

/// Uniform state sampling with goal bias.
class StateSampler
{
public:
  StateSampler(const RobotModel& model, double goalBias);

  /// Returns the sample and whether it was a goal-biased draw.
  std::pair<StateVec, bool> sample(Rng& rng) const;
  ControlVec sampleControl(Rng& rng) const;

private:
  const RobotModel& model_;
  double goalBias_;
};

struct TreeNode
{
  StateVec state;
  int parent{-1};
  ControlVec control;
  int steps{0};
  double arrivalTime{0};
};

/// RRT motion tree rooted at node 0. Remembers the constraint set it was
/// grown under so a resumed search can refuse a mismatched seed.
class MotionTree
{
public:
  explicit MotionTree(StateVec root);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(std::size_t i) const { return nodes_[i]; }
  int add(TreeNode n);

  std::uint64_t constraintSignature() const { return signature_; }
  void setConstraintSignature(std::uint64_t s) { signature_ = s; }

private:
  std::vector<TreeNode> nodes_;
  std::uint64_t signature_{0};
};

/// Bucket grid over the first body's position for exact nearest-neighbour
/// queries under StateMetric.
class NearestIndex
{
public:
  NearestIndex(const StateMetric& metric, const Workspace& ws, double cell = 0.5);

  void insert(const MotionTree& tree, int id);
  int nearest(const MotionTree& tree, const StateVec& q) const;

private:
  std::pair<int, int> cellOf(double x, double y) const;

  const StateMetric& metric_;
  Workspace ws_;
  double cell_;
  int nx_, ny_;
  std::vector<std::vector<int>> buckets_;
};

/// Linear-scan nearest neighbour, the reference for NearestIndex.
int nearestLinear(const MotionTree& tree, const StateMetric& metric, const StateVec& q);

std::uint64_t constraintSignature(std::span<const Constraint> constraints);

struct LowLevelOutcome
{
  /// Set when a goal-reaching, constraint-respecting trajectory was found.
  std::shared_ptr<const Trajectory> solution;
  /// Always returned; continues a later search with the same constraints.
  std::shared_ptr<MotionTree> tree;
  /// Most violated constraint (lowest index on ties); only when exhausted.
  std::optional<std::size_t> cMax;
  std::vector<long> tally;
  long iterations{0};

  bool solved() const { return solution != nullptr; }
};

struct LowLevelRequest
{
  std::shared_ptr<const RobotModel> model;
  const Environment* env{nullptr};
  std::span<const Constraint> constraints;
  std::shared_ptr<MotionTree> seed;
  /// Unset means iterate until the deadline.
  std::optional<long> iterations;
  Deadline deadline;
};

/// Grows (or resumes) a motion tree until the goal is reached under every
/// constraint, the iteration budget runs out, or the deadline passes.
LowLevelOutcome cstrPlan(const LowLevelRequest& request, Rng& rng, const LowLevelParams& params);

/// Root-to-leaf path as a trajectory.
std::shared_ptr<const Trajectory> treeToTrajectory(const MotionTree& tree, int leaf,
                                                   std::shared_ptr<const RobotModel> model, double step);

}  // namespace kcbs
