#include "kcbs/low_level.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace kcbs
{

StateMetric::StateMetric(const RobotModel& model, const LowLevelParams& params)
    : positionWeight_(params.positionWeight),
      headingWeight_(params.headingWeight),
      otherWeight_(params.otherWeight),
      anchorX_(model.bodies.front().xDim),
      anchorY_(model.bodies.front().yDim)
{
  std::vector<bool> used(static_cast<std::size_t>(model.stateDim()), false);
  for (const BodyPlacement& b : model.bodies)
  {
    positions_.emplace_back(b.xDim, b.yDim);
    used[static_cast<std::size_t>(b.xDim)] = used[static_cast<std::size_t>(b.yDim)] = true;
  }
  for (int d = 0; d < model.stateDim(); ++d)
  {
    if (used[static_cast<std::size_t>(d)])
      continue;
    if (model.stateSpace.isAngular(d))
      headings_.push_back(d);
    else
      others_.push_back(d);
  }
}

double StateMetric::operator()(const StateVec& a, const StateVec& b) const
{
  double d = 0;
  for (const auto& [x, y] : positions_)
    d += positionWeight_ * std::hypot(a(x) - b(x), a(y) - b(y));
  for (int h : headings_)
    d += headingWeight_ * angularDistance(a(h), b(h));
  for (int o : others_)
    d += otherWeight_ * std::abs(a(o) - b(o));
  return d;
}

StateSampler::StateSampler(const RobotModel& model, double goalBias) : model_(model), goalBias_(goalBias) {}

std::pair<StateVec, bool> StateSampler::sample(Rng& rng) const
{
  const StateSpace& space = model_.stateSpace;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  StateVec x(space.dims());
  for (int d = 0; d < space.dims(); ++d)
  {
    const double lo = space.isAngular(d) ? -std::numbers::pi : space.lower(d);
    const double hi = space.isAngular(d) ? std::numbers::pi : space.upper(d);
    x(d) = lo + (hi - lo) * unit(rng);
  }
  const bool toGoal = unit(rng) < goalBias_;
  if (toGoal)
  {
    std::vector<bool> isPos(static_cast<std::size_t>(space.dims()), false);
    for (const GoalRegion& g : model_.goals)
    {
      x(g.xDim) = g.center.x();
      x(g.yDim) = g.center.y();
      isPos[static_cast<std::size_t>(g.xDim)] = isPos[static_cast<std::size_t>(g.yDim)] = true;
    }
    for (const BodyPlacement& b : model_.bodies)
      isPos[static_cast<std::size_t>(b.xDim)] = isPos[static_cast<std::size_t>(b.yDim)] = true;
    for (int d = 0; d < space.dims(); ++d)
      if (!isPos[static_cast<std::size_t>(d)] && !space.isAngular(d))
        x(d) = std::clamp(0.0, space.lower(d), space.upper(d));
  }
  return {x, toGoal};
}

ControlVec StateSampler::sampleControl(Rng& rng) const
{
  const ControlSpace& cs = model_.controlSpace;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ControlVec u(cs.dims());
  for (int d = 0; d < cs.dims(); ++d)
    u(d) = cs.lower(d) + (cs.upper(d) - cs.lower(d)) * unit(rng);
  return u;
}

MotionTree::MotionTree(StateVec root)
{
  TreeNode n;
  n.state = std::move(root);
  nodes_.push_back(std::move(n));
}

int MotionTree::add(TreeNode n)
{
  if (n.parent < 0 || static_cast<std::size_t>(n.parent) >= nodes_.size())
    throw std::invalid_argument("motion tree parent out of range");
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

NearestIndex::NearestIndex(const StateMetric& metric, const Workspace& ws, double cell)
    : metric_(metric), ws_(ws), cell_(cell)
{
  nx_ = std::max(1, static_cast<int>(std::ceil(ws.width() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(ws.height() / cell_)));
  buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
}

std::pair<int, int> NearestIndex::cellOf(double x, double y) const
{
  const int cx = std::clamp(static_cast<int>(std::floor((x - ws_.xmin) / cell_)), 0, nx_ - 1);
  const int cy = std::clamp(static_cast<int>(std::floor((y - ws_.ymin) / cell_)), 0, ny_ - 1);
  return {cx, cy};
}

void NearestIndex::insert(const MotionTree& tree, int id)
{
  const StateVec& s = tree.node(static_cast<std::size_t>(id)).state;
  const auto [cx, cy] = cellOf(s(metric_.anchorX()), s(metric_.anchorY()));
  buckets_[static_cast<std::size_t>(cy * nx_ + cx)].push_back(id);
}

int NearestIndex::nearest(const MotionTree& tree, const StateVec& q) const
{
  if (!(metric_.positionWeight() > 0))
    return nearestLinear(tree, metric_, q);
  const double qx = q(metric_.anchorX()), qy = q(metric_.anchorY());
  const auto [cx, cy] = cellOf(qx, qy);
  // A query clamped onto the border cell may lie outside it; shift the
  // pruning radius by that overshoot.
  const double overshoot = std::max({0.0, ws_.xmin - qx, qx - ws_.xmax, ws_.ymin - qy, qy - ws_.ymax});
  int best = -1;
  double bestD = std::numeric_limits<double>::infinity();
  const int maxRing = std::max(nx_, ny_);
  for (int r = 0; r <= maxRing; ++r)
  {
    for (int y = cy - r; y <= cy + r; ++y)
    {
      if (y < 0 || y >= ny_)
        continue;
      const bool edgeRow = (y == cy - r || y == cy + r);
      for (int x = cx - r; x <= cx + r; x += (edgeRow ? 1 : 2 * r))
      {
        if (x >= 0 && x < nx_)
        {
          for (int id : buckets_[static_cast<std::size_t>(y * nx_ + x)])
          {
            const double d = metric_(tree.node(static_cast<std::size_t>(id)).state, q);
            if (d < bestD || (d == bestD && id < best))
            {
              bestD = d;
              best = id;
            }
          }
        }
        if (r == 0)
          break;
      }
    }
    // Unvisited nodes lie in rings > r, at least r cells away from the query cell.
    if (best >= 0 && bestD < metric_.positionWeight() * (r * cell_ - overshoot))
      break;
  }
  return best;
}

int nearestLinear(const MotionTree& tree, const StateMetric& metric, const StateVec& q)
{
  int best = -1;
  double bestD = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tree.size(); ++i)
  {
    const double d = metric(tree.node(i).state, q);
    if (d < bestD)
    {
      bestD = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::uint64_t constraintSignature(std::span<const Constraint> constraints)
{
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  mix(constraints.size());
  for (const Constraint& c : constraints)
  {
    mix(static_cast<std::uint64_t>(c.constrainedRobot));
    mix(static_cast<std::uint64_t>(c.otherRobot));
    mix(std::hash<double>{}(c.tStart));
    mix(std::hash<double>{}(c.tEnd));
    mix(reinterpret_cast<std::uintptr_t>(c.shadow.get()));
  }
  return h;
}

std::shared_ptr<const Trajectory> treeToTrajectory(const MotionTree& tree, int leaf,
                                                   std::shared_ptr<const RobotModel> model, double step)
{
  std::vector<Segment> segments;
  for (int n = leaf; tree.node(static_cast<std::size_t>(n)).parent >= 0;
       n = tree.node(static_cast<std::size_t>(n)).parent)
  {
    const TreeNode& node = tree.node(static_cast<std::size_t>(n));
    segments.push_back(Segment{node.control, node.steps * step});
  }
  std::reverse(segments.begin(), segments.end());
  return std::make_shared<Trajectory>(std::move(model), tree.node(0).state, std::move(segments), step);
}

namespace
{

struct Validity
{
  bool ok{true};
  std::optional<std::size_t> violated;
};

/// Static validity, then constraints, at one absolute time.
Validity checkSample(const RobotModel& model, const Environment& env, const StateVec& x, double t,
                     std::span<const Constraint> constraints, double latestEnd, bool checkBounds)
{
  if (checkBounds && !model.stateSpace.withinBounds(x))
    return {false, std::nullopt};
  const auto bodies = model.footprints(x);
  if (!footprintsValid(bodies, env))
    return {false, std::nullopt};
  if (t <= latestEnd + 1e-9)
    if (auto c = firstViolated(bodies, t, constraints))
      return {false, c};
  return {};
}

/// Holding `x` from `from` until every constraint has ended.
std::optional<std::size_t> holdViolation(const RobotModel& model, const StateVec& x, double from,
                                         std::span<const Constraint> constraints, double latestEnd, double dt)
{
  if (constraints.empty() || from > latestEnd + 1e-9)
    return std::nullopt;
  const auto bodies = model.footprints(x);
  for (auto g = static_cast<long>(std::ceil(from / dt - 1e-9));; ++g)
  {
    const double t = static_cast<double>(g) * dt;
    if (t > latestEnd + 1e-9)
      break;
    if (auto c = firstViolated(bodies, t, constraints))
      return c;
  }
  // The grid may skip the exact end of the last interval.
  return firstViolated(bodies, latestEnd, constraints);
}

}  // namespace

LowLevelOutcome cstrPlan(const LowLevelRequest& request, Rng& rng, const LowLevelParams& params)
{
  if (!request.model || !request.env)
    throw std::invalid_argument("cstrPlan: model and environment are required");
  if (!(params.step > 0) || params.maxSteps < 1 || !(params.checkDt > 0))
    throw std::invalid_argument("cstrPlan: invalid low-level parameters");
  const RobotModel& model = *request.model;
  const Environment& env = *request.env;
  const std::span<const Constraint> constraints = request.constraints;
  const std::uint64_t signature = constraintSignature(constraints);

  LowLevelOutcome out;
  out.tally.assign(constraints.size(), 0);
  if (request.seed)
  {
    if (request.seed->constraintSignature() != signature)
      throw std::invalid_argument("cstrPlan: seed tree was grown under a different constraint set");
    out.tree = request.seed;
  }
  else
  {
    out.tree = std::make_shared<MotionTree>(model.start);
    out.tree->setConstraintSignature(signature);
  }
  MotionTree& tree = *out.tree;

  double latestEnd = 0;
  for (const Constraint& c : constraints)
    latestEnd = std::max(latestEnd, c.tEnd);

  const auto finishExhausted = [&]() {
    const auto it = std::max_element(out.tally.begin(), out.tally.end());
    if (it != out.tally.end() && *it > 0)
      out.cMax = static_cast<std::size_t>(std::distance(out.tally.begin(), it));
    return out;
  };

  // The root itself may already be infeasible.
  const Validity root = checkSample(model, env, model.start, 0.0, constraints, latestEnd, true);
  if (!root.ok)
  {
    if (root.violated)
      ++out.tally[*root.violated];
    return finishExhausted();
  }
  const auto tryGoal = [&](int id) -> bool {
    const TreeNode& n = tree.node(static_cast<std::size_t>(id));
    if (!model.goalReached(n.state))
      return false;
    if (auto c = holdViolation(model, n.state, n.arrivalTime, constraints, latestEnd, params.checkDt))
    {
      ++out.tally[*c];
      return false;
    }
    out.solution = treeToTrajectory(tree, id, request.model, params.step);
    return true;
  };
  if (!request.seed && tryGoal(0))
    return out;

  const StateMetric metric(model, params);
  const StateSampler sampler(model, params.goalBias);
  NearestIndex index(metric, env.workspace);
  for (std::size_t i = 0; i < tree.size(); ++i)
    index.insert(tree, static_cast<int>(i));

  std::uniform_int_distribution<int> stepsDist(1, params.maxSteps);
  const double h = params.step;
  const double res = params.checkDt;
  std::vector<StateVec> states;

  while (!request.iterations || out.iterations < *request.iterations)
  {
    if (request.deadline.expired())
      break;
    ++out.iterations;

    const StateVec target = sampler.sample(rng).first;
    const int nearId = index.nearest(tree, target);
    const ControlVec u = sampler.sampleControl(rng);
    const int k = stepsDist(rng);
    const TreeNode& near = tree.node(static_cast<std::size_t>(nearId));
    const double a = near.arrivalTime;

    states.assign(1, near.state);
    for (int m = 0; m < k; ++m)
      states.push_back(rk4Step<double>(model.field, model.stateSpace, states.back(), u, h));

    Validity v;
    for (int m = 1; m <= k && v.ok; ++m)
      if (!model.stateSpace.withinBounds(states[static_cast<std::size_t>(m)]))
        v.ok = false;

    const double end = a + k * h;
    bool endChecked = false;
    for (auto g = static_cast<long>(std::floor(a / res + 1e-9)) + 1; v.ok; ++g)
    {
      const double tau = static_cast<double>(g) * res;
      if (tau > end + 1e-9)
        break;
      const double offset = tau - a;
      auto idx = static_cast<std::size_t>(std::floor(offset / h + 1e-9));
      idx = std::min(idx, static_cast<std::size_t>(k));
      const double rest = offset - static_cast<double>(idx) * h;
      if (rest <= 1e-12)
      {
        v = checkSample(model, env, states[idx], tau, constraints, latestEnd, false);
        endChecked = endChecked || idx == static_cast<std::size_t>(k);
      }
      else
      {
        v = checkSample(model, env, rk4Step<double>(model.field, model.stateSpace, states[idx], u, rest), tau,
                        constraints, latestEnd, false);
      }
    }
    if (v.ok && !endChecked)
      v = checkSample(model, env, states.back(), end, constraints, latestEnd, false);

    if (!v.ok)
    {
      if (v.violated)
        ++out.tally[*v.violated];
      continue;
    }

    TreeNode node;
    node.state = states.back();
    node.parent = nearId;
    node.control = u;
    node.steps = k;
    node.arrivalTime = end;
    const int id = tree.add(std::move(node));
    index.insert(tree, id);
    if (tryGoal(id))
      return out;
  }
  return finishExhausted();
}

}  // namespace kcbs
