#include "kcbs/kcbs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace kcbs
{

void SolverConfig::check() const
{
  if (iterations < 1)
    throw std::invalid_argument("solver: N must be >= 1");
  if (mergeBound < 1)
    throw std::invalid_argument("solver: B must be >= 1");
  if (!(dt > 0))
    throw std::invalid_argument("solver: dt must be positive");
  if (refine < 1)
    throw std::invalid_argument("solver: refine must be >= 1");
  if (!(deadlineSeconds > 0))
    throw std::invalid_argument("solver: deadline must be positive");
}

int ConflictCounter::max() const
{
  return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

bool shouldMerge(const ConflictCounter& counter, std::size_t i, std::size_t j, int bound)
{
  return counter.get(i, j) > bound;
}

std::vector<RobotModel> mergeModels(const std::vector<RobotModel>& models, std::size_t i, std::size_t j)
{
  if (i == j || i >= models.size() || j >= models.size())
    throw std::invalid_argument("mergeModels: need two distinct valid indices");
  const std::size_t lo = std::min(i, j), hi = std::max(i, j);
  std::vector<RobotModel> out;
  out.reserve(models.size() - 1);
  for (std::size_t r = 0; r < models.size(); ++r)
  {
    if (r == lo)
      out.push_back(composeModels(models[lo], models[hi]));
    else if (r != hi)
      out.push_back(models[r]);
  }
  return out;
}

std::vector<std::shared_ptr<const Trajectory>>
splitTrajectory(const Trajectory& composite, const std::vector<std::shared_ptr<const RobotModel>>& originals)
{
  std::vector<std::shared_ptr<const Trajectory>> parts;
  Eigen::Index xo = 0, uo = 0;
  for (int member : composite.model().members)
  {
    const auto& sub = originals.at(static_cast<std::size_t>(member));
    const Eigen::Index n = sub->stateDim(), m = sub->controlDim();
    std::vector<Segment> segs;
    segs.reserve(composite.segments().size());
    for (const Segment& s : composite.segments())
      segs.push_back(Segment{s.control.segment(uo, m), s.duration});
    parts.push_back(std::make_shared<Trajectory>(sub, composite.startState().segment(xo, n), std::move(segs),
                                                 composite.step()));
    xo += n;
    uo += m;
  }
  if (xo != composite.model().stateDim() || uo != composite.model().controlDim())
    throw std::logic_error("splitTrajectory: member dimensions do not add up");
  return parts;
}

std::shared_ptr<const Trajectory> composeTrajectories(const std::vector<std::shared_ptr<const Trajectory>>& parts,
                                                      std::shared_ptr<const RobotModel> composite)
{
  if (parts.empty())
    throw std::invalid_argument("composeTrajectories: no parts");
  const std::size_t nseg = parts.front()->segments().size();
  StateVec start(composite->stateDim());
  Eigen::Index xo = 0;
  for (const auto& p : parts)
  {
    if (p->segments().size() != nseg)
      throw std::invalid_argument("composeTrajectories: parts have different segment timings");
    start.segment(xo, p->model().stateDim()) = p->startState();
    xo += p->model().stateDim();
  }
  std::vector<Segment> segs;
  for (std::size_t s = 0; s < nseg; ++s)
  {
    ControlVec u(composite->controlDim());
    Eigen::Index uo = 0;
    for (const auto& p : parts)
    {
      const Segment& seg = p->segments()[s];
      if (std::abs(seg.duration - parts.front()->segments()[s].duration) > 1e-12)
        throw std::invalid_argument("composeTrajectories: parts have different segment timings");
      u.segment(uo, seg.control.size()) = seg.control;
      uo += seg.control.size();
    }
    segs.push_back(Segment{u, parts.front()->segments()[s].duration});
  }
  return std::make_shared<Trajectory>(std::move(composite), std::move(start), std::move(segs),
                                      parts.front()->step());
}

namespace
{

struct CTNode
{
  /// Present for plan-bearing nodes.
  std::optional<Plan> plan;
  /// Plan of the parent, kept while a replan for pendingRobot is outstanding.
  std::optional<Plan> basePlan;
  std::vector<std::vector<Constraint>> constraints;
  std::optional<std::size_t> pendingRobot;
  std::shared_ptr<MotionTree> pendingTree;
  int retryCount{0};
  int depth{0};
  double cost{std::numeric_limits<double>::infinity()};
  std::uint64_t order{0};
};

using NodePtr = std::shared_ptr<CTNode>;

struct NodeOrder
{
  bool operator()(const NodePtr& a, const NodePtr& b) const
  {
    if (a->cost != b->cost)
      return a->cost > b->cost;
    return a->order > b->order;
  }
};

struct EpochOutcome
{
  enum class Kind
  {
    Solved,
    Merge,
    Timeout,
    Exhausted,
  } kind{Kind::Timeout};
  std::optional<Plan> plan;
  std::size_t mergeI{0}, mergeJ{0};
  int depth{0};
  int pairCount{0};
  std::string message;
};

Plan withReplaced(const Plan& base, std::size_t robot, std::shared_ptr<const Trajectory> t)
{
  Plan p = base;
  p.trajectories[robot] = std::move(t);
  return p;
}

/// Conflicts at `dt`; if none, conflicts at the fine resolution with
/// intervals widened to the dt grid.
std::vector<Conflict> findConflicts(const Plan& plan, const Environment& env, const SolverConfig& config)
{
  auto conflicts = validatePlan(plan, env, config.dt);
  if (!conflicts.empty() || config.refine == 1)
    return conflicts;
  conflicts = validatePlan(plan, env, config.fineDt());
  const double horizon = plan.horizon();
  for (Conflict& c : conflicts)
  {
    c.tStart = std::max(0.0, std::floor(c.tStart / config.dt + 1e-9) * config.dt);
    c.tEnd = std::min(horizon, std::ceil(c.tEnd / config.dt - 1e-9) * config.dt);
  }
  return conflicts;
}

class Epoch
{
public:
  Epoch(const std::vector<RobotModel>& models, const Environment& env, const SolverConfig& config,
        const LowLevelParams& ll, const Deadline& deadline, Rng& rng, SolveStats& stats)
      : env_(env), config_(config), ll_(ll), deadline_(deadline), rng_(rng), stats_(stats), counter_(models.size())
  {
    for (const RobotModel& m : models)
      models_.push_back(std::make_shared<const RobotModel>(m));
  }

  EpochOutcome run()
  {
    EpochOutcome out = search();
    stats_.maxPairCount = std::max(stats_.maxPairCount, counter_.max());
    return out;
  }

private:
  LowLevelOutcome lowLevel(std::size_t robot, const std::vector<Constraint>& constraints,
                           std::shared_ptr<MotionTree> seed, std::optional<long> iterations)
  {
    ++stats_.lowLevelCalls;
    LowLevelRequest req;
    req.model = models_[robot];
    req.env = &env_;
    req.constraints = constraints;
    req.seed = std::move(seed);
    req.iterations = iterations;
    req.deadline = deadline_;
    return cstrPlan(req, rng_, ll_);
  }

  void push(NodePtr n)
  {
    n->order = nextOrder_++;
    if (n->plan)
      n->cost = n->plan->cost();
    queue_.push(std::move(n));
  }

  EpochOutcome timeout() const
  {
    EpochOutcome o;
    o.kind = EpochOutcome::Kind::Timeout;
    o.message = "deadline exceeded";
    return o;
  }

  EpochOutcome merge(std::size_t i, std::size_t j, int depth)
  {
    EpochOutcome o;
    o.kind = EpochOutcome::Kind::Merge;
    o.mergeI = std::min(i, j);
    o.mergeJ = std::max(i, j);
    o.depth = depth;
    o.pairCount = counter_.get(i, j);
    return o;
  }

  /// Counts one conflict event between i and j; returns a merge request if due.
  std::optional<EpochOutcome> countConflict(std::size_t i, std::size_t j, int depth)
  {
    counter_.increment(i, j);
    if (shouldMerge(counter_, i, j, config_.mergeBound))
      return merge(i, j, depth);
    return std::nullopt;
  }

  EpochOutcome search()
  {
    const std::size_t k = models_.size();
    auto root = std::make_shared<CTNode>();
    root->plan.emplace();
    root->constraints.resize(k);
    for (std::size_t r = 0; r < k; ++r)
    {
      LowLevelOutcome o = lowLevel(r, {}, nullptr, std::nullopt);
      if (!o.solved())
      {
        if (deadline_.expired())
          return timeout();
        EpochOutcome e;
        e.kind = EpochOutcome::Kind::Exhausted;
        e.message = "no unconstrained plan for robot " + models_[r]->name;
        return e;
      }
      root->plan->trajectories.push_back(o.solution);
    }
    push(root);

    while (true)
    {
      if (deadline_.expired())
        return timeout();
      if (queue_.empty())
      {
        // Every node was discarded; fall back to merging the most tangled pair.
        std::size_t bi = 0, bj = 0;
        int best = 0;
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = i + 1; j < k; ++j)
            if (counter_.get(i, j) > best)
            {
              best = counter_.get(i, j);
              bi = i;
              bj = j;
            }
        if (best == 0)
        {
          EpochOutcome e;
          e.kind = EpochOutcome::Kind::Exhausted;
          e.message = "constraint tree exhausted";
          return e;
        }
        return merge(bi, bj, 0);
      }

      NodePtr node = queue_.top();
      queue_.pop();
      ++stats_.ctNodesExpanded;

      if (node->pendingRobot)
      {
        const std::size_t r = *node->pendingRobot;
        ++node->retryCount;
        ++stats_.retries;
        stats_.maxRetryCount = std::max(stats_.maxRetryCount, node->retryCount);
        LowLevelOutcome o = lowLevel(r, node->constraints[r], node->pendingTree, config_.iterations);
        if (o.solved())
        {
          node->plan = withReplaced(*node->basePlan, r, o.solution);
          node->basePlan.reset();
          node->pendingRobot.reset();
          node->pendingTree.reset();
          push(node);
          continue;
        }
        if (deadline_.expired())
          return timeout();
        node->pendingTree = o.tree;
        if (o.cMax)
        {
          const auto other = static_cast<std::size_t>(node->constraints[r][*o.cMax].otherRobot);
          if (auto m = countConflict(r, other, node->depth))
            return *m;
        }
        if (node->retryCount >= config_.mergeBound)
          ++stats_.discardedNodes;
        else
          push(node);
        continue;
      }

      std::vector<Conflict> conflicts;
      try
      {
        conflicts = findConflicts(*node->plan, env_, config_);
      }
      catch (const InvalidPlanError& e)
      {
        EpochOutcome o;
        o.kind = EpochOutcome::Kind::Exhausted;
        o.message = std::string("internal: low-level plan failed validation: ") + e.what();
        return o;
      }
      if (conflicts.empty())
      {
        EpochOutcome o;
        o.kind = EpochOutcome::Kind::Solved;
        o.plan = node->plan;
        return o;
      }

      const Conflict& conflict = conflicts.front();
      const auto ci = static_cast<std::size_t>(conflict.i), cj = static_cast<std::size_t>(conflict.j);
      if (auto m = countConflict(ci, cj, node->depth))
        return *m;

      ++stats_.branches;
      auto [onI, onJ] = makeConstraints(conflict, *node->plan);
      const std::array<std::pair<std::size_t, Constraint>, 2> sides{std::pair{ci, std::move(onI)},
                                                                     std::pair{cj, std::move(onJ)}};
      for (const auto& [robot, constraint] : sides)
      {
        auto child = std::make_shared<CTNode>();
        child->constraints = node->constraints;
        child->constraints[robot].push_back(constraint);
        child->depth = node->depth + 1;
        LowLevelOutcome o = lowLevel(robot, child->constraints[robot], nullptr, config_.iterations);
        if (o.solved())
        {
          child->plan = withReplaced(*node->plan, robot, o.solution);
        }
        else
        {
          if (deadline_.expired())
            return timeout();
          child->basePlan = node->plan;
          child->pendingRobot = robot;
          child->pendingTree = o.tree;
        }
        push(child);
      }
    }
  }

  const Environment& env_;
  const SolverConfig& config_;
  const LowLevelParams& ll_;
  const Deadline& deadline_;
  Rng& rng_;
  SolveStats& stats_;
  std::vector<std::shared_ptr<const RobotModel>> models_;
  ConflictCounter counter_;
  std::priority_queue<NodePtr, std::vector<NodePtr>, NodeOrder> queue_;
  std::uint64_t nextOrder_{0};
};

}  // namespace

SolveResult solve(const std::vector<RobotModel>& input, const Environment& env, const SolverConfig& config)
{
  config.check();
  if (input.empty())
    throw std::invalid_argument("solve: need at least one robot");
  const auto started = Clock::now();
  const Deadline deadline = Deadline::in(config.deadlineSeconds);
  Rng rng(config.seed);
  LowLevelParams ll = config.lowLevel;
  ll.checkDt = config.fineDt();

  std::vector<std::shared_ptr<const RobotModel>> originals;
  std::vector<RobotModel> models;
  for (std::size_t r = 0; r < input.size(); ++r)
  {
    RobotModel m = input[r];
    m.members = {static_cast<int>(r)};
    input[r].check(env.workspace);
    originals.push_back(std::make_shared<const RobotModel>(m));
    models.push_back(std::move(m));
  }

  SolveResult result;
  result.stats.initialRobotCount = input.size();
  const auto finish = [&](SolveStatus status, std::string message) {
    result.status = status;
    result.message = std::move(message);
    result.stats.finalRobotCount = models.size();
    result.stats.wallTime = std::chrono::duration<double>(Clock::now() - started).count();
    return result;
  };

  while (true)
  {
    Epoch epoch(models, env, config, ll, deadline, rng, result.stats);
    EpochOutcome o = epoch.run();
    switch (o.kind)
    {
      case EpochOutcome::Kind::Solved:
      {
        Plan split;
        split.trajectories.resize(input.size());
        for (const auto& t : o.plan->trajectories)
        {
          const auto& members = t->model().members;
          if (members.size() == 1)
          {
            split.trajectories[static_cast<std::size_t>(members.front())] =
                std::make_shared<Trajectory>(originals[static_cast<std::size_t>(members.front())], t->startState(),
                                             t->segments(), t->step());
            continue;
          }
          auto parts = splitTrajectory(*t, originals);
          for (std::size_t p = 0; p < parts.size(); ++p)
            split.trajectories[static_cast<std::size_t>(members[p])] = std::move(parts[p]);
        }
        result.plan = std::move(split);
        return finish(SolveStatus::Solved, "solved");
      }
      case EpochOutcome::Kind::Merge:
      {
        MergeEvent ev{models[o.mergeI].members, models[o.mergeJ].members, o.depth, o.pairCount};
        result.stats.mergeEvents.push_back(std::move(ev));
        models = mergeModels(models, o.mergeI, o.mergeJ);
        continue;
      }
      case EpochOutcome::Kind::Timeout:
        return finish(SolveStatus::Timeout, o.message);
      case EpochOutcome::Kind::Exhausted:
        return finish(SolveStatus::Exhausted, o.message);
    }
  }
}

}  // namespace kcbs
