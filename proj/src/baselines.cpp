#include "kcbs/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace kcbs
{

BaselineConfig BaselineConfig::from(const SolverConfig& c)
{
  BaselineConfig b;
  b.dt = c.dt;
  b.refine = c.refine;
  b.seed = c.seed;
  b.deadlineSeconds = c.deadlineSeconds;
  b.lowLevel = c.lowLevel;
  return b;
}

namespace
{

std::vector<std::shared_ptr<const RobotModel>> numbered(const std::vector<RobotModel>& models, const Environment& env)
{
  std::vector<std::shared_ptr<const RobotModel>> out;
  for (std::size_t r = 0; r < models.size(); ++r)
  {
    models[r].check(env.workspace);
    RobotModel m = models[r];
    m.members = {static_cast<int>(r)};
    out.push_back(std::make_shared<const RobotModel>(std::move(m)));
  }
  return out;
}

SolveResult finished(SolveResult r, SolveStatus status, std::string message, Clock::time_point started)
{
  r.status = status;
  r.message = std::move(message);
  r.stats.wallTime = std::chrono::duration<double>(Clock::now() - started).count();
  return r;
}

}  // namespace

SolveResult crrtPlan(const std::vector<RobotModel>& models, const Environment& env, const BaselineConfig& config)
{
  if (models.empty())
    throw std::invalid_argument("crrtPlan: need at least one robot");
  const auto started = Clock::now();
  const Deadline deadline = Deadline::in(config.deadlineSeconds);
  const auto originals = numbered(models, env);

  RobotModel composite = *originals.front();
  for (std::size_t r = 1; r < originals.size(); ++r)
    composite = composeModels(composite, *originals[r]);
  auto compositePtr = std::make_shared<const RobotModel>(std::move(composite));

  SolveResult result;
  result.stats.initialRobotCount = models.size();
  result.stats.finalRobotCount = 1;
  LowLevelParams ll = config.lowLevel;
  ll.checkDt = config.dt / config.refine;
  Rng rng(config.seed);
  LowLevelRequest req;
  req.model = compositePtr;
  req.env = &env;
  req.deadline = deadline;
  ++result.stats.lowLevelCalls;
  const LowLevelOutcome o = cstrPlan(req, rng, ll);
  if (!o.solved())
    return finished(std::move(result), SolveStatus::Timeout, "deadline exceeded", started);

  Plan plan;
  if (originals.size() == 1)
    plan.trajectories.push_back(std::make_shared<Trajectory>(originals.front(), o.solution->startState(),
                                                             o.solution->segments(), o.solution->step()));
  else
    plan.trajectories = splitTrajectory(*o.solution, originals);
  result.plan = std::move(plan);
  return finished(std::move(result), SolveStatus::Solved, "solved", started);
}

SolveResult prrtPlan(const std::vector<RobotModel>& models, const Environment& env, const BaselineConfig& config,
                     std::vector<std::size_t> order)
{
  if (models.empty())
    throw std::invalid_argument("prrtPlan: need at least one robot");
  if (order.empty())
  {
    order.resize(models.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t r = 0; r < sorted.size(); ++r)
      if (sorted[r] != r || sorted.size() != models.size())
        throw std::invalid_argument("prrtPlan: order is not a permutation of robot indices");
  }
  const auto started = Clock::now();
  const Deadline deadline = Deadline::in(config.deadlineSeconds);
  const auto originals = numbered(models, env);
  LowLevelParams ll = config.lowLevel;
  ll.checkDt = config.dt / config.refine;
  Rng rng(config.seed);

  SolveResult result;
  result.stats.initialRobotCount = models.size();
  result.stats.finalRobotCount = models.size();
  std::vector<std::shared_ptr<const Trajectory>> fixed(models.size());
  double durationSum = 0;
  Plan prefix;

  for (std::size_t r : order)
  {
    const double horizon = config.horizonSlack * durationSum;
    std::vector<Constraint> constraints;
    for (std::size_t p = 0; p < fixed.size(); ++p)
      if (fixed[p])
        constraints.push_back(Constraint{static_cast<int>(r), static_cast<int>(p), 0.0, horizon, fixed[p]});

    LowLevelRequest req;
    req.model = originals[r];
    req.env = &env;
    req.constraints = constraints;
    req.deadline = deadline;
    ++result.stats.lowLevelCalls;
    const LowLevelOutcome o = cstrPlan(req, rng, ll);
    if (!o.solved())
      return finished(std::move(result), SolveStatus::Timeout,
                      "deadline exceeded while planning robot " + std::to_string(r), started);
    fixed[r] = o.solution;
    durationSum += o.solution->duration();
    prefix.trajectories.push_back(o.solution);

    // Beyond the horizon nothing was checked; reject rather than return a colliding plan.
    if (!validatePlan(prefix, env, ll.checkDt).empty())
      return finished(std::move(result), SolveStatus::Exhausted,
                      "robot " + std::to_string(r) + " conflicts with an earlier robot beyond the horizon", started);
  }
  result.plan = Plan{std::move(fixed)};
  return finished(std::move(result), SolveStatus::Solved, "solved", started);
}

}  // namespace kcbs
