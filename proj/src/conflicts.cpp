#include "kcbs/conflicts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kcbs
{

namespace
{

bool roughlyApart(const ConvexPolygon& a, const ConvexPolygon& b)
{
  return a.upper().x() < b.lower().x() || b.upper().x() < a.lower().x() || a.upper().y() < b.lower().y() ||
         b.upper().y() < a.lower().y();
}

/// Index of the first robot body violating the environment, or -1.
int firstInvalidRobot(const Plan& plan, const std::vector<std::vector<ConvexPolygon>>& bodies,
                      const Environment& env)
{
  for (std::size_t r = 0; r < plan.size(); ++r)
    if (!footprintsValid(bodies[r], env))
      return static_cast<int>(r);
  return -1;
}

/// Tracks maximal runs of colliding samples per robot pair.
class RunTracker
{
public:
  explicit RunTracker(std::size_t k) : k_(k), open_(k * k, std::nan("")), last_(k * k, 0.0) {}

  void observe(std::size_t i, std::size_t j, double t, bool colliding)
  {
    const std::size_t slot = i * k_ + j;
    if (colliding)
    {
      if (std::isnan(open_[slot]))
        open_[slot] = t;
      last_[slot] = t;
    }
    else if (!std::isnan(open_[slot]))
    {
      out_.push_back({static_cast<int>(i), static_cast<int>(j), open_[slot], last_[slot]});
      open_[slot] = std::nan("");
    }
  }

  void observeAll(const std::vector<std::vector<ConvexPolygon>>& bodies, double t)
  {
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = i + 1; j < k_; ++j)
        observe(i, j, t, footprintsCollide(bodies[i], bodies[j]));
  }

  std::vector<Conflict> finish()
  {
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = i + 1; j < k_; ++j)
        if (!std::isnan(open_[i * k_ + j]))
          out_.push_back({static_cast<int>(i), static_cast<int>(j), open_[i * k_ + j], last_[i * k_ + j]});
    std::stable_sort(out_.begin(), out_.end(), [](const Conflict& a, const Conflict& b) {
      if (a.tStart != b.tStart)
        return a.tStart < b.tStart;
      if (a.i != b.i)
        return a.i < b.i;
      return a.j < b.j;
    });
    return std::move(out_);
  }

private:
  std::size_t k_;
  std::vector<double> open_;
  std::vector<double> last_;
  std::vector<Conflict> out_;
};

}  // namespace

double Plan::cost() const
{
  double c = 0;
  for (const auto& t : trajectories)
    c += t->duration();
  return c;
}

double Plan::horizon() const
{
  double h = 0;
  for (const auto& t : trajectories)
    h = std::max(h, t->duration());
  return h;
}

std::vector<ConvexPolygon> Constraint::shadowAt(double t) const
{
  return shadow->model().footprints(shadow->stateAt(t));
}

InvalidPlanError::InvalidPlanError(int robot, double time, const std::string& what)
    : std::runtime_error(what), robot_(robot), time_(time)
{
}

bool footprintsCollide(std::span<const ConvexPolygon> a, std::span<const ConvexPolygon> b)
{
  for (const ConvexPolygon& pa : a)
    for (const ConvexPolygon& pb : b)
      if (!roughlyApart(pa, pb) && polygonsIntersect(pa, pb))
        return true;
  return false;
}

bool footprintsValid(std::span<const ConvexPolygon> bodies, const Environment& env)
{
  for (std::size_t i = 0; i < bodies.size(); ++i)
  {
    const ConvexPolygon& b = bodies[i];
    if (!insideWorkspace(b, env.workspace))
      return false;
    for (const ConvexPolygon& o : env.obstacles)
      if (!roughlyApart(b, o) && polygonsIntersect(b, o))
        return false;
    for (std::size_t j = i + 1; j < bodies.size(); ++j)
      if (!roughlyApart(b, bodies[j]) && polygonsIntersect(b, bodies[j]))
        return false;
  }
  return true;
}

bool isStateValid(const RobotModel& model, const StateVec& x, const Environment& env)
{
  return model.stateSpace.withinBounds(x) && footprintsValid(model.footprints(x), env);
}

std::vector<Conflict> validatePlan(const Plan& plan, const Environment& env, double dt)
{
  if (!(dt > 0))
    throw std::invalid_argument("validatePlan: dt must be positive");
  const std::size_t k = plan.size();
  RunTracker runs(k);
  std::vector<std::vector<ConvexPolygon>> bodies(k);

  for (double t : sampleGrid(plan.horizon(), dt))
  {
    for (std::size_t r = 0; r < k; ++r)
      bodies[r] = plan.trajectories[r]->model().footprints(plan.trajectories[r]->stateAt(t));
    if (const int bad = firstInvalidRobot(plan, bodies, env); bad >= 0)
    {
      std::ostringstream msg;
      msg << "robot " << bad << " hits an obstacle or leaves the workspace at t=" << t;
      throw InvalidPlanError(bad, t, msg.str());
    }
    runs.observeAll(bodies, t);
  }
  return runs.finish();
}

std::pair<Constraint, Constraint> makeConstraints(const Conflict& k, const Plan& plan)
{
  const auto idx = [&](int r) { return static_cast<std::size_t>(r); };
  Constraint onI{k.i, k.j, k.tStart, k.tEnd, plan.trajectories.at(idx(k.j))};
  Constraint onJ{k.j, k.i, k.tStart, k.tEnd, plan.trajectories.at(idx(k.i))};
  return {std::move(onI), std::move(onJ)};
}

std::optional<std::size_t> firstViolated(std::span<const ConvexPolygon> bodies, double t,
                                         std::span<const Constraint> constraints)
{
  for (std::size_t c = 0; c < constraints.size(); ++c)
  {
    const Constraint& con = constraints[c];
    if (!con.active(t))
      continue;
    const auto shadow = con.shadowAt(t);
    if (footprintsCollide(bodies, shadow))
      return c;
  }
  return std::nullopt;
}

std::optional<std::size_t> motionViolatesConstraints(const RobotModel& model, const Motion& motion,
                                                     std::span<const Constraint> constraints, double dt,
                                                     double step)
{
  if (!(dt > 0))
    throw std::invalid_argument("motionViolatesConstraints: dt must be positive");
  if (constraints.empty())
    return std::nullopt;
  const double t0 = motion.startTime;
  const double t1 = motion.startTime + motion.duration;
  double latest = 0;
  for (const Constraint& c : constraints)
    latest = std::max(latest, c.tEnd);
  if (t0 > latest + 1e-9)
    return std::nullopt;

  // Step states along the motion, then at most one partial step per sample.
  std::vector<StateVec> states{motion.start};
  const auto full = static_cast<long>(std::floor(motion.duration / step + 1e-9));
  for (long i = 0; i < full; ++i)
    states.push_back(rk4Step<double>(model.field, model.stateSpace, states.back(), motion.control, step));

  const auto first = static_cast<long>(std::ceil(t0 / dt - 1e-9));
  for (long g = first;; ++g)
  {
    const double tau = static_cast<double>(g) * dt;
    if (tau > t1 + 1e-9 || tau > latest + 1e-9)
      break;
    const double offset = std::max(0.0, tau - t0);
    auto idx = static_cast<std::size_t>(std::floor(offset / step + 1e-9));
    idx = std::min(idx, states.size() - 1);
    const double rest = offset - static_cast<double>(idx) * step;
    const StateVec x = rest <= 1e-12 ? states[idx]
                                     : rk4Step<double>(model.field, model.stateSpace, states[idx], motion.control, rest);
    if (auto hit = firstViolated(model.footprints(x), tau, constraints))
      return hit;
  }
  return std::nullopt;
}

std::string PlanCheck::summary() const
{
  std::ostringstream s;
  if (ok())
    return "plan valid";
  for (const Conflict& c : conflicts)
    s << "conflict robots " << c.i << "," << c.j << " during [" << c.tStart << ", " << c.tEnd << "]\n";
  for (const auto& [r, t] : obstacleHits)
    s << "robot " << r << " invalid (obstacle/workspace) at t=" << t << "\n";
  for (int r : goalMisses)
    s << "robot " << r << " does not end in its goal region\n";
  return s.str();
}

PlanCheck checkPlan(const Plan& plan, const Environment& env, double dt)
{
  PlanCheck report;
  const std::size_t k = plan.size();
  std::vector<bool> flagged(k, false);
  std::vector<std::vector<ConvexPolygon>> bodies(k);
  RunTracker runs(k);

  for (double t : sampleGrid(plan.horizon(), dt))
  {
    for (std::size_t r = 0; r < k; ++r)
    {
      bodies[r] = plan.trajectories[r]->model().footprints(plan.trajectories[r]->stateAt(t));
      if (!flagged[r] && !footprintsValid(bodies[r], env))
      {
        flagged[r] = true;
        report.obstacleHits.emplace_back(static_cast<int>(r), t);
      }
    }
    runs.observeAll(bodies, t);
  }
  report.conflicts = runs.finish();

  for (std::size_t r = 0; r < k; ++r)
    if (!plan.trajectories[r]->model().goalReached(plan.trajectories[r]->finalState()))
      report.goalMisses.push_back(static_cast<int>(r));
  return report;
}

}  // namespace kcbs
