#include "kcbs/dynamics.hpp"

#include <set>
#include <stdexcept>

namespace kcbs
{

void StateSpace::check() const
{
  if (lower.size() != dims() || upper.size() != dims())
    throw std::invalid_argument("state space bounds do not match dimension");
  for (int d = 0; d < dims(); ++d)
    if (!isAngular(d) && !(lower(d) < upper(d)))
      throw std::invalid_argument("state space dimension " + std::to_string(d) + " has lower >= upper");
}

bool StateSpace::withinBounds(const StateVec& x) const
{
  for (int d = 0; d < dims(); ++d)
  {
    if (isAngular(d))
      continue;
    if (x(d) < lower(d) || x(d) > upper(d))
      return false;
  }
  return true;
}

void StateSpace::wrap(StateVec& x) const
{
  for (int d = 0; d < dims(); ++d)
    if (isAngular(d))
      x(d) = wrapAngle(x(d));
}

StateSpace StateSpace::concat(const StateSpace& a, const StateSpace& b)
{
  StateSpace s;
  s.lower.resize(a.dims() + b.dims());
  s.upper.resize(a.dims() + b.dims());
  s.lower << a.lower, b.lower;
  s.upper << a.upper, b.upper;
  s.roles = a.roles;
  s.roles.insert(s.roles.end(), b.roles.begin(), b.roles.end());
  return s;
}

void ControlSpace::check() const
{
  if (upper.size() != lower.size())
    throw std::invalid_argument("control space bounds do not match dimension");
  for (int d = 0; d < dims(); ++d)
    if (lower(d) > upper(d))
      throw std::invalid_argument("control space dimension " + std::to_string(d) + " has lower > upper");
}

bool ControlSpace::contains(const ControlVec& u) const
{
  if (u.size() != dims())
    return false;
  return (u.array() >= lower.array()).all() && (u.array() <= upper.array()).all();
}

ControlSpace ControlSpace::concat(const ControlSpace& a, const ControlSpace& b)
{
  ControlSpace s;
  s.lower.resize(a.dims() + b.dims());
  s.upper.resize(a.dims() + b.dims());
  s.lower << a.lower, b.lower;
  s.upper << a.upper, b.upper;
  return s;
}

VectorFieldSpec VectorFieldSpec::secondOrderCar(double wheelbase)
{
  if (!(wheelbase > 0))
    throw std::invalid_argument("wheelbase must be positive");
  VectorFieldSpec f;
  f.kind = FieldKind::SecondOrderCar;
  f.wheelbase = wheelbase;
  return f;
}

VectorFieldSpec VectorFieldSpec::kinematicCar(double wheelbase, double speed)
{
  if (!(wheelbase > 0))
    throw std::invalid_argument("wheelbase must be positive");
  VectorFieldSpec f;
  f.kind = FieldKind::KinematicCar;
  f.wheelbase = wheelbase;
  f.speed = speed;
  return f;
}

VectorFieldSpec VectorFieldSpec::composite(const VectorFieldSpec& a, const VectorFieldSpec& b)
{
  VectorFieldSpec f;
  f.kind = FieldKind::Composite;
  for (const VectorFieldSpec* part : {&a, &b})
  {
    if (part->kind == FieldKind::Composite)
      f.components.insert(f.components.end(), part->components.begin(), part->components.end());
    else
      f.components.push_back(*part);
  }
  return f;
}

int VectorFieldSpec::stateDim() const
{
  switch (kind)
  {
    case FieldKind::SecondOrderCar:
      return 5;
    case FieldKind::KinematicCar:
      return 3;
    case FieldKind::Composite:
    {
      int n = 0;
      for (const auto& c : components)
        n += c.stateDim();
      return n;
    }
  }
  return 0;
}

int VectorFieldSpec::controlDim() const
{
  switch (kind)
  {
    case FieldKind::SecondOrderCar:
      return 2;
    case FieldKind::KinematicCar:
      return 1;
    case FieldKind::Composite:
    {
      int n = 0;
      for (const auto& c : components)
        n += c.controlDim();
      return n;
    }
  }
  return 0;
}

bool RobotModel::goalReached(const StateVec& x) const
{
  for (const GoalRegion& g : goals)
  {
    const Point p(x(g.xDim), x(g.yDim));
    if ((p - g.center).norm() > g.radius)
      return false;
  }
  return true;
}

std::vector<ConvexPolygon> RobotModel::footprints(const StateVec& x) const
{
  std::vector<ConvexPolygon> out;
  out.reserve(bodies.size());
  for (const BodyPlacement& b : bodies)
    out.push_back(footprint(b.body, x(b.xDim), x(b.yDim), x(b.headingDim)));
  return out;
}

void RobotModel::check(const Workspace& ws) const
{
  stateSpace.check();
  controlSpace.check();
  if (field.stateDim() != stateDim() || field.controlDim() != controlDim())
    throw std::invalid_argument(name + ": vector field dimensions disagree with state/control spaces");
  if (field.kind == FieldKind::Composite && field.components.size() < 2)
    throw std::invalid_argument(name + ": composite field needs at least two components");
  if (start.size() != stateDim())
    throw std::invalid_argument(name + ": start has wrong dimension");
  if (!stateSpace.withinBounds(start))
    throw std::invalid_argument(name + ": start outside state bounds");
  if (bodies.empty() || goals.empty())
    throw std::invalid_argument(name + ": model needs at least one body and one goal");
  for (const BodyPlacement& b : bodies)
  {
    std::set<int> dims{b.xDim, b.yDim, b.headingDim};
    if (dims.size() != 3 || *dims.begin() < 0 || *dims.rbegin() >= stateDim())
      throw std::invalid_argument(name + ": body placement dims are invalid");
    if (!stateSpace.isAngular(b.headingDim))
      throw std::invalid_argument(name + ": heading dim is not angular");
  }
  for (const GoalRegion& g : goals)
  {
    if (!(g.radius > 0))
      throw std::invalid_argument(name + ": goalRadius must be positive");
    if (g.center.x() - g.radius < ws.xmin || g.center.x() + g.radius > ws.xmax ||
        g.center.y() - g.radius < ws.ymin || g.center.y() + g.radius > ws.ymax)
      throw std::invalid_argument(name + ": goal disc leaves the workspace");
  }
}

RobotModel makeSecondOrderCar(std::string name, const Workspace& ws, const BodySpec& body,
                              const StateVec& start, const Point& goal, double goalRadius, double wheelbase,
                              const CarLimits& limits)
{
  constexpr double pi = std::numbers::pi;
  RobotModel m;
  m.name = std::move(name);
  m.stateSpace.lower.resize(5);
  m.stateSpace.upper.resize(5);
  m.stateSpace.lower << ws.xmin, ws.ymin, -pi, limits.vMin, limits.phiMin;
  m.stateSpace.upper << ws.xmax, ws.ymax, pi, limits.vMax, limits.phiMax;
  m.stateSpace.roles = {DimRole::PositionX, DimRole::PositionY, DimRole::Heading, DimRole::Other, DimRole::Other};
  m.controlSpace.lower = Eigen::Vector2d(limits.accelMin, limits.steerRateMin);
  m.controlSpace.upper = Eigen::Vector2d(limits.accelMax, limits.steerRateMax);
  m.field = VectorFieldSpec::secondOrderCar(wheelbase);
  m.bodies = {BodyPlacement{body, 0, 1, 2}};
  m.start = start;
  m.goals = {GoalRegion{goal, goalRadius, 0, 1}};
  m.members = {0};
  return m;
}

RobotModel makeKinematicCar(std::string name, const Workspace& ws, const BodySpec& body,
                            const StateVec& start, const Point& goal, double goalRadius, double wheelbase,
                            double speed, double phiMax)
{
  constexpr double pi = std::numbers::pi;
  RobotModel m;
  m.name = std::move(name);
  m.stateSpace.lower = Eigen::Vector3d(ws.xmin, ws.ymin, -pi);
  m.stateSpace.upper = Eigen::Vector3d(ws.xmax, ws.ymax, pi);
  m.stateSpace.roles = {DimRole::PositionX, DimRole::PositionY, DimRole::Heading};
  m.controlSpace.lower = Eigen::VectorXd::Constant(1, -phiMax);
  m.controlSpace.upper = Eigen::VectorXd::Constant(1, phiMax);
  m.field = VectorFieldSpec::kinematicCar(wheelbase, speed);
  m.bodies = {BodyPlacement{body, 0, 1, 2}};
  m.start = start;
  m.goals = {GoalRegion{goal, goalRadius, 0, 1}};
  m.members = {0};
  return m;
}

RobotModel composeModels(const RobotModel& a, const RobotModel& b)
{
  RobotModel m;
  m.name = a.name + "+" + b.name;
  m.stateSpace = StateSpace::concat(a.stateSpace, b.stateSpace);
  m.controlSpace = ControlSpace::concat(a.controlSpace, b.controlSpace);
  m.field = VectorFieldSpec::composite(a.field, b.field);
  m.bodies = a.bodies;
  m.goals = a.goals;
  const int off = a.stateDim();
  for (BodyPlacement p : b.bodies)
  {
    p.xDim += off;
    p.yDim += off;
    p.headingDim += off;
    m.bodies.push_back(p);
  }
  for (GoalRegion g : b.goals)
  {
    g.xDim += off;
    g.yDim += off;
    m.goals.push_back(g);
  }
  m.start.resize(a.stateDim() + b.stateDim());
  m.start << a.start, b.start;
  m.members = a.members;
  m.members.insert(m.members.end(), b.members.begin(), b.members.end());
  return m;
}

}  // namespace kcbs
