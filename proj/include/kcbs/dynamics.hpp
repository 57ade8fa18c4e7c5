#pragma once

// State/control spaces, car vector fields and fixed-step RK4 propagation.

#include "kcbs/geometry.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace kcbs
{

using StateVec = Eigen::VectorXd;
using ControlVec = Eigen::VectorXd;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Wraps an angle into [-pi, pi).
template <typename Scalar>
Scalar wrapAngle(Scalar a)
{
  using std::floor;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar twoPi = Scalar(2) * pi;
  Scalar r = a - twoPi * floor((a + pi) / twoPi);
  if (r >= pi)
    r -= twoPi;
  if (r < -pi)
    r = -pi;
  return r;
}

/// Absolute shortest-arc difference between two angles, in [0, pi].
inline double angularDistance(double a, double b)
{
  return std::abs(wrapAngle(a - b));
}

enum class DimRole
{
  PositionX,
  PositionY,
  Heading,
  Other,
};

struct StateSpace
{
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<DimRole> roles;

  int dims() const { return static_cast<int>(roles.size()); }
  bool isAngular(int d) const { return roles[static_cast<std::size_t>(d)] == DimRole::Heading; }

  /// Throws if bounds or roles are inconsistent.
  void check() const;
  /// Non-angular dims inside [lower, upper].
  bool withinBounds(const StateVec& x) const;
  void wrap(StateVec& x) const;

  static StateSpace concat(const StateSpace& a, const StateSpace& b);
};

struct ControlSpace
{
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dims() const { return static_cast<int>(lower.size()); }
  void check() const;
  bool contains(const ControlVec& u) const;

  static ControlSpace concat(const ControlSpace& a, const ControlSpace& b);
};

enum class FieldKind
{
  SecondOrderCar,
  KinematicCar,
  Composite,
};

struct VectorFieldSpec
{
  FieldKind kind{FieldKind::SecondOrderCar};
  double wheelbase{0.7};
  /// Constant forward speed, kinematic car only.
  double speed{1.0};
  /// Composite only; always flat (no nested composites).
  std::vector<VectorFieldSpec> components;

  static VectorFieldSpec secondOrderCar(double wheelbase);
  static VectorFieldSpec kinematicCar(double wheelbase, double speed);
  /// Concatenates two fields, flattening nested composites.
  static VectorFieldSpec composite(const VectorFieldSpec& a, const VectorFieldSpec& b);

  int stateDim() const;
  int controlDim() const;
};

namespace detail
{
template <typename Scalar, typename XExpr, typename UExpr, typename OutExpr>
void evalLeaf(const VectorFieldSpec& f, const XExpr& x, const UExpr& u, OutExpr&& out)
{
  using std::cos;
  using std::sin;
  using std::tan;
  const Scalar l = Scalar(f.wheelbase);
  switch (f.kind)
  {
    case FieldKind::SecondOrderCar:
    {
      // x, y, theta, v, phi ; u = (acceleration, steering rate)
      const Scalar v = x(3);
      out(0) = v * cos(x(2));
      out(1) = v * sin(x(2));
      out(2) = v / l * tan(x(4));
      out(3) = u(0);
      out(4) = u(1);
      break;
    }
    case FieldKind::KinematicCar:
    {
      // x, y, theta ; u = (steering angle), constant speed
      const Scalar s = Scalar(f.speed);
      out(0) = s * cos(x(2));
      out(1) = s * sin(x(2));
      out(2) = s / l * tan(u(0));
      break;
    }
    case FieldKind::Composite:
      throw std::logic_error("composite field passed as leaf");
  }
}
}  // namespace detail

/// Time derivative of the state under the given field and control.
template <typename Scalar>
VecX<Scalar> evalField(const VectorFieldSpec& field, const VecX<Scalar>& x, const VecX<Scalar>& u)
{
  if (x.size() != field.stateDim() || u.size() != field.controlDim())
    throw std::invalid_argument("evalField: state/control dimension mismatch");
  VecX<Scalar> dx(x.size());
  if (field.kind != FieldKind::Composite)
  {
    detail::evalLeaf<Scalar>(field, x, u, dx);
    return dx;
  }
  Eigen::Index xo = 0, uo = 0;
  for (const auto& c : field.components)
  {
    const Eigen::Index n = c.stateDim(), m = c.controlDim();
    detail::evalLeaf<Scalar>(c, x.segment(xo, n), u.segment(uo, m), dx.segment(xo, n));
    xo += n;
    uo += m;
  }
  return dx;
}

/// One classical RK4 step of size h with angular dims wrapped afterwards.
template <typename Scalar>
VecX<Scalar> rk4Step(const VectorFieldSpec& field, const StateSpace& space, const VecX<Scalar>& x,
                     const VecX<Scalar>& u, Scalar h)
{
  const VecX<Scalar> k1 = evalField<Scalar>(field, x, u);
  const VecX<Scalar> k2 = evalField<Scalar>(field, (x + (h / 2) * k1).eval(), u);
  const VecX<Scalar> k3 = evalField<Scalar>(field, (x + (h / 2) * k2).eval(), u);
  const VecX<Scalar> k4 = evalField<Scalar>(field, (x + h * k3).eval(), u);
  VecX<Scalar> next = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  for (int d = 0; d < space.dims(); ++d)
    if (space.isAngular(d))
      next(d) = wrapAngle(next(d));
  return next;
}

/// Fixed-step RK4 over `duration`; the last step is shortened to land on it.
template <typename Scalar>
VecX<Scalar> propagate(const VectorFieldSpec& field, const StateSpace& space, const VecX<Scalar>& x0,
                       const VecX<Scalar>& u, Scalar duration, Scalar step)
{
  using std::floor;
  if (duration < 0 || !(step > 0))
    throw std::invalid_argument("propagate: need duration >= 0 and step > 0");
  const auto full = static_cast<long>(floor(duration / step + Scalar(1e-9)));
  VecX<Scalar> x = x0;
  for (long i = 0; i < full; ++i)
    x = rk4Step<Scalar>(field, space, x, u, step);
  const Scalar rest = duration - Scalar(full) * step;
  if (rest > Scalar(1e-12))
    x = rk4Step<Scalar>(field, space, x, u, rest);
  return x;
}

/// Where one rigid body sits inside a (possibly composite) state vector.
struct BodyPlacement
{
  BodySpec body;
  int xDim{0};
  int yDim{1};
  int headingDim{2};
};

struct GoalRegion
{
  Point center{Point::Zero()};
  double radius{0.5};
  int xDim{0};
  int yDim{1};
};

/// Limits used by the car factories.
struct CarLimits
{
  double vMin{-1.0}, vMax{2.0};
  double phiMin{-std::numbers::pi / 4}, phiMax{std::numbers::pi / 4};
  double accelMin{-1.0}, accelMax{1.0};
  double steerRateMin{-0.5}, steerRateMax{0.5};
};

/// One robot or meta-robot: spaces, dynamics, bodies, start and goal discs.
struct RobotModel
{
  std::string name;
  StateSpace stateSpace;
  ControlSpace controlSpace;
  VectorFieldSpec field;
  std::vector<BodyPlacement> bodies;
  StateVec start;
  std::vector<GoalRegion> goals;
  /// Indices of the original robots this model stands for, in state order.
  std::vector<int> members;

  int stateDim() const { return stateSpace.dims(); }
  int controlDim() const { return controlSpace.dims(); }
  bool isMeta() const { return members.size() > 1; }

  /// Every body's position inside its goal disc.
  bool goalReached(const StateVec& x) const;
  std::vector<ConvexPolygon> footprints(const StateVec& x) const;
  /// Throws std::invalid_argument naming the violated invariant.
  void check(const Workspace& ws) const;

  StateVec propagate(const StateVec& x0, const ControlVec& u, double duration, double step) const
  {
    return kcbs::propagate<double>(field, stateSpace, x0, u, duration, step);
  }
};

RobotModel makeSecondOrderCar(std::string name, const Workspace& ws, const BodySpec& body,
                              const StateVec& start, const Point& goal, double goalRadius,
                              double wheelbase = 0.7, const CarLimits& limits = {});

RobotModel makeKinematicCar(std::string name, const Workspace& ws, const BodySpec& body,
                            const StateVec& start, const Point& goal, double goalRadius, double wheelbase,
                            double speed, double phiMax = std::numbers::pi / 4);

/// Meta-robot of `a` followed by `b`: concatenated spaces, composite field.
RobotModel composeModels(const RobotModel& a, const RobotModel& b);

}  // namespace kcbs
