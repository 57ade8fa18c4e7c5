#include "kcbs/dynamics.hpp"

#include <doctest.h>

#include <random>

using namespace kcbs;

namespace
{

const Workspace kWs(0, 10, 0, 10);

Eigen::VectorXd vec(std::initializer_list<double> v)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v)
    out(i++) = x;
  return out;
}

RobotModel car(const StateVec& start)
{
  return makeSecondOrderCar("car", kWs, BodySpec(0.7, 0.5), start, Point(8, 8), 0.5);
}

}  // namespace

TEST_CASE("wrapAngle lands in [-pi, pi)")
{
  CHECK(wrapAngle(M_PI) == doctest::Approx(-M_PI));
  CHECK(wrapAngle(-M_PI) == doctest::Approx(-M_PI));
  CHECK(wrapAngle(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
  CHECK(wrapAngle(0.25) == 0.25);
  CHECK(angularDistance(3.1, -3.1) == doctest::Approx(2 * M_PI - 6.2));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i)
  {
    const double a = wrapAngle(u(rng));
    CHECK(a >= -M_PI);
    CHECK(a < M_PI);
  }
}

TEST_CASE("second-order car vector field")
{
  const VectorFieldSpec f = VectorFieldSpec::secondOrderCar(0.7);
  CHECK(f.stateDim() == 5);
  CHECK(f.controlDim() == 2);
  const Eigen::VectorXd d = evalField<double>(f, vec({0, 0, 0, 1, 0}), vec({0.5, 0.1}));
  CHECK(d.isApprox(vec({1, 0, 0, 0.5, 0.1})));
  const Eigen::VectorXd turning = evalField<double>(f, vec({1, 2, M_PI / 2, 0.7, M_PI / 4}), vec({0, 0}));
  CHECK(turning(0) == doctest::Approx(0).epsilon(1e-12));
  CHECK(turning(1) == doctest::Approx(0.7));
  CHECK(turning(2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(evalField<double>(f, vec({0, 0, 0}), vec({0, 0})), std::invalid_argument);
}

TEST_CASE("kinematic car vector field steers by angle at constant speed")
{
  const VectorFieldSpec f = VectorFieldSpec::kinematicCar(0.7, 1.5);
  CHECK(f.stateDim() == 3);
  CHECK(f.controlDim() == 1);
  const Eigen::VectorXd d = evalField<double>(f, vec({0, 0, M_PI}), vec({M_PI / 4}));
  CHECK(d(0) == doctest::Approx(-1.5));
  CHECK(d(2) == doctest::Approx(1.5 / 0.7));
}

TEST_CASE("RK4 is exact on a constant-acceleration straight line")
{
  const RobotModel m = car(vec({1, 5, 0, 0.5, 0}));
  const double a = 0.8, T = 2.0;
  const StateVec x = m.propagate(m.start, vec({a, 0}), T, 0.05);
  CHECK(std::abs(x(0) - (1 + 0.5 * T + 0.5 * a * T * T)) < 1e-6);
  CHECK(std::abs(x(1) - 5) < 1e-6);
  CHECK(std::abs(x(3) - (0.5 + a * T)) < 1e-6);
  CHECK(std::abs(x(2)) < 1e-12);
}

TEST_CASE("RK4 shows fourth-order convergence when the step halves")
{
  const RobotModel m = car(vec({2, 2, 0.3, 0.4, 0.1}));
  const Eigen::VectorXd u = vec({0.6, 0.3});
  using LVec = VecX<long double>;
  const LVec x0 = m.start.cast<long double>(), lu = u.cast<long double>();
  const LVec ref = propagate<long double>(m.field, m.stateSpace, x0, lu, 2.0L, 1e-4L);
  const auto error = [&](long double h) {
    return (propagate<long double>(m.field, m.stateSpace, x0, lu, 2.0L, h) - ref).norm();
  };
  const long double ratio = error(0.1L) / error(0.05L);
  CHECK(ratio >= 8);
  CHECK(ratio <= 32);
}

TEST_CASE("kinematic car with fixed steering returns to its start after one circle")
{
  const RobotModel m = makeKinematicCar("k", kWs, BodySpec(0.7, 0.5), vec({5, 5, 0}), Point(8, 5), 0.5, 0.7, 1.0);
  const double steer = 0.5;
  const double radius = 0.7 / std::tan(steer);
  const StateVec x = m.propagate(m.start, vec({steer}), 2 * M_PI * radius, 0.05);
  CHECK(std::abs(x(0) - 5) < 1e-5);
  CHECK(std::abs(x(1) - 5) < 1e-5);
  CHECK(angularDistance(x(2), 0) < 1e-5);
  const StateVec half = m.propagate(m.start, vec({steer}), M_PI * radius, 0.05);
  CHECK(half(1) == doctest::Approx(5 + 2 * radius).epsilon(1e-6));
}

TEST_CASE("propagate rejects bad durations and steps")
{
  const RobotModel m = car(vec({1, 1, 0, 0, 0}));
  CHECK_THROWS_AS(m.propagate(m.start, vec({0, 0}), -1, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(m.propagate(m.start, vec({0, 0}), 1, 0), std::invalid_argument);
  CHECK(m.propagate(m.start, vec({1, 1}), 0, 0.05) == m.start);
}

TEST_CASE("composite propagation equals independent propagation")
{
  const RobotModel a = car(vec({2, 2, 0.1, 0.5, 0.05}));
  const RobotModel b = makeKinematicCar("k", kWs, BodySpec(0.7, 0.5), vec({6, 3, -1}), Point(1, 1), 0.5, 0.7, 1.2);
  const RobotModel ab = composeModels(a, b);
  CHECK(ab.stateDim() == 8);
  CHECK(ab.controlDim() == 3);
  CHECK(ab.bodies.size() == 2);
  CHECK(ab.bodies[1].xDim == 5);
  CHECK(ab.goals.size() == 2);
  const Eigen::VectorXd ua = vec({-0.3, 0.2}), ub = vec({0.4});
  Eigen::VectorXd u(3);
  u << ua, ub;
  const StateVec joint = ab.propagate(ab.start, u, 1.85, 0.05);
  const StateVec xa = a.propagate(a.start, ua, 1.85, 0.05);
  const StateVec xb = b.propagate(b.start, ub, 1.85, 0.05);
  CHECK((joint.head(5) - xa).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((joint.tail(3) - xb).lpNorm<Eigen::Infinity>() <= 1e-12);

  const RobotModel abc = composeModels(ab, car(vec({8, 8, 0, 0, 0})));
  CHECK(abc.field.components.size() == 3);
  CHECK(abc.stateDim() == 13);
}

TEST_CASE("model invariants are named when violated")
{
  const auto checked = [](const StateVec& start, Point goal, double radius) {
    makeSecondOrderCar("c", kWs, BodySpec(0.7, 0.5), start, goal, radius).check(kWs);
  };
  CHECK_THROWS_WITH_AS(checked(vec({1, 1, 0, 0, 0}), Point(5, 5), 0.0), doctest::Contains("goalRadius"),
                       std::invalid_argument);
  CHECK_THROWS_AS(checked(vec({1, 1, 0, 5, 0}), Point(5, 5), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(checked(vec({1, 1, 0, 0, 0}), Point(9.8, 5), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(checked(vec({1, 1, 0}), Point(5, 5), 0.5), std::invalid_argument);
  CHECK_NOTHROW(checked(vec({1, 1, 0, 0, 0}), Point(5, 5), 0.5));
}

TEST_CASE("goalReached and footprints")
{
  const RobotModel m = car(vec({1, 1, 0, 0, 0}));
  CHECK(m.goalReached(vec({8.3, 8.3, 2, 0, 0})));
  CHECK_FALSE(m.goalReached(vec({8.4, 8.4, 2, 0, 0})));
  const auto fp = m.footprints(vec({3, 4, 0, 0, 0}));
  REQUIRE(fp.size() == 1);
  CHECK(fp[0].lower().x() == doctest::Approx(2.65));
}
