#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include "kcbs/conflicts.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace oracle
{

using LPoint = kcbs::Point2<long double>;
using LPolygon = kcbs::ConvexPolygonT<long double>;

inline LPolygon widen(const kcbs::ConvexPolygon& p)
{
  std::vector<LPoint> v;
  for (const auto& q : p.vertices())
    v.emplace_back(static_cast<long double>(q.x()), static_cast<long double>(q.y()));
  return LPolygon::fromTrusted(std::move(v));
}

/// Largest signed distance of `q` outside the half-planes of `poly`:
/// negative means strictly inside, and when positive it is a lower bound on
/// the Euclidean distance from `q` to `poly`.
inline long double outsideDistance(const LPolygon& poly, const LPoint& q)
{
  const auto& v = poly.vertices();
  long double worst = -INFINITY;
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    const LPoint e = v[(i + 1) % v.size()] - v[i];
    const LPoint n = LPoint(e.y(), -e.x()) / std::sqrt(e.squaredNorm());
    worst = std::max(worst, n.dot(q - v[i]));
  }
  return worst;
}

/// Points along the boundary of `poly`, no two consecutive ones further
/// apart than `pitch`.
inline std::vector<LPoint> boundarySamples(const LPolygon& poly, long double pitch)
{
  std::vector<LPoint> out;
  const auto& v = poly.vertices();
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    const LPoint a = v[i], b = v[(i + 1) % v.size()];
    const auto n = static_cast<long>(std::ceil(std::sqrt((b - a).squaredNorm()) / pitch));
    for (long s = 0; s < n; ++s)
      out.push_back(a + (b - a) * (static_cast<long double>(s) / static_cast<long double>(n)));
  }
  return out;
}

/// Intersection verdict by boundary point sampling. Empty when the pair is
/// too close to touching for the sampling pitch to decide: no sample is
/// more than `gap` inside the other polygon, yet some sample is within
/// pitch / 2 of it.
inline std::optional<bool> sampledIntersect(const kcbs::ConvexPolygon& a, const kcbs::ConvexPolygon& b,
                                            long double pitch = 1e-3L, long double gap = 1e-6L)
{
  const LPolygon la = widen(a), lb = widen(b);
  long double deepest = INFINITY;
  long double nearest = INFINITY;
  for (const auto& [from, to] : {std::pair{&la, &lb}, std::pair{&lb, &la}})
    for (const LPoint& q : boundarySamples(*from, pitch))
    {
      const long double d = outsideDistance(*to, q);
      deepest = std::min(deepest, d);
      nearest = std::min(nearest, d);
    }
  if (deepest < -gap)
    return true;
  if (nearest > pitch / 2 + gap)
    return false;
  return std::nullopt;
}

/// Random rectangle of plausible robot size somewhere in a 4 x 4 box.
inline kcbs::ConvexPolygon randomRectangle(std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> pos(0.0, 4.0), size(0.2, 1.5), angle(-M_PI, M_PI);
  return kcbs::footprint(kcbs::BodySpec(size(rng), size(rng)), pos(rng), pos(rng), angle(rng));
}

/// Brute-force constraint check of one motion: densely re-propagates from
/// the start for every sample instead of stepping incrementally.
inline std::optional<std::size_t> bruteForceViolation(const kcbs::RobotModel& model, const kcbs::Motion& m,
                                                      std::span<const kcbs::Constraint> constraints, double dt)
{
  const double t0 = m.startTime, t1 = m.startTime + m.duration;
  for (long g = static_cast<long>(std::ceil(t0 / dt - 1e-9)); g * dt <= t1 + 1e-9; ++g)
  {
    const double t = static_cast<double>(g) * dt;
    const kcbs::StateVec x = model.propagate(m.start, m.control, std::max(0.0, t - t0), 0.05);
    const auto bodies = model.footprints(x);
    for (std::size_t c = 0; c < constraints.size(); ++c)
      if (constraints[c].active(t) && kcbs::footprintsCollide(bodies, constraints[c].shadowAt(t)))
        return c;
  }
  return std::nullopt;
}


/// Two axis-aligned cars driving straight at constant speed, with the
/// analytically known interval during which their bodies overlap.
struct LineInstance
{
  kcbs::Plan plan;
  kcbs::Environment env;
  double contact{0};
  double release{0};
};

inline LineInstance makeLineInstance(std::mt19937_64& rng, double duration = 6.0)
{
  const kcbs::Workspace ws(0, 40, 0, 40);
  const kcbs::BodySpec body(0.7, 0.5);
  const double headings[] = {0, M_PI / 2, M_PI, -M_PI / 2};
  std::uniform_int_distribution<int> pickHeading(0, 3);
  std::uniform_real_distribution<double> pos(14, 26), speed(0.3, 2.0);

  while (true)
  {
    double x[2], y[2], vx[2], vy[2], hx[2], hy[2], th[2], v[2];
    for (int r = 0; r < 2; ++r)
    {
      th[r] = headings[pickHeading(rng)];
      v[r] = speed(rng);
      x[r] = pos(rng);
      y[r] = pos(rng);
      const bool alongX = std::abs(std::cos(th[r])) > 0.5;
      vx[r] = alongX ? v[r] * std::cos(th[r]) : 0.0;
      vy[r] = alongX ? 0.0 : v[r] * std::sin(th[r]);
      hx[r] = (alongX ? body.length : body.width) / 2;
      hy[r] = (alongX ? body.width : body.length) / 2;
    }
    double lo = 0, hi = duration;
    const auto clip = [&](double r0, double w, double half) {
      if (w == 0)
      {
        if (std::abs(r0) > half)
          lo = INFINITY;
        return;
      }
      double a = (-half - r0) / w, b = (half - r0) / w;
      if (a > b)
        std::swap(a, b);
      lo = std::max(lo, a);
      hi = std::min(hi, b);
    };
    clip(x[1] - x[0], vx[1] - vx[0], hx[0] + hx[1]);
    clip(y[1] - y[0], vy[1] - vy[0], hy[0] + hy[1]);
    // Keep contacts well inside the horizon and clear of t = 0.
    if (!(lo < hi) || lo < 0.5 || lo > duration - 1.0 || hi - lo < 0.3)
      continue;

    LineInstance inst;
    inst.env = kcbs::Environment{ws, {}};
    inst.contact = lo;
    inst.release = hi;
    for (int r = 0; r < 2; ++r)
    {
      kcbs::StateVec s(5);
      s << x[r], y[r], th[r], v[r], 0;
      auto m = std::make_shared<const kcbs::RobotModel>(
          kcbs::makeSecondOrderCar("line" + std::to_string(r), ws, body, s, kcbs::Point(20, 20), 0.5));
      inst.plan.trajectories.push_back(std::make_shared<const kcbs::Trajectory>(
          m, s, std::vector<kcbs::Segment>{{Eigen::Vector2d::Zero(), duration}}, 0.05));
    }
    return inst;
  }
}

}  // namespace oracle
