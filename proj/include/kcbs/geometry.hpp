#pragma once

// Planar workspace, convex polygons and rigid rectangular bodies.
//
// Polygons are templated on the scalar so the same predicates serve the
// planners (double) and the long-double reference checks in the tests.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kcbs
{

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

inline constexpr double kGeomTol = 1e-9;

template <typename Scalar>
struct WorkspaceT
{
  Scalar xmin{0}, xmax{1}, ymin{0}, ymax{1};

  WorkspaceT() = default;
  WorkspaceT(Scalar x0, Scalar x1, Scalar y0, Scalar y1) : xmin(x0), xmax(x1), ymin(y0), ymax(y1)
  {
    if (!(xmin < xmax) || !(ymin < ymax))
      throw std::invalid_argument("workspace bounds must satisfy min < max");
  }

  Scalar width() const { return xmax - xmin; }
  Scalar height() const { return ymax - ymin; }

  bool contains(const Point2<Scalar>& p) const
  {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
};

/// Counter-clockwise, strictly convex polygon (at least three vertices).
template <typename Scalar>
class ConvexPolygonT
{
public:
  using Point = Point2<Scalar>;

  ConvexPolygonT() = default;

  explicit ConvexPolygonT(std::vector<Point> vertices) : vertices_(std::move(vertices))
  {
    if (vertices_.size() < 3)
      throw std::invalid_argument("convex polygon needs at least 3 vertices");
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
    {
      const Point& a = vertices_[i];
      const Point& b = vertices_[(i + 1) % n];
      const Point& c = vertices_[(i + 2) % n];
      if (cross(b - a, c - b) <= Scalar(kGeomTol))
        throw std::invalid_argument("polygon is not strictly convex and counter-clockwise");
    }
    computeBounds();
  }

  /// Trusted constructor for vertices already known to be convex and CCW.
  static ConvexPolygonT fromTrusted(std::vector<Point> vertices)
  {
    ConvexPolygonT p;
    p.vertices_ = std::move(vertices);
    p.computeBounds();
    return p;
  }

  static ConvexPolygonT rectangle(Scalar x0, Scalar y0, Scalar x1, Scalar y1)
  {
    return ConvexPolygonT({Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)});
  }

  const std::vector<Point>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Point& lower() const { return lo_; }
  const Point& upper() const { return hi_; }

  Scalar area() const
  {
    Scalar twice(0);
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
      twice += cross(vertices_[i], vertices_[(i + 1) % n]);
    return twice / Scalar(2);
  }

  static Scalar cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

private:
  void computeBounds()
  {
    lo_ = hi_ = vertices_.front();
    for (const Point& v : vertices_)
    {
      lo_ = lo_.cwiseMin(v);
      hi_ = hi_.cwiseMax(v);
    }
  }

  std::vector<Point> vertices_;
  Point lo_{Point::Zero()};
  Point hi_{Point::Zero()};
};

template <typename Scalar>
struct BodySpecT
{
  Scalar length{1};
  Scalar width{1};

  BodySpecT() = default;
  BodySpecT(Scalar l, Scalar w) : length(l), width(w)
  {
    if (!(length > 0) || !(width > 0))
      throw std::invalid_argument("body length and width must be positive");
  }

  Scalar circumradius() const { return std::hypot(length, width) / Scalar(2); }
};

/// Corners of the body rectangle centred at (x, y) and rotated by theta, CCW.
template <typename Scalar>
ConvexPolygonT<Scalar> footprint(const BodySpecT<Scalar>& body, Scalar x, Scalar y, Scalar theta)
{
  using std::cos;
  using std::sin;
  const Scalar c = cos(theta), s = sin(theta);
  const Scalar hl = body.length / Scalar(2), hw = body.width / Scalar(2);
  Eigen::Matrix<Scalar, 2, 2> rot;
  rot << c, -s, s, c;
  const Point2<Scalar> centre(x, y);
  std::vector<Point2<Scalar>> corners{
      centre + rot * Point2<Scalar>(hl, -hw),
      centre + rot * Point2<Scalar>(hl, hw),
      centre + rot * Point2<Scalar>(-hl, hw),
      centre + rot * Point2<Scalar>(-hl, -hw),
  };
  return ConvexPolygonT<Scalar>::fromTrusted(std::move(corners));
}

namespace detail
{
template <typename Scalar>
bool separatedAlongEdgesOf(const ConvexPolygonT<Scalar>& a, const ConvexPolygonT<Scalar>& b)
{
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  const std::size_t n = va.size();
  for (std::size_t i = 0; i < n; ++i)
  {
    const Point2<Scalar> edge = va[(i + 1) % n] - va[i];
    const Point2<Scalar> normal(edge.y(), -edge.x());  // outward for CCW
    const Scalar limit = normal.dot(va[i]);
    bool allOutside = true;
    for (const auto& p : vb)
    {
      if (normal.dot(p) <= limit)
      {
        allOutside = false;
        break;
      }
    }
    if (allOutside)
      return true;
  }
  return false;
}
}  // namespace detail

/// Separating-axis test. Closed sets, so touching counts as intersecting.
template <typename Scalar>
bool polygonsIntersect(const ConvexPolygonT<Scalar>& a, const ConvexPolygonT<Scalar>& b)
{
  if (a.upper().x() < b.lower().x() || b.upper().x() < a.lower().x() ||
      a.upper().y() < b.lower().y() || b.upper().y() < a.lower().y())
    return false;
  return !detail::separatedAlongEdgesOf(a, b) && !detail::separatedAlongEdgesOf(b, a);
}

template <typename Scalar>
bool insideWorkspace(const ConvexPolygonT<Scalar>& p, const WorkspaceT<Scalar>& w)
{
  return std::all_of(p.vertices().begin(), p.vertices().end(),
                     [&](const Point2<Scalar>& v) { return w.contains(v); });
}

using Point = Point2<double>;
using Workspace = WorkspaceT<double>;
using ConvexPolygon = ConvexPolygonT<double>;
using BodySpec = BodySpecT<double>;

}  // namespace kcbs
