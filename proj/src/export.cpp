#include "kcbs/benchmark.hpp"

#include <array>
#include <cstdio>
#include <sstream>

namespace kcbs
{

namespace
{

constexpr double kPixelsPerMeter = 40.0;
constexpr double kMargin = 10.0;

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct Canvas
{
  Workspace ws;

  double px(double x) const { return kMargin + (x - ws.xmin) * kPixelsPerMeter; }
  double py(double y) const { return kMargin + (ws.ymax - y) * kPixelsPerMeter; }
  double width() const { return 2 * kMargin + ws.width() * kPixelsPerMeter; }
  double height() const { return 2 * kMargin + ws.height() * kPixelsPerMeter; }
};

}  // namespace

std::string planToSvg(const Plan& plan, const Scenario& scenario, double dt)
{
  const Canvas c{scenario.workspace};
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(c.width()) << "\" height=\""
    << num(c.height()) << "\" viewBox=\"0 0 " << num(c.width()) << ' ' << num(c.height()) << "\">\n";
  s << "  <title>" << scenario.name << "</title>\n";
  s << "  <rect class=\"workspace\" x=\"" << num(c.px(c.ws.xmin)) << "\" y=\"" << num(c.py(c.ws.ymax))
    << "\" width=\"" << num(c.ws.width() * kPixelsPerMeter) << "\" height=\""
    << num(c.ws.height() * kPixelsPerMeter) << "\" fill=\"white\" stroke=\"black\" stroke-width=\"2\"/>\n";

  for (const ConvexPolygon& o : scenario.obstacles)
  {
    s << "  <polygon class=\"obstacle\" points=\"";
    for (std::size_t i = 0; i < o.size(); ++i)
      s << (i ? " " : "") << num(c.px(o.vertices()[i].x())) << ',' << num(c.py(o.vertices()[i].y()));
    s << "\" fill=\"#555555\"/>\n";
  }

  for (std::size_t r = 0; r < scenario.robots.size(); ++r)
  {
    const RobotSpec& robot = scenario.robots[r];
    const char* color = kPalette[r % kPalette.size()];
    s << "  <circle class=\"goal\" cx=\"" << num(c.px(robot.goal.x())) << "\" cy=\"" << num(c.py(robot.goal.y()))
      << "\" r=\"" << num(robot.goalRadius * kPixelsPerMeter) << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    s << "  <circle class=\"start\" cx=\"" << num(c.px(robot.start(0))) << "\" cy=\"" << num(c.py(robot.start(1)))
      << "\" r=\"" << num(0.12 * kPixelsPerMeter) << "\" fill=\"" << color << "\"/>\n";
  }

  for (std::size_t r = 0; r < plan.size(); ++r)
  {
    const Trajectory& t = *plan.trajectories[r];
    const BodyPlacement& b = t.model().bodies.front();
    s << "  <polyline class=\"trace\" fill=\"none\" stroke=\"" << kPalette[r % kPalette.size()]
      << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [time, x] : t.sampleTimes(t.duration(), dt))
    {
      s << (first ? "" : " ") << num(c.px(x(b.xDim))) << ',' << num(c.py(x(b.yDim)));
      first = false;
    }
    s << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void exportSVG(const Plan& plan, const Scenario& scenario, const std::filesystem::path& path, double dt)
{
  writeFile(path, planToSvg(plan, scenario, dt));
}

}  // namespace kcbs
