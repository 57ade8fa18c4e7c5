#include "kcbs/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace kcbs
{

using nlohmann::json;

namespace
{

const json& field(const json& j, const char* key, const std::string& where)
{
  if (!j.is_object())
    throw ScenarioError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end())
    throw ScenarioError(where + ": missing required field '" + key + "'");
  return *it;
}

template <typename T>
T get(const json& j, const char* key, const std::string& where)
{
  const json& v = field(j, key, where);
  try
  {
    return v.get<T>();
  }
  catch (const json::exception&)
  {
    throw ScenarioError(where + "." + key + ": wrong type");
  }
}

template <typename T>
T getOr(const json& j, const char* key, T fallback, const std::string& where)
{
  if (!j.contains(key))
    return fallback;
  return get<T>(j, key, where);
}

Eigen::VectorXd vec(const json& j, const std::string& where)
{
  if (!j.is_array())
    throw ScenarioError(where + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
  {
    if (!j[i].is_number())
      throw ScenarioError(where + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json toJson(const Eigen::VectorXd& v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

std::pair<double, double> range(const json& j, const char* key, std::pair<double, double> fallback,
                                const std::string& where)
{
  if (!j.contains(key))
    return fallback;
  const Eigen::VectorXd v = vec(j[key], where + "." + key);
  if (v.size() != 2)
    throw ScenarioError(where + "." + key + ": expected [min, max]");
  return {v(0), v(1)};
}

json parseJson(const std::string& text)
{
  try
  {
    return json::parse(text);
  }
  catch (const json::parse_error& e)
  {
    throw ScenarioError(std::string("JSON parse error: ") + e.what());
  }
}

}  // namespace

std::string toString(Dynamics d)
{
  return d == Dynamics::SecondOrderCar ? "secondOrderCar" : "kinematicCar";
}

Dynamics dynamicsFromString(const std::string& s)
{
  if (s == "secondOrderCar")
    return Dynamics::SecondOrderCar;
  if (s == "kinematicCar")
    return Dynamics::KinematicCar;
  throw ScenarioError("unknown dynamics kind '" + s + "'");
}

RobotModel RobotSpec::toModel(const Workspace& ws) const
{
  RobotModel m = dynamics == Dynamics::SecondOrderCar
                     ? makeSecondOrderCar(name, ws, body, start, goal, goalRadius, wheelbase, limits)
                     : makeKinematicCar(name, ws, body, start, goal, goalRadius, wheelbase, speed, limits.phiMax);
  return m;
}

std::vector<RobotModel> Scenario::models() const
{
  std::vector<RobotModel> out;
  for (std::size_t r = 0; r < robots.size(); ++r)
  {
    RobotModel m = robots[r].toModel(workspace);
    m.members = {static_cast<int>(r)};
    out.push_back(std::move(m));
  }
  return out;
}

SolverConfig Scenario::solverConfig() const
{
  SolverConfig c;
  c.iterations = defaults.iterations;
  c.mergeBound = defaults.mergeBound;
  c.dt = defaults.dt;
  c.seed = defaults.seed;
  c.deadlineSeconds = defaults.deadline;
  c.lowLevel.step = defaults.step;
  c.lowLevel.maxSteps = defaults.maxSteps;
  c.lowLevel.goalBias = defaults.goalBias;
  return c;
}

void Scenario::check() const
{
  if (schemaVersion != 1)
    throw ScenarioError("unsupported schemaVersion " + std::to_string(schemaVersion));
  if (robots.empty())
    throw ScenarioError(name + ": scenario has no robots");
  const Environment env = environment();
  std::vector<std::vector<ConvexPolygon>> starts;
  for (const RobotModel& m : models())
  {
    try
    {
      m.check(workspace);
    }
    catch (const std::invalid_argument& e)
    {
      throw ScenarioError(std::string("invariant violated: ") + e.what());
    }
    starts.push_back(m.footprints(m.start));
    if (!footprintsValid(starts.back(), env))
      throw ScenarioError("invariant violated: " + m.name + " starts in collision with the environment");
  }
  for (std::size_t i = 0; i < starts.size(); ++i)
    for (std::size_t j = i + 1; j < starts.size(); ++j)
      if (footprintsCollide(starts[i], starts[j]))
        throw ScenarioError("invariant violated: robots " + robots[i].name + " and " + robots[j].name +
                            " start in collision");
}

Scenario parseScenario(const std::string& text)
{
  const json root = parseJson(text);
  Scenario s;
  s.schemaVersion = get<int>(root, "schemaVersion", "scenario");
  if (s.schemaVersion != 1)
    throw ScenarioError("unsupported schemaVersion " + std::to_string(s.schemaVersion));
  s.name = get<std::string>(root, "name", "scenario");
  s.description = getOr<std::string>(root, "description", "", "scenario");
  s.approximate = getOr<bool>(root, "approximate", false, "scenario");

  const json& ws = field(root, "workspace", "scenario");
  try
  {
    s.workspace = Workspace(get<double>(ws, "xmin", "workspace"), get<double>(ws, "xmax", "workspace"),
                            get<double>(ws, "ymin", "workspace"), get<double>(ws, "ymax", "workspace"));
  }
  catch (const std::invalid_argument& e)
  {
    throw ScenarioError(std::string("workspace: ") + e.what());
  }

  if (root.contains("obstacles"))
  {
    const json& obs = root["obstacles"];
    if (!obs.is_array())
      throw ScenarioError("obstacles: expected an array");
    for (std::size_t o = 0; o < obs.size(); ++o)
    {
      const std::string where = "obstacles[" + std::to_string(o) + "]";
      if (!obs[o].is_array())
        throw ScenarioError(where + ": expected an array of [x, y] vertices");
      std::vector<Point> vertices;
      for (std::size_t v = 0; v < obs[o].size(); ++v)
      {
        const Eigen::VectorXd p = vec(obs[o][v], where + "[" + std::to_string(v) + "]");
        if (p.size() != 2)
          throw ScenarioError(where + ": vertices must be [x, y]");
        vertices.emplace_back(p(0), p(1));
      }
      try
      {
        s.obstacles.emplace_back(std::move(vertices));
      }
      catch (const std::invalid_argument& e)
      {
        throw ScenarioError(where + ": " + e.what());
      }
    }
  }

  const json& robots = field(root, "robots", "scenario");
  if (!robots.is_array())
    throw ScenarioError("robots: expected an array");
  for (std::size_t r = 0; r < robots.size(); ++r)
  {
    const std::string where = "robots[" + std::to_string(r) + "]";
    const json& jr = robots[r];
    RobotSpec entry;
    entry.name = getOr<std::string>(jr, "name", "robot" + std::to_string(r), where);
    entry.dynamics = dynamicsFromString(get<std::string>(jr, "dynamics", where));
    entry.wheelbase = getOr<double>(jr, "wheelbase", entry.wheelbase, where);
    entry.speed = getOr<double>(jr, "speed", entry.speed, where);
    if (jr.contains("limits"))
    {
      const json& jl = jr["limits"];
      const std::string lw = where + ".limits";
      std::tie(entry.limits.vMin, entry.limits.vMax) = range(jl, "v", {entry.limits.vMin, entry.limits.vMax}, lw);
      std::tie(entry.limits.phiMin, entry.limits.phiMax) =
          range(jl, "phi", {entry.limits.phiMin, entry.limits.phiMax}, lw);
      std::tie(entry.limits.accelMin, entry.limits.accelMax) =
          range(jl, "accel", {entry.limits.accelMin, entry.limits.accelMax}, lw);
      std::tie(entry.limits.steerRateMin, entry.limits.steerRateMax) =
          range(jl, "steerRate", {entry.limits.steerRateMin, entry.limits.steerRateMax}, lw);
    }
    const json& jb = field(jr, "body", where);
    try
    {
      entry.body = BodySpec(get<double>(jb, "length", where + ".body"), get<double>(jb, "width", where + ".body"));
    }
    catch (const std::invalid_argument& e)
    {
      throw ScenarioError(where + ".body: " + e.what());
    }
    entry.start = vec(field(jr, "start", where), where + ".start");
    const int expected = entry.dynamics == Dynamics::SecondOrderCar ? 5 : 3;
    if (entry.start.size() != expected)
      throw ScenarioError(where + ".start: expected " + std::to_string(expected) + " values for " +
                          toString(entry.dynamics));
    const Eigen::VectorXd goal = vec(field(jr, "goal", where), where + ".goal");
    if (goal.size() != 2)
      throw ScenarioError(where + ".goal: expected [x, y]");
    entry.goal = Point(goal(0), goal(1));
    entry.goalRadius = get<double>(jr, "goalRadius", where);
    s.robots.push_back(std::move(entry));
  }

  if (root.contains("defaults"))
  {
    const json& jd = root["defaults"];
    ScenarioDefaults& d = s.defaults;
    d.algorithm = getOr<std::string>(jd, "algorithm", d.algorithm, "defaults");
    d.iterations = getOr<long>(jd, "N", d.iterations, "defaults");
    d.mergeBound = getOr<int>(jd, "B", d.mergeBound, "defaults");
    d.dt = getOr<double>(jd, "dt", d.dt, "defaults");
    d.deadline = getOr<double>(jd, "deadline", d.deadline, "defaults");
    d.seed = getOr<std::uint64_t>(jd, "seed", d.seed, "defaults");
    d.step = getOr<double>(jd, "step", d.step, "defaults");
    d.maxSteps = getOr<int>(jd, "maxSteps", d.maxSteps, "defaults");
    d.goalBias = getOr<double>(jd, "goalBias", d.goalBias, "defaults");
  }
  s.check();
  return s;
}

std::string readFile(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ScenarioError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::filesystem::path& path, const std::string& contents)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error(path.string() + ": cannot open for writing");
  out << contents;
  if (!out)
    throw std::runtime_error(path.string() + ": write failed");
}

Scenario loadScenario(const std::filesystem::path& path)
{
  const std::string text = readFile(path);
  try
  {
    return parseScenario(text);
  }
  catch (const ScenarioError& e)
  {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

std::string writeScenario(const Scenario& s)
{
  json root;
  root["schemaVersion"] = s.schemaVersion;
  root["name"] = s.name;
  root["description"] = s.description;
  root["approximate"] = s.approximate;
  root["workspace"] = {{"xmin", s.workspace.xmin},
                       {"xmax", s.workspace.xmax},
                       {"ymin", s.workspace.ymin},
                       {"ymax", s.workspace.ymax}};
  json obs = json::array();
  for (const ConvexPolygon& p : s.obstacles)
  {
    json poly = json::array();
    for (const Point& v : p.vertices())
      poly.push_back({v.x(), v.y()});
    obs.push_back(poly);
  }
  root["obstacles"] = obs;
  json robots = json::array();
  for (const RobotSpec& r : s.robots)
  {
    json jr;
    jr["name"] = r.name;
    jr["dynamics"] = toString(r.dynamics);
    jr["wheelbase"] = r.wheelbase;
    jr["speed"] = r.speed;
    jr["limits"] = {{"v", {r.limits.vMin, r.limits.vMax}},
                    {"phi", {r.limits.phiMin, r.limits.phiMax}},
                    {"accel", {r.limits.accelMin, r.limits.accelMax}},
                    {"steerRate", {r.limits.steerRateMin, r.limits.steerRateMax}}};
    jr["body"] = {{"length", r.body.length}, {"width", r.body.width}};
    jr["start"] = toJson(r.start);
    jr["goal"] = {r.goal.x(), r.goal.y()};
    jr["goalRadius"] = r.goalRadius;
    robots.push_back(jr);
  }
  root["robots"] = robots;
  const ScenarioDefaults& d = s.defaults;
  root["defaults"] = {{"algorithm", d.algorithm}, {"N", d.iterations},   {"B", d.mergeBound},
                      {"dt", d.dt},               {"deadline", d.deadline}, {"seed", d.seed},
                      {"step", d.step},           {"maxSteps", d.maxSteps}, {"goalBias", d.goalBias}};
  return root.dump(2) + "\n";
}

void saveScenario(const Scenario& scenario, const std::filesystem::path& path)
{
  writeFile(path, writeScenario(scenario));
}

std::string writePlan(const PlanFile& p)
{
  json root;
  root["schemaVersion"] = 1;
  root["scenario"] = p.scenario;
  root["algorithm"] = p.algorithm;
  root["step"] = p.step;
  json robots = json::array();
  for (const auto& t : p.plan.trajectories)
  {
    json jr;
    jr["name"] = t->model().name;
    jr["start"] = toJson(t->startState());
    json segs = json::array();
    for (const Segment& s : t->segments())
      segs.push_back({{"control", toJson(s.control)}, {"duration", s.duration}});
    jr["segments"] = segs;
    robots.push_back(jr);
  }
  root["robots"] = robots;
  return root.dump(2) + "\n";
}

void savePlan(const PlanFile& plan, const std::filesystem::path& path)
{
  writeFile(path, writePlan(plan));
}

PlanFile parsePlan(const std::string& text, const Scenario& scenario)
{
  const json root = parseJson(text);
  if (get<int>(root, "schemaVersion", "plan") != 1)
    throw ScenarioError("plan: unsupported schemaVersion");
  PlanFile p;
  p.scenario = getOr<std::string>(root, "scenario", "", "plan");
  p.algorithm = getOr<std::string>(root, "algorithm", "", "plan");
  p.step = get<double>(root, "step", "plan");
  const json& robots = field(root, "robots", "plan");
  if (!robots.is_array() || robots.size() != scenario.robots.size())
    throw ScenarioError("plan: robot count does not match scenario '" + scenario.name + "'");
  const auto models = scenario.models();
  for (std::size_t r = 0; r < robots.size(); ++r)
  {
    const std::string where = "plan.robots[" + std::to_string(r) + "]";
    auto model = std::make_shared<const RobotModel>(models[r]);
    const StateVec start = vec(field(robots[r], "start", where), where + ".start");
    std::vector<Segment> segs;
    const json& js = field(robots[r], "segments", where);
    for (std::size_t s = 0; s < js.size(); ++s)
    {
      const std::string sw = where + ".segments[" + std::to_string(s) + "]";
      segs.push_back(Segment{vec(field(js[s], "control", sw), sw + ".control"), get<double>(js[s], "duration", sw)});
    }
    try
    {
      p.plan.trajectories.push_back(std::make_shared<Trajectory>(model, start, std::move(segs), p.step));
    }
    catch (const std::invalid_argument& e)
    {
      throw ScenarioError(where + ": " + e.what());
    }
  }
  return p;
}

PlanFile loadPlan(const std::filesystem::path& path, const Scenario& scenario)
{
  try
  {
    return parsePlan(readFile(path), scenario);
  }
  catch (const ScenarioError& e)
  {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

}  // namespace kcbs
