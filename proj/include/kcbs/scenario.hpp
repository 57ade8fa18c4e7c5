#pragma once

// JSON scenario and plan files (schemaVersion 1).

#include "kcbs/kcbs.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace kcbs
{

class ScenarioError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class Dynamics
{
  SecondOrderCar,
  KinematicCar,
};

std::string toString(Dynamics d);
Dynamics dynamicsFromString(const std::string& s);

/// On-disk description of one robot.
struct RobotSpec
{
  std::string name;
  Dynamics dynamics{Dynamics::SecondOrderCar};
  double wheelbase{0.7};
  /// Kinematic car only.
  double speed{1.0};
  CarLimits limits{};
  BodySpec body{0.7, 0.5};
  StateVec start;
  Point goal{Point::Zero()};
  double goalRadius{0.5};

  RobotModel toModel(const Workspace& ws) const;
};

struct ScenarioDefaults
{
  std::string algorithm{"kcbs"};
  long iterations{5000};
  int mergeBound{20};
  double dt{0.1};
  double deadline{60.0};
  std::uint64_t seed{0};
  double step{0.05};
  int maxSteps{20};
  double goalBias{0.05};
};

struct Scenario
{
  int schemaVersion{1};
  std::string name;
  std::string description;
  /// Layout reconstructed by eye rather than from published coordinates.
  bool approximate{false};
  Workspace workspace{0, 10, 0, 10};
  std::vector<ConvexPolygon> obstacles;
  std::vector<RobotSpec> robots;
  ScenarioDefaults defaults;

  Environment environment() const { return Environment{workspace, obstacles}; }
  std::vector<RobotModel> models() const;
  SolverConfig solverConfig() const;
  /// Starts inside the workspace, clear of obstacles and of each other.
  void check() const;
};

Scenario parseScenario(const std::string& text);
Scenario loadScenario(const std::filesystem::path& path);
std::string writeScenario(const Scenario& scenario);
void saveScenario(const Scenario& scenario, const std::filesystem::path& path);

/// Plan file: per-robot start state and (control, duration) segments.
struct PlanFile
{
  std::string scenario;
  std::string algorithm;
  double step{0.05};
  Plan plan;
};

std::string writePlan(const PlanFile& plan);
void savePlan(const PlanFile& plan, const std::filesystem::path& path);
/// Rebuilds trajectories against the scenario's robot models.
PlanFile parsePlan(const std::string& text, const Scenario& scenario);
PlanFile loadPlan(const std::filesystem::path& path, const Scenario& scenario);

std::string readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, const std::string& contents);

}  // namespace kcbs
