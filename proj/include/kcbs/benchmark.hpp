#pragma once

// Benchmark harness: repeated seeded solves, fine re-validation, aggregates,
// and CSV / SVG export.

#include "kcbs/baselines.hpp"
#include "kcbs/scenario.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kcbs
{

enum class Algorithm
{
  KCBS,
  CRRT,
  PRRT,
};

std::string toString(Algorithm a);
Algorithm algorithmFromString(const std::string& s);

struct BenchConfig
{
  Algorithm algorithm{Algorithm::KCBS};
  int trials{10};
  double deadline{60.0};
  long iterations{5000};
  int mergeBound{20};
  double dt{0.1};
  std::uint64_t baseSeed{0};
  int jobs{1};
  LowLevelParams lowLevel{};

  /// Scenario defaults, algorithm parsed from them.
  static BenchConfig fromScenario(const Scenario& s);
  void check() const;
  SolverConfig solverConfig(std::uint64_t seed) const;
};

struct TrialRow
{
  std::uint64_t seed{0};
  bool success{false};
  double wallTime{0};
  /// Sum of trajectory durations; infinite for failures.
  double cost{0};
  int merges{0};
  std::size_t finalRobotCount{0};
  /// Planner claimed success but the plan failed fine re-validation.
  bool validatorDefect{false};
};

struct BenchReport
{
  std::vector<TrialRow> rows;
  double successRate{0};
  /// Mean wall time over successful trials; empty when none succeeded.
  std::optional<double> meanTimeOfSuccesses;
  /// Fraction of successful trials with at least one merge.
  double mergeRate{0};
  int defects{0};

  /// Recomputes every aggregate from `rows`.
  void aggregate();
};

/// One solve with the configured algorithm.
SolveResult runTrial(const Scenario& scenario, const BenchConfig& config, std::uint64_t seed);

/// Called once per finished trial, serialized, in completion order.
using TrialObserver = std::function<void(const TrialRow&, const SolveResult&)>;

/// Runs seeds baseSeed .. baseSeed + trials - 1 on up to `jobs` threads.
/// Successful plans are re-checked at dt / 10 before counting.
BenchReport runBenchmark(const Scenario& scenario, const BenchConfig& config, const TrialObserver& observer = {});

std::string summarize(const BenchReport& report, const Scenario& scenario, const BenchConfig& config);

struct CsvOptions
{
  /// When false the wallTime column holds "NA" so output is reproducible.
  bool timing{true};
};

std::string reportToCsv(const BenchReport& report, const CsvOptions& options = {});
void exportCSV(const BenchReport& report, const std::filesystem::path& path, const CsvOptions& options = {});

/// Workspace, obstacles, start and goal circles, and one position trace per robot.
std::string planToSvg(const Plan& plan, const Scenario& scenario, double dt);
void exportSVG(const Plan& plan, const Scenario& scenario, const std::filesystem::path& path, double dt = 0.1);

}  // namespace kcbs
