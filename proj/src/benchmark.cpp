#include "kcbs/benchmark.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace kcbs
{

std::string toString(Algorithm a)
{
  switch (a)
  {
    case Algorithm::KCBS:
      return "kcbs";
    case Algorithm::CRRT:
      return "crrt";
    case Algorithm::PRRT:
      return "prrt";
  }
  return "?";
}

Algorithm algorithmFromString(const std::string& s)
{
  if (s == "kcbs")
    return Algorithm::KCBS;
  if (s == "crrt")
    return Algorithm::CRRT;
  if (s == "prrt")
    return Algorithm::PRRT;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected kcbs, crrt or prrt)");
}

BenchConfig BenchConfig::fromScenario(const Scenario& s)
{
  BenchConfig c;
  c.algorithm = algorithmFromString(s.defaults.algorithm);
  c.deadline = s.defaults.deadline;
  c.iterations = s.defaults.iterations;
  c.mergeBound = s.defaults.mergeBound;
  c.dt = s.defaults.dt;
  c.baseSeed = s.defaults.seed;
  c.lowLevel.step = s.defaults.step;
  c.lowLevel.maxSteps = s.defaults.maxSteps;
  c.lowLevel.goalBias = s.defaults.goalBias;
  return c;
}

void BenchConfig::check() const
{
  if (trials < 1)
    throw std::invalid_argument("bench: trials must be >= 1");
  if (!(deadline > 0))
    throw std::invalid_argument("bench: deadline must be positive");
  if (jobs < 1)
    throw std::invalid_argument("bench: jobs must be >= 1");
  solverConfig(baseSeed).check();
}

SolverConfig BenchConfig::solverConfig(std::uint64_t seed) const
{
  SolverConfig c;
  c.iterations = iterations;
  c.mergeBound = mergeBound;
  c.dt = dt;
  c.seed = seed;
  c.deadlineSeconds = deadline;
  c.lowLevel = lowLevel;
  return c;
}

void BenchReport::aggregate()
{
  int successes = 0, merged = 0;
  double time = 0;
  defects = 0;
  for (const TrialRow& r : rows)
  {
    if (r.validatorDefect)
      ++defects;
    if (!r.success)
      continue;
    ++successes;
    time += r.wallTime;
    if (r.merges > 0)
      ++merged;
  }
  successRate = rows.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(rows.size());
  meanTimeOfSuccesses = successes > 0 ? std::optional<double>(time / successes) : std::nullopt;
  mergeRate = successes > 0 ? static_cast<double>(merged) / successes : 0.0;
}

SolveResult runTrial(const Scenario& scenario, const BenchConfig& config, std::uint64_t seed)
{
  const auto models = scenario.models();
  const Environment env = scenario.environment();
  const SolverConfig sc = config.solverConfig(seed);
  switch (config.algorithm)
  {
    case Algorithm::KCBS:
      return solve(models, env, sc);
    case Algorithm::CRRT:
      return crrtPlan(models, env, BaselineConfig::from(sc));
    case Algorithm::PRRT:
      return prrtPlan(models, env, BaselineConfig::from(sc));
  }
  throw std::logic_error("unreachable");
}

BenchReport runBenchmark(const Scenario& scenario, const BenchConfig& config, const TrialObserver& observer)
{
  config.check();
  BenchReport report;
  report.rows.resize(static_cast<std::size_t>(config.trials));
  const Environment env = scenario.environment();
  std::atomic<int> next{0};
  std::mutex observerMutex;

  const auto worker = [&]() {
    for (int t = next++; t < config.trials; t = next++)
    {
      const std::uint64_t seed = config.baseSeed + static_cast<std::uint64_t>(t);
      const SolveResult result = runTrial(scenario, config, seed);
      TrialRow row;
      row.seed = seed;
      row.wallTime = result.stats.wallTime;
      row.merges = static_cast<int>(result.stats.mergeEvents.size());
      row.finalRobotCount = result.stats.finalRobotCount;
      row.cost = std::numeric_limits<double>::infinity();
      if (result.solved())
      {
        const PlanCheck check = checkPlan(*result.plan, env, config.dt / 10);
        row.success = check.ok();
        row.validatorDefect = !check.ok();
        if (row.success)
          row.cost = result.plan->cost();
      }
      report.rows[static_cast<std::size_t>(t)] = row;
      if (observer)
      {
        std::lock_guard lock(observerMutex);
        observer(row, result);
      }
    }
  };

  const int jobs = std::min(config.jobs, config.trials);
  if (jobs == 1)
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back(worker);
    for (auto& th : pool)
      th.join();
  }
  report.aggregate();
  return report;
}

std::string summarize(const BenchReport& report, const Scenario& scenario, const BenchConfig& config)
{
  std::ostringstream s;
  s << std::fixed << std::setprecision(3);
  s << "scenario " << scenario.name << " | algorithm " << toString(config.algorithm) << " | trials "
    << report.rows.size() << "\n";
  s << "success rate      " << report.successRate << "\n";
  s << "mean time (succ.) ";
  if (report.meanTimeOfSuccesses)
    s << *report.meanTimeOfSuccesses << " s\n";
  else
    s << "n/a\n";
  s << "merge rate        " << report.mergeRate << "\n";
  if (report.defects > 0)
    s << "VALIDATOR DEFECTS " << report.defects << "\n";
  return s.str();
}

std::string reportToCsv(const BenchReport& report, const CsvOptions& options)
{
  std::ostringstream s;
  s << "seed,success,wallTime,cost,merges,finalRobotCount,validatorDefect\n";
  s << std::setprecision(17);
  for (const TrialRow& r : report.rows)
  {
    s << r.seed << ',' << (r.success ? 1 : 0) << ',';
    if (options.timing)
      s << r.wallTime;
    else
      s << "NA";
    s << ',';
    if (std::isfinite(r.cost))
      s << r.cost;
    else
      s << "inf";
    s << ',' << r.merges << ',' << r.finalRobotCount << ',' << (r.validatorDefect ? 1 : 0) << '\n';
  }
  return s.str();
}

void exportCSV(const BenchReport& report, const std::filesystem::path& path, const CsvOptions& options)
{
  writeFile(path, reportToCsv(report, options));
}

}  // namespace kcbs
