// Command-line front end: plan, bench, validate, render.
//
// Exit codes: 0 success, 1 planning failure, 2 usage or parse error,
// 3 a returned plan failed re-validation.

#include "kcbs/benchmark.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace
{

constexpr int kOk = 0;
constexpr int kPlanningFailure = 1;
constexpr int kUsage = 2;
constexpr int kDefect = 3;

struct Overrides
{
  std::optional<std::string> algo;
  std::optional<int> trials;
  std::optional<double> deadline;
  std::optional<long> iterations;
  std::optional<int> mergeBound;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  int jobs{1};

  void attach(CLI::App* app, bool bench)
  {
    app->add_option("--algo", algo, "kcbs | crrt | prrt");
    app->add_option("--deadline", deadline, "wall-clock budget per solve, seconds");
    app->add_option("--N", iterations, "low-level iterations per call");
    app->add_option("--B", mergeBound, "merge threshold");
    app->add_option("--dt", dt, "conflict detection resolution, seconds");
    app->add_option("--seed", seed, "seed (bench: first seed)");
    if (bench)
    {
      app->add_option("--trials", trials, "number of seeded trials");
      app->add_option("--jobs", jobs, "concurrent trials")->check(CLI::PositiveNumber);
    }
  }

  kcbs::BenchConfig apply(const kcbs::Scenario& s) const
  {
    kcbs::BenchConfig c = kcbs::BenchConfig::fromScenario(s);
    if (algo)
      c.algorithm = kcbs::algorithmFromString(*algo);
    if (trials)
      c.trials = *trials;
    if (deadline)
      c.deadline = *deadline;
    if (iterations)
      c.iterations = *iterations;
    if (mergeBound)
      c.mergeBound = *mergeBound;
    if (dt)
      c.dt = *dt;
    if (seed)
      c.baseSeed = *seed;
    c.jobs = jobs;
    c.check();
    return c;
  }
};

int runPlan(const std::string& scenarioPath, const Overrides& o, const std::string& outDir)
{
  const kcbs::Scenario scenario = kcbs::loadScenario(scenarioPath);
  const kcbs::BenchConfig config = o.apply(scenario);
  const kcbs::SolveResult result = kcbs::runTrial(scenario, config, config.baseSeed);
  const auto& st = result.stats;
  std::cout << "status " << (result.solved() ? "solved" : "failed") << " (" << result.message << ")\n"
            << "wall time " << st.wallTime << " s, CT nodes " << st.ctNodesExpanded << ", low-level calls "
            << st.lowLevelCalls << ", merges " << st.mergeEvents.size() << "\n";
  if (!result.solved())
    return kPlanningFailure;

  std::filesystem::create_directories(outDir);
  const auto base = std::filesystem::path(outDir) / scenario.name;
  kcbs::savePlan({scenario.name, kcbs::toString(config.algorithm), config.lowLevel.step, *result.plan},
                 base.string() + ".plan.json");
  kcbs::exportSVG(*result.plan, scenario, base.string() + ".svg", config.dt);
  std::cout << "cost " << result.plan->cost() << "\nwrote " << base.string() << ".plan.json and .svg\n";

  const kcbs::PlanCheck check = kcbs::checkPlan(*result.plan, scenario.environment(), config.dt / 10);
  if (!check.ok())
  {
    std::cerr << "validator defect:\n" << check.summary();
    return kDefect;
  }
  return kOk;
}

int runBench(const std::string& scenarioPath, const Overrides& o, const std::string& out, bool noTiming)
{
  const kcbs::Scenario scenario = kcbs::loadScenario(scenarioPath);
  const kcbs::BenchConfig config = o.apply(scenario);
  const kcbs::BenchReport report = kcbs::runBenchmark(scenario, config);
  if (!out.empty())
    kcbs::exportCSV(report, out, {!noTiming});
  else
    std::cout << kcbs::reportToCsv(report, {!noTiming});
  std::cout << kcbs::summarize(report, scenario, config);
  return report.defects > 0 ? kDefect : kOk;
}

int runValidate(const std::string& scenarioPath, const std::string& planPath, double dt)
{
  const kcbs::Scenario scenario = kcbs::loadScenario(scenarioPath);
  const kcbs::PlanFile plan = kcbs::loadPlan(planPath, scenario);
  const kcbs::PlanCheck check = kcbs::checkPlan(plan.plan, scenario.environment(), dt);
  std::cout << check.summary() << (check.ok() ? "\n" : "");
  return check.ok() ? kOk : kDefect;
}

int runRender(const std::string& scenarioPath, const std::string& planPath, double dt, const std::string& out)
{
  const kcbs::Scenario scenario = kcbs::loadScenario(scenarioPath);
  const kcbs::PlanFile plan = kcbs::loadPlan(planPath, scenario);
  if (out.empty())
    std::cout << kcbs::planToSvg(plan.plan, scenario, dt);
  else
    kcbs::exportSVG(plan.plan, scenario, out, dt);
  return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Kinodynamic conflict-based search planner and benchmark tool"};
  app.require_subcommand(1);

  std::string scenarioPath, planPath, out;
  double dt = 0.01;
  bool noTiming = false;
  Overrides planOpts, benchOpts;

  auto* plan = app.add_subcommand("plan", "solve one scenario and write plan JSON + SVG");
  plan->add_option("scenario", scenarioPath, "scenario JSON")->required()->check(CLI::ExistingFile);
  plan->add_option("--out", out, "output directory")->default_val(".");
  planOpts.attach(plan, false);

  auto* bench = app.add_subcommand("bench", "run seeded trials and report success/time/merge rate");
  bench->add_option("scenario", scenarioPath, "scenario JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", out, "CSV output path (stdout when omitted)");
  bench->add_flag("--no-timing", noTiming, "write NA in the wallTime column");
  benchOpts.attach(bench, true);

  auto* validate = app.add_subcommand("validate", "re-check a stored plan");
  validate->add_option("scenario", scenarioPath, "scenario JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("plan", planPath, "plan JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("--dt", dt, "sampling resolution, seconds")->default_val(0.01);

  auto* render = app.add_subcommand("render", "plan JSON to SVG");
  render->add_option("scenario", scenarioPath, "scenario JSON")->required()->check(CLI::ExistingFile);
  render->add_option("plan", planPath, "plan JSON")->required()->check(CLI::ExistingFile);
  render->add_option("--dt", dt, "trace sampling resolution, seconds")->default_val(0.1);
  render->add_option("--out", out, "SVG output path (stdout when omitted)");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try
  {
    if (*plan)
      return runPlan(scenarioPath, planOpts, out);
    if (*bench)
      return runBench(scenarioPath, benchOpts, out, noTiming);
    if (*validate)
      return runValidate(scenarioPath, planPath, dt);
    if (*render)
      return runRender(scenarioPath, planPath, dt, out);
  }
  catch (const kcbs::ScenarioError& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  catch (const std::invalid_argument& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kPlanningFailure;
  }
  return kUsage;
}
