// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//
// Usage: acceptance <path-to-kcbs_cli>

#include "kcbs/benchmark.hpp"
#include "oracles.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

using namespace kcbs;

namespace
{

const std::string kDir = KCBS_SCENARIO_DIR;

struct Verdict
{
  int id;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, bool pass, const std::string& detail)
{
  verdicts.push_back({id, pass, detail});
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << " | " << detail << std::endl;
}

/// One finished solve, kept for the cross-cutting checks.
struct Run
{
  std::string scenario;
  Algorithm algorithm;
  std::size_t robots;
  int mergeBound;
  SolveResult result;
  PlanCheck check;
};

std::vector<Run> pool;

struct Batch
{
  BenchReport report;
  std::vector<SolveResult> results;
};

Batch runBatch(const std::string& name, Algorithm algo, int trials, double deadline, int mergeBound,
               std::uint64_t baseSeed = 0, long iterations = 5000)
{
  const Scenario s = loadScenario(kDir + "/" + name + ".json");
  BenchConfig c = BenchConfig::fromScenario(s);
  c.algorithm = algo;
  c.trials = trials;
  c.deadline = deadline;
  c.mergeBound = mergeBound;
  c.baseSeed = baseSeed;
  c.iterations = iterations;
  Batch b;
  b.results.resize(static_cast<std::size_t>(trials));
  const Environment env = s.environment();
  b.report = runBenchmark(s, c, [&](const TrialRow& row, const SolveResult& r) {
    b.results[static_cast<std::size_t>(row.seed - baseSeed)] = r;
    Run run{name, algo, s.robots.size(), mergeBound, r, {}};
    if (r.solved())
      run.check = checkPlan(*r.plan, env, c.dt / 10);
    pool.push_back(std::move(run));
  });
  std::cout << "  " << name << " " << toString(algo) << " x" << trials << ": success " << b.report.successRate
            << ", merge rate " << b.report.mergeRate << std::endl;
  return b;
}

std::string fmt(double v)
{
  std::ostringstream s;
  s << v;
  return s.str();
}

int shell(const std::string& cmd)
{
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion2()
{
  const Batch b = runBatch("open_1", Algorithm::KCBS, 100, 10.0, 20);
  long merges = 0, branches = 0, extraNodes = 0;
  for (const SolveResult& r : b.results)
  {
    merges += static_cast<long>(r.stats.mergeEvents.size());
    branches += r.stats.branches;
    if (r.solved())
      extraNodes += r.stats.ctNodesExpanded - 1;
  }
  report(2, b.report.successRate >= 0.95 && merges == 0 && branches == 0 && extraNodes == 0,
         "k=1, 100 seeds: success " + fmt(b.report.successRate) + " (need >= 0.95), merges " + std::to_string(merges) +
             ", branches " + std::to_string(branches));
}

void criterion3()
{
  const Batch b = runBatch("open_2", Algorithm::KCBS, 20, 60.0, 20);
  report(3, b.report.successRate >= 0.80 && b.report.mergeRate <= 0.2,
         "open swap, B=20, 20 seeds: success " + fmt(b.report.successRate) + " (need >= 0.80), merge rate " +
             fmt(b.report.mergeRate) + " (need <= 0.2)");
}

void criterion4()
{
  const Batch b = runBatch("corridor_2", Algorithm::KCBS, 10, 120.0, 3);
  int successes = 0, merged = 0, invalid = 0;
  const Scenario s = loadScenario(kDir + "/corridor_2.json");
  for (const SolveResult& r : b.results)
  {
    if (!r.solved())
      continue;
    ++successes;
    merged += !r.stats.mergeEvents.empty();
    invalid += !checkPlan(*r.plan, s.environment(), 0.01).ok();
  }
  const double frac = successes ? static_cast<double>(merged) / successes : 0.0;
  report(4, successes >= 5 && frac >= 0.5 && invalid == 0,
         "corridor, B=3, 10 seeds: " + std::to_string(successes) + " successes (need >= 5), " + fmt(frac) +
             " merged (need >= 0.5), " + std::to_string(invalid) + " invalid");
}

void extraPool()
{
  runBatch("open_2", Algorithm::PRRT, 20, 30.0, 20, 100);
  runBatch("open_2", Algorithm::CRRT, 10, 20.0, 20, 100);
  runBatch("open_4", Algorithm::KCBS, 20, 60.0, 20, 100);
  runBatch("open_4", Algorithm::PRRT, 10, 30.0, 20, 100);
  runBatch("narrow_3", Algorithm::KCBS, 20, 60.0, 20, 100);
  runBatch("narrow_3", Algorithm::PRRT, 10, 30.0, 20, 100);
  runBatch("cluttered_4", Algorithm::KCBS, 20, 60.0, 20, 100);
  runBatch("cluttered_4", Algorithm::PRRT, 10, 30.0, 20, 100);
  runBatch("corridor_2", Algorithm::PRRT, 10, 30.0, 3, 100);
  runBatch("corridor_2", Algorithm::KCBS, 10, 60.0, 1, 100);
  runBatch("large_10", Algorithm::KCBS, 1, 120.0, 20, 100);
}

void criterion1()
{
  int solved = 0, bad = 0;
  std::string first;
  for (const Run& r : pool)
  {
    if (!r.result.solved())
      continue;
    ++solved;
    if (!r.check.ok())
    {
      ++bad;
      if (first.empty())
        first = r.scenario + "/" + toString(r.algorithm) + ": " + r.check.summary();
    }
  }
  report(1, solved >= 200 && bad == 0,
         std::to_string(solved) + " successful solves (need >= 200), " + std::to_string(bad) +
             " failed re-validation at dt/10" + (first.empty() ? "" : "; first: " + first));
}

void criterion5()
{
  int runs = 0, violations = 0;
  for (const Run& r : pool)
  {
    if (r.algorithm != Algorithm::KCBS)
      continue;
    ++runs;
    const SolveStats& st = r.result.stats;
    const bool ok = st.mergeEvents.size() <= r.robots - 1 && st.maxRetryCount <= r.mergeBound &&
                    st.maxPairCount <= r.mergeBound + 1 &&
                    st.finalRobotCount == r.robots - st.mergeEvents.size();
    violations += !ok;
  }
  report(5, runs > 0 && violations == 0,
         std::to_string(runs) + " K-CBS runs: merges <= k-1, retries <= B, pair count <= B+1; " +
             std::to_string(violations) + " violations");
}

void criterion6()
{
  // Closed form, constant acceleration along a straight line.
  const Workspace ws(0, 20, 0, 20);
  StateVec s(5);
  s << 1, 5, 0, 0.5, 0;
  const RobotModel m = makeSecondOrderCar("c", ws, BodySpec(0.7, 0.5), s, Point(15, 5), 0.5);
  const double a = 0.8;
  const StateVec x = m.propagate(s, Eigen::Vector2d(a, 0), 2.0, 0.05);
  const double closedErr = std::max({std::abs(x(0) - (1 + 0.5 * 2 + 0.5 * a * 4)), std::abs(x(1) - 5),
                                     std::abs(x(3) - (0.5 + a * 2))});

  // Convergence ratio on a turning, accelerating motion.
  StateVec s2(5);
  s2 << 2, 2, 0.3, 0.4, 0.1;
  const VecX<long double> x0 = s2.cast<long double>();
  const VecX<long double> u = Eigen::Vector2d(0.6, 0.3).cast<long double>();
  const auto ref = propagate<long double>(m.field, m.stateSpace, x0, u, 2.0L, 1e-4L);
  const auto err = [&](long double h) { return (propagate<long double>(m.field, m.stateSpace, x0, u, 2.0L, h) - ref).norm(); };
  const double ratio = static_cast<double>(err(0.1L) / err(0.05L));

  // SAT against the sampling oracle.
  std::mt19937_64 rng(2024);
  int decided = 0, agree = 0;
  while (decided < 1000)
  {
    const ConvexPolygon p = oracle::randomRectangle(rng), q = oracle::randomRectangle(rng);
    const auto expected = oracle::sampledIntersect(p, q);
    if (!expected)
      continue;
    ++decided;
    agree += polygonsIntersect(p, q) == *expected && polygonsIntersect(q, p) == *expected;
  }
  report(6, closedErr <= 1e-6 && ratio >= 8 && ratio <= 32 && agree == decided,
         "RK4 closed-form error " + fmt(closedErr) + " (<= 1e-6), convergence ratio " + fmt(ratio) +
             " (in [8, 32]), SAT agreement " + std::to_string(agree) + "/" + std::to_string(decided));
}

void criterion7(const std::string& cli)
{
  const auto dir = std::filesystem::temp_directory_path() / "kcbs_acceptance";
  std::filesystem::create_directories(dir);
  const std::string scen = kDir + "/open_2.json";
  const auto csv1 = dir / "a.csv", csv2 = dir / "b.csv", svg1 = dir / "a.svg", svg2 = dir / "b.svg";
  const std::string bench = cli + " bench " + scen + " --trials 5 --jobs 1 --no-timing --seed 7 --out ";
  int rc = shell(bench + csv1.string() + " >/dev/null");
  rc |= shell(bench + csv2.string() + " >/dev/null");
  rc |= shell(cli + " plan " + scen + " --seed 7 --out " + dir.string() + " >/dev/null");
  const std::string plan = (dir / "open_2.plan.json").string();
  rc |= shell(cli + " render " + scen + " " + plan + " --out " + svg1.string());
  rc |= shell(cli + " render " + scen + " " + plan + " --out " + svg2.string());
  const bool csvSame = rc == 0 && readFile(csv1) == readFile(csv2) && !readFile(csv1).empty();
  const bool svgSame = rc == 0 && readFile(svg1) == readFile(svg2) && !readFile(svg1).empty();
  report(7, csvSame && svgSame,
         std::string("bench CSV ") + (csvSame ? "identical" : "DIFFERS") + ", render SVG " +
             (svgSame ? "identical" : "DIFFERS") + " (cli exit " + std::to_string(rc) + ")");
}

void criterion8()
{
  std::mt19937_64 rng(808);
  const double dt = 0.1;
  int good = 0;
  double worst = 0;
  for (int n = 0; n < 50; ++n)
  {
    const oracle::LineInstance inst = oracle::makeLineInstance(rng);
    const auto conflicts = validatePlan(inst.plan, inst.env, dt);
    bool ok = !conflicts.empty();
    if (ok)
    {
      const double e = std::abs(conflicts.front().tStart - inst.contact);
      worst = std::max(worst, e);
      ok = e <= dt;
    }
    for (std::size_t c = 1; c < conflicts.size() && ok; ++c)
    {
      const Conflict &p = conflicts[c - 1], &q = conflicts[c];
      ok = p.tStart <= q.tStart;
      if (p.i == q.i && p.j == q.j)
        ok = ok && p.tEnd < q.tStart;
    }
    for (const Conflict& c : conflicts)
      ok = ok && c.i < c.j && c.tStart <= c.tEnd;
    good += ok;
  }
  report(8, good == 50,
         std::to_string(good) + "/50 straight-line instances within one dt and well ordered; worst tStart error " +
             fmt(worst));
}

void criterion9()
{
  const Environment env{Workspace(0, 10, 0, 10), {ConvexPolygon::rectangle(4.5, 3, 5.5, 7)}};
  StateVec s(5);
  s << 2, 5, 0, 0, 0;
  RobotModel m = makeSecondOrderCar("a", env.workspace, BodySpec(0.7, 0.5), s, Point(8, 5), 0.5);
  m.members = {0};
  int identical = 0;
  const int seeds = 10;
  for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(seeds); ++seed)
  {
    BaselineConfig bc;
    bc.seed = seed;
    bc.deadlineSeconds = 30;
    const SolveResult p = prrtPlan({m}, env, bc);
    LowLevelRequest req;
    req.model = std::make_shared<const RobotModel>(m);
    req.env = &env;
    req.deadline = Deadline::in(30);
    LowLevelParams ll = bc.lowLevel;
    ll.checkDt = bc.dt / bc.refine;
    Rng rng(seed);
    const LowLevelOutcome o = cstrPlan(req, rng, ll);
    if (!p.solved() || !o.solved())
      continue;
    const Trajectory &a = *p.plan->trajectories[0], &b = *o.solution;
    bool same = a.segments().size() == b.segments().size() && a.stepCount() == b.stepCount();
    for (std::size_t i = 0; same && i < a.segments().size(); ++i)
      same = a.segments()[i].control == b.segments()[i].control && a.segments()[i].duration == b.segments()[i].duration;
    for (std::size_t i = 0; same && i <= a.stepCount(); ++i)
      same = a.stepState(i) == b.stepState(i);
    identical += same;
  }

  // cRRT: split the composite solution and put it back together.
  const Scenario open2 = loadScenario(kDir + "/open_2.json");
  BaselineConfig bc;
  bc.seed = 3;
  bc.deadlineSeconds = 60;
  const SolveResult c = crrtPlan(open2.models(), open2.environment(), bc);
  double recompose = INFINITY;
  if (c.solved())
  {
    std::vector<std::shared_ptr<const RobotModel>> originals;
    for (const RobotModel& rm : open2.models())
      originals.push_back(std::make_shared<const RobotModel>(rm));
    auto composite = std::make_shared<const RobotModel>(composeModels(*originals[0], *originals[1]));
    const auto joint = composeTrajectories(c.plan->trajectories, composite);
    recompose = 0;
    for (std::size_t st = 0; st <= joint->stepCount(); ++st)
      for (std::size_t r = 0; r < 2; ++r)
        recompose = std::max(recompose, (joint->stepState(st).segment(static_cast<Eigen::Index>(5 * r), 5) -
                                         c.plan->trajectories[r]->stepState(st))
                                            .lpNorm<Eigen::Infinity>());
  }
  report(9, identical == seeds && recompose <= 1e-12,
         "pRRT k=1 bit-identical on " + std::to_string(identical) + "/" + std::to_string(seeds) +
             " seeds; cRRT recomposition error " + fmt(recompose) + " (<= 1e-12)");
}

}  // namespace

int main(int argc, char** argv)
{
  if (argc != 2)
  {
    std::cerr << "usage: acceptance <path-to-kcbs_cli>\n";
    return 2;
  }
  const auto started = Clock::now();
  std::cout << "running planner batches" << std::endl;
  criterion2();
  criterion3();
  criterion4();
  extraPool();
  criterion1();
  criterion5();
  criterion6();
  criterion7(argv[1]);
  criterion8();
  criterion9();

  std::cout << "\nsummary (" << std::chrono::duration<double>(Clock::now() - started).count() << " s)\n";
  bool all = true;
  for (const Verdict& v : verdicts)
    all = all && v.pass;
  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  for (const Verdict& v : verdicts)
    std::cout << "  " << v.id << " " << (v.pass ? "PASS" : "FAIL") << "\n";
  return all ? 0 : 1;
}
