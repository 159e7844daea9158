// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "qvpn/format.hpp"
#include "qvpn/harness.hpp"
#include "qvpn/stats.hpp"

namespace fs = std::filesystem;
using namespace qvpn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

BellDiagonalState random_bell(Rng& rng) {
  BellDiagonalState s;
  double total = 0.0;
  for (auto& c : s.coeffs) total += (c = rng.canonical() + 1e-3);
  for (auto& c : s.coeffs) c /= total;
  return s;
}

void purification(Verdict& v) {
  const auto start = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto a = random_bell(rng);
    const auto b = random_bell(rng);
    const auto fast = purify_step(a, b);
    const auto sim = oracle::simulate_purification(a, b);
    worst = std::max({worst, std::abs(fast.state.fidelity() - sim.state.fidelity()),
                      std::abs(fast.success_prob - sim.success_prob)});
  }
  const double t = seconds_since(start);
  v.detail << "50 random inputs, max deviation " << worst << ", " << t << " s";
  v.require(worst <= 1e-10, "deviation <= 1e-10");
  v.require(t < 5.0, "runtime < 5 s");
}

/// Overhead of repeated symmetric purification computed with the circuit oracle.
OverheadResult oracle_overhead(double f, double target, int max_rounds) {
  OverheadResult r;
  r.achieved_fidelity = f;
  if (f >= target - kFidelityTolerance) return r;
  auto state = BellDiagonalState::werner(f);
  double g = 1.0;
  for (int k = 1; k <= max_rounds; ++k) {
    const auto step = oracle::simulate_purification(state, state);
    state = step.state;
    g *= 2.0 / step.success_prob;
    if (state.fidelity() >= target - kFidelityTolerance) {
      r.overhead = g;
      r.rounds = k;
      r.achieved_fidelity = state.fidelity();
      return r;
    }
  }
  r.feasible = false;
  r.overhead = std::numeric_limits<double>::infinity();
  return r;
}

void overhead_law(Verdict& v) {
  double worst = 0.0;
  int feasible = 0, agree = 0, cells = 0;
  bool identity = true;
  for (int i = 0; i < 10; ++i) {
    const double f = 0.55 + 0.04 * i;
    const auto same = purification_overhead(f, f);
    identity = identity && same.overhead == 1.0 && same.feasible;
    for (int j = 0; j < 10; ++j) {
      const double target = 0.6 + 0.0398 * j;
      const auto got = purification_overhead(f, target);
      const auto want = oracle_overhead(f, target, kDefaultMaxRounds);
      ++cells;
      if (got.feasible == want.feasible) ++agree;
      if (!got.feasible || !want.feasible) continue;
      ++feasible;
      worst = std::max(worst, std::abs(got.overhead - want.overhead) / want.overhead);
    }
  }
  v.detail << cells << " grid cells (" << feasible << " feasible), max relative deviation "
           << worst << ", g(F,F)=1 " << (identity ? "exact" : "violated");
  v.require(agree == cells, "feasibility verdicts agree");
  v.require(worst <= 1e-8, "deviation <= 1e-8");
  v.require(identity, "g(F,F) == 1");
}

void swap_formula(Verdict& v) {
  NoiseParams n;
  n.two_qubit_gate_fidelity = 1.0;
  n.measurement_fidelity = 0.99;
  const double two = swap_chain_fidelity(0.8, 2, n);
  NoiseParams ideal;
  ideal.two_qubit_gate_fidelity = 1.0;
  ideal.measurement_fidelity = 1.0;
  bool identity = true;
  for (double f : {0.3, 0.6, 0.8, 0.95, 1.0})
    identity = identity && std::abs(swap_chain_fidelity(f, 1, ideal) - f) < 1e-15;
  v.detail << "F_L=0.8 N=2 -> " << format_double(two) << "; N=1 identity "
           << (identity ? "holds" : "violated");
  v.require(std::abs(two - 0.64263) <= 1e-5, "0.64263 +- 1e-5");
  v.require(identity, "N=1 identity");
}

void capacity_model(Verdict& v) {
  const double one = link_capacity(10.0, 0.2, 0.2, 1e-6, 1);
  const double three = link_capacity(10.0, 0.2, 0.2, 1e-6, 3);
  v.detail << "10 km capacity " << format_double(one) << " EPR/s, multiplex 3 -> "
           << format_double(three);
  v.require(std::abs(one - 252382.0) <= 1.0, "252382 +- 1");
  v.require(three == 3.0 * one, "exact 3x multiplexing");
}

LinearProgram random_lp(Rng& rng, bool allocation_shaped) {
  LinearProgram lp;
  lp.cols = 1 + rng.index(6);
  if (allocation_shaped) {
    for (int link = 0; link < 3; ++link) {
      const auto row = lp.add_row(rng.uniform(1e3, 4e5));
      for (std::size_t j = 0; j < lp.cols; ++j)
        if (rng.bernoulli(0.6)) lp.at(row, j) = std::pow(10.0, rng.uniform(0, 6));
    }
    const auto lo = lp.add_row(-rng.uniform(0, 50));
    const auto hi = lp.add_row(rng.uniform(50, 1000));
    for (std::size_t j = 0; j < lp.cols; ++j) {
      lp.at(lo, j) = -1.0;
      lp.at(hi, j) = 1.0;
      lp.c.push_back(rng.uniform(0.01, 1.0));
    }
    return lp;
  }
  lp.add_row(rng.uniform(1, 100));
  for (std::size_t j = 0; j < lp.cols; ++j) lp.at(0, j) = rng.uniform(0.1, 3);
  const std::size_t extra = 1 + rng.index(7);
  for (std::size_t r = 0; r < extra; ++r) {
    const bool lower = rng.bernoulli(0.35);
    const auto row = lp.add_row(lower ? -rng.uniform(0, 40) : rng.uniform(0, 50));
    for (std::size_t j = 0; j < lp.cols; ++j)
      lp.at(row, j) = rng.bernoulli(0.3) ? 0.0 : (lower ? -1.0 : 1.0) * rng.uniform(0, 4);
  }
  for (std::size_t j = 0; j < lp.cols; ++j) lp.c.push_back(rng.uniform(-1, 5));
  return lp;
}

void lp_optimality(Verdict& v) {
  const auto start = Clock::now();
  Rng rng(202);
  int infeasible = 0, mismatched_verdicts = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto lp = random_lp(rng, i % 2 == 1);
    const auto want = oracle::brute_force_lp(lp);
    const auto got = default_lp_solver().solve(lp);
    const bool got_feasible = got.status == LpStatus::Optimal;
    if (got_feasible != want.feasible) ++mismatched_verdicts;
    if (!want.feasible) {
      ++infeasible;
      continue;
    }
    if (got_feasible)
      worst = std::max(worst, std::abs(got.objective - want.objective) /
                                  std::max(1.0, std::abs(want.objective)));
  }
  const double t = seconds_since(start);
  v.detail << "100 programs (" << infeasible << " infeasible), max relative gap " << worst
           << ", verdict mismatches " << mismatched_verdicts << ", " << t << " s";
  v.require(mismatched_verdicts == 0, "infeasibility verdicts agree");
  v.require(worst <= 1e-4, "relative gap <= 1e-4");
  v.require(t < 60.0, "runtime < 60 s");
}

void ga_dominance(Verdict& v) {
  const auto start = Clock::now();
  auto cfg = load_config_file(QVPN_CONFIG_DIR "/desk_ga.json");
  double total_improvement = 0.0;
  int dominated = 0;
  const std::vector<std::uint64_t> seeds{101, 202, 303, 404};
  for (auto seed : seeds) {
    const auto ctx = make_context(cfg, build_instance(cfg, seed));
    const auto out = run_optimizer(ctx, cfg, seed);
    const double improvement =
        out.best_baseline > 0.0 ? (out.wegr - out.best_baseline) / out.best_baseline : 0.0;
    total_improvement += improvement;
    if (out.wegr >= out.best_baseline) ++dominated;
    v.detail << "seed " << seed << ": GA " << format_double(out.wegr) << " vs baseline "
             << format_double(out.best_baseline) << "; ";
  }
  const double mean = 100.0 * total_improvement / static_cast<double>(seeds.size());
  const double t = seconds_since(start);
  v.detail << "mean improvement " << mean << "%, " << t << " s";
  v.require(dominated == static_cast<int>(seeds.size()), "GA >= best baseline on every seed");
  v.require(mean > 0.0, "mean improvement > 0");
  v.require(t < 600.0, "runtime < 10 min");
}

bool nondecreasing(const ScenarioResult& r, std::ostringstream& detail) {
  bool ok = true;
  std::vector<double> by_rep;
  int last_rep = -1;
  double prev = 0.0;
  for (const auto& p : r.points) {
    if (!p.ok) {
      detail << " point error: " << p.error;
      return false;
    }
    if (p.repetition != last_rep) {
      last_rep = p.repetition;
      prev = -1.0;
      detail << " | rep " << p.repetition << ":";
    }
    detail << ' ' << format_double(p.outcome.wegr);
    if (p.outcome.wegr < prev - 1e-9 * std::max(1.0, prev)) ok = false;
    prev = p.outcome.wegr;
  }
  return ok;
}

void monotone_sweeps(Verdict& v) {
  const auto pmax = run_scenario(load_config_file(QVPN_CONFIG_DIR "/sweep_pmax.json"));
  v.detail << "P_max {1,2,3}";
  v.require(nondecreasing(pmax, v.detail), "W-EGR nondecreasing in P_max");
  const auto strat = run_scenario(load_config_file(QVPN_CONFIG_DIR "/sweep_strategies.json"));
  v.detail << "; strategies {1,4,16}";
  v.require(nondecreasing(strat, v.detail), "W-EGR nondecreasing in strategy count");
  const auto low = run_scenario(load_config_file(QVPN_CONFIG_DIR "/lowcap_pmax.json"));
  v.detail << "; low-capacity P_max {1,2,3}";
  v.require(nondecreasing(low, v.detail), "low-capacity sweep nondecreasing");
  v.require(!low.points.empty() && low.points.front().ok && low.points.front().outcome.wegr == 0.0,
            "P_max=1 infeasible case reports 0");
  v.require(low.points.size() >= 2 && low.points.back().outcome.wegr > 0.0,
            "more paths make the low-capacity case feasible");
}

void rl_correctness(Verdict& v) {
  Rng rng(303);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t groups = 1 + rng.index(3);
    const std::size_t per = 2 + rng.index(3);
    const auto layout = PolicyGroups::uniform(groups, per);
    const std::size_t input = 1 + rng.index(5);
    PolicyNetwork net(input, {4 + rng.index(5)}, layout.total(), rng);
    std::vector<double> x(input);
    for (auto& e : x) e = rng.normal();
    const auto probs = group_softmax(net.forward(x), layout);
    const auto action = sample_action(probs, layout, 1 + rng.index(per), rng);
    worst = std::max(worst, gradient_check(net, x, layout, action, rng.uniform(0, 100),
                                           rng.uniform(0, 100), 0.1));
  }
  v.detail << "gradient check max relative error " << worst;
  v.require(worst < 1e-4, "gradient error < 1e-4");

  RlSetup setup;
  setup.groups = PolicyGroups::uniform(1, 2);
  setup.state_input = {1.0};
  setup.state_key = "toy";
  const Environment toy = [](const Action& a) { return a.chosen[0][0] == 0 ? 50.0 : 10.0; };
  int converged = 0;
  bool exact_baseline = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.learning_rate_floor = 0.01;
    cfg.epochs = 2000;
    cfg.hidden = {};
    cfg.seed = seed;
    Rng init(seed);
    const auto result = train(PolicyNetwork(1, {}, 2, init), setup, cfg, toy);
    const auto p = group_softmax(result.policy.forward(setup.state_input), setup.groups);
    int hit_epoch = -1;
    for (const auto& row : result.trace)
      if (row.greedy_evaluated && row.greedy_reward == 50.0 && hit_epoch < 0)
        hit_epoch = row.epoch;
    if (p[0] > 0.9) ++converged;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& batch : result.batch_rewards)
      for (double r : batch) {
        total += r;
        ++count;
      }
    exact_baseline = exact_baseline && result.baseline.visits("toy") == count &&
                     result.baseline.baseline("toy") == total / static_cast<double>(count);
    v.detail << "; seed " << seed << " P(dominant)=" << p[0];
  }
  v.detail << "; baseline equals running mean " << (exact_baseline ? "exactly" : "NOT exactly");
  v.require(converged == 3, "3 of 3 seeds reach P > 0.9");
  v.require(exact_baseline, "baseline table equals running means");
}

void fairness(Verdict& v) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 5, 4, 5};
  const double hand = 6.0 / std::sqrt(10.0 * 6.0);
  const double r = pearson(x, y);
  v.detail << "5-point pearson deviation " << std::abs(r - hand);
  v.require(std::abs(r - hand) <= 1e-12, "pearson within 1e-12");

  auto cfg = load_config_file(QVPN_CONFIG_DIR "/fairness150.json");
  const auto ctx = make_context(cfg, build_instance(cfg, cfg.seed));
  const auto out = run_optimizer(ctx, cfg, cfg.seed);
  const auto problem = ctx.build(out.selection);
  const auto solution = solve(problem);
  if (solution.status != AllocationStatus::Optimal) {
    v.require(false, "150-pair run has an optimal allocation");
    return;
  }
  const auto report = fairness_report(ctx.workload(), problem, solution);
  v.detail << "; 150 pairs (" << report.zero_rate_pairs << " zero-rate), corr(lambda)="
           << report.corr_lambda << " corr(F)=" << report.corr_fidelity
           << " corr(L)=" << report.corr_length << " corr(composite)=" << report.corr_composite;
  v.require(ctx.pair_count() == 150, "150 pairs");
  v.require(report.corr_fidelity < 0.0, "corr(F) negative");
  v.require(report.corr_length < 0.0, "corr(L) negative");
  v.require(report.corr_composite > 0.0, "corr(composite) positive");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism(Verdict& v, const std::string& cli, const fs::path& work) {
  fs::remove_all(work / "determinism");
  fs::create_directories(work / "determinism");
  const auto config = work / "determinism" / "config.json";
  {
    std::ofstream out(config);
    out << R"({"schema": "qvpn-config/1", "seed": 9, "topology": ")" QVPN_DATA_DIR
           R"(/topologies/synthetic10.topo",
  "workload": {"generate": {"num_orgs": 3, "pairs_per_org": 6, "random_r_max": true}},
  "paths": {"k": 4, "max_paths_per_pair": 2}, "strategies": {"count": 8},
  "ga": {"population": 16, "generations": 25},
  "rl": {"epochs": 60, "batch_size": 4, "learning_rate": 0.01, "hidden": [16], "threshold": 0.998},
  "sweep": {"axis": "max_paths_per_pair", "values": [1, 2], "repetitions": 2}})";
  }
  int compared = 0, differing = 0;
  for (const std::string cmd : {"capacity", "paths", "allocate", "ga", "rl", "report"}) {
    for (const std::string run : {"a", "b"}) {
      const auto dir = work / "determinism" / (cmd + "_" + run);
      const std::string line = "\"" + cli + "\" " + cmd + " --config \"" + config.string() +
                               "\" --out \"" + dir.string() + "\" > \"" + dir.string() +
                               ".log\" 2>&1";
      const int rc = std::system(line.c_str());
      if (rc != 0 && cmd != "report") v.require(false, cmd + " exited with " + std::to_string(rc));
    }
    const auto a = work / "determinism" / (cmd + "_a");
    const auto b = work / "determinism" / (cmd + "_b");
    if (!fs::exists(a)) continue;
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      if (read_file(entry.path()) != read_file(b / entry.path().filename())) {
        ++differing;
        v.detail << " differs: " << cmd << "/" << entry.path().filename().string();
      }
    }
  }
  v.detail << compared << " CSV files compared across 6 subcommands, " << differing
           << " differ";
  v.require(compared >= 10, "CSV outputs produced");
  v.require(differing == 0, "byte-identical CSVs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli;
  std::string work = "acceptance_work";
  app.add_option("--cli", cli, "path to the qvpn executable")->required();
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
      {"purification matches density-matrix oracle", purification},
      {"overhead equals product of 2/p_k", overhead_law},
      {"nested-swap fidelity formula", swap_formula},
      {"link capacity model", capacity_model},
      {"LP optimality against vertex enumeration", lp_optimality},
      {"GA dominates shortest-path baselines", ga_dominance},
      {"monotone P_max and strategy sweeps", monotone_sweeps},
      {"REINFORCE correctness", rl_correctness},
      {"fairness statistics", fairness},
      {"CLI determinism", [&](Verdict& v) { determinism(v, cli, work); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " ("
              << criteria[i].first << "): " << v.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
