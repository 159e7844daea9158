#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qvpn/errors.hpp"
#include "qvpn/format.hpp"
#include "qvpn/harness.hpp"

namespace fs = std::filesystem;
using namespace qvpn;

namespace {

struct Options {
  std::string config;
  std::string out;
  bool serial = false;
};

struct Run {
  HarnessConfig config;
  fs::path out;
  Execution execution;
  std::vector<ManifestEntry> files;
  std::vector<double> seconds;

  std::ofstream open(const std::string& name, const std::string& description) {
    files.push_back({name, description});
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + (out / name).string() + "'");
    return f;
  }
  void gnuplot(const std::string& name, std::string_view title, const std::string& csv, int x,
               int y, std::string_view xl, std::string_view yl, bool hist = false) {
    files.push_back({name, "gnuplot script for " + csv});
    write_gnuplot(out / name, title, csv, x, y, xl, yl, hist);
  }
  void finish(std::string_view command) {
    write_manifest(out / "manifest.json", config, command, files, seconds);
  }
};

Run start(const Options& opt) {
  Run run{load_config_file(opt.config), opt.out,
          opt.serial ? Execution::Serial : Execution::Parallel, {}, {}};
  fs::create_directories(run.out);
  return run;
}

std::string node_list(const NetworkGraph& g, const std::vector<std::size_t>& nodes) {
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += (i ? " " : "") + g.nodes()[nodes[i]].id;
  return s;
}

std::string point_tag(const ScenarioResult& r, std::size_t i) {
  const auto& p = r.points[i];
  return "v" + format_double(p.axis_value) + "_r" + std::to_string(p.repetition);
}

void cmd_capacity(const Options& opt) {
  auto run = start(opt);
  const auto graph = build_graph(run.config);
  auto csv = run.open("capacities.csv", "per-link capacity after repeater insertion");
  csv << config_header(run.config.hash);
  csv << "link,a,b,length_km,multiplex,alpha,fidelity,capacity_eprps\n";
  for (std::size_t i = 0; i < graph.links().size(); ++i) {
    const auto& l = graph.links()[i];
    csv << i << ',' << graph.nodes()[l.a].id << ',' << graph.nodes()[l.b].id << ','
        << format_double(l.length_km) << ',' << l.multiplex << ',' << format_double(l.alpha)
        << ',' << format_double(l.base_fidelity) << ',' << format_double(l.capacity_eprps)
        << '\n';
  }
  auto topo = run.open("topology_engineered.topo", "topology with repeaters inserted");
  save_topology(topo, graph);
  run.gnuplot("capacities.gp", "Link capacity", "capacities.csv", 4, 8, "length [km]",
              "EPR pairs / s");
  run.finish("capacity");
  std::cout << graph.links().size() << " links written to " << (run.out / "capacities.csv")
            << '\n';
}

void cmd_paths(const Options& opt) {
  auto run = start(opt);
  const auto ctx = make_context(run.config, build_instance(run.config, run.config.seed),
                                run.execution);
  auto csv = run.open("paths.csv", "candidate paths per user pair and scheme");
  csv << config_header(run.config.hash);
  csv << "pair,a,b,scheme,rank,candidate,hops,bottleneck_eprps,nodes\n";
  const auto& w = ctx.workload();
  for (std::size_t u = 0; u < ctx.pair_count(); ++u)
    for (auto scheme : ctx.options().schemes) {
      const auto& ranking = ctx.ranking(u, scheme);
      for (std::size_t r = 0; r < ranking.size(); ++r) {
        const auto& c = ctx.candidates(u)[ranking[r]];
        csv << u << ',' << w.pairs[u].a << ',' << w.pairs[u].b << ',' << scheme_name(scheme)
            << ',' << r + 1 << ',' << ranking[r] << ',' << c.hop_count() << ','
            << format_double(c.bottleneck_capacity) << ',' << node_list(ctx.graph(), c.nodes)
            << '\n';
      }
    }
  auto wl = run.open("workload.txt", "user pairs the paths were computed for");
  save_workload(wl, w);
  run.finish("paths");
  std::cout << "candidate paths for " << ctx.pair_count() << " pairs written to "
            << (run.out / "paths.csv") << '\n';
}

void cmd_allocate(const Options& opt) {
  auto run = start(opt);
  const auto ctx = make_context(run.config, build_instance(run.config, run.config.seed),
                                run.execution);
  RouteSelection routes;
  if (run.config.selection_file) {
    routes = load_selection_file(*run.config.selection_file, ctx.graph(), ctx.pair_count());
  } else {
    routes = ctx.to_routes(best_baseline(ctx).selection);
  }
  const auto problem =
      build_problem(ctx.graph(), ctx.workload(), routes, ctx.options().noise,
                    ctx.catalog().max_rounds(), ctx.max_paths_per_pair());
  const auto sol = solve(problem);
  const bool optimal = sol.status == AllocationStatus::Optimal;

  auto csv = run.open("allocation.csv", "LP rate per selected path");
  csv << config_header(run.config.hash);
  csv << "pair,org,route,link_threshold,hops,rate,true_egr,weighted_egr,nodes\n";
  const auto& w = ctx.workload();
  const double q = ctx.options().noise.swap_success_prob;
  for (std::size_t j = 0; j < problem.variables.size(); ++j) {
    const auto& v = problem.variables[j];
    const auto& choice = routes[v.pair][v.route];
    const double rate = sol.rates[j];
    csv << v.pair << ',' << w.orgs[w.pairs[v.pair].org].id << ',' << v.route << ','
        << format_double(choice.link_threshold) << ',' << v.hops << ',' << format_double(rate)
        << ',' << format_double(rate * std::pow(q, static_cast<double>(v.hops) - 1.0)) << ','
        << format_double(problem.lp.c[j] * rate) << ',' << node_list(ctx.graph(), choice.nodes)
        << '\n';
  }
  auto summary = run.open("summary.csv", "LP status and objective");
  summary << config_header(run.config.hash);
  summary << "status,wegr,variables,constraints\n";
  summary << (optimal ? "optimal" : "infeasible") << ',' << format_double(sol.wegr) << ','
          << problem.variables.size() << ',' << problem.lp.rows << '\n';
  auto sel = run.open("selection.sel", "routes that were allocated");
  write_selection(sel, ctx.graph(), routes);
  run.finish("allocate");
  std::cout << "status " << (optimal ? "optimal" : "infeasible") << ", W-EGR "
            << format_double(sol.wegr) << '\n';
}

void write_scenario(Run& run, const ScenarioResult& result) {
  {
    auto csv = run.open("sweep.csv", "final W-EGR per sweep point and repetition");
    write_sweep_csv(csv, result, run.config.record_timing);
  }
  for (const auto& p : result.points) run.seconds.push_back(p.outcome.seconds);
  if (run.config.sweep.axis != SweepAxis::None)
    run.gnuplot("sweep.gp", "W-EGR sweep", "sweep.csv", 2, 6,
                std::string(axis_name(run.config.sweep.axis)), "W-EGR");
}

void write_selections(Run& run, const ScenarioResult& result) {
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& p = result.points[i];
    if (!p.ok) continue;
    const auto cfg = apply_axis(run.config, run.config.sweep.axis, p.axis_value);
    const auto graph = build_graph(cfg);
    auto f = run.open("selection_" + point_tag(result, i) + ".sel", "best selection");
    write_selection(f, graph, p.routes);
  }
}

int report_points(const ScenarioResult& result) {
  int failures = 0;
  for (const auto& p : result.points) {
    std::cout << axis_name(result.axis) << '=' << format_double(p.axis_value) << " rep "
              << p.repetition << ": ";
    if (p.ok) {
      std::cout << "W-EGR " << format_double(p.outcome.wegr) << " (best baseline "
                << format_double(p.outcome.best_baseline) << ")\n";
    } else {
      std::cout << "error: " << p.error << '\n';
      ++failures;
    }
  }
  return failures;
}

int cmd_ga(const Options& opt) {
  auto run = start(opt);
  run.config.optimizer = OptimizerKind::Ga;
  const auto result = run_scenario(run.config, run.execution);
  write_scenario(run, result);
  {
    auto csv = run.open("trace.csv", "best and mean fitness per generation");
    write_ga_trace_csv(csv, result, run.config.record_timing);
  }
  run.gnuplot("trace.gp", "GA evolution", "trace.csv", 3, 4, "generation", "best W-EGR");
  write_selections(run, result);
  run.finish("ga");
  return report_points(result) ? 1 : 0;
}

int cmd_rl(const Options& opt) {
  auto run = start(opt);
  run.config.optimizer = OptimizerKind::Rl;
  const auto result = run_scenario(run.config, run.execution);
  write_scenario(run, result);
  {
    auto csv = run.open("rl_trace.csv", "mean batch reward, baseline and greedy reward per epoch");
    write_rl_trace_csv(csv, result);
  }
  run.gnuplot("rl_trace.gp", "RL training", "rl_trace.csv", 3, 4, "epoch", "mean reward");
  write_selections(run, result);
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& p = result.points[i];
    if (!p.ok || !p.outcome.policy) continue;
    const auto name = "policy_" + point_tag(result, i) + ".bin";
    run.files.push_back({name, "trained policy checkpoint"});
    save_policy_file(run.out / name, *p.outcome.policy);
  }
  run.finish("rl");
  return report_points(result) ? 1 : 0;
}

int cmd_report(const Options& opt) {
  auto run = start(opt);
  auto single = run.config;
  if (single.sweep.axis != SweepAxis::None)
    single = apply_axis(single, single.sweep.axis, single.sweep.values.front());
  single.sweep = SweepSpec{};
  const auto ctx = make_context(single, build_instance(single, single.seed), run.execution);
  const auto outcome = run_optimizer(ctx, single, single.seed, {}, run.execution);
  run.seconds.push_back(outcome.seconds);
  const auto problem = ctx.build(outcome.selection);
  const auto sol = solve(problem);
  const auto report = fairness_report(ctx.workload(), problem, sol);
  {
    auto f = run.open("fairness_pairs.csv", "per-pair true EGR, descending");
    write_fairness_pairs_csv(f, run.config.hash, report);
  }
  {
    auto f = run.open("fairness_orgs.csv", "per-organization true and weighted EGR");
    write_fairness_orgs_csv(f, run.config.hash, report);
  }
  {
    auto f = run.open("correlations.csv", "Pearson correlation of true EGR with pair attributes");
    write_correlations_csv(f, run.config.hash, report);
  }
  {
    auto f = run.open("selection.sel", "selection the report was computed for");
    write_selection(f, ctx.graph(), ctx.to_routes(outcome.selection));
  }
  run.gnuplot("fairness_pairs.gp", "True EGR per user pair", "fairness_pairs.csv", 1, 7,
              "pair rank", "true EGR", true);
  run.gnuplot("fairness_orgs.gp", "Weighted EGR per organization", "fairness_orgs.csv", 0, 4,
              "organization", "weighted EGR", true);
  run.finish("report");
  std::cout << optimizer_name(single.optimizer) << " W-EGR " << format_double(sol.wegr)
            << "; corr(lambda) " << format_double(report.corr_lambda) << ", corr(F) "
            << format_double(report.corr_fidelity) << ", corr(L) "
            << format_double(report.corr_length) << ", corr(w*lambda/(F*L)) "
            << format_double(report.corr_composite) << "; zero-rate pairs "
            << report.zero_rate_pairs << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-organization entanglement routing and rate allocation"};
  app.require_subcommand(1);
  Options opt;
  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->add_flag("--serial", opt.serial, "use the serial reference kernels");
    return sub;
  };
  auto* capacity = add("capacity", "per-link capacities after repeater insertion");
  auto* paths = add("paths", "candidate paths for every user pair");
  auto* allocate = add("allocate", "solve the rate-allocation LP for a selection");
  auto* ga = add("ga", "genetic-algorithm path and strategy selection");
  auto* rl = add("rl", "policy-gradient path selection");
  auto* report = add("report", "fairness report for the configured optimizer");
  CLI11_PARSE(app, argc, argv);

  try {
    if (capacity->parsed()) cmd_capacity(opt);
    if (paths->parsed()) cmd_paths(opt);
    if (allocate->parsed()) cmd_allocate(opt);
    if (ga->parsed()) return cmd_ga(opt);
    if (rl->parsed()) return cmd_rl(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const std::exception& e) {
    std::cerr << "qvpn: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
