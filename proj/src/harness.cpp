#include "qvpn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "qvpn/errors.hpp"
#include "qvpn/format.hpp"
#include "qvpn/stats.hpp"

namespace qvpn {

namespace {

using nlohmann::json;

constexpr std::string_view kSchema = "qvpn-config/1";
constexpr std::uint64_t kPolicyStream = 0x706f6c696379ULL;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T read(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::pair<double, double> read_range(const json& obj, const char* key,
                                     std::pair<double, double> fallback,
                                     const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(where + "." + key + " must be a [lo, hi] pair");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

SweepAxis parse_axis(const std::string& name) {
  for (auto axis : {SweepAxis::None, SweepAxis::K, SweepAxis::PairsPerOrg, SweepAxis::MaxPaths,
                    SweepAxis::StrategyCount, SweepAxis::RMax})
    if (axis_name(axis) == name) return axis;
  throw ConfigError("sweep.axis '" + name + "' is not recognised");
}

OptimizerKind parse_optimizer(const std::string& name) {
  for (auto kind : {OptimizerKind::Baseline, OptimizerKind::Ga, OptimizerKind::Rl})
    if (optimizer_name(kind) == name) return kind;
  throw ConfigError("optimizer '" + name + "' is not recognised");
}

void parse_workload(const json& node, const std::filesystem::path& base, HarnessConfig& cfg) {
  check_keys(node, {"file", "generate"}, "workload");
  if (node.contains("file") == node.contains("generate"))
    throw ConfigError("workload needs exactly one of 'file' or 'generate'");
  if (node.contains("file")) {
    cfg.workload_file = resolve(base, read<std::string>(node, "file", "", "workload"));
    return;
  }
  const auto& g = node.at("generate");
  const std::string where = "workload.generate";
  check_keys(g,
             {"num_orgs", "pairs_per_org", "weight", "lambda", "fidelity", "hop_cap", "r_min",
              "r_max", "random_r_max"},
             where);
  auto& p = cfg.workload;
  p.num_orgs = read(g, "num_orgs", p.num_orgs, where);
  p.pairs_per_org = read(g, "pairs_per_org", p.pairs_per_org, where);
  std::tie(p.weight_lo, p.weight_hi) = read_range(g, "weight", {p.weight_lo, p.weight_hi}, where);
  std::tie(p.lambda_lo, p.lambda_hi) = read_range(g, "lambda", {p.lambda_lo, p.lambda_hi}, where);
  std::tie(p.fidelity_lo, p.fidelity_hi) =
      read_range(g, "fidelity", {p.fidelity_lo, p.fidelity_hi}, where);
  p.hop_cap = read(g, "hop_cap", p.hop_cap, where);
  p.r_min = read(g, "r_min", p.r_min, where);
  p.r_max = read(g, "r_max", p.r_max, where);
  p.random_r_max = read(g, "random_r_max", p.random_r_max, where);
}

void parse_ga(const json& g, GaConfig& ga) {
  const std::string where = "ga";
  check_keys(g,
             {"population", "generations", "mode", "elitism", "static_pool", "static_mutation",
              "static_crossover", "pool", "mutation", "crossover"},
             where);
  ga.population_size = read(g, "population", ga.population_size, where);
  ga.generations = read(g, "generations", ga.generations, where);
  ga.elitism_count = read(g, "elitism", ga.elitism_count, where);
  const auto mode = read<std::string>(g, "mode", "dynamic", where);
  if (mode == "dynamic")
    ga.mode = GaMode::Dynamic;
  else if (mode == "static")
    ga.mode = GaMode::Static;
  else
    throw ConfigError("ga.mode must be 'static' or 'dynamic'");
  ga.static_pool = read(g, "static_pool", ga.static_pool, where);
  ga.static_mutation = read(g, "static_mutation", ga.static_mutation, where);
  ga.static_crossover = read(g, "static_crossover", ga.static_crossover, where);
  std::tie(ga.pool_start, ga.pool_end) = read_range(g, "pool", {ga.pool_start, ga.pool_end}, where);
  std::tie(ga.mutation_start, ga.mutation_end) =
      read_range(g, "mutation", {ga.mutation_start, ga.mutation_end}, where);
  std::tie(ga.crossover_start, ga.crossover_end) =
      read_range(g, "crossover", {ga.crossover_start, ga.crossover_end}, where);
}

void parse_rl(const json& r, HarnessConfig& cfg) {
  const std::string where = "rl";
  check_keys(r,
             {"epochs", "batch_size", "learning_rate", "lr_decay", "decay_every", "lr_floor",
              "entropy_beta", "hidden", "eval_every", "threshold"},
             where);
  auto& rl = cfg.rl;
  rl.epochs = read(r, "epochs", rl.epochs, where);
  rl.batch_size = read(r, "batch_size", rl.batch_size, where);
  rl.learning_rate = read(r, "learning_rate", rl.learning_rate, where);
  rl.decay_base = read(r, "lr_decay", rl.decay_base, where);
  rl.decay_every = read(r, "decay_every", rl.decay_every, where);
  rl.learning_rate_floor = read(r, "lr_floor", rl.learning_rate_floor, where);
  rl.entropy_beta = read(r, "entropy_beta", rl.entropy_beta, where);
  rl.hidden = read(r, "hidden", rl.hidden, where);
  rl.eval_every = read(r, "eval_every", rl.eval_every, where);
  cfg.rl_threshold = read(r, "threshold", cfg.rl_threshold, where);
}

std::string csv_double(double v) { return format_double(v); }

std::string join_nodes(const NetworkGraph& graph, const std::vector<std::size_t>& nodes) {
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) s += ' ';
    s += graph.nodes().at(nodes[i]).id;
  }
  return s;
}

}  // namespace

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::K: return "k";
    case SweepAxis::PairsPerOrg: return "pairs_per_org";
    case SweepAxis::MaxPaths: return "max_paths_per_pair";
    case SweepAxis::StrategyCount: return "strategy_count";
    case SweepAxis::RMax: return "r_max";
  }
  return "none";
}

std::string_view optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Baseline: return "baseline";
    case OptimizerKind::Ga: return "ga";
    case OptimizerKind::Rl: return "rl";
  }
  return "ga";
}

std::string config_header(std::uint64_t hash) { return "# config " + hex64(hash) + "\n"; }

HarnessConfig load_config(std::istream& in, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc,
             {"schema", "seed", "topology", "multiplex", "repeaters", "workload", "paths",
              "noise", "strategies", "baseline_threshold", "optimizer", "ga", "rl", "selection",
              "sweep", "record_timing"},
             "config");
  if (read<std::string>(doc, "schema", "", "config") != kSchema)
    throw ConfigError("config.schema must be \"" + std::string(kSchema) + "\"");

  HarnessConfig cfg;
  cfg.seed = read<std::uint64_t>(doc, "seed", cfg.seed, "config");
  if (!doc.contains("topology")) throw ConfigError("config.topology is required");
  cfg.topology = resolve(base_dir, read<std::string>(doc, "topology", "", "config"));
  if (doc.contains("multiplex")) cfg.multiplex = read<int>(doc, "multiplex", 1, "config");

  if (doc.contains("repeaters")) {
    const auto& r = doc.at("repeaters");
    check_keys(r, {"enabled", "threshold_km", "spacing_km"}, "repeaters");
    cfg.engineer_repeaters = read(r, "enabled", cfg.engineer_repeaters, "repeaters");
    cfg.repeater_threshold_km = read(r, "threshold_km", cfg.repeater_threshold_km, "repeaters");
    cfg.repeater_spacing_km = read(r, "spacing_km", cfg.repeater_spacing_km, "repeaters");
  }
  if (doc.contains("workload")) parse_workload(doc.at("workload"), base_dir, cfg);

  if (doc.contains("paths")) {
    const auto& p = doc.at("paths");
    check_keys(p, {"k", "schemes", "max_paths_per_pair"}, "paths");
    cfg.context.k = read<std::size_t>(p, "k", cfg.context.k, "paths");
    cfg.context.max_paths_per_pair =
        read<std::size_t>(p, "max_paths_per_pair", cfg.context.max_paths_per_pair, "paths");
    if (p.contains("schemes")) {
      cfg.context.schemes.clear();
      for (const auto& name : read<std::vector<std::string>>(p, "schemes", {}, "paths")) {
        auto s = parse_scheme(name);
        if (!s) throw ConfigError("paths.schemes: unknown scheme '" + name + "'");
        cfg.context.schemes.push_back(*s);
      }
    }
  }
  if (doc.contains("noise")) {
    const auto& n = doc.at("noise");
    check_keys(n, {"P2", "eta", "q"}, "noise");
    auto& np = cfg.context.noise;
    np.two_qubit_gate_fidelity = read(n, "P2", np.two_qubit_gate_fidelity, "noise");
    np.measurement_fidelity = read(n, "eta", np.measurement_fidelity, "noise");
    np.swap_success_prob = read(n, "q", np.swap_success_prob, "noise");
  }
  if (doc.contains("strategies")) {
    const auto& s = doc.at("strategies");
    check_keys(s, {"count", "file"}, "strategies");
    if (s.contains("count") == s.contains("file"))
      throw ConfigError("strategies needs exactly one of 'count' or 'file'");
    if (s.contains("file"))
      cfg.context.catalog = load_strategy_catalog_file(
          resolve(base_dir, read<std::string>(s, "file", "", "strategies")));
    else
      cfg.context.catalog =
          StrategyCatalog::uniform_default(read<std::size_t>(s, "count", 16, "strategies"));
  }
  cfg.context.baseline_threshold =
      read(doc, "baseline_threshold", cfg.context.baseline_threshold, "config");
  cfg.optimizer = parse_optimizer(read<std::string>(doc, "optimizer", "ga", "config"));
  if (doc.contains("ga")) parse_ga(doc.at("ga"), cfg.ga);
  if (doc.contains("rl")) parse_rl(doc.at("rl"), cfg);
  if (doc.contains("selection"))
    cfg.selection_file = resolve(base_dir, read<std::string>(doc, "selection", "", "config"));
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    check_keys(s, {"axis", "values", "repetitions"}, "sweep");
    cfg.sweep.axis = parse_axis(read<std::string>(s, "axis", "none", "sweep"));
    cfg.sweep.values = read<std::vector<double>>(s, "values", {}, "sweep");
    cfg.sweep.repetitions = read(s, "repetitions", 1, "sweep");
  }
  cfg.record_timing = read(doc, "record_timing", false, "config");

  cfg.ga.seed = cfg.seed;
  cfg.rl.seed = cfg.seed;
  cfg.ga.validate();
  cfg.rl.validate();
  cfg.context.noise.validate();
  if (cfg.sweep.repetitions < 1) throw ConfigError("sweep.repetitions must be >= 1");
  if (cfg.sweep.axis != SweepAxis::None && cfg.sweep.values.empty())
    throw ConfigError("sweep.values must not be empty");
  for (std::size_t i = 1; i < cfg.sweep.values.size(); ++i)
    if (!(cfg.sweep.values[i] > cfg.sweep.values[i - 1]))
      throw ConfigError("sweep.values must be strictly increasing");
  if (cfg.sweep.axis == SweepAxis::PairsPerOrg && cfg.workload_file)
    throw ConfigError("sweep axis pairs_per_org needs a generated workload");
  if (cfg.context.k == 0) throw ConfigError("paths.k must be >= 1");
  if (cfg.context.max_paths_per_pair == 0)
    throw ConfigError("paths.max_paths_per_pair must be >= 1");

  cfg.canonical = doc.dump();
  cfg.hash = fnv1a64(cfg.canonical);
  return cfg;
}

HarnessConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return load_config(in, path.parent_path());
}

namespace {
std::size_t axis_count(double value, std::string_view axis) {
  if (!(value >= 1.0) || value != std::floor(value))
    throw ConfigError("sweep value for " + std::string(axis) + " must be a positive integer");
  return static_cast<std::size_t>(value);
}
}  // namespace

HarnessConfig apply_axis(HarnessConfig config, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::None: break;
    case SweepAxis::K: config.context.k = axis_count(value, "k"); break;
    case SweepAxis::PairsPerOrg:
      config.workload.pairs_per_org = static_cast<int>(axis_count(value, "pairs_per_org"));
      break;
    case SweepAxis::MaxPaths:
      config.context.max_paths_per_pair = axis_count(value, "max_paths_per_pair");
      break;
    case SweepAxis::StrategyCount:
      config.context.catalog =
          StrategyCatalog::uniform_default(axis_count(value, "strategy_count"));
      break;
    case SweepAxis::RMax:
      if (!(value > 0.0)) throw ConfigError("sweep value for r_max must be positive");
      config.workload.r_max = value;
      break;
  }
  return config;
}

namespace {
NetworkGraph finish_graph(const HarnessConfig& config, NetworkGraph graph) {
  if (config.engineer_repeaters)
    graph = engineer_repeaters(graph, config.repeater_threshold_km, config.repeater_spacing_km);
  if (config.multiplex) graph = with_multiplex(graph, *config.multiplex);
  return graph;
}
}  // namespace

NetworkGraph build_graph(const HarnessConfig& config) {
  return finish_graph(config, load_topology_file(config.topology));
}

Instance build_instance(const HarnessConfig& config, std::uint64_t seed) {
  NetworkGraph graph = load_topology_file(config.topology);
  Workload workload;
  if (config.workload_file) {
    workload = load_workload_file(*config.workload_file);
    if (config.sweep.axis == SweepAxis::RMax)
      for (auto& pair : workload.pairs) pair.r_max = config.workload.r_max;
  } else {
    workload = generate_workload(graph, config.workload, seed);
  }
  graph = finish_graph(config, std::move(graph));
  validate_workload(workload, &graph);
  return {std::move(graph), std::move(workload)};
}

ProblemContext make_context(const HarnessConfig& config, Instance instance, Execution execution) {
  return ProblemContext(std::move(instance.graph), std::move(instance.workload), config.context,
                        execution);
}

std::vector<BaselineResult> evaluate_baselines(const ProblemContext& context) {
  std::vector<BaselineResult> out;
  for (auto scheme : context.options().schemes) {
    BaselineResult r;
    r.scheme = scheme;
    r.selection = context.baseline(scheme);
    r.wegr = context.wegr(r.selection);
    out.push_back(std::move(r));
  }
  return out;
}

BaselineResult best_baseline(const ProblemContext& context) {
  auto all = evaluate_baselines(context);
  if (all.empty()) throw ConfigError("no path schemes configured");
  std::size_t best = 0;
  for (std::size_t i = 1; i < all.size(); ++i)
    if (all[i].wegr > all[best].wegr) best = i;
  return all[best];
}

OptimizerOutcome run_optimizer(const ProblemContext& context, const HarnessConfig& config,
                               std::uint64_t seed, std::span<const Selection> warm_start,
                               Execution execution) {
  const auto start = std::chrono::steady_clock::now();
  OptimizerOutcome out;
  const auto baselines = evaluate_baselines(context);
  std::size_t best = 0;
  for (std::size_t i = 1; i < baselines.size(); ++i)
    if (baselines[i].wegr > baselines[best].wegr) best = i;
  if (!baselines.empty()) out.best_baseline = baselines[best].wegr;

  switch (config.optimizer) {
    case OptimizerKind::Baseline:
      if (!baselines.empty()) {
        out.wegr = baselines[best].wegr;
        out.selection = baselines[best].selection;
      }
      out.lp_solves = baselines.size();
      break;
    case OptimizerKind::Ga: {
      GaConfig ga = config.ga;
      ga.seed = seed;
      std::vector<Selection> heuristics;
      for (const auto& b : baselines) heuristics.push_back(b.selection);
      heuristics.insert(heuristics.end(), warm_start.begin(), warm_start.end());
      auto population = initialize_population(context, ga, heuristics);
      auto trace = evolve(context, std::move(population), ga, execution);
      out.wegr = trace.best_fitness;
      out.selection = std::move(trace.best_selection);
      out.ga_trace = std::move(trace.generations);
      out.lp_solves = trace.lp_solves;
      break;
    }
    case OptimizerKind::Rl: {
      ContextEnvironment env(context, context.catalog().nearest(config.rl_threshold));
      const auto setup = env.setup();
      if (setup.groups.count() == 0) throw ValidationError("no user pair has a candidate path");
      TrainConfig tc = config.rl;
      tc.seed = seed;
      Rng init(stream_seed({seed, kPolicyStream}));
      PolicyNetwork policy(setup.state_input.size(), tc.hidden, setup.groups.total(), init);
      auto result = train(std::move(policy), setup, tc,
                          [&env](const Action& a) { return env(a); }, execution);
      out.wegr = result.greedy_reward;
      out.selection = env.decode(result.greedy);
      out.rl_trace = std::move(result.trace);
      out.policy = std::move(result.policy);
      out.lp_solves = env.lp_solves();
      break;
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ScenarioResult run_scenario(const HarnessConfig& config, Execution execution) {
  ScenarioResult result;
  result.axis = config.sweep.axis;
  result.config_hash = config.hash;
  const std::vector<double> values = config.sweep.axis == SweepAxis::None
                                         ? std::vector<double>{0.0}
                                         : config.sweep.values;
  const bool nested = config.sweep.axis != SweepAxis::PairsPerOrg;
  const auto reps = static_cast<std::size_t>(config.sweep.repetitions);
  std::vector<std::vector<PointResult>> per_rep(reps);

  auto run_rep = [&](std::size_t rep) {
    const std::uint64_t seed = config.seed + rep;
    std::optional<RouteSelection> previous;
    for (double value : values) {
      PointResult point;
      point.axis_value = value;
      point.repetition = static_cast<int>(rep);
      point.seed = seed;
      try {
        const auto cfg = apply_axis(config, config.sweep.axis, value);
        ProblemContext ctx = make_context(cfg, build_instance(cfg, seed), Execution::Serial);
        std::vector<Selection> warm;
        if (nested && previous)
          if (auto sel = ctx.from_routes(*previous)) warm.push_back(std::move(*sel));
        point.outcome = run_optimizer(ctx, cfg, seed, warm, execution);
        point.routes = ctx.to_routes(point.outcome.selection);
        point.ok = true;
        previous = point.routes;
      } catch (const std::exception& e) {
        point.error = e.what();
      }
      per_rep[rep].push_back(std::move(point));
    }
  };

  if (execution == Execution::Parallel && reps > 1) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t rep = 0; rep < reps; ++rep) run_rep(rep);
  } else {
    for (std::size_t rep = 0; rep < reps; ++rep) run_rep(rep);
  }
  for (auto& rows : per_rep)
    for (auto& p : rows) result.points.push_back(std::move(p));
  return result;
}

FairnessReport fairness_report(const Workload& workload, const AllocationProblem& problem,
                               const AllocationSolution& solution) {
  if (solution.status != AllocationStatus::Optimal)
    throw ValidationError("fairness report needs an optimal allocation");
  const auto n = workload.pairs.size();
  std::vector<PairFairness> pairs(n);
  for (std::size_t u = 0; u < n; ++u) {
    const auto& p = workload.pairs[u];
    pairs[u].pair = u;
    pairs[u].org = workload.orgs.at(p.org).id;
    pairs[u].lambda = p.lambda;
    pairs[u].fidelity_threshold = p.fidelity_threshold;
    pairs[u].true_egr = solution.true_egr_per_pair.at(u);
  }
  for (std::size_t j = 0; j < problem.variables.size(); ++j) {
    const auto& v = problem.variables[j];
    pairs[v.pair].weighted_egr += problem.lp.c[j] * solution.rates[j];
    if (solution.rates[j] > kPositiveRate) {
      auto& h = pairs[v.pair].shortest_used_hops;
      h = h ? std::min(*h, v.hops) : v.hops;
    }
  }

  FairnessReport report;
  report.total_wegr = solution.wegr;
  report.orgs.resize(workload.orgs.size());
  for (std::size_t k = 0; k < workload.orgs.size(); ++k) {
    report.orgs[k].id = workload.orgs[k].id;
    report.orgs[k].weight = workload.orgs[k].weight;
  }
  std::vector<double> egr, lam, fid, len, comp;
  for (const auto& pf : pairs) {
    const auto org = workload.pairs[pf.pair].org;
    report.orgs[org].true_egr += pf.true_egr;
    report.orgs[org].weighted_egr += pf.weighted_egr;
    if (!pf.shortest_used_hops) {
      ++report.zero_rate_pairs;
      continue;
    }
    const double L = static_cast<double>(*pf.shortest_used_hops);
    egr.push_back(pf.true_egr);
    lam.push_back(pf.lambda);
    fid.push_back(pf.fidelity_threshold);
    len.push_back(L);
    comp.push_back(workload.orgs[org].weight * pf.lambda / (pf.fidelity_threshold * L));
  }
  report.corr_lambda = pearson(egr, lam);
  report.corr_fidelity = pearson(egr, fid);
  report.corr_length = pearson(egr, len);
  report.corr_composite = pearson(egr, comp);

  std::stable_sort(pairs.begin(), pairs.end(), [](const PairFairness& a, const PairFairness& b) {
    return a.true_egr > b.true_egr;
  });
  report.pairs = std::move(pairs);
  return report;
}

void write_selection(std::ostream& out, const NetworkGraph& graph, const RouteSelection& routes) {
  out << "qvpn-selection v1\n";
  for (std::size_t u = 0; u < routes.size(); ++u)
    for (const auto& r : routes[u])
      out << "select " << u << ' ' << format_double(r.link_threshold) << ' '
          << join_nodes(graph, r.nodes) << '\n';
}

RouteSelection load_selection(std::istream& in, const NetworkGraph& graph,
                              std::size_t pair_count) {
  RouteSelection routes(pair_count);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokenize_line(line);
    if (tok.empty()) continue;
    if (!header) {
      if (tok.size() != 2 || tok[0] != "qvpn-selection" || tok[1] != "v1")
        throw ParseError("expected header 'qvpn-selection v1'", lineno);
      header = true;
      continue;
    }
    if (tok[0] != "select" || tok.size() < 5)
      throw ParseError("expected 'select <pair> <threshold> <node> <node> ...'", lineno);
    const auto pair = static_cast<std::size_t>(parse_u64(tok[1], "pair", lineno));
    if (pair >= pair_count)
      throw ValidationError("line " + std::to_string(lineno) + ": pair index out of range");
    RouteChoice choice;
    choice.link_threshold = parse_double(tok[2], "threshold", lineno);
    for (std::size_t i = 3; i < tok.size(); ++i) {
      auto idx = graph.find_node(tok[i]);
      if (!idx)
        throw ValidationError("line " + std::to_string(lineno) + ": unknown node '" + tok[i] +
                              "'");
      choice.nodes.push_back(*idx);
    }
    routes[pair].push_back(std::move(choice));
  }
  if (!header) throw ParseError("empty selection file", lineno);
  return routes;
}

RouteSelection load_selection_file(const std::filesystem::path& path, const NetworkGraph& graph,
                                   std::size_t pair_count) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open selection '" + path.string() + "'");
  return load_selection(in, graph, pair_count);
}

void write_sweep_csv(std::ostream& out, const ScenarioResult& result, bool record_timing) {
  out << config_header(result.config_hash);
  out << "axis,value,repetition,seed,status,wegr,best_baseline,improvement_pct,lp_solves,"
         "seconds,error\n";
  for (const auto& p : result.points) {
    const auto& o = p.outcome;
    const double improvement =
        p.ok && o.best_baseline > 0.0 ? 100.0 * (o.wegr - o.best_baseline) / o.best_baseline
                                      : 0.0;
    std::string err = p.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << axis_name(result.axis) << ',' << csv_double(p.axis_value) << ',' << p.repetition
        << ',' << p.seed << ',' << (p.ok ? "ok" : "error") << ',' << csv_double(o.wegr) << ','
        << csv_double(o.best_baseline) << ',' << csv_double(improvement) << ',' << o.lp_solves
        << ',' << csv_double(record_timing ? o.seconds : 0.0) << ',' << err << '\n';
  }
}

void write_ga_trace_csv(std::ostream& out, const ScenarioResult& result, bool record_timing) {
  out << config_header(result.config_hash);
  out << "value,repetition,generation,best,mean,seconds\n";
  for (const auto& p : result.points)
    for (const auto& g : p.outcome.ga_trace)
      out << csv_double(p.axis_value) << ',' << p.repetition << ',' << g.generation << ','
          << csv_double(g.best) << ',' << csv_double(g.mean) << ','
          << csv_double(record_timing ? g.seconds : 0.0) << '\n';
}

void write_rl_trace_csv(std::ostream& out, const ScenarioResult& result) {
  out << config_header(result.config_hash);
  out << "value,repetition,epoch,mean_reward,baseline,learning_rate,greedy_reward\n";
  for (const auto& p : result.points)
    for (const auto& e : p.outcome.rl_trace)
      out << csv_double(p.axis_value) << ',' << p.repetition << ',' << e.epoch << ','
          << csv_double(e.mean_reward) << ',' << csv_double(e.baseline) << ','
          << csv_double(e.learning_rate) << ','
          << (e.greedy_evaluated ? csv_double(e.greedy_reward) : std::string()) << '\n';
}

void write_fairness_pairs_csv(std::ostream& out, std::uint64_t hash,
                              const FairnessReport& report) {
  out << config_header(hash);
  out << "# zero_rate_pairs " << report.zero_rate_pairs << '\n';
  out << "rank,pair,org,lambda,fidelity_threshold,shortest_used_hops,true_egr,weighted_egr\n";
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    const auto& p = report.pairs[i];
    out << i + 1 << ',' << p.pair << ',' << p.org << ',' << csv_double(p.lambda) << ','
        << csv_double(p.fidelity_threshold) << ','
        << (p.shortest_used_hops ? std::to_string(*p.shortest_used_hops) : std::string()) << ','
        << csv_double(p.true_egr) << ',' << csv_double(p.weighted_egr) << '\n';
  }
}

void write_fairness_orgs_csv(std::ostream& out, std::uint64_t hash,
                             const FairnessReport& report) {
  out << config_header(hash);
  out << "org,weight,true_egr,weighted_egr\n";
  for (const auto& o : report.orgs)
    out << o.id << ',' << csv_double(o.weight) << ',' << csv_double(o.true_egr) << ','
        << csv_double(o.weighted_egr) << '\n';
}

void write_correlations_csv(std::ostream& out, std::uint64_t hash, const FairnessReport& report) {
  out << config_header(hash);
  out << "metric,pearson\n";
  out << "lambda," << csv_double(report.corr_lambda) << '\n';
  out << "fidelity_threshold," << csv_double(report.corr_fidelity) << '\n';
  out << "shortest_used_hops," << csv_double(report.corr_length) << '\n';
  out << "w_lambda_over_F_L," << csv_double(report.corr_composite) << '\n';
}

void write_manifest(const std::filesystem::path& path, const HarnessConfig& config,
                    std::string_view command, const std::vector<ManifestEntry>& files,
                    const std::vector<double>& wall_seconds) {
  json m;
  m["command"] = command;
  m["config_hash"] = hex64(config.hash);
  m["config"] = json::parse(config.canonical);
  m["seed"] = config.seed;
  json list = json::array();
  for (const auto& f : files) list.push_back({{"file", f.file}, {"description", f.description}});
  m["outputs"] = list;
  m["wall_seconds"] = wall_seconds;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << m.dump(2) << '\n';
}

void write_gnuplot(const std::filesystem::path& path, std::string_view title,
                   std::string_view csv, int x_column, int y_column, std::string_view x_label,
                   std::string_view y_label, bool histogram) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  const auto png = path.stem().string() + ".png";
  out << "set datafile separator ','\n"
      << "set terminal pngcairo size 900,600\n"
      << "set output '" << png << "'\n"
      << "set title '" << title << "'\n"
      << "set xlabel '" << x_label << "'\n"
      << "set ylabel '" << y_label << "'\n"
      << "set key off\n"
      << "set grid\n";
  if (histogram)
    out << "set style fill solid 0.6\n"
        << "plot '" << csv << "' every ::1 using " << x_column << ':' << y_column
        << " with boxes\n";
  else
    out << "plot '" << csv << "' every ::1 using " << x_column << ':' << y_column
        << " with linespoints pt 7\n";
}

}  // namespace qvpn
