#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qvpn/allocation_lp.hpp"
#include "qvpn/ga_optimizer.hpp"
#include "qvpn/policy_network.hpp"
#include "qvpn/problem_context.hpp"
#include "qvpn/rl_optimizer.hpp"

namespace qvpn {

enum class OptimizerKind { Baseline, Ga, Rl };
enum class SweepAxis { None, K, PairsPerOrg, MaxPaths, StrategyCount, RMax };

std::string_view axis_name(SweepAxis axis);
std::string_view optimizer_name(OptimizerKind kind);

struct SweepSpec {
  SweepAxis axis = SweepAxis::None;
  std::vector<double> values;  ///< strictly increasing
  int repetitions = 1;
};

/// Parsed run configuration (JSON document, schema "qvpn-config/1").
struct HarnessConfig {
  std::uint64_t seed = 1;
  std::filesystem::path topology;
  std::optional<std::filesystem::path> workload_file;
  WorkloadParams workload;
  std::optional<int> multiplex;
  bool engineer_repeaters = true;
  double repeater_threshold_km = 20.0;
  double repeater_spacing_km = 10.0;
  ContextOptions context;
  OptimizerKind optimizer = OptimizerKind::Ga;
  GaConfig ga;
  TrainConfig rl;
  double rl_threshold = 0.8;
  std::optional<std::filesystem::path> selection_file;
  SweepSpec sweep;
  bool record_timing = false;
  /// Canonical (key-sorted) dump of the parsed document and its FNV-1a hash.
  std::string canonical;
  std::uint64_t hash = 0;
};

/// Relative paths inside the document resolve against `base_dir`.
HarnessConfig load_config(std::istream& in, const std::filesystem::path& base_dir);
HarnessConfig load_config_file(const std::filesystem::path& path);

/// Returns a copy with the sweep axis set to `value`.
HarnessConfig apply_axis(HarnessConfig config, SweepAxis axis, double value);

struct Instance {
  NetworkGraph graph;  ///< after repeater engineering and multiplexing
  Workload workload;
};

/// Topology after repeater engineering and multiplexing.
NetworkGraph build_graph(const HarnessConfig& config);
/// Loads the topology, generates (on the original graph) or loads the workload, then
/// engineers repeaters.
Instance build_instance(const HarnessConfig& config, std::uint64_t seed);
ProblemContext make_context(const HarnessConfig& config, Instance instance,
                            Execution execution = Execution::Parallel);

struct BaselineResult {
  WeightScheme scheme = WeightScheme::Hop;
  Selection selection;
  double wegr = 0.0;
};
/// One entry per configured scheme, in configuration order.
std::vector<BaselineResult> evaluate_baselines(const ProblemContext& context);
/// Highest W-EGR baseline (first scheme wins ties).
BaselineResult best_baseline(const ProblemContext& context);

struct OptimizerOutcome {
  double wegr = 0.0;
  double best_baseline = 0.0;
  Selection selection;
  std::vector<GenerationStats> ga_trace;
  std::vector<EpochStats> rl_trace;
  std::optional<PolicyNetwork> policy;
  std::size_t lp_solves = 0;
  double seconds = 0.0;
};

/// Runs the configured optimiser; `warm_start` selections join the GA's initial population.
OptimizerOutcome run_optimizer(const ProblemContext& context, const HarnessConfig& config,
                               std::uint64_t seed, std::span<const Selection> warm_start = {},
                               Execution execution = Execution::Parallel);

struct PointResult {
  double axis_value = 0.0;
  int repetition = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  OptimizerOutcome outcome;
  RouteSelection routes;
};

struct ScenarioResult {
  SweepAxis axis = SweepAxis::None;
  std::uint64_t config_hash = 0;
  std::vector<PointResult> points;  ///< repetition-major, then axis order
};

/// Sweeps every axis value for every repetition (seed + repetition). Within a repetition
/// the previous point's best routes warm-start the next GA run on nested axes. A failing
/// point records its error and the sweep continues.
ScenarioResult run_scenario(const HarnessConfig& config,
                            Execution execution = Execution::Parallel);

struct PairFairness {
  std::size_t pair = 0;
  std::string org;
  double lambda = 0.0;
  double fidelity_threshold = 0.0;
  double true_egr = 0.0;
  double weighted_egr = 0.0;
  std::optional<std::size_t> shortest_used_hops;
};

struct OrgFairness {
  std::string id;
  double weight = 0.0;
  double true_egr = 0.0;
  double weighted_egr = 0.0;
};

struct FairnessReport {
  std::vector<PairFairness> pairs;  ///< descending true EGR, ties by pair index
  std::vector<OrgFairness> orgs;
  double corr_lambda = 0.0;
  double corr_fidelity = 0.0;
  double corr_length = 0.0;
  double corr_composite = 0.0;  ///< against w * lambda / (F * L)
  std::size_t zero_rate_pairs = 0;
  double total_wegr = 0.0;
};

/// Rates at or below this count as zero.
inline constexpr double kPositiveRate = 1e-9;

/// Throws ValidationError when the solution is not optimal or the correlations are
/// undefined (fewer than two served pairs, or constant inputs).
FairnessReport fairness_report(const Workload& workload, const AllocationProblem& problem,
                               const AllocationSolution& solution);

// Output files. Every CSV starts with a "# config <hash>" comment line.
void write_selection(std::ostream& out, const NetworkGraph& graph, const RouteSelection& routes);
RouteSelection load_selection(std::istream& in, const NetworkGraph& graph,
                              std::size_t pair_count);
RouteSelection load_selection_file(const std::filesystem::path& path, const NetworkGraph& graph,
                                   std::size_t pair_count);

void write_sweep_csv(std::ostream& out, const ScenarioResult& result, bool record_timing);
void write_ga_trace_csv(std::ostream& out, const ScenarioResult& result, bool record_timing);
void write_rl_trace_csv(std::ostream& out, const ScenarioResult& result);
void write_fairness_pairs_csv(std::ostream& out, std::uint64_t hash,
                              const FairnessReport& report);
void write_fairness_orgs_csv(std::ostream& out, std::uint64_t hash,
                             const FairnessReport& report);
void write_correlations_csv(std::ostream& out, std::uint64_t hash, const FairnessReport& report);

struct ManifestEntry {
  std::string file;
  std::string description;
};
void write_manifest(const std::filesystem::path& path, const HarnessConfig& config,
                    std::string_view command, const std::vector<ManifestEntry>& files,
                    const std::vector<double>& wall_seconds);

/// Gnuplot script plotting `csv` columns `x` against `y` (1-based) into `<stem>.png`.
void write_gnuplot(const std::filesystem::path& path, std::string_view title,
                   std::string_view csv, int x_column, int y_column, std::string_view x_label,
                   std::string_view y_label, bool histogram = false);

std::string config_header(std::uint64_t hash);

}  // namespace qvpn
