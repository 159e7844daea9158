#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <vector>

#include "qvpn/allocation_lp.hpp"
#include "qvpn/pathfinding.hpp"
#include "qvpn/quantum_math.hpp"
#include "qvpn/topology.hpp"
#include "qvpn/workload.hpp"

namespace qvpn {

/// Index of a candidate path of a pair plus index of a distillation strategy.
struct PathChoice {
  std::size_t candidate = 0;
  std::size_t strategy = 0;
  auto operator<=>(const PathChoice&) const = default;
};

/// Per workload pair, the chosen (candidate, strategy) entries.
using Selection = std::vector<std::vector<PathChoice>>;

struct OverheadEntry {
  bool feasible = false;
  std::vector<double> per_link;
};

/// table[pair][candidate][strategy]
using OverheadTable = std::vector<std::vector<std::vector<OverheadEntry>>>;

enum class Execution { Serial, Parallel };

struct ContextOptions {
  std::size_t k = 5;
  std::vector<WeightScheme> schemes{kAllSchemes[0], kAllSchemes[1], kAllSchemes[2]};
  std::size_t max_paths_per_pair = 3;
  NoiseParams noise;
  StrategyCatalog catalog = StrategyCatalog::uniform_default();
  /// Link threshold used by the shortest-path baselines (snapped to the catalog).
  double baseline_threshold = 0.992;
};

/// Everything the optimisers need about one instance: candidate paths per pair, the
/// overhead of every (pair, candidate, strategy) triple and LP assembly from index-based
/// selections. Immutable after construction.
class ProblemContext {
 public:
  ProblemContext(NetworkGraph graph, Workload workload, ContextOptions options,
                 Execution execution = Execution::Parallel);

  const NetworkGraph& graph() const noexcept { return graph_; }
  const Workload& workload() const noexcept { return workload_; }
  const ContextOptions& options() const noexcept { return options_; }
  const StrategyCatalog& catalog() const noexcept { return options_.catalog; }
  std::size_t pair_count() const noexcept { return workload_.pairs.size(); }
  std::size_t max_paths_per_pair() const noexcept { return options_.max_paths_per_pair; }

  const std::vector<CandidatePath>& candidates(std::size_t pair) const {
    return candidates_.at(pair);
  }
  /// Candidate indices of `scheme`'s k shortest paths for `pair`, in rank order.
  const std::vector<std::size_t>& ranking(std::size_t pair, WeightScheme scheme) const;
  const OverheadEntry& overhead(std::size_t pair, std::size_t candidate,
                                std::size_t strategy) const {
    return table_.at(pair).at(candidate).at(strategy);
  }
  const OverheadTable& overhead_table() const noexcept { return table_; }

  /// Pairs that have at least one candidate path.
  const std::vector<std::size_t>& active_pairs() const noexcept { return active_; }

  /// Drops duplicate candidates within each pair (first occurrence wins) and sorts.
  static Selection canonical(Selection selection);

  AllocationProblem build(const Selection& selection) const;
  AllocationSolution evaluate(const Selection& selection) const;
  double wegr(const Selection& selection) const;

  /// Top-P_max paths of `scheme` for every pair, all at the baseline threshold.
  Selection baseline(WeightScheme scheme) const;
  std::size_t baseline_strategy() const;

  RouteSelection to_routes(const Selection& selection) const;
  /// Maps explicit routes back onto candidate/strategy indices; nullopt when a route is
  /// not among the candidates or its threshold is not in the catalog.
  std::optional<Selection> from_routes(const RouteSelection& routes) const;

 private:
  NetworkGraph graph_;
  Workload workload_;
  ContextOptions options_;
  std::vector<std::vector<CandidatePath>> candidates_;
  std::vector<std::vector<std::vector<std::size_t>>> ranking_;  // [pair][scheme]
  std::vector<std::size_t> active_;
  OverheadTable table_;
};

}  // namespace qvpn
