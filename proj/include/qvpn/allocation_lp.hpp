#pragma once

#include <cstddef>
#include <vector>

#include "qvpn/quantum_math.hpp"
#include "qvpn/simplex.hpp"
#include "qvpn/topology.hpp"
#include "qvpn/workload.hpp"

namespace qvpn {

/// One selected path for a pair, given by node sequence and link-level threshold.
struct RouteChoice {
  std::vector<std::size_t> nodes;
  double link_threshold = 0.8;
  bool operator==(const RouteChoice&) const = default;
};

/// Per workload pair (same order as Workload::pairs), the selected routes.
using RouteSelection = std::vector<std::vector<RouteChoice>>;

/// A feasible (pair, path, strategy) column of the allocation LP.
struct RouteVariable {
  std::size_t pair = 0;
  std::size_t route = 0;  ///< position in the pair's route list
  std::vector<std::size_t> links;
  std::vector<double> link_overhead;  ///< g for each entry of `links`
  std::size_t hops = 0;
};

enum class RowKind { Capacity, MinRate, MaxRate };

struct RowInfo {
  RowKind kind;
  std::size_t index;  ///< link index for Capacity, pair index otherwise
};

/// Weighted-EGR maximisation LP for a fixed path/strategy selection.
struct AllocationProblem {
  std::vector<RouteVariable> variables;
  std::vector<RowInfo> rows;
  LinearProgram lp;
  std::size_t pair_count = 0;
  double swap_success_prob = 1.0;
};

enum class AllocationStatus { Optimal, Infeasible };

struct AllocationSolution {
  AllocationStatus status = AllocationStatus::Infeasible;
  std::vector<double> rates;  ///< per AllocationProblem::variables entry
  double wegr = 0.0;          ///< 0 when infeasible
  std::vector<double> true_egr_per_pair;
};

/// Builds the LP from already-evaluated columns. Infeasible columns must already be
/// excluded. Capacity rows cover every touched link (ascending link index), then for each
/// pair a min row (when R_min > 0) and a max row (when R_max is finite and the pair has a
/// column).
AllocationProblem assemble_problem(const NetworkGraph& graph, const Workload& workload,
                                   std::vector<RouteVariable> variables,
                                   double swap_success_prob);

/// Evaluates distillation overheads for every route and assembles the LP. Routes whose
/// strategy cannot reach the pair's threshold are dropped. Throws ValidationError when a
/// route is not a simple path joining its pair's endpoints, or when a pair has more than
/// `max_paths_per_pair` routes.
AllocationProblem build_problem(const NetworkGraph& graph, const Workload& workload,
                                const RouteSelection& selection, const NoiseParams& noise,
                                int max_rounds = kDefaultMaxRounds,
                                std::size_t max_paths_per_pair = static_cast<std::size_t>(-1));

AllocationSolution solve(const AllocationProblem& problem,
                         const LpSolver& solver = default_lp_solver());

/// build_problem + solve; 0 when infeasible.
double wegr_of_selection(const NetworkGraph& graph, const Workload& workload,
                         const RouteSelection& selection, const NoiseParams& noise);

}  // namespace qvpn
