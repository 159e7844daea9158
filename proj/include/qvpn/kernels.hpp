#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qvpn/problem_context.hpp"

namespace qvpn {

/// Data-parallel kernels. Each has a serial reference path selected with
/// Execution::Serial; both paths produce identical results.

/// Overhead of every (pair, candidate, strategy) triple; parallel over pairs.
OverheadTable compute_overhead_table(const NetworkGraph& graph, const Workload& workload,
                                     const std::vector<std::vector<CandidatePath>>& candidates,
                                     const StrategyCatalog& catalog, const NoiseParams& noise,
                                     Execution execution);

/// W-EGR of each selection (0 when infeasible); parallel over selections. An exception in
/// any evaluation is rethrown after the batch with the failing index in the message.
std::vector<double> evaluate_wegr_batch(const ProblemContext& context,
                                        std::span<const Selection> selections,
                                        Execution execution);

/// Generic fan-out used for environment calls: results[i] = fn(i).
std::vector<double> parallel_map(std::size_t count, const std::function<double(std::size_t)>& fn,
                                 Execution execution);

}  // namespace qvpn
