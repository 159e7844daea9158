#include "qvpn/kernels.hpp"

#include <exception>
#include <stdexcept>
#include <string>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "qvpn/errors.hpp"

namespace qvpn {

namespace {

std::vector<OverheadEntry> pair_candidate_overheads(const NetworkGraph& graph,
                                                    const CandidatePath& path,
                                                    const StrategyCatalog& catalog,
                                                    double user_threshold,
                                                    const NoiseParams& noise) {
  std::vector<double> fids;
  fids.reserve(path.links.size());
  for (auto l : path.links) fids.push_back(graph.links()[l].base_fidelity);
  std::vector<OverheadEntry> out(catalog.size());
  for (std::size_t s = 0; s < catalog.size(); ++s) {
    auto over = path_overhead(fids, catalog.strategy(s), user_threshold, noise);
    out[s].feasible = over.feasible;
    if (over.feasible) out[s].per_link = std::move(over.per_link);
  }
  return out;
}

void rethrow_first(const std::vector<std::exception_ptr>& errors, const char* what) {
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const LpNumericalError& e) {
      throw LpNumericalError(std::string(what) + " " + std::to_string(i) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(std::string(what) + " " + std::to_string(i) + ": " + e.what());
    }
  }
}

}  // namespace

OverheadTable compute_overhead_table(const NetworkGraph& graph, const Workload& workload,
                                     const std::vector<std::vector<CandidatePath>>& candidates,
                                     const StrategyCatalog& catalog, const NoiseParams& noise,
                                     Execution execution) {
  const auto pairs = static_cast<long>(candidates.size());
  OverheadTable table(candidates.size());
  if (execution == Execution::Serial) {
    for (long u = 0; u < pairs; ++u) {
      const auto pu = static_cast<std::size_t>(u);
      for (const auto& path : candidates[pu])
        table[pu].push_back(pair_candidate_overheads(
            graph, path, catalog, workload.pairs[pu].fidelity_threshold, noise));
    }
    return table;
  }
  std::vector<std::exception_ptr> errors(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (long u = 0; u < pairs; ++u) {
    const auto pu = static_cast<std::size_t>(u);
    try {
      for (const auto& path : candidates[pu])
        table[pu].push_back(pair_candidate_overheads(
            graph, path, catalog, workload.pairs[pu].fidelity_threshold, noise));
    } catch (...) {
      errors[pu] = std::current_exception();
    }
  }
  rethrow_first(errors, "overhead table pair");
  return table;
}

std::vector<double> parallel_map(std::size_t count, const std::function<double(std::size_t)>& fn,
                                 Execution execution) {
  std::vector<double> out(count, 0.0);
  if (execution == Execution::Serial) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto pi = static_cast<std::size_t>(i);
    try {
      out[pi] = fn(pi);
    } catch (...) {
      errors[pi] = std::current_exception();
    }
  }
  rethrow_first(errors, "item");
  return out;
}

std::vector<double> evaluate_wegr_batch(const ProblemContext& context,
                                        std::span<const Selection> selections,
                                        Execution execution) {
  return parallel_map(
      selections.size(), [&](std::size_t i) { return context.wegr(selections[i]); }, execution);
}

}  // namespace qvpn
