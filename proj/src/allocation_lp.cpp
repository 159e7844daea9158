#include "qvpn/allocation_lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qvpn/errors.hpp"
#include "qvpn/pathfinding.hpp"

namespace qvpn {

AllocationProblem assemble_problem(const NetworkGraph& graph, const Workload& workload,
                                   std::vector<RouteVariable> variables,
                                   double swap_success_prob) {
  AllocationProblem problem;
  problem.pair_count = workload.pairs.size();
  problem.swap_success_prob = swap_success_prob;
  problem.variables = std::move(variables);

  auto& lp = problem.lp;
  lp.cols = problem.variables.size();
  lp.c.resize(lp.cols);
  for (std::size_t j = 0; j < lp.cols; ++j) {
    const auto& v = problem.variables[j];
    const auto& pair = workload.pairs.at(v.pair);
    lp.c[j] = workload.orgs.at(pair.org).weight * pair.lambda *
              std::pow(swap_success_prob, static_cast<double>(v.hops) - 1.0);
  }

  std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> by_link;
  for (std::size_t j = 0; j < lp.cols; ++j) {
    const auto& v = problem.variables[j];
    for (std::size_t i = 0; i < v.links.size(); ++i)
      by_link[v.links[i]].emplace_back(j, v.link_overhead[i]);
  }
  for (const auto& [link, entries] : by_link) {
    const auto r = lp.add_row(graph.links().at(link).capacity_eprps);
    for (const auto& [j, g] : entries) lp.at(r, j) += g;
    problem.rows.push_back({RowKind::Capacity, link});
  }

  std::vector<std::vector<std::size_t>> columns_of(workload.pairs.size());
  for (std::size_t j = 0; j < lp.cols; ++j) columns_of.at(problem.variables[j].pair).push_back(j);
  for (std::size_t u = 0; u < workload.pairs.size(); ++u) {
    const auto& pair = workload.pairs[u];
    if (pair.r_min > 0.0) {
      const auto r = lp.add_row(-pair.r_min);
      for (auto j : columns_of[u]) lp.at(r, j) = -1.0;
      problem.rows.push_back({RowKind::MinRate, u});
    }
    if (std::isfinite(pair.r_max) && !columns_of[u].empty()) {
      const auto r = lp.add_row(pair.r_max);
      for (auto j : columns_of[u]) lp.at(r, j) = 1.0;
      problem.rows.push_back({RowKind::MaxRate, u});
    }
  }
  return problem;
}

AllocationProblem build_problem(const NetworkGraph& graph, const Workload& workload,
                                const RouteSelection& selection, const NoiseParams& noise,
                                int max_rounds, std::size_t max_paths_per_pair) {
  if (selection.size() != workload.pairs.size())
    throw ValidationError("selection has " + std::to_string(selection.size()) +
                          " pair entries, workload has " + std::to_string(workload.pairs.size()));
  std::vector<RouteVariable> vars;
  for (std::size_t u = 0; u < selection.size(); ++u) {
    const auto& pair = workload.pairs[u];
    if (selection[u].size() > max_paths_per_pair)
      throw ValidationError("pair " + std::to_string(u) + " selects more than " +
                            std::to_string(max_paths_per_pair) + " paths");
    const auto a = graph.node_index(pair.a);
    const auto b = graph.node_index(pair.b);
    for (std::size_t r = 0; r < selection[u].size(); ++r) {
      const auto& route = selection[u][r];
      const auto path = path_from_nodes(graph, route.nodes);
      if (!path)
        throw ValidationError("pair " + std::to_string(u) + " route " + std::to_string(r) +
                              " is not a simple path of the graph");
      const auto front = path->nodes.front();
      const auto back = path->nodes.back();
      if (!((front == a && back == b) || (front == b && back == a)))
        throw ValidationError("pair " + std::to_string(u) + " route " + std::to_string(r) +
                              " endpoints do not match the pair");
      std::vector<double> fids;
      for (auto l : path->links) fids.push_back(graph.links()[l].base_fidelity);
      const auto over = path_overhead(fids, {route.link_threshold, max_rounds},
                                      pair.fidelity_threshold, noise);
      if (!over.feasible) continue;
      vars.push_back({u, r, path->links, over.per_link, path->hop_count()});
    }
  }
  return assemble_problem(graph, workload, std::move(vars), noise.swap_success_prob);
}

AllocationSolution solve(const AllocationProblem& problem, const LpSolver& solver) {
  AllocationSolution sol;
  sol.true_egr_per_pair.assign(problem.pair_count, 0.0);
  const auto result = solver.solve(problem.lp);
  if (result.status == LpStatus::Unbounded)
    throw LpNumericalError("allocation LP reported unbounded");
  if (result.status == LpStatus::Infeasible) {
    sol.status = AllocationStatus::Infeasible;
    sol.rates.assign(problem.variables.size(), 0.0);
    return sol;
  }
  sol.status = AllocationStatus::Optimal;
  sol.rates = result.x;
  sol.wegr = result.objective;
  for (std::size_t j = 0; j < problem.variables.size(); ++j) {
    const auto& v = problem.variables[j];
    sol.true_egr_per_pair[v.pair] +=
        sol.rates[j] * std::pow(problem.swap_success_prob, static_cast<double>(v.hops) - 1.0);
  }
  return sol;
}

double wegr_of_selection(const NetworkGraph& graph, const Workload& workload,
                         const RouteSelection& selection, const NoiseParams& noise) {
  return solve(build_problem(graph, workload, selection, noise)).wegr;
}

}  // namespace qvpn
