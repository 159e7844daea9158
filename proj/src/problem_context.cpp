#include "qvpn/problem_context.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qvpn/errors.hpp"
#include "qvpn/kernels.hpp"

namespace qvpn {

ProblemContext::ProblemContext(NetworkGraph graph, Workload workload, ContextOptions options,
                               Execution execution)
    : graph_(std::move(graph)), workload_(std::move(workload)), options_(std::move(options)) {
  if (options_.k < 1) throw ConfigError("candidate path count k must be >= 1");
  if (options_.max_paths_per_pair < 1) throw ConfigError("max_paths_per_pair must be >= 1");
  if (options_.schemes.empty()) throw ConfigError("at least one weight scheme is required");
  options_.noise.validate();
  validate_workload(workload_, &graph_);

  const std::size_t pairs = workload_.pairs.size();
  candidates_.resize(pairs);
  ranking_.assign(pairs, std::vector<std::vector<std::size_t>>(3));
  for (std::size_t u = 0; u < pairs; ++u) {
    const auto src = graph_.node_index(workload_.pairs[u].a);
    const auto dst = graph_.node_index(workload_.pairs[u].b);
    std::map<std::vector<std::size_t>, std::size_t> index;
    for (auto scheme : options_.schemes) {
      auto& rank = ranking_[u][static_cast<std::size_t>(scheme)];
      for (auto& p : yen_k_shortest(graph_, src, dst, options_.k, scheme)) {
        auto [it, inserted] = index.emplace(p.links, candidates_[u].size());
        if (inserted) candidates_[u].push_back(std::move(p));
        rank.push_back(it->second);
      }
    }
    if (!candidates_[u].empty()) active_.push_back(u);
  }
  table_ = compute_overhead_table(graph_, workload_, candidates_, options_.catalog,
                                  options_.noise, execution);
}

const std::vector<std::size_t>& ProblemContext::ranking(std::size_t pair,
                                                        WeightScheme scheme) const {
  return ranking_.at(pair).at(static_cast<std::size_t>(scheme));
}

Selection ProblemContext::canonical(Selection selection) {
  for (auto& choices : selection) {
    std::vector<PathChoice> kept;
    std::set<std::size_t> seen;
    for (const auto& c : choices)
      if (seen.insert(c.candidate).second) kept.push_back(c);
    std::sort(kept.begin(), kept.end());
    choices = std::move(kept);
  }
  return selection;
}

AllocationProblem ProblemContext::build(const Selection& selection) const {
  if (selection.size() != pair_count())
    throw ValidationError("selection size does not match the workload");
  std::vector<RouteVariable> vars;
  for (std::size_t u = 0; u < selection.size(); ++u) {
    if (selection[u].size() > max_paths_per_pair())
      throw ValidationError("pair " + std::to_string(u) + " exceeds max_paths_per_pair");
    for (std::size_t r = 0; r < selection[u].size(); ++r) {
      const auto& choice = selection[u][r];
      const auto& entry = overhead(u, choice.candidate, choice.strategy);
      if (!entry.feasible) continue;
      const auto& path = candidates_[u][choice.candidate];
      vars.push_back({u, r, path.links, entry.per_link, path.hop_count()});
    }
  }
  return assemble_problem(graph_, workload_, std::move(vars), options_.noise.swap_success_prob);
}

AllocationSolution ProblemContext::evaluate(const Selection& selection) const {
  return solve(build(selection));
}

double ProblemContext::wegr(const Selection& selection) const {
  return evaluate(selection).wegr;
}

std::size_t ProblemContext::baseline_strategy() const {
  return options_.catalog.nearest(options_.baseline_threshold);
}

Selection ProblemContext::baseline(WeightScheme scheme) const {
  const auto strategy = baseline_strategy();
  Selection sel(pair_count());
  for (std::size_t u = 0; u < pair_count(); ++u) {
    const auto& rank = ranking(u, scheme);
    for (std::size_t r = 0; r < rank.size() && sel[u].size() < max_paths_per_pair(); ++r)
      sel[u].push_back({rank[r], strategy});
  }
  return canonical(std::move(sel));
}

RouteSelection ProblemContext::to_routes(const Selection& selection) const {
  RouteSelection routes(selection.size());
  for (std::size_t u = 0; u < selection.size(); ++u)
    for (const auto& c : selection[u])
      routes[u].push_back({candidates_.at(u).at(c.candidate).nodes, catalog().threshold(c.strategy)});
  return routes;
}

std::optional<Selection> ProblemContext::from_routes(const RouteSelection& routes) const {
  if (routes.size() != pair_count()) return std::nullopt;
  Selection sel(pair_count());
  for (std::size_t u = 0; u < routes.size(); ++u) {
    if (routes[u].size() > max_paths_per_pair()) return std::nullopt;
    for (const auto& route : routes[u]) {
      std::optional<std::size_t> cand;
      for (std::size_t i = 0; i < candidates_[u].size() && !cand; ++i) {
        auto nodes = candidates_[u][i].nodes;
        if (nodes == route.nodes) cand = i;
        std::reverse(nodes.begin(), nodes.end());
        if (nodes == route.nodes) cand = i;
      }
      std::optional<std::size_t> strat;
      for (std::size_t s = 0; s < catalog().size() && !strat; ++s)
        if (std::abs(catalog().threshold(s) - route.link_threshold) <= kFidelityTolerance)
          strat = s;
      if (!cand || !strat) return std::nullopt;
      sel[u].push_back({*cand, *strat});
    }
  }
  return canonical(std::move(sel));
}

}  // namespace qvpn
