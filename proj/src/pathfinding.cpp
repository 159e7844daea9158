#include "qvpn/pathfinding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace qvpn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Blocked {
  std::vector<char> node;
  std::vector<char> link;
};

/// Position of each node in the ascending order of node ids.
std::vector<std::size_t> id_ranks(const NetworkGraph& graph) {
  std::vector<std::size_t> order(graph.node_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return graph.nodes()[x].id < graph.nodes()[y].id;
  });
  std::vector<std::size_t> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

/// Shortest path from src to dst avoiding blocked elements, smallest by node-id sequence.
std::optional<std::vector<std::size_t>> shortest_path(const NetworkGraph& graph,
                                                      const std::vector<double>& weight,
                                                      const std::vector<std::size_t>& rank,
                                                      std::size_t src, std::size_t dst,
                                                      const Blocked& blocked) {
  const std::size_t n = graph.node_count();
  std::vector<double> dist(n, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  // Distances to dst, so that a greedy forward walk can pick the smallest next hop.
  dist[dst] = 0.0;
  heap.push({0.0, dst});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (const auto& nb : graph.neighbors(v)) {
      if (blocked.node[nb.node] || blocked.link[nb.link] || !std::isfinite(weight[nb.link]))
        continue;
      const double nd = d + weight[nb.link];
      if (nd < dist[nb.node]) {
        dist[nb.node] = nd;
        heap.push({nd, nb.node});
      }
    }
  }
  if (!std::isfinite(dist[src])) return std::nullopt;

  std::vector<std::size_t> path{src};
  std::vector<char> on_path(n, 0);
  on_path[src] = 1;
  std::size_t v = src;
  while (v != dst) {
    std::optional<std::size_t> next;
    const double tol = 1e-12 * dist[v];
    for (const auto& nb : graph.neighbors(v)) {
      if (blocked.node[nb.node] || blocked.link[nb.link] || on_path[nb.node] ||
          !std::isfinite(dist[nb.node]))
        continue;
      if (std::abs(weight[nb.link] + dist[nb.node] - dist[v]) <= tol &&
          (!next || rank[nb.node] < rank[*next]))
        next = nb.node;
    }
    if (!next) return std::nullopt;
    v = *next;
    on_path[v] = 1;
    path.push_back(v);
  }
  return path;
}

CandidatePath make_candidate(const NetworkGraph& graph, const std::vector<double>& weight,
                             std::vector<std::size_t> nodes, WeightScheme scheme) {
  CandidatePath p;
  p.scheme = scheme;
  p.bottleneck_capacity = kInf;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const auto l = *graph.link_between(nodes[i], nodes[i + 1]);
    p.links.push_back(l);
    p.weight += weight[l];
    p.bottleneck_capacity = std::min(p.bottleneck_capacity, graph.links()[l].capacity_eprps);
  }
  p.nodes = std::move(nodes);
  return p;
}

struct PathOrder {
  const std::vector<std::size_t>* rank;
  bool operator()(const CandidatePath& x, const CandidatePath& y) const {
    if (x.weight != y.weight) return x.weight < y.weight;
    return std::lexicographical_compare(
        x.nodes.begin(), x.nodes.end(), y.nodes.begin(), y.nodes.end(),
        [this](std::size_t a, std::size_t b) { return (*rank)[a] < (*rank)[b]; });
  }
};

}  // namespace

std::string_view scheme_name(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::Hop:
      return "hop";
    case WeightScheme::InvEgr:
      return "inv_egr";
    case WeightScheme::InvEgrSq:
      return "inv_egr_sq";
  }
  return "?";
}

std::optional<WeightScheme> parse_scheme(std::string_view name) {
  for (auto s : kAllSchemes)
    if (scheme_name(s) == name) return s;
  return std::nullopt;
}

std::vector<double> link_weights(const NetworkGraph& graph, WeightScheme scheme) {
  double max_capacity = 0.0;
  for (const auto& l : graph.links()) max_capacity = std::max(max_capacity, l.capacity_eprps);
  std::vector<double> w;
  w.reserve(graph.link_count());
  for (const auto& l : graph.links()) {
    switch (scheme) {
      case WeightScheme::Hop:
        w.push_back(1.0);
        break;
      case WeightScheme::InvEgr:
        w.push_back(l.capacity_eprps > 0.0 ? max_capacity / l.capacity_eprps : kInf);
        break;
      case WeightScheme::InvEgrSq: {
        const double r = l.capacity_eprps > 0.0 ? max_capacity / l.capacity_eprps : kInf;
        w.push_back(r * r);
        break;
      }
    }
  }
  return w;
}

std::vector<CandidatePath> yen_k_shortest(const NetworkGraph& graph, std::size_t src,
                                          std::size_t dst, std::size_t k, WeightScheme scheme) {
  if (src >= graph.node_count() || dst >= graph.node_count())
    throw std::out_of_range("yen_k_shortest: node index out of range");
  if (src == dst) throw std::invalid_argument("yen_k_shortest: src == dst");
  if (k == 0) throw std::invalid_argument("yen_k_shortest: k must be >= 1");

  const auto weight = link_weights(graph, scheme);
  const auto rank = id_ranks(graph);
  Blocked blocked{std::vector<char>(graph.node_count(), 0),
                  std::vector<char>(graph.link_count(), 0)};

  std::vector<CandidatePath> accepted;
  auto first = shortest_path(graph, weight, rank, src, dst, blocked);
  if (!first) return accepted;
  accepted.push_back(make_candidate(graph, weight, std::move(*first), scheme));

  std::set<CandidatePath, PathOrder> pool(PathOrder{&rank});
  std::set<std::vector<std::size_t>> known{accepted.front().nodes};

  while (accepted.size() < k) {
    const CandidatePath& prev = accepted.back();
    for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      std::fill(blocked.node.begin(), blocked.node.end(), 0);
      std::fill(blocked.link.begin(), blocked.link.end(), 0);
      const std::size_t spur = prev.nodes[i];
      for (const auto& p : accepted) {
        if (p.nodes.size() > i + 1 &&
            std::equal(p.nodes.begin(), p.nodes.begin() + static_cast<std::ptrdiff_t>(i + 1),
                       prev.nodes.begin()))
          blocked.link[p.links[i]] = 1;
      }
      for (std::size_t j = 0; j < i; ++j) blocked.node[prev.nodes[j]] = 1;

      auto spur_path = shortest_path(graph, weight, rank, spur, dst, blocked);
      if (!spur_path) continue;
      std::vector<std::size_t> total(prev.nodes.begin(),
                                     prev.nodes.begin() + static_cast<std::ptrdiff_t>(i));
      total.insert(total.end(), spur_path->begin(), spur_path->end());
      if (known.insert(total).second)
        pool.insert(make_candidate(graph, weight, std::move(total), scheme));
    }
    if (pool.empty()) break;
    accepted.push_back(*pool.begin());
    pool.erase(pool.begin());
  }
  for (std::size_t r = 0; r < accepted.size(); ++r) accepted[r].rank = static_cast<int>(r + 1);
  return accepted;
}

std::vector<CandidatePath> build_candidate_set(const NetworkGraph& graph, std::size_t src,
                                               std::size_t dst, std::size_t k,
                                               std::span<const WeightScheme> schemes) {
  std::vector<CandidatePath> out;
  std::set<std::vector<std::size_t>> seen;
  for (auto scheme : schemes) {
    for (auto& p : yen_k_shortest(graph, src, dst, k, scheme)) {
      if (seen.insert(p.links).second) out.push_back(std::move(p));
    }
  }
  return out;
}

std::optional<CandidatePath> path_from_nodes(const NetworkGraph& graph,
                                             std::span<const std::size_t> nodes) {
  if (nodes.size() < 2) return std::nullopt;
  std::set<std::size_t> distinct(nodes.begin(), nodes.end());
  if (distinct.size() != nodes.size()) return std::nullopt;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (nodes[i] >= graph.node_count() || !graph.link_between(nodes[i], nodes[i + 1]))
      return std::nullopt;
  }
  const auto weight = link_weights(graph, WeightScheme::Hop);
  return make_candidate(graph, weight, std::vector<std::size_t>(nodes.begin(), nodes.end()),
                        WeightScheme::Hop);
}

}  // namespace qvpn
