#include <doctest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "qvpn/pathfinding.hpp"
#include "qvpn/random.hpp"
#include "test_helpers.hpp"

using namespace qvpn;
using qvpn::test::parse_topology;

namespace {

std::vector<std::string> ids(const NetworkGraph& g, const std::vector<std::size_t>& nodes) {
  std::vector<std::string> out;
  for (auto n : nodes) out.push_back(g.nodes()[n].id);
  return out;
}

NetworkGraph random_graph(std::uint64_t seed, int nodes, double p) {
  Rng rng(seed);
  std::string text = "qvpn-topology v1\n";
  for (int i = 0; i < nodes; ++i) text += "node v" + std::to_string(i) + "\n";
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 1; j < nodes; ++j)
      if (rng.bernoulli(p))
        text += "link v" + std::to_string(i) + " v" + std::to_string(j) + " " +
                std::to_string(1 + rng.index(30)) + "\n";
  return parse_topology(text);
}

bool simple_and_connected(const NetworkGraph& g, const CandidatePath& p, std::size_t s,
                          std::size_t d) {
  if (p.nodes.front() != s || p.nodes.back() != d) return false;
  if (std::set<std::size_t>(p.nodes.begin(), p.nodes.end()).size() != p.nodes.size())
    return false;
  if (p.links.size() + 1 != p.nodes.size()) return false;
  for (std::size_t i = 0; i < p.links.size(); ++i)
    if (g.link_between(p.nodes[i], p.nodes[i + 1]) != p.links[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("triangle") {
  const auto g = parse_topology("qvpn-topology v1\nnode A\nnode B\nnode C\n"
                                "link A B 1\nlink B C 1\nlink A C 1\n");
  const auto paths = yen_k_shortest(g, 0, 1, 2, WeightScheme::Hop);
  REQUIRE(paths.size() == 2);
  CHECK(ids(g, paths[0].nodes) == std::vector<std::string>{"A", "B"});
  CHECK(ids(g, paths[1].nodes) == std::vector<std::string>{"A", "C", "B"});
  CHECK(paths[0].rank == 1);
  CHECK(paths[1].rank == 2);
  CHECK(yen_k_shortest(g, 0, 1, 10, WeightScheme::Hop).size() == 2);
}

TEST_CASE("disconnected and invalid requests") {
  const auto g = parse_topology("qvpn-topology v1\nnode A\nnode B\nnode C\nlink A B 1\n");
  CHECK(yen_k_shortest(g, 0, 2, 3, WeightScheme::Hop).empty());
  CHECK_THROWS_AS(yen_k_shortest(g, 0, 0, 3, WeightScheme::Hop), std::invalid_argument);
  CHECK_THROWS_AS(yen_k_shortest(g, 0, 1, 0, WeightScheme::Hop), std::invalid_argument);
  CHECK(build_candidate_set(g, 0, 2, 5, kAllSchemes).empty());
}

TEST_CASE("ties follow node-id order, not declaration order") {
  // Both two-hop routes tie; "a" sorts before "z" although it is declared later.
  const auto g = parse_topology("qvpn-topology v1\nnode S\nnode T\nnode z\nnode a\n"
                                "link S z 1\nlink z T 1\nlink S a 1\nlink a T 1\n");
  const auto paths = yen_k_shortest(g, 0, 1, 2, WeightScheme::Hop);
  REQUIRE(paths.size() == 2);
  CHECK(ids(g, paths[0].nodes) == std::vector<std::string>{"S", "a", "T"});
  CHECK(ids(g, paths[1].nodes) == std::vector<std::string>{"S", "z", "T"});
}

TEST_CASE("yen matches exhaustive enumeration on random graphs") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto g = random_graph(seed, 5 + static_cast<int>(seed % 3), 0.5);
    for (auto scheme : kAllSchemes) {
      const auto w = link_weights(g, scheme);
      for (std::size_t s = 0; s < g.node_count(); ++s)
        for (std::size_t d = 0; d < g.node_count(); ++d) {
          if (s == d) continue;
          auto all = oracle::enumerate_simple_paths(g, s, d, 8);
          std::vector<std::pair<double, std::vector<std::string>>> ranked;
          for (const auto& p : all) {
            double total = 0.0;
            for (std::size_t i = 0; i + 1 < p.size(); ++i) total += w[*g.link_between(p[i], p[i + 1])];
            ranked.push_back({total, ids(g, p)});
          }
          std::sort(ranked.begin(), ranked.end());
          const auto yen = yen_k_shortest(g, s, d, 3, scheme);
          REQUIRE(yen.size() == std::min<std::size_t>(3, ranked.size()));
          for (std::size_t r = 0; r < yen.size(); ++r) {
            CHECK(simple_and_connected(g, yen[r], s, d));
            CHECK(yen[r].weight == doctest::Approx(ranked[r].first).epsilon(1e-12));
            if (scheme == WeightScheme::Hop) CHECK(ids(g, yen[r].nodes) == ranked[r].second);
          }
        }
    }
  }
}

TEST_CASE("k=1 under HOP is a breadth-first shortest path") {
  const auto g = load_topology_file(QVPN_DATA_DIR "/topologies/synthetic_surfnet50.topo");
  for (std::size_t d = 1; d < g.node_count(); ++d) {
    const auto p = yen_k_shortest(g, 0, d, 1, WeightScheme::Hop);
    REQUIRE(p.size() == 1);
    CHECK(static_cast<int>(p[0].hop_count()) == *hop_distance(g, 0, d));
  }
}

TEST_CASE("candidate sets") {
  const auto g = load_topology_file(QVPN_DATA_DIR "/topologies/synthetic_surfnet50.topo");
  const auto e = engineer_repeaters(g, 20.0, 10.0);
  for (std::size_t d : {7U, 21U, 42U}) {
    const auto set = build_candidate_set(e, 0, d, 5, kAllSchemes);
    CHECK(set.size() <= 15);
    CHECK(!set.empty());
    std::set<std::vector<std::size_t>> links;
    for (const auto& p : set) {
      CHECK(simple_and_connected(e, p, 0, d));
      CHECK(links.insert(p.links).second);
    }
    CHECK(build_candidate_set(e, 0, d, 5, kAllSchemes).size() == set.size());
  }

  // Uniform capacities make every scheme rank identically.
  const auto uniform = parse_topology("qvpn-topology v1\nnode A\nnode B\nnode C\nnode D\n"
                                      "link A B 5\nlink B D 5\nlink A C 5\nlink C D 5\nlink B C 5\n");
  const std::array<WeightScheme, 1> hop{WeightScheme::Hop};
  CHECK(build_candidate_set(uniform, 0, 3, 5, kAllSchemes).size() ==
        build_candidate_set(uniform, 0, 3, 5, hop).size());

  // An adjacent pair's direct link ranks first under every scheme.
  for (auto scheme : kAllSchemes) {
    const auto p = yen_k_shortest(uniform, 0, 1, 3, scheme);
    CHECK(p[0].nodes == std::vector<std::size_t>{0, 1});
  }
}

TEST_CASE("zero-capacity links are excluded from capacity-weighted schemes") {
  const auto g = parse_topology("qvpn-topology v1\nnode A\nnode B\nnode C\n"
                                "link A B 1\nlink B C 1\nlink A C 1\n");
  auto links = g.links();
  links[2].capacity_eprps = 0.0;
  const NetworkGraph cut(g.nodes(), links, g.params());
  const auto w = link_weights(cut, WeightScheme::InvEgr);
  CHECK(std::isinf(w[2]));
  const auto p = yen_k_shortest(cut, 0, 2, 3, WeightScheme::InvEgrSq);
  REQUIRE(p.size() == 1);
  CHECK(p[0].nodes == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("path_from_nodes") {
  const auto g = parse_topology("qvpn-topology v1\nnode A\nnode B\nnode C\n"
                                "link A B 1\nlink B C 1\n");
  const std::vector<std::size_t> ok{0, 1, 2}, gap{0, 2}, loop{0, 1, 0};
  CHECK(path_from_nodes(g, ok).has_value());
  CHECK_FALSE(path_from_nodes(g, gap).has_value());
  CHECK_FALSE(path_from_nodes(g, loop).has_value());
}
