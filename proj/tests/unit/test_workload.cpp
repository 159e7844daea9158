#include <doctest.h>

#include <cmath>

#include <set>
#include <sstream>

#include "qvpn/errors.hpp"
#include "qvpn/stats.hpp"
#include "qvpn/workload.hpp"
#include "test_helpers.hpp"

using namespace qvpn;
using qvpn::test::parse_topology;
using qvpn::test::parse_workload;

namespace {
NetworkGraph fixture() {
  return load_topology_file(QVPN_DATA_DIR "/topologies/synthetic_surfnet50.topo");
}
std::string dump(const Workload& w) {
  std::ostringstream out;
  save_workload(out, w);
  return out.str();
}
}  // namespace

TEST_CASE("full-scale generation") {
  const auto g = fixture();
  const auto w = generate_workload(g, WorkloadParams{}, 3);
  CHECK(w.orgs.size() == 3);
  CHECK(w.pairs.size() == 150);
  for (const auto& o : w.orgs) CHECK((o.weight >= 0.1 && o.weight <= 1.0));
  for (const auto& p : w.pairs) {
    CHECK((p.fidelity_threshold >= 0.75 && p.fidelity_threshold <= 0.90));
    CHECK((p.lambda >= 0.3 && p.lambda <= 0.7));
    CHECK(p.r_min == 10.0);
    CHECK(p.r_max == 1000.0);
    CHECK(*hop_distance(g, g.node_index(p.a), g.node_index(p.b)) <= 7);
  }
  // Without replacement inside each organization.
  for (std::size_t k = 0; k < 3; ++k) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : w.pairs)
      if (p.org == k) CHECK(seen.insert({p.a, p.b}).second);
  }
}

TEST_CASE("hop cap on a star") {
  const auto g = parse_topology("qvpn-topology v1\nnode C\nnode L1\nnode L2\nnode L3\nnode L4\n"
                                "link C L1 1\nlink C L2 1\nlink C L3 1\nlink C L4 1\n");
  WorkloadParams p;
  p.num_orgs = 2;
  p.pairs_per_org = 4;
  p.hop_cap = 1;
  const auto w = generate_workload(g, p, 1);
  for (const auto& pair : w.pairs) CHECK((pair.a == "C" || pair.b == "C"));
  p.pairs_per_org = 5;
  CHECK_THROWS_AS(generate_workload(g, p, 1), ValidationError);
}

TEST_CASE("determinism and round trip") {
  const auto g = fixture();
  WorkloadParams p;
  p.random_r_max = true;
  const auto a = generate_workload(g, p, 42);
  const auto b = generate_workload(g, p, 42);
  CHECK(dump(a) == dump(b));
  CHECK(dump(generate_workload(g, p, 43)) != dump(a));
  CHECK(parse_workload(dump(a)) == a);
  for (const auto& pair : a.pairs) CHECK((pair.r_max >= 10.0 && pair.r_max <= 1000.0));
}

TEST_CASE("repeaters never become endpoints") {
  const auto g = engineer_repeaters(fixture(), 20.0, 10.0);
  const auto w = generate_workload(g, WorkloadParams{}, 9);
  for (const auto& p : w.pairs) {
    CHECK_FALSE(g.nodes()[g.node_index(p.a)].is_repeater);
    CHECK_FALSE(g.nodes()[g.node_index(p.b)].is_repeater);
  }
}

TEST_CASE("documents") {
  const auto w = parse_workload("qvpn-workload v1\norg acme 0.5\npair acme A B 0.4 0.8 10 inf\n");
  CHECK(w.orgs.size() == 1);
  CHECK(w.pairs.size() == 1);
  CHECK(std::isinf(w.pairs[0].r_max));
  validate_workload(w);

  try {
    parse_workload("qvpn-workload v1\norg acme 0.5\npair acme A B 0.4 1.2 10 100\n");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("fidelity") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_workload("qvpn-workload v1\npair ghost A B 0.4 0.8 10 100\n"),
                  ValidationError);
  CHECK_THROWS_AS(parse_workload("qvpn-workload v1\norg a 0.5\npair a A A 0.4 0.8 10 100\n"),
                  ValidationError);
  CHECK_THROWS_AS(parse_workload("qvpn-workload v1\norg a 0.5\npair a A B 0.4 0.8 100 10\n"),
                  ValidationError);
  CHECK_THROWS_AS(parse_workload("qvpn-workload v1\norg a 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_workload("qvpn-workload v1\norg a 0.5\npair a A B x 0.8 1 2\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_workload("nope\n"), ParseError);

  const auto g = parse_topology("qvpn-topology v1\nnode A\nnode B\n");
  CHECK_THROWS_AS(validate_workload(parse_workload("qvpn-workload v1\norg a 1\n"
                                                   "pair a A Z 0.4 0.8 10 100\n"),
                                    &g),
                  ValidationError);
}

TEST_CASE("generated distributions pass a KS check") {
  const auto g = load_topology_file(QVPN_DATA_DIR "/topologies/synthetic10.topo");
  WorkloadParams p;
  p.num_orgs = 10000;
  p.pairs_per_org = 1;
  p.random_r_max = true;
  const auto w = generate_workload(g, p, 2024);
  std::vector<double> weights, lambdas, fids, rmax;
  for (const auto& o : w.orgs) weights.push_back(o.weight);
  for (const auto& u : w.pairs) {
    lambdas.push_back(u.lambda);
    fids.push_back(u.fidelity_threshold);
    rmax.push_back(u.r_max);
  }
  const double crit = ks_critical_value(0.001, 10000);
  CHECK(ks_statistic_uniform(weights, 0.1, 1.0) < crit);
  CHECK(ks_statistic_uniform(lambdas, 0.3, 0.7) < crit);
  CHECK(ks_statistic_uniform(fids, 0.75, 0.90) < crit);
  CHECK(ks_statistic_uniform(rmax, 10.0, 1000.0) < crit);
  // A shifted range must be rejected, so the check has power.
  CHECK(ks_statistic_uniform(fids, 0.76, 0.91) > crit);
}
