#include "qvpn/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>

#include "qvpn/errors.hpp"
#include "qvpn/format.hpp"
#include "qvpn/random.hpp"

namespace qvpn {

namespace {

constexpr std::string_view kWorkloadHeader = "qvpn-workload v1";

std::string where(std::size_t line) {
  return line ? "line " + std::to_string(line) + ": " : std::string{};
}

void validate_pair(const UserPair& p, std::size_t org_count, std::size_t line) {
  if (p.org >= org_count) throw ValidationError(where(line) + "pair references unknown org");
  if (p.a == p.b) throw ValidationError(where(line) + "pair endpoints must differ ('" + p.a + "')");
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
    throw ValidationError(where(line) + "field lambda must be a nonnegative number");
  if (!(p.fidelity_threshold > 0.25 && p.fidelity_threshold < 1.0))
    throw ValidationError(where(line) + "field Fth=" + format_double(p.fidelity_threshold) +
                          " outside fidelity range (0.25,1)");
  if (!(p.r_min >= 0.0) || !std::isfinite(p.r_min))
    throw ValidationError(where(line) + "field Rmin must be finite and >= 0");
  if (!(p.r_max >= p.r_min))
    throw ValidationError(where(line) + "field Rmax must be >= Rmin");
}

void validate_org(const Organization& o, std::size_t line) {
  if (o.id.empty()) throw ValidationError(where(line) + "org with empty id");
  if (!(o.weight > 0.0) || !std::isfinite(o.weight))
    throw ValidationError(where(line) + "field w of org '" + o.id + "' must be positive");
}

void set_param(WorkloadParams& p, const std::string& key, const std::string& value,
               std::size_t line) {
  auto d = [&] { return parse_double(value, key, line); };
  auto i = [&] { return static_cast<int>(parse_int(value, key, line)); };
  if (key == "num_orgs") p.num_orgs = i();
  else if (key == "pairs_per_org") p.pairs_per_org = i();
  else if (key == "weight_lo") p.weight_lo = d();
  else if (key == "weight_hi") p.weight_hi = d();
  else if (key == "lambda_lo") p.lambda_lo = d();
  else if (key == "lambda_hi") p.lambda_hi = d();
  else if (key == "fidelity_lo") p.fidelity_lo = d();
  else if (key == "fidelity_hi") p.fidelity_hi = d();
  else if (key == "hop_cap") p.hop_cap = i();
  else if (key == "r_min") p.r_min = d();
  else if (key == "r_max") p.r_max = d();
  else if (key == "random_r_max") p.random_r_max = i() != 0;
  else throw ParseError("unknown workload param '" + key + "'", line);
}

}  // namespace

Workload generate_workload(const NetworkGraph& graph, const WorkloadParams& params,
                           std::uint64_t seed) {
  if (params.num_orgs < 1 || params.pairs_per_org < 1)
    throw ValidationError("workload needs at least one org and one pair per org");
  if (!(params.r_min >= 0.0 && params.r_max >= params.r_min))
    throw ValidationError("workload rate bounds must satisfy 0 <= r_min <= r_max");

  // Eligible endpoint pairs (i < j), non-repeaters within the hop cap.
  std::vector<std::pair<std::size_t, std::size_t>> eligible;
  const std::size_t n = graph.node_count();
  for (std::size_t src = 0; src < n; ++src) {
    if (graph.nodes()[src].is_repeater) continue;
    std::vector<int> dist(n, -1);
    std::queue<std::size_t> frontier;
    dist[src] = 0;
    frontier.push(src);
    while (!frontier.empty()) {
      const auto v = frontier.front();
      frontier.pop();
      if (dist[v] >= params.hop_cap) continue;
      for (const auto& nb : graph.neighbors(v)) {
        if (dist[nb.node] < 0) {
          dist[nb.node] = dist[v] + 1;
          frontier.push(nb.node);
        }
      }
    }
    for (std::size_t dst = src + 1; dst < n; ++dst) {
      if (dist[dst] > 0 && !graph.nodes()[dst].is_repeater) eligible.emplace_back(src, dst);
    }
  }
  const auto per_org = static_cast<std::size_t>(params.pairs_per_org);
  if (eligible.size() < per_org)
    throw ValidationError("graph supplies only " + std::to_string(eligible.size()) +
                          " eligible pairs under hop cap " + std::to_string(params.hop_cap) +
                          ", need " + std::to_string(per_org));

  Workload w;
  w.seed = seed;
  w.params = params;
  Rng rng(stream_seed({seed, 0x776f726b6c6f6164ULL}));
  for (int k = 0; k < params.num_orgs; ++k) {
    w.orgs.push_back({"org" + std::to_string(k), rng.uniform(params.weight_lo, params.weight_hi)});
    std::vector<std::size_t> order(eligible.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < per_org; ++i) {
      const std::size_t j = i + rng.index(order.size() - i);
      std::swap(order[i], order[j]);
      const auto [a, b] = eligible[order[i]];
      UserPair p;
      p.org = static_cast<std::size_t>(k);
      p.a = graph.nodes()[a].id;
      p.b = graph.nodes()[b].id;
      p.lambda = rng.uniform(params.lambda_lo, params.lambda_hi);
      p.fidelity_threshold = rng.uniform(params.fidelity_lo, params.fidelity_hi);
      p.r_min = params.r_min;
      p.r_max = params.random_r_max ? rng.uniform(params.r_min, params.r_max) : params.r_max;
      w.pairs.push_back(std::move(p));
    }
  }
  validate_workload(w, &graph);
  return w;
}

Workload load_workload(std::istream& in) {
  Workload w;
  std::map<std::string, std::size_t, std::less<>> org_index;
  bool header_seen = false;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto tok = tokenize_line(raw);
    if (tok.empty()) continue;
    if (!header_seen) {
      if (tok.size() != 2 || tok[0] + " " + tok[1] != kWorkloadHeader)
        throw ParseError("expected header '" + std::string(kWorkloadHeader) + "'", lineno);
      header_seen = true;
      continue;
    }
    const auto& kind = tok[0];
    if (kind == "seed") {
      if (tok.size() != 2) throw ParseError("seed line needs one value", lineno);
      w.seed = parse_u64(tok[1], "seed", lineno);
    } else if (kind == "param") {
      if (tok.size() != 3) throw ParseError("param line needs <key> <value>", lineno);
      set_param(w.params, tok[1], tok[2], lineno);
    } else if (kind == "org") {
      if (tok.size() != 3) throw ParseError("org line needs <id> <w>", lineno);
      Organization o{tok[1], parse_double(tok[2], "w", lineno)};
      validate_org(o, lineno);
      if (!org_index.emplace(o.id, w.orgs.size()).second)
        throw ValidationError(where(lineno) + "duplicate org id '" + o.id + "'");
      w.orgs.push_back(std::move(o));
    } else if (kind == "pair") {
      if (tok.size() != 8)
        throw ParseError("pair line needs <org> <a> <b> <lambda> <Fth> <Rmin> <Rmax>", lineno);
      auto it = org_index.find(tok[1]);
      if (it == org_index.end())
        throw ValidationError(where(lineno) + "pair references undeclared org '" + tok[1] + "'");
      UserPair p;
      p.org = it->second;
      p.a = tok[2];
      p.b = tok[3];
      p.lambda = parse_double(tok[4], "lambda", lineno);
      p.fidelity_threshold = parse_double(tok[5], "Fth", lineno);
      p.r_min = parse_double(tok[6], "Rmin", lineno);
      p.r_max = parse_double(tok[7], "Rmax", lineno);
      validate_pair(p, w.orgs.size(), lineno);
      w.pairs.push_back(std::move(p));
    } else {
      throw ParseError("unknown directive '" + kind + "'", lineno);
    }
  }
  if (!header_seen) throw ParseError("empty workload document");
  return w;
}

Workload load_workload_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open workload file '" + path.string() + "'");
  return load_workload(in);
}

void save_workload(std::ostream& out, const Workload& w) {
  const auto& p = w.params;
  out << kWorkloadHeader << '\n';
  out << "seed " << w.seed << '\n';
  out << "param num_orgs " << p.num_orgs << '\n';
  out << "param pairs_per_org " << p.pairs_per_org << '\n';
  out << "param weight_lo " << format_double(p.weight_lo) << '\n';
  out << "param weight_hi " << format_double(p.weight_hi) << '\n';
  out << "param lambda_lo " << format_double(p.lambda_lo) << '\n';
  out << "param lambda_hi " << format_double(p.lambda_hi) << '\n';
  out << "param fidelity_lo " << format_double(p.fidelity_lo) << '\n';
  out << "param fidelity_hi " << format_double(p.fidelity_hi) << '\n';
  out << "param hop_cap " << p.hop_cap << '\n';
  out << "param r_min " << format_double(p.r_min) << '\n';
  out << "param r_max " << format_double(p.r_max) << '\n';
  out << "param random_r_max " << (p.random_r_max ? 1 : 0) << '\n';
  for (const auto& o : w.orgs) out << "org " << o.id << ' ' << format_double(o.weight) << '\n';
  for (const auto& u : w.pairs) {
    out << "pair " << w.orgs.at(u.org).id << ' ' << u.a << ' ' << u.b << ' '
        << format_double(u.lambda) << ' ' << format_double(u.fidelity_threshold) << ' '
        << format_double(u.r_min) << ' ' << format_double(u.r_max) << '\n';
  }
}

void validate_workload(const Workload& workload, const NetworkGraph* graph) {
  std::set<std::string> ids;
  for (const auto& o : workload.orgs) {
    validate_org(o, 0);
    if (!ids.insert(o.id).second) throw ValidationError("duplicate org id '" + o.id + "'");
  }
  for (std::size_t i = 0; i < workload.pairs.size(); ++i) {
    const auto& p = workload.pairs[i];
    validate_pair(p, workload.orgs.size(), 0);
    if (!graph) continue;
    for (const auto* id : {&p.a, &p.b}) {
      const auto node = graph->find_node(*id);
      if (!node)
        throw ValidationError("pair " + std::to_string(i) + ": unknown node '" + *id + "'");
      if (graph->nodes()[*node].is_repeater)
        throw ValidationError("pair " + std::to_string(i) + ": endpoint '" + *id +
                              "' is an engineered repeater");
    }
  }
}

}  // namespace qvpn
