#include "qvpn/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "qvpn/errors.hpp"
#include "qvpn/format.hpp"

namespace qvpn {

namespace {

constexpr std::string_view kTopologyHeader = "qvpn-topology v1";

std::string link_name(const std::vector<NodeSpec>& nodes, const LinkSpec& link) {
  auto name = [&](std::size_t i) {
    return i < nodes.size() ? nodes[i].id : "#" + std::to_string(i);
  };
  return "link " + name(link.a) + "-" + name(link.b);
}

}  // namespace

NetworkGraph::NetworkGraph(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links,
                           PhysicalParams params)
    : nodes_(std::move(nodes)), links_(std::move(links)), params_(params) {
  if (!(params_.repetition_time_s > 0.0))
    throw ValidationError("param T must be positive");
  if (!(params_.attenuation_db_per_km > 0.0))
    throw ValidationError("param beta must be positive");

  std::set<std::string_view> seen;
  for (const auto& node : nodes_) {
    if (node.id.empty()) throw ValidationError("node with empty id");
    if (!seen.insert(node.id).second)
      throw ValidationError("duplicate node id '" + node.id + "'");
  }

  adjacency_.assign(nodes_.size(), {});
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t l = 0; l < links_.size(); ++l) {
    const auto& link = links_[l];
    const std::string name = link_name(nodes_, link);
    if (link.a >= nodes_.size() || link.b >= nodes_.size())
      throw ValidationError(name + ": endpoint does not exist");
    if (link.a == link.b) throw ValidationError(name + ": self-loop");
    if (!(link.length_km >= 0.0) || !std::isfinite(link.length_km))
      throw ValidationError(name + ": negative length");
    if (link.multiplex < 1) throw ValidationError(name + ": multiplex must be >= 1");
    if (!(link.alpha > 0.0 && link.alpha < 1.0))
      throw ValidationError(name + ": alpha must lie in (0,1)");
    if (!(link.base_fidelity > 0.25 && link.base_fidelity <= 1.0))
      throw ValidationError(name + ": fidelity must lie in (0.25,1]");
    if (!(link.capacity_eprps >= 0.0)) throw ValidationError(name + ": negative capacity");
    if (!pairs.insert(std::minmax(link.a, link.b)).second)
      throw ValidationError(name + ": duplicate link (use multiplex for parallel fibres)");
    adjacency_[link.a].push_back({link.b, l});
    adjacency_[link.b].push_back({link.a, l});
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(),
              [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
  }
}

std::optional<std::size_t> NetworkGraph::find_node(std::string_view id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return i;
  return std::nullopt;
}

std::size_t NetworkGraph::node_index(std::string_view id) const {
  if (auto i = find_node(id)) return *i;
  throw ValidationError("unknown node '" + std::string(id) + "'");
}

std::optional<std::size_t> NetworkGraph::link_between(std::size_t a, std::size_t b) const {
  if (a >= adjacency_.size()) return std::nullopt;
  for (const auto& n : adjacency_[a])
    if (n.node == b) return n.link;
  return std::nullopt;
}

double link_capacity(double length_km, double alpha, double beta_db_per_km,
                     double repetition_time_s, int multiplex) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
  if (!(repetition_time_s > 0.0)) throw std::domain_error("repetition time must be positive");
  if (!(beta_db_per_km > 0.0)) throw std::domain_error("attenuation must be positive");
  if (!(length_km >= 0.0)) throw std::domain_error("link length must be nonnegative");
  if (multiplex < 1) throw std::domain_error("multiplex must be >= 1");
  const double transmissivity = std::pow(10.0, -0.1 * beta_db_per_km * length_km);
  const double success_prob = 2.0 * transmissivity * alpha;
  return success_prob / repetition_time_s * static_cast<double>(multiplex);
}

double link_fidelity(double alpha) { return 1.0 - alpha; }

LinkSpec make_link(std::size_t a, std::size_t b, double length_km, double alpha, int multiplex,
                   const PhysicalParams& params) {
  LinkSpec link;
  link.a = a;
  link.b = b;
  link.length_km = length_km;
  link.alpha = alpha;
  link.multiplex = multiplex;
  link.base_fidelity = link_fidelity(alpha);
  link.capacity_eprps = link_capacity(length_km, alpha, params.attenuation_db_per_km,
                                      params.repetition_time_s, multiplex);
  return link;
}

NetworkGraph load_topology(std::istream& in) {
  struct PendingLink {
    std::string a, b;
    double length;
    int multiplex;
    std::optional<double> alpha;
    std::size_t line;
  };
  std::vector<NodeSpec> nodes;
  std::vector<PendingLink> pending;
  PhysicalParams params;
  bool header_seen = false;
  std::string raw;
  std::size_t lineno = 0;

  while (std::getline(in, raw)) {
    ++lineno;
    auto tok = tokenize_line(raw);
    if (tok.empty()) continue;
    if (!header_seen) {
      if (tok.size() != 2 || tok[0] + " " + tok[1] != kTopologyHeader)
        throw ParseError("expected header '" + std::string(kTopologyHeader) + "'", lineno);
      header_seen = true;
      continue;
    }
    const std::string& kind = tok[0];
    if (kind == "node") {
      if (tok.size() < 2) throw ParseError("node line needs an id", lineno);
      NodeSpec node;
      node.id = tok[1];
      std::size_t i = 2;
      if (tok.size() >= 4 && tok[2] != "repeater") {
        node.position = Position{parse_double(tok[2], "node x", lineno),
                                 parse_double(tok[3], "node y", lineno)};
        i = 4;
      }
      if (i < tok.size()) {
        if (tok[i] != "repeater" || i + 1 != tok.size())
          throw ParseError("unexpected token '" + tok[i] + "' on node " + node.id, lineno);
        node.is_repeater = true;
      }
      nodes.push_back(std::move(node));
    } else if (kind == "link") {
      if (tok.size() < 4) throw ParseError("link line needs <a> <b> <length_km>", lineno);
      PendingLink link{tok[1], tok[2], parse_double(tok[3], "link length", lineno), 1,
                       std::nullopt, lineno};
      for (std::size_t i = 4; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string::npos)
          throw ParseError("expected key=value, got '" + tok[i] + "'", lineno);
        const std::string key = tok[i].substr(0, eq);
        const std::string value = tok[i].substr(eq + 1);
        if (key == "multiplex") {
          link.multiplex = static_cast<int>(parse_int(value, "multiplex", lineno));
        } else if (key == "alpha") {
          link.alpha = parse_double(value, "alpha", lineno);
        } else {
          throw ParseError("unknown link attribute '" + key + "'", lineno);
        }
      }
      pending.push_back(std::move(link));
    } else if (kind == "param") {
      if (tok.size() != 3) throw ParseError("param line needs <name> <value>", lineno);
      const double value = parse_double(tok[2], "param " + tok[1], lineno);
      if (tok[1] == "T") {
        params.repetition_time_s = value;
      } else if (tok[1] == "beta") {
        params.attenuation_db_per_km = value;
      } else if (tok[1] == "alpha") {
        params.default_alpha = value;
      } else {
        throw ParseError("unknown param '" + tok[1] + "'", lineno);
      }
    } else {
      throw ParseError("unknown directive '" + kind + "'", lineno);
    }
  }
  if (!header_seen) throw ParseError("empty topology document");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!index.emplace(nodes[i].id, i).second)
      throw ValidationError("duplicate node id '" + nodes[i].id + "'");
  }
  std::vector<LinkSpec> links;
  links.reserve(pending.size());
  for (const auto& p : pending) {
    auto ia = index.find(p.a);
    auto ib = index.find(p.b);
    if (ia == index.end())
      throw ValidationError("line " + std::to_string(p.line) + ": link references undeclared node '" + p.a + "'");
    if (ib == index.end())
      throw ValidationError("line " + std::to_string(p.line) + ": link references undeclared node '" + p.b + "'");
    if (p.length < 0.0)
      throw ValidationError("line " + std::to_string(p.line) + ": link " + p.a + "-" + p.b +
                            " has negative length");
    const double alpha = p.alpha.value_or(params.default_alpha);
    if (!(alpha > 0.0 && alpha < 0.75))
      throw ValidationError("line " + std::to_string(p.line) + ": link " + p.a + "-" + p.b +
                            " alpha must lie in (0,0.75) so that fidelity exceeds 0.25");
    if (p.multiplex < 1)
      throw ValidationError("line " + std::to_string(p.line) + ": link " + p.a + "-" + p.b +
                            " multiplex must be >= 1");
    if (!(params.repetition_time_s > 0.0)) throw ValidationError("param T must be positive");
    if (!(params.attenuation_db_per_km > 0.0))
      throw ValidationError("param beta must be positive");
    links.push_back(make_link(ia->second, ib->second, p.length, alpha, p.multiplex, params));
  }
  return NetworkGraph(std::move(nodes), std::move(links), params);
}

NetworkGraph load_topology_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open topology file '" + path.string() + "'");
  return load_topology(in);
}

void save_topology(std::ostream& out, const NetworkGraph& graph) {
  const auto& p = graph.params();
  out << kTopologyHeader << '\n';
  out << "param T " << format_double(p.repetition_time_s) << '\n';
  out << "param beta " << format_double(p.attenuation_db_per_km) << '\n';
  out << "param alpha " << format_double(p.default_alpha) << '\n';
  for (const auto& n : graph.nodes()) {
    out << "node " << n.id;
    if (n.position)
      out << ' ' << format_double(n.position->x_km) << ' ' << format_double(n.position->y_km);
    if (n.is_repeater) out << " repeater";
    out << '\n';
  }
  for (const auto& l : graph.links()) {
    out << "link " << graph.nodes()[l.a].id << ' ' << graph.nodes()[l.b].id << ' '
        << format_double(l.length_km) << " multiplex=" << l.multiplex
        << " alpha=" << format_double(l.alpha) << '\n';
  }
}

NetworkGraph engineer_repeaters(const NetworkGraph& graph, double threshold_km,
                                double spacing_km) {
  if (!(threshold_km > 0.0) || !(spacing_km > 0.0))
    throw std::domain_error("threshold and spacing must be positive");

  std::vector<NodeSpec> nodes = graph.nodes();
  std::vector<LinkSpec> links;
  std::set<std::string> ids;
  for (const auto& n : nodes) ids.insert(n.id);

  for (const auto& link : graph.links()) {
    const auto segments =
        link.length_km > threshold_km
            ? static_cast<std::size_t>(std::ceil(link.length_km / spacing_km - 1e-9))
            : std::size_t{1};
    if (segments <= 1) {
      links.push_back(link);
      continue;
    }
    const NodeSpec na = nodes[link.a];
    const NodeSpec nb = nodes[link.b];
    std::vector<std::size_t> chain{link.a};
    for (std::size_t s = 1; s < segments; ++s) {
      NodeSpec rep;
      rep.is_repeater = true;
      std::string id = na.id + "~" + nb.id + "~" + std::to_string(s);
      while (ids.count(id)) id += "'";
      ids.insert(id);
      rep.id = std::move(id);
      if (na.position && nb.position) {
        const double t = static_cast<double>(s) * spacing_km / link.length_km;
        rep.position = Position{na.position->x_km + t * (nb.position->x_km - na.position->x_km),
                                na.position->y_km + t * (nb.position->y_km - na.position->y_km)};
      }
      chain.push_back(nodes.size());
      nodes.push_back(std::move(rep));
    }
    chain.push_back(link.b);
    for (std::size_t s = 0; s < segments; ++s) {
      const double len = s + 1 < segments
                             ? spacing_km
                             : link.length_km - spacing_km * static_cast<double>(segments - 1);
      links.push_back(
          make_link(chain[s], chain[s + 1], len, link.alpha, link.multiplex, graph.params()));
    }
  }
  return NetworkGraph(std::move(nodes), std::move(links), graph.params());
}

NetworkGraph with_multiplex(const NetworkGraph& graph, int multiplex) {
  std::vector<LinkSpec> links;
  links.reserve(graph.link_count());
  for (const auto& l : graph.links())
    links.push_back(make_link(l.a, l.b, l.length_km, l.alpha, multiplex, graph.params()));
  return NetworkGraph(graph.nodes(), std::move(links), graph.params());
}

std::optional<int> hop_distance(const NetworkGraph& graph, std::size_t src, std::size_t dst) {
  std::vector<int> dist(graph.node_count(), -1);
  std::queue<std::size_t> frontier;
  dist.at(src) = 0;
  frontier.push(src);
  while (!frontier.empty()) {
    const auto v = frontier.front();
    frontier.pop();
    if (v == dst) return dist[v];
    for (const auto& n : graph.neighbors(v)) {
      if (dist[n.node] < 0) {
        dist[n.node] = dist[v] + 1;
        frontier.push(n.node);
      }
    }
  }
  return std::nullopt;
}

}  // namespace qvpn
