#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qvpn {

struct Position {
  double x_km = 0.0;
  double y_km = 0.0;
  bool operator==(const Position&) const = default;
};

struct NodeSpec {
  std::string id;
  /// Inserted by engineering; never a user endpoint.
  bool is_repeater = false;
  std::optional<Position> position;
  bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
  std::size_t a = 0;  ///< node index
  std::size_t b = 0;  ///< node index
  double length_km = 0.0;
  int multiplex = 1;
  double alpha = 0.2;
  double base_fidelity = 0.8;
  double capacity_eprps = 0.0;
  bool operator==(const LinkSpec&) const = default;
};

struct PhysicalParams {
  double repetition_time_s = 1e-6;
  double attenuation_db_per_km = 0.2;
  /// Used for links whose document line omits `alpha=`.
  double default_alpha = 0.2;
  bool operator==(const PhysicalParams&) const = default;
};

struct Neighbor {
  std::size_t node;
  std::size_t link;
};

/// Immutable, validated network graph. Links are undirected and there is at most one
/// link per node pair (parallel fibres are expressed through `multiplex`).
class NetworkGraph {
 public:
  NetworkGraph() = default;
  /// Validates and builds adjacency. Link fidelity and capacity are taken as given.
  NetworkGraph(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links, PhysicalParams params);

  const std::vector<NodeSpec>& nodes() const noexcept { return nodes_; }
  const std::vector<LinkSpec>& links() const noexcept { return links_; }
  const PhysicalParams& params() const noexcept { return params_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t link_count() const noexcept { return links_.size(); }

  /// Neighbours sorted by node index.
  const std::vector<Neighbor>& neighbors(std::size_t node) const { return adjacency_.at(node); }

  std::optional<std::size_t> find_node(std::string_view id) const;
  /// Throws ValidationError naming `id` when absent.
  std::size_t node_index(std::string_view id) const;
  std::optional<std::size_t> link_between(std::size_t a, std::size_t b) const;

  bool operator==(const NetworkGraph& other) const {
    return nodes_ == other.nodes_ && links_ == other.links_ && params_ == other.params_;
  }

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  PhysicalParams params_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// Heralded single-photon link model: multiplex * 2 * 10^(-0.1 beta d) * alpha / T.
/// Throws std::domain_error for alpha outside (0,1), T <= 0, negative length,
/// non-positive beta or multiplex < 1.
double link_capacity(double length_km, double alpha, double beta_db_per_km,
                     double repetition_time_s, int multiplex);

/// Fidelity of the generated state (1-alpha)|Psi+><Psi+| + alpha|11><11|.
double link_fidelity(double alpha);

/// Fills fidelity and capacity of a link from its length, alpha and multiplex.
LinkSpec make_link(std::size_t a, std::size_t b, double length_km, double alpha, int multiplex,
                   const PhysicalParams& params);

NetworkGraph load_topology(std::istream& in);
NetworkGraph load_topology_file(const std::filesystem::path& path);
void save_topology(std::ostream& out, const NetworkGraph& graph);

/// Replaces every link strictly longer than `threshold_km` by ceil(length/spacing)
/// segments through new repeater nodes; full-spacing segments first, remainder last.
NetworkGraph engineer_repeaters(const NetworkGraph& graph, double threshold_km,
                                double spacing_km);

/// Sets every link's multiplex factor and recomputes capacities.
NetworkGraph with_multiplex(const NetworkGraph& graph, int multiplex);

/// Breadth-first hop distance; nullopt when disconnected.
std::optional<int> hop_distance(const NetworkGraph& graph, std::size_t src, std::size_t dst);

}  // namespace qvpn
