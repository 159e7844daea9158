#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qvpn/topology.hpp"

namespace qvpn {

enum class WeightScheme { Hop, InvEgr, InvEgrSq };

inline constexpr WeightScheme kAllSchemes[] = {WeightScheme::Hop, WeightScheme::InvEgr,
                                               WeightScheme::InvEgrSq};

std::string_view scheme_name(WeightScheme scheme);
std::optional<WeightScheme> parse_scheme(std::string_view name);

struct CandidatePath {
  std::vector<std::size_t> nodes;  ///< src .. dst
  std::vector<std::size_t> links;  ///< nodes.size() - 1 entries
  double weight = 0.0;             ///< total weight under `scheme`
  double bottleneck_capacity = 0.0;
  WeightScheme scheme = WeightScheme::Hop;
  int rank = 0;  ///< 1-based rank within `scheme`

  std::size_t hop_count() const noexcept { return links.size(); }
};

/// Per-link weights for a scheme. Capacity-based weights are normalised by the largest
/// capacity; zero-capacity links get +infinity.
std::vector<double> link_weights(const NetworkGraph& graph, WeightScheme scheme);

/// Up to k loopless paths in nondecreasing weight, ties broken by node-id sequence.
/// Empty when src and dst are disconnected.
std::vector<CandidatePath> yen_k_shortest(const NetworkGraph& graph, std::size_t src,
                                          std::size_t dst, std::size_t k, WeightScheme scheme);

/// Union of yen_k_shortest over `schemes` in scheme order then rank, deduplicated by link
/// sequence (the first occurrence is kept).
std::vector<CandidatePath> build_candidate_set(const NetworkGraph& graph, std::size_t src,
                                               std::size_t dst, std::size_t k,
                                               std::span<const WeightScheme> schemes);

/// Fills links/bottleneck of a path given only its node sequence; nullopt if two
/// consecutive nodes are not adjacent or a node repeats.
std::optional<CandidatePath> path_from_nodes(const NetworkGraph& graph,
                                             std::span<const std::size_t> nodes);

}  // namespace qvpn
