#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "qvpn/topology.hpp"

namespace qvpn {

struct Organization {
  std::string id;
  double weight = 1.0;  ///< w_k
  bool operator==(const Organization&) const = default;
};

struct UserPair {
  std::size_t org = 0;  ///< index into Workload::orgs
  std::string a;
  std::string b;
  double lambda = 1.0;              ///< pair weight
  double fidelity_threshold = 0.8;  ///< F^k_u
  double r_min = 0.0;
  double r_max = std::numeric_limits<double>::infinity();
  bool operator==(const UserPair&) const = default;
};

struct WorkloadParams {
  int num_orgs = 3;
  int pairs_per_org = 50;
  double weight_lo = 0.1, weight_hi = 1.0;
  double lambda_lo = 0.3, lambda_hi = 0.7;
  double fidelity_lo = 0.75, fidelity_hi = 0.90;
  int hop_cap = 7;
  double r_min = 10.0;
  double r_max = 1000.0;
  /// Draw each pair's R_max uniformly from [r_min, r_max] instead of using r_max.
  bool random_r_max = false;
  bool operator==(const WorkloadParams&) const = default;
};

struct Workload {
  std::vector<Organization> orgs;
  std::vector<UserPair> pairs;
  std::uint64_t seed = 0;
  WorkloadParams params;
  bool operator==(const Workload&) const = default;
};

/// Samples pairs of distinct non-repeater nodes whose hop distance is at most the cap.
/// Pairs are drawn without replacement inside an organization; organizations may share
/// pairs. Throws ValidationError when the graph cannot supply enough pairs.
Workload generate_workload(const NetworkGraph& graph, const WorkloadParams& params,
                           std::uint64_t seed);

Workload load_workload(std::istream& in);
Workload load_workload_file(const std::filesystem::path& path);
void save_workload(std::ostream& out, const Workload& workload);

/// Field-range checks plus, when a graph is given, endpoint existence and non-repeater checks.
void validate_workload(const Workload& workload, const NetworkGraph* graph = nullptr);

}  // namespace qvpn
