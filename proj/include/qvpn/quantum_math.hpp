#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

namespace qvpn {

/// Absolute tolerance for every fidelity comparison.
inline constexpr double kFidelityTolerance = 1e-9;
inline constexpr int kDefaultMaxRounds = 20;

/// Bell-diagonal two-qubit state. Coefficients follow the recurrence ordering
/// (Phi+, Psi-, Psi+, Phi-); the fidelity is the Phi+ weight.
struct BellDiagonalState {
  std::array<double, 4> coeffs{1.0, 0.0, 0.0, 0.0};

  static BellDiagonalState werner(double fidelity);
  double fidelity() const noexcept { return coeffs[0]; }
  /// Throws std::invalid_argument unless coefficients are nonnegative and sum to 1 (1e-12).
  void validate() const;
};

struct NoiseParams {
  double two_qubit_gate_fidelity = 1.0;  ///< P2
  double measurement_fidelity = 0.99;    ///< eta
  double swap_success_prob = 1.0;        ///< q
  void validate() const;
};

struct DistillationStrategy {
  double link_threshold = 0.8;
  int max_rounds = kDefaultMaxRounds;
};

struct OverheadResult {
  /// Average number of input pairs per output pair; +infinity when infeasible.
  double overhead = 1.0;
  int rounds = 0;
  double achieved_fidelity = 0.0;
  bool feasible = true;
};

/// Fidelity after a chain of `num_links` identical Werner links is joined by nested swaps:
///   1/4 + 3/4 * (P2 (4 eta^2 - 1)/3)^(N-1) * ((4F - 1)/3)^N.
double swap_chain_fidelity(double link_fidelity, int num_links, const NoiseParams& noise);

/// Heterogeneous chain: the ((4F-1)/3)^N factor becomes the product over links.
double swap_chain_fidelity(std::span<const double> link_fidelities, const NoiseParams& noise);

struct PurifyOutcome {
  BellDiagonalState state;
  double success_prob = 1.0;
};

/// One DEJMPS round on two Bell-diagonal inputs, post-selected on coincident outcomes.
/// Throws std::domain_error when the success probability falls below 1e-12.
PurifyOutcome purify_step(const BellDiagonalState& a, const BellDiagonalState& b);

/// Symmetric recurrence purification from Werner(input) until the fidelity reaches
/// `target` or `max_rounds` is exhausted. overhead = prod_k 2/p_k.
OverheadResult purification_overhead(double input_fidelity, double target_fidelity,
                                     int max_rounds = kDefaultMaxRounds);

/// Per-link overhead on a path of identical links: g_link * g_e2e, where link-level
/// distillation lifts F_l to the strategy threshold and end-to-end distillation lifts the
/// swapped fidelity to the user threshold.
OverheadResult path_overhead_per_link(double link_fidelity, int path_length_links,
                                      const DistillationStrategy& strategy,
                                      double user_threshold, const NoiseParams& noise);

struct PathOverhead {
  std::vector<double> per_link;  ///< g for each link of the path, in path order
  double end_to_end_fidelity = 0.0;  ///< swapped fidelity before end-to-end distillation
  int e2e_rounds = 0;
  bool feasible = false;
};

/// Heterogeneous generalisation of path_overhead_per_link. Links already above the
/// strategy threshold skip link-level distillation and keep their own fidelity.
PathOverhead path_overhead(std::span<const double> link_fidelities,
                           const DistillationStrategy& strategy, double user_threshold,
                           const NoiseParams& noise);

/// Ascending list of link-level thresholds, each in (0.25, 1).
class StrategyCatalog {
 public:
  StrategyCatalog() = default;
  explicit StrategyCatalog(std::vector<double> thresholds, int max_rounds = kDefaultMaxRounds);

  /// `count` thresholds drawn from a fixed 16-point uniform grid over [0.8, 0.998].
  /// Points are taken in a fixed refinement order, so any smaller catalog is a subset of
  /// any larger one; count 1 keeps the top point and count 4 is evenly spaced.
  static StrategyCatalog uniform_default(std::size_t count = 16);

  std::size_t size() const noexcept { return thresholds_.size(); }
  double threshold(std::size_t i) const { return thresholds_.at(i); }
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  DistillationStrategy strategy(std::size_t i) const { return {threshold(i), max_rounds_}; }
  int max_rounds() const noexcept { return max_rounds_; }
  /// Index of the threshold closest to `value` (ties go to the higher threshold).
  std::size_t nearest(double value) const;

 private:
  std::vector<double> thresholds_;
  int max_rounds_ = kDefaultMaxRounds;
};

StrategyCatalog load_strategy_catalog(std::istream& in);
StrategyCatalog load_strategy_catalog_file(const std::filesystem::path& path);
void save_strategy_catalog(std::ostream& out, const StrategyCatalog& catalog);

}  // namespace qvpn
