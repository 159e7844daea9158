#pragma once

// Deliberately slow brute-force references. Each one guards its input size.

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "qvpn/allocation_lp.hpp"
#include "qvpn/quantum_math.hpp"
#include "qvpn/simplex.hpp"
#include "qvpn/topology.hpp"

namespace qvpn::oracle {

/// Dense 16x16 density operator over qubits (a1, b1, a2, b2), a1 most significant.
struct TwoPairState {
  static constexpr std::size_t kDim = 16;
  std::array<std::complex<double>, kDim * kDim> rho{};

  std::complex<double>& at(std::size_t r, std::size_t c) { return rho[r * kDim + c]; }
  std::complex<double> at(std::size_t r, std::size_t c) const { return rho[r * kDim + c]; }
  double trace() const;
  double hermiticity_error() const;
  /// Smallest eigenvalue via Jacobi iteration on the equivalent 32x32 real symmetric form.
  double min_eigenvalue() const;
};

TwoPairState joint_state(const BellDiagonalState& first, const BellDiagonalState& second);

struct PurificationResult {
  BellDiagonalState state;
  double success_prob = 0.0;
  double max_trace_drift = 0.0;  ///< largest |tr(rho) - 1| across the unitary steps
};

/// Local rotations Rx(pi/2) on Alice's qubits and Rx(-pi/2) on Bob's, bilateral CNOT from
/// pair 1 onto pair 2, Z measurement of pair 2, post-selection on coincident outcomes and
/// Bell-basis twirl of pair 1. Throws std::domain_error below probability 1e-12.
PurificationResult simulate_purification(const BellDiagonalState& first,
                                         const BellDiagonalState& second);

/// Every simple path with at most `max_hops` links, as node-index sequences.
/// Throws GuardError when max_hops > 8.
std::vector<std::vector<std::size_t>> enumerate_simple_paths(const NetworkGraph& graph,
                                                             std::size_t src, std::size_t dst,
                                                             int max_hops);

struct BruteLpResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

/// Maximum of c.x over the vertices of {A x <= b, x >= 0}. The LP must be bounded.
/// Throws GuardError beyond 6 variables or 10 constraints.
BruteLpResult brute_force_lp(const LinearProgram& lp);
BruteLpResult brute_force_lp(const AllocationProblem& problem);

}  // namespace qvpn::oracle
