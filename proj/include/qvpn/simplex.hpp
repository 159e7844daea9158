#pragma once

#include <cstddef>
#include <vector>

namespace qvpn {

/// maximize c.x  subject to  A x <= b,  x >= 0.  A is dense row-major (rows x cols).
struct LinearProgram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  double& at(std::size_t r, std::size_t col) { return a[r * cols + col]; }
  double at(std::size_t r, std::size_t col) const { return a[r * cols + col]; }
  /// Appends a zero row with right-hand side `rhs` and returns its index.
  std::size_t add_row(double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Abstract LP backend. Implementations must be reentrant.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  /// Throws LpNumericalError when no reliable verdict can be produced.
  virtual LpResult solve(const LinearProgram& lp) const = 0;
};

/// Dense tableau simplex. Phase one uses a single artificial column; Dantzig pricing
/// falls back to Bland's rule after a run of degenerate pivots.
class DenseSimplex final : public LpSolver {
 public:
  LpResult solve(const LinearProgram& lp) const override;
};

const LpSolver& default_lp_solver();

}  // namespace qvpn
