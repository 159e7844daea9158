#include "qvpn/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qvpn/errors.hpp"

namespace qvpn {

std::size_t LinearProgram::add_row(double rhs) {
  a.resize((rows + 1) * cols, 0.0);
  b.push_back(rhs);
  return rows++;
}

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kHarrisSlack = 1e-9;
constexpr double kRatioEps = 1e-13;
constexpr std::size_t kDegenerateRunBeforeBland = 50;

template <typename Real>
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const std::vector<double>& row_scale,
          const std::vector<double>& col_scale, double obj_scale)
      : m_(lp.rows), n_(lp.cols), width_(lp.cols + 2), d_((lp.rows + 2) * (lp.cols + 2), Real(0)),
        basis_(lp.rows), nonbasis_(lp.cols + 1) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = Real(lp.at(i, j)) * row_scale[i] * col_scale[j];
      at(i, n_) = -1.0;
      at(i, n_ + 1) = Real(lp.b[i]) * row_scale[i];
      basis_[i] = static_cast<long>(n_ + i);
    }
    for (std::size_t j = 0; j < n_; ++j) {
      nonbasis_[j] = static_cast<long>(j);
      at(m_, j) = -Real(lp.c[j]) * col_scale[j] * obj_scale;
    }
    nonbasis_[n_] = -1;
    at(m_ + 1, n_) = 1.0;
  }

  Real& at(std::size_t i, std::size_t j) { return d_[i * width_ + j]; }
  Real at(std::size_t i, std::size_t j) const { return d_[i * width_ + j]; }

  void pivot(std::size_t r, std::size_t s) {
    ++pivots_;
    const Real inv = Real(1) / at(r, s);
    Real* prow = &d_[r * width_];
    for (std::size_t i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      Real* row = &d_[i * width_];
      const Real factor = row[s] * inv;
      if (factor == Real(0)) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= prow[j] * factor;
      row[s] = -factor;
    }
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[s] = inv;
    std::swap(basis_[r], nonbasis_[s]);
  }

  /// Returns false when the objective row `phase` is unbounded.
  bool run(int phase, double rhs_eps) {
    const std::size_t obj = phase == 1 ? m_ + 1 : m_;
    std::size_t degenerate_run = 0;
    const std::size_t limit = 50 * (m_ + n_ + 10);
    for (std::size_t iter = 0;; ++iter) {
      if (iter > limit) throw LpNumericalError("simplex iteration limit exceeded");
      const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
      long s = -1;
      for (std::size_t j = 0; j <= n_; ++j) {
        if (phase == 2 && nonbasis_[j] == -1) continue;
        const Real v = at(obj, j);
        if (bland) {
          if (v < -kPivotEps && (s < 0 || nonbasis_[j] < nonbasis_[static_cast<std::size_t>(s)]))
            s = static_cast<long>(j);
        } else if (s < 0 || v < at(obj, static_cast<std::size_t>(s)) ||
                   (v == at(obj, static_cast<std::size_t>(s)) &&
                    nonbasis_[j] < nonbasis_[static_cast<std::size_t>(s)])) {
          s = static_cast<long>(j);
        }
      }
      if (s < 0 || at(obj, static_cast<std::size_t>(s)) > -kPivotEps) return true;
      const auto col = static_cast<std::size_t>(s);

      // Harris two-pass ratio test: bound the step so that no row falls below -slack, then
      // take the largest pivot element among the rows within that bound.
      Real bound = std::numeric_limits<Real>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const Real aij = at(i, col);
        if (aij < kRatioEps) continue;
        bound = std::min(bound, std::max(Real(0), at(i, n_ + 1) + kHarrisSlack) / aij);
      }
      long r = -1;
      Real best_ratio = 0;
      for (std::size_t i = 0; i < m_; ++i) {
        const Real aij = at(i, col);
        if (aij < kRatioEps) continue;
        const Real ratio = std::max(Real(0), at(i, n_ + 1)) / aij;
        if (ratio > bound) continue;
        bool take = r < 0;
        if (!take) {
          const auto ri = static_cast<std::size_t>(r);
          if (bland)
            take = ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[ri]);
          else
            take = aij > at(ri, col) || (aij == at(ri, col) && basis_[i] < basis_[ri]);
        }
        if (take) {
          r = static_cast<long>(i);
          best_ratio = ratio;
        }
      }
      if (r < 0) return false;
      degenerate_run = best_ratio <= rhs_eps ? degenerate_run + 1 : 0;
      // Shift a slightly negative leaving value to zero so no row drifts below -slack.
      auto& leaving = at(static_cast<std::size_t>(r), n_ + 1);
      leaving = std::max(Real(0), leaving);
      pivot(static_cast<std::size_t>(r), col);
    }
  }

  std::size_t m_, n_, width_;
  std::vector<Real> d_;
  std::vector<long> basis_;
  std::vector<long> nonbasis_;
  std::size_t pivots_ = 0;
};

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.rows; ++i) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < lp.cols; ++j) lhs += lp.at(i, j) * x[j];
    worst = std::max(worst, (lhs - lp.b[i]) / std::max({1.0, std::abs(lp.b[i]), std::abs(lhs)}));
  }
  for (double v : x) worst = std::max(worst, -v);
  return worst;
}

/// Re-solves the final basis from the original data: the rows whose slacks left the basis
/// hold with equality over the basic structural columns. Empty on a singular system.
std::vector<double> refine_basic_solution(const LinearProgram& lp,
                                          const std::vector<double>& row_scale,
                                          const std::vector<long>& basis) {
  const std::size_t n = lp.cols;
  std::vector<std::size_t> cols;
  std::vector<bool> slack_basic(lp.rows, false);
  for (long v : basis) {
    if (v < 0) return {};
    const auto var = static_cast<std::size_t>(v);
    if (var < n)
      cols.push_back(var);
    else
      slack_basic[var - n] = true;
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < lp.rows; ++i)
    if (!slack_basic[i]) rows.push_back(i);
  const std::size_t k = cols.size();
  std::vector<double> x(n, 0.0);
  if (k == 0) return x;
  if (rows.size() != k) return {};
  std::vector<double> m(k * (k + 1));
  for (std::size_t r = 0; r < k; ++r) {
    const double sc = row_scale[rows[r]];
    for (std::size_t c = 0; c < k; ++c) m[r * (k + 1) + c] = lp.at(rows[r], cols[c]) * sc;
    m[r * (k + 1) + k] = lp.b[rows[r]] * sc;
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(m[r * (k + 1) + c]) > std::abs(m[piv * (k + 1) + c])) piv = r;
    if (std::abs(m[piv * (k + 1) + c]) < 1e-300) return {};
    if (piv != c)
      for (std::size_t j = 0; j <= k; ++j) std::swap(m[c * (k + 1) + j], m[piv * (k + 1) + j]);
    for (std::size_t r = c + 1; r < k; ++r) {
      const double f = m[r * (k + 1) + c] / m[c * (k + 1) + c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j <= k; ++j) m[r * (k + 1) + j] -= f * m[c * (k + 1) + j];
    }
  }
  for (std::size_t c = k; c-- > 0;) {
    double acc = m[c * (k + 1) + k];
    for (std::size_t j = c + 1; j < k; ++j) acc -= m[c * (k + 1) + j] * x[cols[j]];
    x[cols[c]] = acc / m[c * (k + 1) + c];
  }
  for (double& v : x) {
    if (!std::isfinite(v)) return {};
    v = std::max(0.0, v);
  }
  return x;
}

template <typename Real>
LpResult solve_scaled(const LinearProgram& lp, const std::vector<double>& row_scale,
                      const std::vector<double>& col_scale, double obj_scale, double rhs_eps,
                      double feasibility_eps) {
  LpResult result;
  result.x.assign(lp.cols, 0.0);
  Tableau<Real> t(lp, row_scale, col_scale, obj_scale);
  const std::size_t m = lp.rows;
  const std::size_t n = lp.cols;

  if (m > 0) {
    std::size_t r = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (t.at(i, n + 1) < t.at(r, n + 1)) r = i;
    if (t.at(r, n + 1) < -rhs_eps) {
      t.pivot(r, n);
      if (!t.run(1, rhs_eps)) throw LpNumericalError("phase one reported unbounded");
      if (t.at(m + 1, n + 1) < -feasibility_eps) {
        result.status = LpStatus::Infeasible;
        result.pivots = t.pivots_;
        return result;
      }
      for (std::size_t i = 0; i < m; ++i) {
        if (t.basis_[i] != -1) continue;
        t.at(i, n + 1) = 0;
        std::size_t s = 0;
        Real best = 0;
        for (std::size_t j = 0; j <= n; ++j) {
          const Real v = std::abs(t.at(i, j));
          if (v > best) {
            best = v;
            s = j;
          }
        }
        if (best >= kPivotEps) t.pivot(i, s);
      }
    }
  }
  if (!t.run(2, rhs_eps)) {
    result.status = LpStatus::Unbounded;
    result.pivots = t.pivots_;
    return result;
  }

  for (std::size_t i = 0; i < m; ++i) {
    const long var = t.basis_[i];
    if (var >= 0 && static_cast<std::size_t>(var) < n)
      result.x[static_cast<std::size_t>(var)] =
          static_cast<double>(std::max(Real(0), t.at(i, n + 1)) * col_scale[static_cast<std::size_t>(var)]);
  }
  for (double v : result.x)
    if (!std::isfinite(v)) throw LpNumericalError("simplex produced a non-finite solution");
  const auto refined = refine_basic_solution(lp, row_scale, t.basis_);
  if (!refined.empty() && max_violation(lp, refined) < max_violation(lp, result.x))
    result.x = refined;

  // Recompute the objective in original units and verify feasibility.
  double objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) objective += lp.c[j] * result.x[j];
  for (std::size_t i = 0; i < m; ++i) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) lhs += lp.at(i, j) * result.x[j];
    const double tol = 1e-7 * std::max({1.0, std::abs(lp.b[i]), std::abs(lhs)});
    if (lhs > lp.b[i] + tol)
      throw LpNumericalError("simplex solution violates row " + std::to_string(i));
  }
  result.status = LpStatus::Optimal;
  result.objective = objective;
  result.pivots = t.pivots_;
  return result;
}

}  // namespace

LpResult DenseSimplex::solve(const LinearProgram& lp) const {
  if (lp.a.size() != lp.rows * lp.cols || lp.b.size() != lp.rows || lp.c.size() != lp.cols)
    throw LpNumericalError("malformed linear program dimensions");
  for (double v : lp.a)
    if (!std::isfinite(v)) throw LpNumericalError("non-finite constraint coefficient");
  for (double v : lp.b)
    if (!std::isfinite(v)) throw LpNumericalError("non-finite right-hand side");
  for (double v : lp.c)
    if (!std::isfinite(v)) throw LpNumericalError("non-finite objective coefficient");

  LpResult result;
  result.x.assign(lp.cols, 0.0);

  // Alternating row/column equilibration: A' = R A C, x = C x'.
  std::vector<double> row_scale(lp.rows, 1.0);
  std::vector<double> col_scale(lp.cols, 1.0);
  for (int pass = 0; pass < 4; ++pass) {
    for (std::size_t i = 0; i < lp.rows; ++i) {
      double mx = 0.0;
      for (std::size_t j = 0; j < lp.cols; ++j)
        mx = std::max(mx, std::abs(lp.at(i, j)) * col_scale[j]);
      row_scale[i] = mx > 0.0 ? 1.0 / mx : 1.0;
    }
    if (pass == 3) break;
    for (std::size_t j = 0; j < lp.cols; ++j) {
      double mx = 0.0;
      for (std::size_t i = 0; i < lp.rows; ++i)
        mx = std::max(mx, std::abs(lp.at(i, j)) * row_scale[i]);
      col_scale[j] = mx > 0.0 ? 1.0 / mx : 1.0;
    }
  }
  double rhs_scale = 1.0;
  for (std::size_t i = 0; i < lp.rows; ++i)
    rhs_scale = std::max(rhs_scale, std::abs(lp.b[i] * row_scale[i]));
  double obj_scale = 0.0;
  for (std::size_t j = 0; j < lp.cols; ++j)
    obj_scale = std::max(obj_scale, std::abs(lp.c[j] * col_scale[j]));
  obj_scale = obj_scale > 0.0 ? 1.0 / obj_scale : 1.0;
  const double rhs_eps = 1e-9 * rhs_scale;
  const double feasibility_eps = std::max(1e-9, 1e-13 * rhs_scale);

  // Rows without coefficients decide feasibility on their own.
  for (std::size_t i = 0; i < lp.rows; ++i) {
    bool empty = true;
    for (std::size_t j = 0; j < lp.cols && empty; ++j) empty = lp.at(i, j) == 0.0;
    if (empty && lp.b[i] * row_scale[i] < -rhs_eps) {
      result.status = LpStatus::Infeasible;
      return result;
    }
  }

  // Extended precision rescues the rare programs whose double-precision pivots drift.
  try {
    return solve_scaled<double>(lp, row_scale, col_scale, obj_scale, rhs_eps, feasibility_eps);
  } catch (const LpNumericalError&) {
    return solve_scaled<long double>(lp, row_scale, col_scale, obj_scale, rhs_eps,
                                     feasibility_eps);
  }
}

const LpSolver& default_lp_solver() {
  static const DenseSimplex solver;
  return solver;
}

}  // namespace qvpn
