#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfdetau/assemble.hpp"

namespace mfdetau {

struct SolveDiagnostics {
  double residual_inf = 0.0;        // ||Ax - b||_inf after refinement
  double relative_residual = 0.0;   // residual_inf / (||A||_inf ||x||_inf + ||b||_inf)
  double smallest_pivot = 0.0;
  double condition_estimate = 0.0;  // 1-norm estimate
  double elapsed_seconds = 0.0;
};

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(int column, double pivot)
      : std::runtime_error("matrix is singular to working precision at column " +
                           std::to_string(column) + " (pivot " +
                           std::to_string(pivot) + ")"),
        column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

namespace detail {

/// LU factorization with partial pivoting over a private copy, with forward
/// and transposed solves; rows may be pre-scaled by the caller.
///
/// A pivot below 1e-13 ||A||_inf marks the factorization as suspect and
/// records the offending column; an exactly zero pivot aborts immediately.
/// Tau systems are routinely ill-conditioned in the harmless directions
/// (power-basis coefficients against 4^n Chebyshev scales), so a suspect
/// factorization is only an error once the computed solution fails to
/// reproduce the right-hand side; lu_solve makes that call.
class LuFactors {
 public:
  LuFactors(std::vector<double> a, int n) : lu_(std::move(a)), n_(n), piv_(static_cast<std::size_t>(n)) {
    double norm_inf = 0.0;
    for (int r = 0; r < n_; ++r) {
      double row = 0.0;
      for (int c = 0; c < n_; ++c) row += std::abs(at(r, c));
      norm_inf = std::max(norm_inf, row);
    }
    const double pivot_floor = 1e-13 * norm_inf;
    smallest_pivot_ = std::numeric_limits<double>::infinity();

    for (int k = 0; k < n_; ++k) {
      int pivot_row = k;
      double pivot_mag = std::abs(at(k, k));
      for (int r = k + 1; r < n_; ++r) {
        const double mag = std::abs(at(r, k));
        if (mag > pivot_mag) {
          pivot_mag = mag;
          pivot_row = r;
        }
      }
      piv_[static_cast<std::size_t>(k)] = pivot_row;
      if (pivot_row != k) {
        for (int c = 0; c < n_; ++c) std::swap(at(k, c), at(pivot_row, c));
      }
      if (pivot_mag == 0.0) {
        throw SingularMatrixError(k, 0.0);
      }
      if (pivot_mag < pivot_floor && suspect_column_ < 0) {
        suspect_column_ = k;
      }
      smallest_pivot_ = std::min(smallest_pivot_, pivot_mag);
      const double inv_pivot = 1.0 / at(k, k);
      for (int r = k + 1; r < n_; ++r) {
        const double factor = at(r, k) * inv_pivot;
        at(r, k) = factor;
        if (factor == 0.0) continue;
        for (int c = k + 1; c < n_; ++c) at(r, c) -= factor * at(k, c);
      }
    }
  }

  double smallest_pivot() const { return smallest_pivot_; }

  /// First column whose pivot fell below the working-precision floor, or -1.
  int suspect_column() const { return suspect_column_; }

  std::vector<double> solve(std::vector<double> b) const {
    for (int k = 0; k < n_; ++k) {
      std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(piv_[static_cast<std::size_t>(k)])]);
    }
    for (int k = 0; k < n_; ++k) {
      const double bk = b[static_cast<std::size_t>(k)];
      if (bk == 0.0) continue;
      for (int r = k + 1; r < n_; ++r) b[static_cast<std::size_t>(r)] -= at(r, k) * bk;
    }
    for (int k = n_ - 1; k >= 0; --k) {
      double acc = b[static_cast<std::size_t>(k)];
      for (int c = k + 1; c < n_; ++c) acc -= at(k, c) * b[static_cast<std::size_t>(c)];
      b[static_cast<std::size_t>(k)] = acc / at(k, k);
    }
    return b;
  }

  /// Solves A^T y = b (used by the 1-norm condition estimator).
  std::vector<double> solve_transpose(std::vector<double> b) const {
    for (int k = 0; k < n_; ++k) {
      double acc = b[static_cast<std::size_t>(k)];
      for (int r = 0; r < k; ++r) acc -= at(r, k) * b[static_cast<std::size_t>(r)];
      b[static_cast<std::size_t>(k)] = acc / at(k, k);
    }
    for (int k = n_ - 1; k >= 0; --k) {
      for (int r = k + 1; r < n_; ++r) {
        b[static_cast<std::size_t>(k)] -= at(r, k) * b[static_cast<std::size_t>(r)];
      }
    }
    for (int k = n_ - 1; k >= 0; --k) {
      std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(piv_[static_cast<std::size_t>(k)])]);
    }
    return b;
  }

 private:
  double& at(int r, int c) { return lu_[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c)]; }
  double at(int r, int c) const { return lu_[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c)]; }

  std::vector<double> lu_;
  int n_;
  std::vector<int> piv_;
  double smallest_pivot_ = 0.0;
  int suspect_column_ = -1;
};

inline double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double one_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline std::vector<double> residual(const std::vector<double>& a,
                                    const std::vector<double>& x,
                                    const std::vector<double>& b, int n) {
  std::vector<double> r(b);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = a.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
    for (int j = 0; j < n; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
    r[static_cast<std::size_t>(i)] -= acc;
  }
  return r;
}

/// Hager-style power estimation of ||A^{-1}||_1 on the factors.
inline double estimate_inverse_one_norm(const LuFactors& lu, int n) {
  std::vector<double> x(static_cast<std::size_t>(n), 1.0 / n);
  double estimate = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    std::vector<double> y = lu.solve(x);
    estimate = one_norm(y);
    std::vector<double> xi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      xi[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] >= 0.0 ? 1.0 : -1.0;
    }
    std::vector<double> z = lu.solve_transpose(xi);
    int jmax = 0;
    for (int i = 1; i < n; ++i) {
      if (std::abs(z[static_cast<std::size_t>(i)]) > std::abs(z[static_cast<std::size_t>(jmax)])) jmax = i;
    }
    double zx = 0.0;
    for (int i = 0; i < n; ++i) zx += z[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    if (std::abs(z[static_cast<std::size_t>(jmax)]) <= zx) break;
    x.assign(static_cast<std::size_t>(n), 0.0);
    x[static_cast<std::size_t>(jmax)] = 1.0;
  }
  return estimate;
}

}  // namespace detail

struct LuOptions {
  /// Scale each row (and its rhs entry) by 1/max|row| before factorizing.
  /// The solution is unchanged in exact arithmetic; it tames systems whose
  /// rows differ by many orders of magnitude (canonical-path assemblies,
  /// Chebyshev coefficients growing like 4^n).
  bool row_equilibrate = false;
};

/// Dense solve of A x = b with partial pivoting and one pass of iterative
/// refinement in working precision; the refined iterate is kept only if it
/// does not increase the residual. Throws SingularMatrixError when a pivot
/// vanishes outright, or when a pivot below 1e-13 ||A||_inf is followed by a
/// solve that fails to reproduce the right-hand side (relative residual
/// above 1e-8); the error carries the offending column.
inline std::pair<std::vector<double>, SolveDiagnostics> lu_solve(
    std::vector<double> a, std::vector<double> b, int n, LuOptions options = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) != a.size() ||
      static_cast<std::size_t>(n) != b.size()) {
    throw std::invalid_argument("lu_solve: shape mismatch");
  }

  if (options.row_equilibrate) {
    for (int r = 0; r < n; ++r) {
      double m = 0.0;
      double* row = a.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(n);
      for (int c = 0; c < n; ++c) m = std::max(m, std::abs(row[c]));
      if (m > 0.0) {
        const double inv = 1.0 / m;
        for (int c = 0; c < n; ++c) row[c] *= inv;
        b[static_cast<std::size_t>(r)] *= inv;
      }
    }
  }

  double a_norm_inf = 0.0;
  double a_norm_one = 0.0;
  {
    std::vector<double> col_sums(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < n; ++r) {
      double row_sum = 0.0;
      const double* row = a.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(n);
      for (int c = 0; c < n; ++c) {
        row_sum += std::abs(row[c]);
        col_sums[static_cast<std::size_t>(c)] += std::abs(row[c]);
      }
      a_norm_inf = std::max(a_norm_inf, row_sum);
    }
    a_norm_one = detail::inf_norm(col_sums);
  }

  const detail::LuFactors lu(a, n);
  std::vector<double> x = lu.solve(b);
  std::vector<double> r = detail::residual(a, x, b, n);
  double res = detail::inf_norm(r);

  // One refinement pass, kept only when it helps.
  {
    std::vector<double> dx = lu.solve(r);
    std::vector<double> refined(x);
    for (int i = 0; i < n; ++i) refined[static_cast<std::size_t>(i)] += dx[static_cast<std::size_t>(i)];
    std::vector<double> r2 = detail::residual(a, refined, b, n);
    const double res2 = detail::inf_norm(r2);
    if (res2 <= res) {
      x = std::move(refined);
      res = res2;
    }
  }

  SolveDiagnostics diag;
  diag.residual_inf = res;
  const double scale = a_norm_inf * detail::inf_norm(x) + detail::inf_norm(b);
  diag.relative_residual = scale > 0.0 ? res / scale : 0.0;
  if (lu.suspect_column() >= 0 &&
      (!std::isfinite(diag.relative_residual) || diag.relative_residual > 1e-8)) {
    throw SingularMatrixError(lu.suspect_column(), lu.smallest_pivot());
  }
  diag.smallest_pivot = lu.smallest_pivot();
  diag.condition_estimate = a_norm_one * detail::estimate_inverse_one_norm(lu, n);
  diag.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(x), diag};
}

inline std::pair<std::vector<double>, SolveDiagnostics> lu_solve(
    const TauSystem& sys, LuOptions options = {}) {
  return lu_solve(sys.A, sys.rhs, sys.order(), options);
}

}  // namespace mfdetau
