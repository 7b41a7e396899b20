#pragma once

#include <cstddef>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfdetau/canonical.hpp"
#include "mfdetau/poly.hpp"
#include "mfdetau/problem.hpp"

namespace mfdetau {

enum class AssemblyPath { direct, canonical, autonomous };

inline const char* path_name(AssemblyPath p) {
  switch (p) {
    case AssemblyPath::direct: return "direct";
    case AssemblyPath::canonical: return "canonical";
    case AssemblyPath::autonomous: return "autonomous";
  }
  return "?";
}

/// Degrees of the perturbation term H^{(k)} = (tau-polynomial) * T*:
/// step 0 carries a degree-(d+1) tau-polynomial against T*_{n-1}, later
/// steps a degree-d tau-polynomial against T*_n. H has degree n+d either way.
struct PerturbationSpec {
  int tau_degree;
  int chebyshev_degree;
};

inline PerturbationSpec perturbation_spec(int k, int n, int d) {
  return k == 0 ? PerturbationSpec{d + 1, n - 1} : PerturbationSpec{d, n};
}

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square linear system whose solution carries, in this order, the solution
/// coefficients a_i^{(k)} for k = 0..K-2 (n+1 each) followed by the
/// tau-parameters tau_i^{(k)} (d+2 for step 0, d+1 for the remaining steps).
/// The order is (n+d+1)(K-1) + K; with d = 0 this is the autonomous order
/// (n+1)(K-1) + K.
class TauSystem {
 public:
  TauSystem(int K, int n, int d, AssemblyPath path)
      : K_(K), n_(n), d_(d), path_(path) {
    if (K < 2 || n < 1 || d < 0 || d > n) {
      throw AssemblyError("TauSystem: invalid dimensions");
    }
    const std::size_t N = static_cast<std::size_t>(order());
    A.assign(N * N, 0.0);
    rhs.assign(N, 0.0);
  }

  int K() const { return K_; }
  int n() const { return n_; }
  int d() const { return d_; }
  AssemblyPath path() const { return path_; }

  int order() const { return (n_ + d_ + 1) * (K_ - 1) + K_; }

  /// Column of coefficient a_i^{(k)}, k in 0..K-2, i in 0..n.
  int coeff_index(int k, int i) const {
    check(k >= 0 && k <= K_ - 2 && i >= 0 && i <= n_, "coeff_index");
    return k * (n_ + 1) + i;
  }

  /// Number of tau-parameters of step k: d+2 for k = 0, d+1 otherwise.
  int tau_count(int k) const { return k == 0 ? d_ + 2 : d_ + 1; }

  /// Column of tau_i^{(k)}.
  int tau_index(int k, int i) const {
    check(k >= 0 && k <= K_ - 2 && i >= 0 && i < tau_count(k), "tau_index");
    const int base = (K_ - 1) * (n_ + 1);
    if (k == 0) return base + i;
    return base + (d_ + 2) + (k - 1) * (d_ + 1) + i;
  }

  double& at(int row, int col) {
    return A[static_cast<std::size_t>(row) * static_cast<std::size_t>(order()) +
             static_cast<std::size_t>(col)];
  }

  double at(int row, int col) const {
    return A[static_cast<std::size_t>(row) * static_cast<std::size_t>(order()) +
             static_cast<std::size_t>(col)];
  }

  std::vector<double> A;    // row-major, order x order
  std::vector<double> rhs;  // order

  // Boundary coefficient sequences carried along for continuity checks and
  // residual evaluation after the solve.
  std::vector<double> boundary_left, boundary_right;

 private:
  void check(bool ok, const char* where) const {
    if (!ok) throw AssemblyError(std::string(where) + ": index out of range");
  }

  int K_, n_, d_;
  AssemblyPath path_;
};

namespace detail {

/// Linear form  sum_j weight_j * x_{col_j} + known  in the system unknowns.
struct LinearForm {
  std::vector<std::pair<int, double>> terms;
  double known = 0.0;

  void add_term(int col, double weight) {
    if (weight != 0.0) terms.emplace_back(col, weight);
  }
};

/// The K continuity equations linking consecutive pieces and the boundary
/// functions:
///   a_0^{(0)}                  = sum_i a_i^{(-1)},
///   sum_i a_i^{(k-1)} - a_0^{(k)} = 0          (k = 1..K-2),
///   sum_i a_i^{(K-2)}          = a_0^{(K-1)}.
inline void append_continuity_rows(TauSystem& sys, const DiscretizedProblem& disc) {
  const int base = sys.order() - sys.K();
  sys.at(base, sys.coeff_index(0, 0)) = 1.0;
  sys.rhs[static_cast<std::size_t>(base)] =
      std::accumulate(disc.boundary_left.begin(), disc.boundary_left.end(), 0.0);
  for (int k = 1; k <= sys.K() - 2; ++k) {
    const int r = base + k;
    for (int i = 0; i <= sys.n(); ++i) sys.at(r, sys.coeff_index(k - 1, i)) += 1.0;
    sys.at(r, sys.coeff_index(k, 0)) -= 1.0;
  }
  const int r = base + sys.K() - 1;
  for (int i = 0; i <= sys.n(); ++i) sys.at(r, sys.coeff_index(sys.K() - 2, i)) += 1.0;
  sys.rhs[static_cast<std::size_t>(r)] = disc.boundary_right[0];
}

/// Coefficient forms g_i, i = 0..n+d, of the right-hand side
///   G = b_k X_{k-1} + c_k X_{k+1} + H^{(k)}
/// as linear functions of the unknowns; boundary steps substitute the known
/// coefficient sequences into the constant part.
inline std::vector<LinearForm> rhs_coefficient_forms(const TauSystem& sys,
                                                     const DiscretizedProblem& disc,
                                                     const Poly& cheb, int k) {
  const int n = sys.n(), d = sys.d(), K = sys.K();
  std::vector<LinearForm> g(static_cast<std::size_t>(n + d) + 1);
  for (int i = 0; i <= n + d; ++i) {
    LinearForm& form = g[static_cast<std::size_t>(i)];
    for (int p = std::max(0, i - d); p <= std::min(n, i); ++p) {
      const int l = i - p;
      const double beta = disc.b[static_cast<std::size_t>(k)].coefficient(l);
      const double gamma = disc.c[static_cast<std::size_t>(k)].coefficient(l);
      if (k >= 1) {
        form.add_term(sys.coeff_index(k - 1, p), beta);
      } else {
        form.known += beta * disc.boundary_left[static_cast<std::size_t>(p)];
      }
      if (k <= K - 3) {
        form.add_term(sys.coeff_index(k + 1, p), gamma);
      } else {
        form.known += gamma * disc.boundary_right[static_cast<std::size_t>(p)];
      }
    }
    for (int p = 0; p < sys.tau_count(k); ++p) {
      form.add_term(sys.tau_index(k, p), cheb.coefficient(i - p));
    }
  }
  return g;
}

}  // namespace detail

/// Direct assembly: for each step the n+d+1 equations obtained by equating
/// the coefficients of s^0..s^{n+d} in
///   X_k' - a_k X_k - b_k X_{k-1} - c_k X_{k+1} - H^{(k)} = 0,
/// with the known boundary sequences moved to the right-hand side, followed
/// by the K continuity equations. Works for any d >= 0, including constant
/// coefficients and a_k = 0.
inline TauSystem assemble_direct(const DiscretizedProblem& disc) {
  const int K = disc.K, n = disc.n, d = disc.d;
  TauSystem sys(K, n, d, AssemblyPath::direct);
  sys.boundary_left = disc.boundary_left;
  sys.boundary_right = disc.boundary_right;
  const Poly cheb_first = chebyshev_shifted(n - 1);
  const Poly cheb_rest = chebyshev_shifted(n);

  for (int k = 0; k <= K - 2; ++k) {
    const int row0 = k * (n + d + 1);
    for (int i = 0; i <= n; ++i) {
      const int col = sys.coeff_index(k, i);
      if (i >= 1) sys.at(row0 + i - 1, col) += static_cast<double>(i);
      for (int l = 0; l <= d; ++l) {
        sys.at(row0 + i + l, col) -= disc.a[static_cast<std::size_t>(k)].coefficient(l);
      }
    }
    for (int i = 0; i <= n; ++i) {
      for (int l = 0; l <= d; ++l) {
        const int row = row0 + i + l;
        const double beta = disc.b[static_cast<std::size_t>(k)].coefficient(l);
        const double gamma = disc.c[static_cast<std::size_t>(k)].coefficient(l);
        if (k >= 1) {
          sys.at(row, sys.coeff_index(k - 1, i)) -= beta;
        } else {
          sys.rhs[static_cast<std::size_t>(row)] +=
              beta * disc.boundary_left[static_cast<std::size_t>(i)];
        }
        if (k <= K - 3) {
          sys.at(row, sys.coeff_index(k + 1, i)) -= gamma;
        } else {
          sys.rhs[static_cast<std::size_t>(row)] +=
              gamma * disc.boundary_right[static_cast<std::size_t>(i)];
        }
      }
    }
    const Poly& cheb = (k == 0) ? cheb_first : cheb_rest;
    const int cheb_degree = perturbation_spec(k, n, d).chebyshev_degree;
    for (int i = 0; i < sys.tau_count(k); ++i) {
      for (int l = 0; l <= cheb_degree; ++l) {
        sys.at(row0 + i + l, sys.tau_index(k, i)) -= cheb.coefficient(l);
      }
    }
  }
  detail::append_continuity_rows(sys, disc);
  return sys;
}

namespace detail {

/// Canonical-expansion assembly shared by the non-autonomous (d >= 1) and
/// autonomous (d = 0) paths. Rows follow the block layout of the canonical
/// construction: all main blocks first (n+1 rows per step, reading
///   a_j^{(k)} = sum_m g_{d+m} q_j^{(k)(m)},
/// where the expansion X_k = sum_m g_{d+m} Q_{d+m}^{(k)} inverts the step
/// operator on the defined indices), then the d zero-coefficient rows per
/// step forcing g_i = 0 for i = 0..d-1 (the undefined indices), then the K
/// continuity rows.
inline TauSystem assemble_expansion(const DiscretizedProblem& disc,
                                    const std::vector<CanonicalTable>& tables,
                                    AssemblyPath path) {
  const int K = disc.K, n = disc.n, d = disc.d;
  if (static_cast<int>(tables.size()) != K - 1) {
    throw AssemblyError("assemble: one canonical table per step is required");
  }
  TauSystem sys(K, n, d, path);
  sys.boundary_left = disc.boundary_left;
  sys.boundary_right = disc.boundary_right;
  const Poly cheb_first = chebyshev_shifted(n - 1);
  const Poly cheb_rest = chebyshev_shifted(n);
  const int main_base = 0;
  const int zero_base = (K - 1) * (n + 1);

  for (int k = 0; k <= K - 2; ++k) {
    const CanonicalTable& table = tables[static_cast<std::size_t>(k)];
    if (table.da != d || static_cast<int>(table.entries.size()) != n + 1) {
      throw AssemblyError("assemble: canonical table does not match the discretization");
    }
    const Poly& cheb = (k == 0) ? cheb_first : cheb_rest;
    const auto g = rhs_coefficient_forms(sys, disc, cheb, k);

    for (int j = 0; j <= n; ++j) {
      const int row = main_base + k * (n + 1) + j;
      sys.at(row, sys.coeff_index(k, j)) += 1.0;
      for (int m = 0; m <= n; ++m) {
        const double q_jm = table.entries[static_cast<std::size_t>(m)].coefficient(j);
        if (q_jm == 0.0) continue;
        const LinearForm& form = g[static_cast<std::size_t>(d + m)];
        for (const auto& [col, weight] : form.terms) sys.at(row, col) -= weight * q_jm;
        sys.rhs[static_cast<std::size_t>(row)] += form.known * q_jm;
      }
    }
    for (int i = 0; i < d; ++i) {
      const int row = zero_base + k * d + i;
      const LinearForm& form = g[static_cast<std::size_t>(i)];
      for (const auto& [col, weight] : form.terms) sys.at(row, col) += weight;
      sys.rhs[static_cast<std::size_t>(row)] -= form.known;
    }
  }
  append_continuity_rows(sys, disc);
  return sys;
}

}  // namespace detail

/// Canonical-polynomial assembly (d >= 1), the construction behind the block
/// matrix of the method. Residual corrections are deliberately dropped from
/// the zero-coefficient equations, exactly as the construction states; see
/// CanonicalTable for the two residual notions this leaves open. Compare
/// against the direct path rather than assuming agreement.
inline TauSystem assemble_canonical(const DiscretizedProblem& disc,
                                    const std::vector<CanonicalTable>& tables) {
  if (disc.d < 1) {
    throw AssemblyError("assemble_canonical: requires d >= 1 (use assemble_autonomous)");
  }
  if (!disc.weak_leading_steps.empty()) {
    throw AssemblyError(
        "assemble_canonical: step " + std::to_string(disc.weak_leading_steps.front()) +
        " has |alpha_d| <= " + std::to_string(kLeadingCoefficientTolerance) +
        "; lower d or use the d = 0 path");
  }
  return detail::assemble_expansion(disc, tables, AssemblyPath::canonical);
}

inline TauSystem assemble_canonical(const DiscretizedProblem& disc) {
  if (disc.d < 1) {
    throw AssemblyError("assemble_canonical: requires d >= 1 (use assemble_autonomous)");
  }
  if (!disc.weak_leading_steps.empty()) {
    throw AssemblyError(
        "assemble_canonical: step " + std::to_string(disc.weak_leading_steps.front()) +
        " has |alpha_d| <= " + std::to_string(kLeadingCoefficientTolerance) +
        "; lower d or use the d = 0 path");
  }
  return detail::assemble_expansion(disc, build_tables(disc), AssemblyPath::canonical);
}

/// Autonomous assembly (d = 0): per-step constant coefficients, canonical
/// polynomials from the exact closed form, no zero-coefficient rows. Every
/// a_k must be nonzero; the direct path handles a_k = 0 instead.
inline TauSystem assemble_autonomous(const DiscretizedProblem& disc) {
  if (disc.d != 0) {
    throw AssemblyError("assemble_autonomous: requires d = 0");
  }
  return detail::assemble_expansion(disc, build_tables(disc), AssemblyPath::autonomous);
}

/// Debug dump: one CSV row per equation, matrix entries then the rhs.
inline void dump_csv(const TauSystem& sys, std::ostream& os) {
  const int N = sys.order();
  char buf[32];
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < N; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", sys.at(r, c));
      os << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", sys.rhs[static_cast<std::size_t>(r)]);
    os << buf << '\n';
  }
}

}  // namespace mfdetau
