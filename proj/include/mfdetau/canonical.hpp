#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mfdetau/poly.hpp"
#include "mfdetau/problem.hpp"

namespace mfdetau {

class CanonicalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Image of p under the step operator D[p] = p' - a_k * p.
inline Poly apply_operator(const Poly& a_k, const Poly& p) {
  return sub(differentiate(p), mul(a_k, p));
}

/// Canonical polynomials Q_{da+m} of the operator D[x] = x' - a_k x, where
/// da is the degree of a_k. Q_{da+m} has degree exactly m and satisfies
/// D[Q_{da+m}] = s^{da+m} up to a residual supported on s^0..s^{da-1};
/// indices 0..da-1 have no canonical polynomial.
///
/// Two residual notions are stored side by side and are intentionally NOT
/// asserted equal anywhere:
///   - formula_residual[m]: the closed-form residual that accounts only for
///     the undefined polynomials dropped directly at index da+m (zero for
///     m >= da+1), and
///   - applied_residual(): D[Q_{da+m}] - s^{da+m} computed by direct
///     operator application, which also carries residuals propagated
///     through the recursion.
struct CanonicalTable {
  int step = -1;  // step index when built for a discretized problem
  int da = 0;
  std::vector<Poly> entries;           // entries[m] = Q_{da+m}, m = 0..n
  std::vector<Poly> formula_residual;  // same indexing
};

/// Builds the table for a step operator with non-constant a_k (da >= 1).
/// a_k is taken at its full stored length: the last stored coefficient is
/// the alpha_da the recursion divides by.
inline CanonicalTable build_table(const Poly& a_k, int n) {
  const auto& alpha = a_k.coefficients();
  const int da = static_cast<int>(alpha.size()) - 1;
  if (da < 1) {
    throw CanonicalError("build_table: operator requires degree(a_k) >= 1");
  }
  const double lead = alpha[static_cast<std::size_t>(da)];
  if (std::abs(lead) <= kLeadingCoefficientTolerance) {
    throw CanonicalError(
        "build_table: leading coefficient of a_k is numerically zero; lower d "
        "or use the d = 0 path");
  }
  if (n < 0) throw CanonicalError("build_table: n must be non-negative");

  CanonicalTable table;
  table.da = da;
  table.entries.reserve(static_cast<std::size_t>(n) + 1);
  table.formula_residual.reserve(static_cast<std::size_t>(n) + 1);

  for (int m = 0; m <= n; ++m) {
    Poly acc = Poly::monomial(m);  // s^m
    if (m <= da) {
      // Q_{da+m} = -(1/alpha_da) (s^m + sum_{i=0}^{m-1} alpha_{da-m+i} Q_{da+i}),
      // the sum being empty for m = 0.
      for (int i = 0; i < m; ++i) {
        acc = add(acc, scale(table.entries[static_cast<std::size_t>(i)],
                             alpha[static_cast<std::size_t>(da - m + i)]));
      }
    } else {
      // Q_{da+m} = -(1/alpha_da) (s^m - m Q_{m-1} + sum_{i=1}^{da} alpha_{da-i} Q_{da+m-i})
      acc = add(acc, scale(table.entries[static_cast<std::size_t>(m - 1 - da)],
                           -static_cast<double>(m)));
      for (int i = 1; i <= da; ++i) {
        acc = add(acc, scale(table.entries[static_cast<std::size_t>(m - i)],
                             alpha[static_cast<std::size_t>(da - i)]));
      }
    }
    table.entries.push_back(scale(acc, -1.0 / lead));

    Poly residual;
    if (m <= da) {
      // R_{da+m} = (1/alpha_da) (-m s^{m-1} + sum_{i=0}^{da-m-1} alpha_i s^{m+i}),
      // the sum being empty for m = da.
      Poly r;
      if (m >= 1) r = Poly::monomial(m - 1, -static_cast<double>(m));
      for (int i = 0; i <= da - m - 1; ++i) {
        r = add(r, Poly::monomial(m + i, alpha[static_cast<std::size_t>(i)]));
      }
      residual = scale(r, 1.0 / lead);
    }
    table.formula_residual.push_back(std::move(residual));
  }
  return table;
}

/// D[Q_{da+m}] - s^{da+m} by direct polynomial operator application. Its
/// degree never exceeds da-1 (the span of the undefined indices).
inline Poly applied_residual(const CanonicalTable& table, const Poly& a_k, int m) {
  if (m < 0 || m >= static_cast<int>(table.entries.size())) {
    throw CanonicalError("applied_residual: index outside the table range");
  }
  const Poly image = apply_operator(a_k, table.entries[static_cast<std::size_t>(m)]);
  return sub(image, Poly::monomial(table.da + m));
}

/// Closed-form canonical polynomial for a constant-coefficient operator
/// D[x] = x' - a x with a != 0:
///   Q_m(s) = -(m!/a) sum_{i=0}^{m} s^i / (a^{m-i} i!).
/// These satisfy D[Q_m] = s^m exactly; no indices are undefined.
inline Poly autonomous_q(double a, int m) {
  if (a == 0.0) {
    throw CanonicalError(
        "autonomous_q: a = 0 has no constant-operator canonical polynomials; "
        "use the direct assembly path");
  }
  if (m < 0) throw CanonicalError("autonomous_q: m must be non-negative");
  std::vector<double> c(static_cast<std::size_t>(m) + 1, 0.0);
  double value = -1.0 / a;  // coefficient of s^m
  c[static_cast<std::size_t>(m)] = value;
  for (int i = m; i >= 1; --i) {
    value *= static_cast<double>(i) / a;
    c[static_cast<std::size_t>(i - 1)] = value;
  }
  return Poly(std::move(c));
}

/// Table of autonomous closed-form polynomials Q_0..Q_n for constant a.
inline CanonicalTable build_autonomous_table(double a, int n) {
  CanonicalTable table;
  table.da = 0;
  table.entries.reserve(static_cast<std::size_t>(n) + 1);
  table.formula_residual.assign(static_cast<std::size_t>(n) + 1, Poly{});
  for (int m = 0; m <= n; ++m) table.entries.push_back(autonomous_q(a, m));
  return table;
}

/// Per-step canonical tables for a discretized problem. For d >= 1 each step
/// uses the recursive construction; for d = 0 the autonomous closed form.
inline std::vector<CanonicalTable> build_tables(const DiscretizedProblem& disc) {
  std::vector<CanonicalTable> tables;
  tables.reserve(static_cast<std::size_t>(disc.K) - 1);
  for (int k = 0; k < disc.K - 1; ++k) {
    const Poly& a_k = disc.a[static_cast<std::size_t>(k)];
    CanonicalTable t = disc.d >= 1
                           ? build_table(a_k, disc.n)
                           : build_autonomous_table(a_k.coefficient(0), disc.n);
    t.step = k;
    tables.push_back(std::move(t));
  }
  return tables;
}

}  // namespace mfdetau
