#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfdetau/expr.hpp"
#include "mfdetau/poly.hpp"

namespace mfdetau {

/// Boundary-value problem for x'(t) = a(t)x(t) + b(t)x(t-1) + c(t)x(t+1)
/// on [-1, K], with x prescribed by psi1 on [-1,0] and psi2 on (K-1, K].
struct MfdeProblem {
  Expr a, b, c;
  Expr psi1, psi2;
  int K = 2;
  std::optional<Expr> exact;
  std::string name;
};

class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Family of problems with known analytic solution: given a primitive F of
/// the coefficient a, the choices b(t) = -e^{F(t+1)} and c(t) = e^{F(t-1)}
/// make x(t) = e^{F(t)} an exact solution. Boundary functions are the exact
/// solution restricted to the boundary intervals.
inline MfdeProblem family_from_F(const Expr& F, int K) {
  if (K < 2) throw ProblemError("family_from_F: K must be at least 2");
  MfdeProblem p;
  p.a = differentiate(F);
  p.b = -Expr::apply(ExprFunc::exp, shift_argument(F, 1.0));
  p.c = Expr::apply(ExprFunc::exp, shift_argument(F, -1.0));
  const Expr x = Expr::apply(ExprFunc::exp, F);
  p.psi1 = x;
  p.psi2 = x;
  p.exact = x;
  p.K = K;
  p.name = "family";
  return p;
}

/// Built-in benchmark problems exp1..exp5. All have known analytic
/// solutions; params must supply "K" always and "m" for exp1.
inline MfdeProblem catalog(const std::string& name,
                           const std::map<std::string, double>& params) {
  const auto need = [&](const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) {
      throw ProblemError("catalog '" + name + "': missing parameter '" + key + "'");
    }
    return it->second;
  };
  const int K = static_cast<int>(need("K"));
  if (K < 2) throw ProblemError("catalog: K must be at least 2");

  if (name == "exp1") {
    const double m = need("m");
    if (m == 0.0) throw ProblemError("catalog exp1: m must be nonzero");
    MfdeProblem p = family_from_F(Expr::number(m) * Expr::variable(), K);
    p.name = name;
    return p;
  }
  if (name == "exp2") {
    MfdeProblem p;
    p.a = parse_expression("(3*t^2 - 2*t + 1) / (t^3 - t^2 + t + 5)");
    p.b = parse_expression("-t^3 - 2*t^2 - 2*t - 6");
    p.c = parse_expression("t^3 - 4*t^2 + 6*t + 2");
    p.exact = parse_expression("t^3 - t^2 + t + 5");
    p.psi1 = *p.exact;
    p.psi2 = *p.exact;
    p.K = K;
    p.name = name;
    return p;
  }
  if (name == "exp3") {
    MfdeProblem p;
    p.a = parse_expression("(cos(t) - exp(-t)) / (sin(t) + exp(-t) + 2)");
    p.b = parse_expression("-sin(t+1) - exp(-t-1) - 2");
    p.c = parse_expression("sin(t-1) + exp(-t+1) + 2");
    p.exact = parse_expression("sin(t) + exp(-t) + 2");
    p.psi1 = *p.exact;
    p.psi2 = *p.exact;
    p.K = K;
    p.name = name;
    return p;
  }
  if (name == "exp4") {
    MfdeProblem p;
    p.a = parse_expression("-0.5*(t+2)^(-1.5)");
    p.b = parse_expression("-exp((t+3)^(-0.5))");
    p.c = parse_expression("exp((t+1)^(-0.5))");
    p.exact = parse_expression("exp((t+2)^(-0.5))");
    p.psi1 = *p.exact;
    p.psi2 = *p.exact;
    p.K = K;
    p.name = name;
    return p;
  }
  if (name == "exp5") {
    // V(t) = Vp sin(2 pi fp t) + m Vp/2 cos(2 pi (fp - fm) t)
    //        - m Vp/2 cos(2 pi (fp + fm) t) + pi
    // with Vp = 1, fp = 3/(10 pi), m = 1/2, fm = 1/(20 pi); the angular
    // frequencies reduce to 0.6, 0.5 and 0.7 exactly.
    const Expr V = parse_expression(
        "sin(0.6*t) + 0.25*cos(0.5*t) - 0.25*cos(0.7*t) + pi");
    MfdeProblem p = family_from_F(Expr::apply(ExprFunc::ln, V), K);
    p.name = name;
    return p;
  }
  throw ProblemError("catalog: unknown problem '" + name + "'");
}

namespace detail {

/// Exact power-basis form of an expression, when it is a polynomial built
/// from +, -, *, constant division, and non-negative integer powers.
inline std::optional<Poly> expr_to_poly(const Expr& e) {
  constexpr int kDegreeCap = 64;
  switch (e.kind()) {
    case ExprKind::number: return Poly::constant(e.number_value());
    case ExprKind::variable: return Poly({0.0, 1.0});
    case ExprKind::negate: {
      auto p = expr_to_poly(e.operand(0));
      if (!p) return std::nullopt;
      return scale(*p, -1.0);
    }
    case ExprKind::add: {
      auto p = expr_to_poly(e.operand(0));
      auto q = expr_to_poly(e.operand(1));
      if (!p || !q) return std::nullopt;
      return add(*p, *q);
    }
    case ExprKind::subtract: {
      auto p = expr_to_poly(e.operand(0));
      auto q = expr_to_poly(e.operand(1));
      if (!p || !q) return std::nullopt;
      return sub(*p, *q);
    }
    case ExprKind::multiply: {
      auto p = expr_to_poly(e.operand(0));
      auto q = expr_to_poly(e.operand(1));
      if (!p || !q) return std::nullopt;
      if (p->degree() + q->degree() > kDegreeCap) return std::nullopt;
      return mul(*p, *q);
    }
    case ExprKind::divide: {
      auto p = expr_to_poly(e.operand(0));
      auto q = expr_to_poly(e.operand(1));
      if (!p || !q) return std::nullopt;
      if (q->degree() != 0) return std::nullopt;
      const double c = q->coefficient(0);
      if (c == 0.0) return std::nullopt;
      return scale(*p, 1.0 / c);
    }
    case ExprKind::power: {
      const Expr exponent = e.operand(1);
      if (!exponent.is_number()) return std::nullopt;
      const double ev = exponent.number_value();
      if (ev < 0.0 || std::rint(ev) != ev || ev > kDegreeCap) return std::nullopt;
      auto base = expr_to_poly(e.operand(0));
      if (!base) return std::nullopt;
      const int k = static_cast<int>(ev);
      if (base->degree() * k > kDegreeCap) return std::nullopt;
      Poly out = Poly::constant(1.0);
      for (int i = 0; i < k; ++i) out = mul(out, *base);
      return out;
    }
    case ExprKind::call: return std::nullopt;
  }
  return std::nullopt;
}

/// Representation of f(s + shift) on s in [0,1] as a polynomial with
/// exactly `degree`+1 stored coefficients: exact affine rebasing when f is
/// already a polynomial of small enough degree, Chebyshev-Gauss
/// interpolation otherwise.
inline Poly rebase_or_interpolate(const Expr& f, double shift, int degree) {
  if (auto p = expr_to_poly(f); p && p->degree() <= degree) {
    return compose_affine(*p, 1.0, shift).resized(static_cast<std::size_t>(degree) + 1);
  }
  return interpolate([&](double s) { return eval(f, s + shift); }, degree)
      .resized(static_cast<std::size_t>(degree) + 1);
}

}  // namespace detail

/// Threshold below which a leading coefficient of the rescaled a_k is
/// treated as vanishing; the canonical-polynomial recursion divides by it.
inline constexpr double kLeadingCoefficientTolerance = 1e-12;

/// Per-step polynomial data for the rescaled problem. Step k holds a_k, b_k,
/// c_k with exactly d+1 stored coefficients each; the boundary sequences are
/// the degree-n coefficient sequences of psi1(s-1) and psi2(s+K-1),
/// zero-padded to length n+1.
///
/// d = 0 flags the autonomous path (constant per-step coefficients). For
/// d >= 1, steps whose leading coefficient |alpha_d| falls below
/// kLeadingCoefficientTolerance are recorded in weak_leading_steps; the
/// canonical assembly path rejects them (its recursion divides by alpha_d),
/// the direct path is unaffected.
struct DiscretizedProblem {
  int K = 0;
  int n = 0;
  int d = 0;
  std::vector<Poly> a, b, c;
  std::vector<double> boundary_left;
  std::vector<double> boundary_right;
  std::vector<int> weak_leading_steps;
  double min_leading_coefficient = 0.0;
};

inline DiscretizedProblem discretize(const MfdeProblem& p, int n, int d) {
  if (n < 1) throw ProblemError("discretize: n must be at least 1");
  if (d < 0 || d > n) throw ProblemError("discretize: require 0 <= d <= n");
  if (p.K < 2) throw ProblemError("discretize: K must be at least 2");

  DiscretizedProblem disc;
  disc.K = p.K;
  disc.n = n;
  disc.d = d;
  const int steps = p.K - 1;
  disc.a.reserve(steps);
  disc.b.reserve(steps);
  disc.c.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    disc.a.push_back(detail::rebase_or_interpolate(p.a, k, d));
    disc.b.push_back(detail::rebase_or_interpolate(p.b, k, d));
    disc.c.push_back(detail::rebase_or_interpolate(p.c, k, d));
  }
  disc.boundary_left =
      detail::rebase_or_interpolate(p.psi1, -1.0, n).coefficients();
  disc.boundary_right =
      detail::rebase_or_interpolate(p.psi2, p.K - 1.0, n).coefficients();

  if (d >= 1) {
    double min_lead = std::numeric_limits<double>::infinity();
    for (int k = 0; k < steps; ++k) {
      const double lead = std::abs(disc.a[static_cast<std::size_t>(k)].coefficient(d));
      min_lead = std::min(min_lead, lead);
      if (lead <= kLeadingCoefficientTolerance) {
        disc.weak_leading_steps.push_back(k);
      }
    }
    disc.min_leading_coefficient = min_lead;
  } else {
    double min_lead = std::numeric_limits<double>::infinity();
    for (int k = 0; k < steps; ++k) {
      min_lead = std::min(min_lead, std::abs(disc.a[static_cast<std::size_t>(k)].coefficient(0)));
    }
    disc.min_leading_coefficient = min_lead;
  }
  return disc;
}

}  // namespace mfdetau
