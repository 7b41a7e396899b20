#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mfdetau {

/// Dense univariate polynomial in the power basis on a unit reference
/// interval. Coefficients are stored in ascending powers; trailing
/// coefficients whose magnitude is below 1e-14 times the largest stored
/// coefficient are ignored by degree().
class Poly {
 public:
  /// Sentinel returned by degree() for the zero polynomial.
  static constexpr int kZeroDegree = -1;

  Poly() = default;

  explicit Poly(std::vector<double> coefficients)
      : coeff_(std::move(coefficients)) {
    for (double v : coeff_) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("Poly: non-finite coefficient");
      }
    }
  }

  Poly(std::initializer_list<double> coefficients)
      : Poly(std::vector<double>(coefficients)) {}

  static Poly zero() { return Poly{}; }

  static Poly constant(double c) { return Poly(std::vector<double>{c}); }

  /// c * s^degree
  static Poly monomial(int degree, double c = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(degree) + 1, 0.0);
    v.back() = c;
    return Poly(std::move(v));
  }

  const std::vector<double>& coefficients() const { return coeff_; }

  /// Coefficient of s^i; zero outside the stored range (also for i < 0,
  /// which realizes the zero-padding conventions of the assembly stage).
  double coefficient(int i) const {
    if (i < 0 || i >= static_cast<int>(coeff_.size())) return 0.0;
    return coeff_[static_cast<std::size_t>(i)];
  }

  /// Largest index carrying a significant coefficient, kZeroDegree when none.
  int degree() const {
    double maxabs = 0.0;
    for (double v : coeff_) maxabs = std::max(maxabs, std::abs(v));
    if (maxabs == 0.0) return kZeroDegree;
    for (int i = static_cast<int>(coeff_.size()) - 1; i >= 0; --i) {
      if (std::abs(coeff_[static_cast<std::size_t>(i)]) > 1e-14 * maxabs) {
        return i;
      }
    }
    return kZeroDegree;
  }

  bool is_zero() const { return degree() == kZeroDegree; }

  /// Copy with insignificant trailing coefficients dropped.
  Poly normalized() const {
    const int deg = degree();
    if (deg == kZeroDegree) return Poly{};
    std::vector<double> v(coeff_.begin(), coeff_.begin() + (deg + 1));
    return Poly(std::move(v));
  }

  /// Copy zero-padded (or truncated) to exactly size stored coefficients.
  Poly resized(std::size_t size) const {
    std::vector<double> v = coeff_;
    v.resize(size, 0.0);
    return Poly(std::move(v));
  }

 private:
  std::vector<double> coeff_;
};

/// Horner evaluation over the full stored coefficient range, compensated
/// with error-free transformations so that large cancelling coefficients
/// (shifted Chebyshev polynomials grow like 4^n) do not pollute the value.
inline double eval(const Poly& p, double s) {
  const auto& c = p.coefficients();
  if (c.empty()) return 0.0;
  double acc = c.back();
  double compensation = 0.0;
  for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i) {
    const double product = acc * s;
    const double product_err = std::fma(acc, s, -product);
    const double sum = product + c[static_cast<std::size_t>(i)];
    const double z = sum - product;
    const double sum_err = (product - (sum - z)) + (c[static_cast<std::size_t>(i)] - z);
    compensation = compensation * s + (product_err + sum_err);
    acc = sum;
  }
  return acc + compensation;
}

inline Poly add(const Poly& p, const Poly& q) {
  const auto& a = p.coefficients();
  const auto& b = q.coefficients();
  std::vector<double> out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return Poly(std::move(out));
}

inline Poly scale(const Poly& p, double lambda) {
  std::vector<double> out = p.coefficients();
  for (double& v : out) v *= lambda;
  return Poly(std::move(out));
}

inline Poly sub(const Poly& p, const Poly& q) { return add(p, scale(q, -1.0)); }

inline Poly mul(const Poly& p, const Poly& q) {
  const auto& a = p.coefficients();
  const auto& b = q.coefficients();
  if (a.empty() || b.empty()) return Poly{};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return Poly(std::move(out));
}

inline Poly differentiate(const Poly& p) {
  const auto& c = p.coefficients();
  if (c.size() <= 1) return Poly{};
  std::vector<double> out(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) {
    out[i - 1] = static_cast<double>(i) * c[i];
  }
  return Poly(std::move(out));
}

/// q with q(s) = p(alpha*s + beta), computed by Horner composition with the
/// linear factor (exact binomial expansion).
inline Poly compose_affine(const Poly& p, double alpha, double beta) {
  const auto& c = p.coefficients();
  if (c.empty()) return Poly{};
  const Poly line({beta, alpha});
  Poly result = Poly::constant(c.back());
  for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i) {
    result = add(mul(result, line), Poly::constant(c[static_cast<std::size_t>(i)]));
  }
  return result;
}

inline double coefficient_inf_norm(const Poly& p) {
  double m = 0.0;
  for (double v : p.coefficients()) m = std::max(m, std::abs(v));
  return m;
}

/// Shifted Chebyshev polynomial T*_n on [0,1] in the power basis, via the
/// recurrence T*_{n+1}(s) = 2(2s-1)T*_n(s) - T*_{n-1}(s).
///
/// Coefficients grow like 4^n; beyond n = 25 they leave the exactly
/// representable integer range of 64-bit floats, so a hard cap of 60 is
/// enforced and a one-time warning is emitted above 25.
inline Poly chebyshev_shifted(int n) {
  if (n < 0) throw std::invalid_argument("chebyshev_shifted: negative degree");
  if (n > 60) {
    throw std::domain_error(
        "chebyshev_shifted: degree cap (60) exceeded; coefficients are not "
        "representable reliably in double precision");
  }
  if (n > 25) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      std::cerr << "chebyshev_shifted: coefficients for n > 25 exceed the "
                   "exact integer range of double precision\n";
    }
  }
  Poly prev = Poly::constant(1.0);
  if (n == 0) return prev;
  Poly cur({-1.0, 2.0});
  const Poly factor({-2.0, 4.0});  // 2*(2s - 1)
  for (int k = 1; k < n; ++k) {
    Poly next = sub(mul(factor, cur), prev);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// Degree-<=d interpolant of f on [0,1] at the Chebyshev-Gauss nodes
/// s_i = (1 + cos((2i+1)pi/(2d+2)))/2, built by Newton divided differences
/// and converted to the power basis. Evaluation errors of f propagate.
template <class F>
Poly interpolate(F&& f, int d) {
  if (d < 0) throw std::invalid_argument("interpolate: negative degree");
  const int m = d + 1;
  const double pi = std::acos(-1.0);
  std::vector<double> nodes(static_cast<std::size_t>(m));
  std::vector<double> dd(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    nodes[static_cast<std::size_t>(i)] =
        0.5 * (1.0 + std::cos((2.0 * i + 1.0) * pi / (2.0 * m)));
    dd[static_cast<std::size_t>(i)] = f(nodes[static_cast<std::size_t>(i)]);
  }
  for (int level = 1; level < m; ++level) {
    for (int j = m - 1; j >= level; --j) {
      dd[static_cast<std::size_t>(j)] =
          (dd[static_cast<std::size_t>(j)] - dd[static_cast<std::size_t>(j - 1)]) /
          (nodes[static_cast<std::size_t>(j)] - nodes[static_cast<std::size_t>(j - level)]);
    }
  }
  Poly p = Poly::constant(dd[static_cast<std::size_t>(m - 1)]);
  for (int j = m - 2; j >= 0; --j) {
    p = add(mul(p, Poly({-nodes[static_cast<std::size_t>(j)], 1.0})),
            Poly::constant(dd[static_cast<std::size_t>(j)]));
  }
  return p;
}

}  // namespace mfdetau
