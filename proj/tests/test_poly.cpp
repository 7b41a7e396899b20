#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "mfdetau/poly.hpp"

using namespace mfdetau;

TEST_CASE("eval is plain Horner evaluation") {
  const Poly p({5.0, 1.0, -1.0, 1.0});  // t^3 - t^2 + t + 5
  CHECK(eval(p, 1.0) == Catch::Approx(6.0));
  CHECK(eval(Poly::zero(), 3.7) == 0.0);
  CHECK(eval(Poly({1.0, -8.0, 8.0}), 0.0) == Catch::Approx(1.0));  // T*_2(0) = 1
}

TEST_CASE("arithmetic basics") {
  CHECK(mul(Poly({0.0, 1.0}), Poly({0.0, 1.0})).coefficients() ==
        std::vector<double>{0.0, 0.0, 1.0});
  CHECK(differentiate(Poly({5.0, 1.0, -1.0, 1.0})).coefficients() ==
        std::vector<double>{1.0, -2.0, 3.0});
  const Poly p({2.0, -3.0, 0.5});
  CHECK(add(p, scale(p, -1.0)).is_zero());
  CHECK(Poly::zero().degree() == Poly::kZeroDegree);
  CHECK(Poly({0.0, 0.0, 4.0}).degree() == 2);
}

TEST_CASE("arithmetic agrees with pointwise arithmetic at sample points") {
  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> coeff(-3.0, 3.0);
  std::uniform_real_distribution<double> point(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pc(1 + trial % 9), qc(1 + (trial * 7) % 9);
    for (double& v : pc) v = coeff(rng);
    for (double& v : qc) v = coeff(rng);
    const Poly p(pc), q(qc);
    const double s = point(rng);
    CHECK(eval(add(p, q), s) == Catch::Approx(eval(p, s) + eval(q, s)).margin(1e-12));
    CHECK(eval(mul(p, q), s) == Catch::Approx(eval(p, s) * eval(q, s)).margin(1e-12));
    const double h = 1e-6;
    CHECK(eval(differentiate(p), s) ==
          Catch::Approx((eval(p, s + h) - eval(p, s - h)) / (2 * h)).margin(1e-5));
  }
}

TEST_CASE("compose_affine rebases exactly") {
  CHECK(compose_affine(Poly({0.0, 1.0}), 1.0, 4.0).coefficients() ==
        std::vector<double>{4.0, 1.0});

  // (s+1)^3 - (s+1)^2 + (s+1) + 5 = s^3 + 2 s^2 + 2 s + 6
  const Poly x({5.0, 1.0, -1.0, 1.0});
  const Poly shifted = compose_affine(x, 1.0, 1.0);
  REQUIRE(shifted.coefficients().size() == 4);
  CHECK(shifted.coefficient(0) == Catch::Approx(6.0));
  CHECK(shifted.coefficient(1) == Catch::Approx(2.0));
  CHECK(shifted.coefficient(2) == Catch::Approx(2.0));
  CHECK(shifted.coefficient(3) == Catch::Approx(1.0));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> point(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const double s = point(rng);
    CHECK(eval(shifted, s) == Catch::Approx(eval(x, s + 1.0)).epsilon(1e-13));
  }

  const Poly constant = compose_affine(x, 0.0, 0.5);
  CHECK(constant.degree() == 0);
  CHECK(constant.coefficient(0) == Catch::Approx(eval(x, 0.5)));
}

TEST_CASE("compose_affine evaluation identity on random polynomials") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_real_distribution<double> par(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> pc(1 + trial % 13);
    for (double& v : pc) v = coeff(rng);
    const Poly p(pc);
    const double alpha = par(rng), beta = par(rng), s = par(rng);
    const double direct = eval(p, alpha * s + beta);
    const double composed = eval(compose_affine(p, alpha, beta), s);
    CHECK(composed == Catch::Approx(direct).margin(1e-12 * (1.0 + std::abs(direct))));
  }
}

TEST_CASE("shifted Chebyshev generation") {
  CHECK(chebyshev_shifted(0).coefficients() == std::vector<double>{1.0});
  CHECK(chebyshev_shifted(1).coefficients() == std::vector<double>{-1.0, 2.0});
  CHECK(chebyshev_shifted(2).coefficients() == std::vector<double>{1.0, -8.0, 8.0});
  CHECK_THROWS_AS(chebyshev_shifted(61), std::domain_error);

  SECTION("matches cos(n arccos(2s-1)) for n <= 12") {
    for (int n = 0; n <= 12; ++n) {
      const Poly t = chebyshev_shifted(n);
      for (int i = 0; i <= 1000; ++i) {
        const double s = static_cast<double>(i) / 1000.0;
        const double reference = std::cos(n * std::acos(2.0 * s - 1.0));
        REQUIRE(std::abs(eval(t, s) - reference) <= 1e-9);
      }
    }
  }

  SECTION("leading coefficient is 2^(2n-1) exactly") {
    for (int n = 1; n <= 12; ++n) {
      CHECK(chebyshev_shifted(n).coefficient(n) == std::ldexp(1.0, 2 * n - 1));
    }
  }
}

TEST_CASE("interpolation at Chebyshev-Gauss nodes") {
  SECTION("reproduces polynomials of matching degree") {
    const Poly p({0.3, -1.2, 0.0, 2.5, -0.75});
    const Poly q = interpolate([&](double s) { return eval(p, s); }, 4);
    REQUIRE(q.coefficients().size() == 5);
    for (int i = 0; i <= 4; ++i) {
      CHECK(q.coefficient(i) == Catch::Approx(p.coefficient(i)).margin(1e-12));
    }
  }

  SECTION("degree-6 interpolant of exp on [0,1] is accurate to 1e-7") {
    const Poly p = interpolate([](double s) { return std::exp(s); }, 6);
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double s = static_cast<double>(i) / 1000.0;
      worst = std::max(worst, std::abs(eval(p, s) - std::exp(s)));
    }
    CHECK(worst <= 1e-7);
  }

  SECTION("degree zero samples the midpoint") {
    const Poly p = interpolate([](double) { return 3.0; }, 0);
    CHECK(p.coefficients() == std::vector<double>{3.0});
  }
}
