#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mfdetau/problem.hpp"

using namespace mfdetau;

namespace {

/// Residual of the full functional equation at t for a candidate solution x:
/// x'(t) - a(t)x(t) - b(t)x(t-1) - c(t)x(t+1), all evaluated symbolically.
double equation_residual(const MfdeProblem& p, const Expr& x, double t) {
  const Expr dx = differentiate(x);
  return eval(dx, t) - eval(p.a, t) * eval(x, t) - eval(p.b, t) * eval(x, t - 1.0) -
         eval(p.c, t) * eval(x, t + 1.0);
}

}  // namespace

TEST_CASE("family generator produces the expected pieces") {
  SECTION("linear F") {
    const MfdeProblem p = family_from_F(Expr::number(0.7) * Expr::variable(), 3);
    REQUIRE(p.exact.has_value());
    CHECK(p.a.is_number());
    CHECK(p.a.number_value() == Catch::Approx(0.7));
    CHECK(eval(p.b, 0.0) == Catch::Approx(-std::exp(0.7)));
    CHECK(eval(p.c, 0.0) == Catch::Approx(std::exp(-0.7)));
    CHECK(eval(*p.exact, 1.0) == Catch::Approx(std::exp(0.7)));
  }

  SECTION("logarithmic F recovers a polynomial solution") {
    const Expr F = Expr::apply(ExprFunc::ln, parse_expression("t^3 - t^2 + t + 5"));
    const MfdeProblem p = family_from_F(F, 3);
    for (double t : {0.1, 0.9, 1.7}) {
      const double poly = t * t * t - t * t + t + 5.0;
      CHECK(eval(*p.exact, t) == Catch::Approx(poly).epsilon(1e-12));
      const double da = (3 * t * t - 2 * t + 1) / poly;
      CHECK(eval(p.a, t) == Catch::Approx(da).epsilon(1e-12));
    }
  }

  SECTION("F = 0 gives the constant solution") {
    const MfdeProblem p = family_from_F(Expr::number(0.0), 4);
    CHECK(eval(p.a, 0.3) == 0.0);
    CHECK(eval(p.b, 1.1) == Catch::Approx(-1.0));
    CHECK(eval(p.c, 2.2) == Catch::Approx(1.0));
    CHECK(eval(*p.exact, 2.9) == Catch::Approx(1.0));
  }
}

TEST_CASE("catalog reproduces the benchmark problems") {
  SECTION("exp2 coefficients") {
    const MfdeProblem p = catalog("exp2", {{"K", 3}});
    for (double t : {0.0, 0.5, 1.25, 2.0}) {
      CHECK(eval(p.b, t) == Catch::Approx(-t * t * t - 2 * t * t - 2 * t - 6));
      CHECK(eval(p.c, t) == Catch::Approx(t * t * t - 4 * t * t + 6 * t + 2));
    }
  }

  SECTION("exp4 coefficient and solution") {
    const MfdeProblem p = catalog("exp4", {{"K", 3}});
    CHECK(eval(p.a, 2.0) == Catch::Approx(-1.0 / 16.0));
    for (double t : {0.0, 1.0, 1.8}) {
      CHECK(eval(*p.exact, t) == Catch::Approx(std::exp(1.0 / std::sqrt(t + 2.0))));
    }
  }

  SECTION("exp1 honors its parameters") {
    const MfdeProblem p = catalog("exp1", {{"K", 4}, {"m", 2.0}});
    CHECK(p.K == 4);
    CHECK(eval(*p.exact, 1.0) == Catch::Approx(std::exp(2.0)));
  }

  SECTION("errors") {
    CHECK_THROWS_AS(catalog("exp9", {{"K", 3}}), ProblemError);
    CHECK_THROWS_AS(catalog("exp1", {{"K", 3}}), ProblemError);  // m missing
    CHECK_THROWS_AS(catalog("exp2", {}), ProblemError);          // K missing
  }
}

TEST_CASE("catalog exact solutions satisfy the functional equation") {
  const std::vector<MfdeProblem> problems = {
      catalog("exp1", {{"K", 3}, {"m", 0.7}}), catalog("exp2", {{"K", 3}}),
      catalog("exp3", {{"K", 5}}),             catalog("exp4", {{"K", 3}}),
      catalog("exp5", {{"K", 4}}),
  };
  std::mt19937 rng(5150);
  for (const auto& p : problems) {
    std::uniform_real_distribution<double> point(1e-3, p.K - 1.0 - 1e-3);
    for (int i = 0; i < 50; ++i) {
      const double t = point(rng);
      REQUIRE(std::abs(equation_residual(p, *p.exact, t)) <= 1e-9);
    }
  }
}

TEST_CASE("family generator solutions satisfy the functional equation") {
  std::mt19937 rng(8086);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> point(1e-3, 1.0 - 1e-3);
  for (int trial = 0; trial < 10; ++trial) {
    Expr F;
    if (trial < 7) {
      F = Expr::number(coeff(rng)) +
          Expr::number(coeff(rng)) * Expr::variable() +
          Expr::number(coeff(rng)) * parse_expression("t^2") +
          Expr::number(coeff(rng)) * parse_expression("t^3");
    } else if (trial == 7) {
      F = Expr::apply(ExprFunc::ln, parse_expression("t^3 - t^2 + t + 5"));
    } else if (trial == 8) {
      F = Expr::apply(ExprFunc::ln, parse_expression("sin(t) + exp(-t) + 2"));
    } else {
      F = Expr::apply(ExprFunc::ln, parse_expression(
          "sin(0.6*t) + 0.25*cos(0.5*t) - 0.25*cos(0.7*t) + pi"));
    }
    const MfdeProblem p = family_from_F(F, 2);
    for (int i = 0; i < 50; ++i) {
      const double t = point(rng);
      REQUIRE(std::abs(equation_residual(p, *p.exact, t)) <= 1e-9);
    }
  }
}

TEST_CASE("discretize rebases polynomial data exactly") {
  const MfdeProblem p = catalog("exp2", {{"K", 3}});
  const DiscretizedProblem disc = discretize(p, 3, 3);
  REQUIRE(disc.b.size() == 2);

  // b(s + 1) = -(s+1)^3 - 2(s+1)^2 - 2(s+1) - 6 = -s^3 - 5s^2 - 9s - 11,
  // cross-checked by evaluating both sides.
  const Poly& b1 = disc.b[1];
  CHECK(b1.coefficient(0) == Catch::Approx(-11.0).margin(1e-10));
  CHECK(b1.coefficient(1) == Catch::Approx(-9.0).margin(1e-10));
  CHECK(b1.coefficient(2) == Catch::Approx(-5.0).margin(1e-10));
  CHECK(b1.coefficient(3) == Catch::Approx(-1.0).margin(1e-10));
  for (double s : {0.0, 0.25, 0.7, 1.0}) {
    CHECK(eval(b1, s) == Catch::Approx(eval(p.b, s + 1.0)).margin(1e-10));
  }

  SECTION("random polynomial coefficients round-trip through discretize") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 1 + trial % 3;
      std::vector<double> ac(static_cast<std::size_t>(d) + 1);
      for (double& v : ac) v = coeff(rng);
      ac.back() = 1.0 + std::abs(ac.back());
      MfdeProblem q;
      q.a = [&] {
        Expr e = Expr::number(ac[0]);
        for (int i = 1; i <= d; ++i) {
          e = e + Expr::number(ac[static_cast<std::size_t>(i)]) *
                      Expr::power(Expr::variable(), Expr::number(i));
        }
        return e;
      }();
      q.b = parse_expression("1 - t");
      q.c = parse_expression("t");
      q.psi1 = parse_expression("1");
      q.psi2 = parse_expression("1");
      q.K = 4;
      const DiscretizedProblem dq = discretize(q, 5, d);
      for (int k = 0; k < q.K - 1; ++k) {
        const Poly expected = compose_affine(Poly(ac), 1.0, k);
        for (int i = 0; i <= d; ++i) {
          REQUIRE(std::abs(dq.a[static_cast<std::size_t>(k)].coefficient(i) -
                           expected.coefficient(i)) <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("discretize with d = 0 samples the midpoint") {
  const double m = 0.7;
  const MfdeProblem p = catalog("exp1", {{"K", 4}, {"m", m}});
  const DiscretizedProblem disc = discretize(p, 7, 0);
  REQUIRE(disc.b.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(disc.b[static_cast<std::size_t>(k)].coefficient(0) ==
          Catch::Approx(-std::exp(m * (k + 1.5))).epsilon(1e-12));
    CHECK(disc.a[static_cast<std::size_t>(k)].coefficient(0) == Catch::Approx(m));
  }
}

TEST_CASE("discretized boundary sequences represent the rebased psi") {
  const MfdeProblem p = catalog("exp1", {{"K", 3}, {"m", 0.7}});
  const DiscretizedProblem disc = discretize(p, 9, 0);
  double sum = 0.0;
  for (double v : disc.boundary_left) sum += v;
  // X_{-1}(1) = psi1(0) = 1
  CHECK(sum == Catch::Approx(1.0).margin(1e-9));

  SECTION("rebased boundary values match the originals") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> node(0.0, 1.0);
    const Poly left(disc.boundary_left);
    const Poly right(disc.boundary_right);
    for (int i = 0; i < 100; ++i) {
      const double s = node(rng);
      const double psi1 = eval(p.psi1, s - 1.0);
      const double psi2 = eval(p.psi2, s + p.K - 1.0);
      REQUIRE(std::abs(eval(left, s) - psi1) <= 1e-9 * (1.0 + std::abs(psi1)));
      REQUIRE(std::abs(eval(right, s) - psi2) <= 1e-9 * (1.0 + std::abs(psi2)));
    }
  }
}

TEST_CASE("discretize records weak leading coefficients instead of failing") {
  MfdeProblem p;
  p.a = parse_expression("1");  // degree 0, but requested at d = 1
  p.b = parse_expression("t");
  p.c = parse_expression("1 - t");
  p.psi1 = parse_expression("1 + t");
  p.psi2 = parse_expression("1 + t");
  p.K = 3;
  const DiscretizedProblem disc = discretize(p, 4, 1);
  CHECK(disc.weak_leading_steps.size() == 2);
  CHECK(disc.min_leading_coefficient <= kLeadingCoefficientTolerance);

  CHECK_THROWS_AS(discretize(p, 0, 0), ProblemError);
  CHECK_THROWS_AS(discretize(p, 3, 4), ProblemError);
}
