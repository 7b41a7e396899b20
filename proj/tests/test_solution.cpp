#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "mfdetau/solution.hpp"

using namespace mfdetau;

TEST_CASE("solutions of easy fixed-point problems are exact") {
  SECTION("zero operator with constant boundary data") {
    MfdeProblem p;
    p.a = Expr::number(0.0);
    p.b = Expr::number(0.0);
    p.c = Expr::number(0.0);
    p.psi1 = Expr::number(3.0);
    p.psi2 = Expr::number(3.0);
    p.K = 4;
    const PipelineResult run = solve_mfde(p, 5, 0, AssemblyPath::direct);
    for (const Poly& x : run.sol.steps) {
      CHECK(std::abs(eval(x, 0.3) - 3.0) <= 1e-9);
      CHECK(std::abs(eval(x, 0.9) - 3.0) <= 1e-9);
    }
  }

  SECTION("polynomial solution with polynomial data is reproduced") {
    // x = t^2 + 1 solves x' = a x + b x(t-1) with
    // a = (6t - 4t^2)/5 and b = (4t^2 + 2t)/5 (and c = 0).
    MfdeProblem p;
    p.a = parse_expression("(6*t - 4*t^2)/5");
    p.b = parse_expression("(4*t^2 + 2*t)/5");
    p.c = Expr::number(0.0);
    p.psi1 = parse_expression("t^2 + 1");
    p.psi2 = parse_expression("t^2 + 1");
    p.exact = parse_expression("t^2 + 1");
    p.K = 3;
    const PipelineResult run = solve_mfde(p, 4, 2, AssemblyPath::direct);
    for (int k = 0; k <= p.K - 2; ++k) {
      const Poly expected = compose_affine(Poly({1.0, 0.0, 1.0}), 1.0, k);
      for (int i = 0; i <= 4; ++i) {
        REQUIRE(std::abs(run.sol.steps[static_cast<std::size_t>(k)].coefficient(i) -
                         expected.coefficient(i)) <= 1e-9);
      }
    }
    for (const auto& tau : run.sol.taus) {
      for (double v : tau) CHECK(std::abs(v) <= 1e-9);
    }
    const ErrorReport report = error_report(run.sol, p);
    CHECK(report.global <= 1e-9);
  }
}

TEST_CASE("extract routes coefficients and taus via the index map") {
  MfdeProblem p = catalog("exp2", {{"K", 3}});
  const PipelineResult run = solve_mfde(p, 3, 3, AssemblyPath::direct);
  const TauSolution& sol = run.sol;
  REQUIRE(sol.steps.size() == 2);
  REQUIRE(sol.taus[0].size() == 5);  // d + 2
  REQUIRE(sol.taus[1].size() == 4);  // d + 1
  CHECK(sol.max_continuity_gap <= 1e-9 * 12.0);

  SECTION("length mismatch is rejected") {
    std::vector<double> wrong(static_cast<std::size_t>(run.sys.order()) - 1, 0.0);
    CHECK_THROWS_AS(extract(wrong, run.sys), SolutionError);
  }
}

TEST_CASE("solved exp2 matches the tabulated approximation") {
  // The tabulated coefficients, taus and errors come from the
  // canonical-polynomial assembly; the direct path solves the perturbed
  // problem exactly but projects differently, so only the canonical path is
  // coefficient-comparable.
  MfdeProblem p = catalog("exp2", {{"K", 3}});
  const PipelineResult run = solve_mfde(p, 3, 3, AssemblyPath::canonical);

  SECTION("first-step coefficients (t-variable equals s-variable at k = 0)") {
    const std::vector<double> reference = {5.00, 0.99, -0.97, 1.00};
    for (int i = 0; i <= 3; ++i) {
      CHECK(std::abs(run.sol.steps[0].coefficient(i) -
                     reference[static_cast<std::size_t>(i)]) <= 0.05);
    }
  }

  SECTION("second step, rebased to the t variable") {
    // 0.97 t^3 - 0.71 t^2 + 0.30 t + 5.45 printed at two decimals
    const Poly x1_t = compose_affine(run.sol.steps[1], 1.0, -1.0);
    const std::vector<double> reference = {5.45, 0.30, -0.71, 0.97};
    for (int i = 0; i <= 3; ++i) {
      CHECK(std::abs(x1_t.coefficient(i) - reference[static_cast<std::size_t>(i)]) <= 0.05);
    }
  }

  SECTION("first-step perturbation term") {
    // (0.02 t^4 - 0.12 t^3 + 0.17 t^2 - 0.13 t - 0.04) against T*_2
    REQUIRE(run.sol.taus[0].size() == 5);
    const std::vector<double> reference = {-0.04, -0.13, 0.17, -0.12, 0.02};
    for (int i = 0; i <= 4; ++i) {
      CHECK(std::abs(run.sol.taus[0][static_cast<std::size_t>(i)] -
                     reference[static_cast<std::size_t>(i)]) <= 0.05);
    }
  }

  SECTION("errors stay in the tabulated neighbourhood on both paths") {
    const ErrorReport canonical_report = error_report(run.sol, p);
    REQUIRE(canonical_report.per_subinterval.size() == 2);
    CHECK(canonical_report.per_subinterval[0] >= 5e-3);
    CHECK(canonical_report.per_subinterval[0] <= 1e-1);
    CHECK(canonical_report.per_subinterval[1] >= 5e-3);
    CHECK(canonical_report.per_subinterval[1] <= 1.2e-1);

    const PipelineResult direct = solve_mfde(p, 3, 3, AssemblyPath::direct);
    const ErrorReport direct_report = error_report(direct.sol, p);
    CHECK(direct_report.global <= 1.2e-1);
  }
}

TEST_CASE("eval_at follows the right-closed subinterval convention") {
  MfdeProblem p = catalog("exp1", {{"K", 5}, {"m", 0.7}});
  const PipelineResult run = solve_mfde(p, 7, 0, AssemblyPath::direct);
  const TauSolution& sol = run.sol;

  CHECK(eval_at(sol, p, 2.5) == Catch::Approx(eval(sol.steps[2], 0.5)));
  CHECK(eval_at(sol, p, 0.0) == Catch::Approx(eval(p.psi1, 0.0)));
  CHECK(eval_at(sol, p, -0.25) == Catch::Approx(eval(p.psi1, -0.25)));
  CHECK(eval_at(sol, p, 1.0) == Catch::Approx(eval(sol.steps[0], 1.0)));
  CHECK(std::abs(eval(sol.steps[0], 1.0) - eval(sol.steps[1], 0.0)) <= 1e-9 * 3.0);
  CHECK(eval_at(sol, p, 4.5) == Catch::Approx(eval(p.psi2, 4.5)));
  CHECK(eval_at(sol, p, 5.0) == Catch::Approx(eval(p.psi2, 5.0)));
  CHECK_THROWS_AS(eval_at(sol, p, 5.1), SolutionError);
  CHECK_THROWS_AS(eval_at(sol, p, -1.1), SolutionError);
}

TEST_CASE("error report conventions") {
  MfdeProblem p = catalog("exp2", {{"K", 3}});
  PipelineResult run = solve_mfde(p, 3, 3, AssemblyPath::direct);

  SECTION("global equals the maximum over subintervals") {
    const ErrorReport report = error_report(run.sol, p);
    double expected = 0.0;
    for (double v : report.per_subinterval) expected = std::max(expected, v);
    CHECK(report.global == expected);
    CHECK(report.nodes_per_subinterval == 128);
  }

  SECTION("injected exact solution reports zero error") {
    TauSolution injected = run.sol;
    const Poly exact({5.0, 1.0, -1.0, 1.0});
    injected.steps.clear();
    for (int k = 0; k <= p.K - 2; ++k) {
      injected.steps.push_back(compose_affine(exact, 1.0, k));
    }
    const ErrorReport report = error_report(injected, p);
    CHECK(report.global <= 1e-12);
  }

  SECTION("problems without an analytic solution are rejected") {
    MfdeProblem q = p;
    q.exact.reset();
    CHECK_THROWS_AS(error_report(run.sol, q), SolutionError);
  }
}

TEST_CASE("perturbed residual vanishes on the direct path") {
  for (auto cfg : {std::pair{std::string("exp2"), std::array<int, 3>{3, 3, 3}},
                   std::pair{std::string("exp3"), std::array<int, 3>{5, 8, 8}}}) {
    std::map<std::string, double> params = {{"K", static_cast<double>(cfg.second[0])}};
    MfdeProblem p = catalog(cfg.first, params);
    const PipelineResult run = solve_mfde(p, cfg.second[1], cfg.second[2], AssemblyPath::direct);
    const auto residuals = perturbed_residual(run.sol, run.disc);
    double rhs_scale = 0.0;
    for (double v : run.sys.rhs) rhs_scale = std::max(rhs_scale, std::abs(v));
    for (double r : residuals) {
      REQUIRE(r <= 1e-9 * (1.0 + rhs_scale));
    }
  }
}

TEST_CASE("classic decoupled problem reduces to single-equation behaviour") {
  // b = c = 0 decouples the steps into x' = x chained by continuity; the
  // pieces must follow e^t to near machine accuracy at n = 9.
  MfdeProblem p;
  p.a = Expr::number(1.0);
  p.b = Expr::number(0.0);
  p.c = Expr::number(0.0);
  p.psi1 = parse_expression("exp(t)");
  p.psi2 = parse_expression("exp(t)");
  p.exact = parse_expression("exp(t)");
  p.K = 3;
  const PipelineResult run = solve_mfde(p, 9, 0, AssemblyPath::direct);
  const ErrorReport report = error_report(run.sol, p);
  CHECK(report.global <= 1e-8);
}

TEST_CASE("dual-path comparison") {
  SECTION("identical inputs give a zero report") {
    MfdeProblem p = catalog("exp2", {{"K", 3}});
    const PipelineResult run = solve_mfde(p, 3, 3, AssemblyPath::direct);
    const PathComparison cmp = compare_paths(run.sol, run.sol);
    CHECK(cmp.max_coefficient_diff == 0.0);
    CHECK(cmp.max_value_diff == 0.0);
  }

  SECTION("direct vs canonical on exp2 completes with finite entries") {
    MfdeProblem p = catalog("exp2", {{"K", 3}});
    const PipelineResult direct = solve_mfde(p, 3, 3, AssemblyPath::direct);
    const PipelineResult canon =
        solve_mfde(p, 3, 3, AssemblyPath::canonical, ContinuityCheck::record);
    const PathComparison cmp = compare_paths(direct.sol, canon.sol);
    REQUIRE(cmp.coefficient_diff.size() == 2);
    for (double v : cmp.coefficient_diff) REQUIRE(std::isfinite(v));
    for (double v : cmp.value_diff) REQUIRE(std::isfinite(v));
  }

  SECTION("autonomous and direct paths agree when d = 0") {
    MfdeProblem p = catalog("exp1", {{"K", 3}, {"m", 0.7}});
    const PipelineResult direct = solve_mfde(p, 7, 0, AssemblyPath::direct);
    const PipelineResult autonomous = solve_mfde(p, 7, 0, AssemblyPath::autonomous);
    const PathComparison cmp = compare_paths(direct.sol, autonomous.sol);
    CHECK(cmp.max_value_diff <= 1e-8);
  }

  SECTION("shape mismatch is rejected") {
    MfdeProblem p = catalog("exp2", {{"K", 3}});
    const PipelineResult a = solve_mfde(p, 3, 3, AssemblyPath::direct);
    const PipelineResult b = solve_mfde(p, 4, 3, AssemblyPath::direct);
    CHECK_THROWS_AS(compare_paths(a.sol, b.sol), SolutionError);
  }
}

TEST_CASE("autonomous benchmark accuracy") {
  MfdeProblem p = catalog("exp1", {{"K", 3}, {"m", 0.7}});
  const PipelineResult run = solve_mfde(p, 9, 0, AssemblyPath::autonomous);
  CHECK(run.sys.order() == 23);
  const ErrorReport report = error_report(run.sol, p);
  CHECK(report.global <= 1e-8);
}
