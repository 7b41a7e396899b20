#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfdetau/assemble.hpp"
#include "mfdetau/linalg.hpp"
#include "mfdetau/problem.hpp"

namespace mfdetau {

inline constexpr int kErrorNodesPerSubinterval = 128;

/// Piecewise polynomial solution: X_k on [0,1] for each step k = 0..K-2
/// plus the tau-parameter sequence of each step's perturbation term.
struct TauSolution {
  AssemblyPath path = AssemblyPath::direct;
  int K = 0, n = 0, d = 0;
  std::vector<Poly> steps;
  std::vector<std::vector<double>> taus;
  SolveDiagnostics diagnostics;
  double max_continuity_gap = 0.0;
};

class SolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ContinuityCheck {
  enforce,  // throw when a continuity link exceeds tolerance
  record,   // keep the gap in max_continuity_gap only (dual-path comparisons)
};

/// Routes a solved unknown vector into the piecewise solution via the
/// system's index map and verifies the continuity links
///   X_0(0) = X_{-1}(1),  X_k(0) = X_{k-1}(1),  X_{K-2}(1) = X_{K-1}(0)
/// against 1e-9 * (1 + |anchor|). A violation signals an assembly or solve
/// defect (enforce mode) or is recorded for comparison reports.
inline TauSolution extract(const std::vector<double>& x, const TauSystem& sys,
                           ContinuityCheck check = ContinuityCheck::enforce) {
  if (static_cast<int>(x.size()) != sys.order()) {
    throw SolutionError("extract: solution length does not match system order");
  }
  TauSolution sol;
  sol.path = sys.path();
  sol.K = sys.K();
  sol.n = sys.n();
  sol.d = sys.d();
  sol.steps.reserve(static_cast<std::size_t>(sys.K()) - 1);
  sol.taus.reserve(static_cast<std::size_t>(sys.K()) - 1);
  for (int k = 0; k <= sys.K() - 2; ++k) {
    std::vector<double> coeff(static_cast<std::size_t>(sys.n()) + 1);
    for (int i = 0; i <= sys.n(); ++i) {
      coeff[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(sys.coeff_index(k, i))];
    }
    sol.steps.emplace_back(std::move(coeff));
    std::vector<double> tau(static_cast<std::size_t>(sys.tau_count(k)));
    for (int i = 0; i < sys.tau_count(k); ++i) {
      tau[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(sys.tau_index(k, i))];
    }
    sol.taus.push_back(std::move(tau));
  }

  const auto link = [&](double lhs, double rhs, const std::string& what) {
    const double gap = std::abs(lhs - rhs);
    sol.max_continuity_gap = std::max(sol.max_continuity_gap, gap);
    if (check == ContinuityCheck::enforce && gap > 1e-9 * (1.0 + std::abs(lhs))) {
      throw SolutionError("extract: continuity violation at " + what + " (gap " +
                          std::to_string(gap) + "); assembly or solve defect");
    }
  };
  const double left_value =
      std::accumulate(sys.boundary_left.begin(), sys.boundary_left.end(), 0.0);
  link(eval(sol.steps.front(), 0.0), left_value, "the left boundary");
  for (int k = 1; k <= sys.K() - 2; ++k) {
    link(eval(sol.steps[static_cast<std::size_t>(k)], 0.0),
         eval(sol.steps[static_cast<std::size_t>(k - 1)], 1.0),
         "step " + std::to_string(k));
  }
  link(eval(sol.steps.back(), 1.0), sys.boundary_right.empty() ? 0.0 : sys.boundary_right[0],
       "the right boundary");
  return sol;
}

/// Value of the piecewise solution at t in [-1, K]: psi1 on [-1, 0], psi2 on
/// (K-1, K], and X_k(t - k) on the half-open subinterval (k, k+1] otherwise
/// (so each knot t = k belongs to step k-1).
inline double eval_at(const TauSolution& sol, const MfdeProblem& p, double t) {
  if (t < -1.0 || t > static_cast<double>(p.K)) {
    throw SolutionError("eval_at: t outside [-1, K]");
  }
  if (t <= 0.0) return eval(p.psi1, t);
  if (t > static_cast<double>(p.K - 1)) return eval(p.psi2, t);
  int k = static_cast<int>(std::ceil(t)) - 1;
  k = std::max(0, std::min(p.K - 2, k));
  return eval(sol.steps[static_cast<std::size_t>(k)], t - k);
}

/// Infinity-norm errors against the analytic solution measured on 128
/// equally spaced nodes t = k + i/128, i = 1..128, of each subinterval
/// (right-closed, matching the (k, k+1] convention).
struct ErrorReport {
  std::vector<double> per_subinterval;
  double global = 0.0;
  int nodes_per_subinterval = kErrorNodesPerSubinterval;
};

inline ErrorReport error_report(const TauSolution& sol, const MfdeProblem& p) {
  if (!p.exact) throw SolutionError("error_report: problem has no analytic solution");
  ErrorReport report;
  report.per_subinterval.reserve(static_cast<std::size_t>(p.K) - 1);
  for (int k = 0; k <= p.K - 2; ++k) {
    double worst = 0.0;
    for (int i = 1; i <= kErrorNodesPerSubinterval; ++i) {
      const double t = k + static_cast<double>(i) / kErrorNodesPerSubinterval;
      const double approx = eval(sol.steps[static_cast<std::size_t>(k)], t - k);
      worst = std::max(worst, std::abs(approx - eval(*p.exact, t)));
    }
    report.per_subinterval.push_back(worst);
    report.global = std::max(report.global, worst);
  }
  return report;
}

/// Reconstructs each step's perturbation term from the stored taus.
inline Poly perturbation_term(const TauSolution& sol, int k) {
  const PerturbationSpec spec = perturbation_spec(k, sol.n, sol.d);
  return mul(Poly(sol.taus[static_cast<std::size_t>(k)]),
             chebyshev_shifted(spec.chebyshev_degree));
}

/// Per-step infinity norm of the coefficient sequence of
///   X_k' - a_k X_k - b_k X_{k-1} - c_k X_{k+1} - H^{(k)},
/// the defining identity of a Tau solution. Direct-path solves satisfy it to
/// rounding; canonical-path solves may not (report, never assume).
inline std::vector<double> perturbed_residual(const TauSolution& sol,
                                              const DiscretizedProblem& disc) {
  if (sol.K != disc.K || sol.n != disc.n || sol.d != disc.d) {
    throw SolutionError("perturbed_residual: shape mismatch");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(sol.K) - 1);
  for (int k = 0; k <= sol.K - 2; ++k) {
    const Poly& xk = sol.steps[static_cast<std::size_t>(k)];
    const Poly xm = k >= 1 ? sol.steps[static_cast<std::size_t>(k - 1)] : Poly(disc.boundary_left);
    const Poly xp = k <= sol.K - 3 ? sol.steps[static_cast<std::size_t>(k + 1)] : Poly(disc.boundary_right);
    Poly r = differentiate(xk);
    r = sub(r, mul(disc.a[static_cast<std::size_t>(k)], xk));
    r = sub(r, mul(disc.b[static_cast<std::size_t>(k)], xm));
    r = sub(r, mul(disc.c[static_cast<std::size_t>(k)], xp));
    r = sub(r, perturbation_term(sol, k));
    out.push_back(coefficient_inf_norm(r));
  }
  return out;
}

/// Per-step differences between two solutions of the same discretized
/// problem: coefficientwise and on the 128-node evaluation grid.
struct PathComparison {
  std::vector<double> coefficient_diff;
  std::vector<double> value_diff;
  double max_coefficient_diff = 0.0;
  double max_value_diff = 0.0;
};

inline PathComparison compare_paths(const TauSolution& first, const TauSolution& second) {
  if (first.K != second.K || first.n != second.n || first.d != second.d) {
    throw SolutionError("compare_paths: solutions have different shapes");
  }
  PathComparison cmp;
  for (int k = 0; k <= first.K - 2; ++k) {
    const Poly& p = first.steps[static_cast<std::size_t>(k)];
    const Poly& q = second.steps[static_cast<std::size_t>(k)];
    cmp.coefficient_diff.push_back(coefficient_inf_norm(sub(p, q)));
    double worst = 0.0;
    for (int i = 1; i <= kErrorNodesPerSubinterval; ++i) {
      const double s = static_cast<double>(i) / kErrorNodesPerSubinterval;
      worst = std::max(worst, std::abs(eval(p, s) - eval(q, s)));
    }
    cmp.value_diff.push_back(worst);
    cmp.max_coefficient_diff = std::max(cmp.max_coefficient_diff, cmp.coefficient_diff.back());
    cmp.max_value_diff = std::max(cmp.max_value_diff, cmp.value_diff.back());
  }
  return cmp;
}

/// One-call pipeline: discretize, assemble on the requested path, solve, and
/// extract. Canonical and autonomous assemblies are solved with row
/// equilibration (their canonical-polynomial scales span many orders of
/// magnitude); the direct path is solved as assembled.
struct PipelineResult {
  DiscretizedProblem disc;
  TauSystem sys;
  TauSolution sol;
};

inline PipelineResult solve_mfde(const MfdeProblem& p, int n, int d, AssemblyPath path,
                                 ContinuityCheck check = ContinuityCheck::enforce) {
  DiscretizedProblem disc = discretize(p, n, d);
  TauSystem sys = [&] {
    switch (path) {
      case AssemblyPath::direct: return assemble_direct(disc);
      case AssemblyPath::canonical: return assemble_canonical(disc);
      case AssemblyPath::autonomous: return assemble_autonomous(disc);
    }
    throw AssemblyError("solve_mfde: unknown assembly path");
  }();
  LuOptions options;
  options.row_equilibrate = (path != AssemblyPath::direct);
  auto [x, diag] = lu_solve(sys, options);
  TauSolution sol = extract(x, sys, check);
  sol.diagnostics = diag;
  return PipelineResult{std::move(disc), std::move(sys), std::move(sol)};
}

}  // namespace mfdetau
