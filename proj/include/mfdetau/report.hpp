#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfdetau/problem.hpp"
#include "mfdetau/solution.hpp"

namespace mfdetau {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json to_json(const SolveDiagnostics& d) {
  return Json{{"residual_inf", d.residual_inf},
              {"relative_residual", d.relative_residual},
              {"smallest_pivot", d.smallest_pivot},
              {"condition_estimate", d.condition_estimate},
              {"elapsed_seconds", d.elapsed_seconds}};
}

}  // namespace detail

/// Full JSON run report. Everything except the metadata block is a pure
/// function of the inputs, so reports from identical configurations differ
/// at most in "metadata".
inline Json solve_report(const std::string& source, const MfdeProblem& problem,
                         const PipelineResult& run,
                         const std::optional<ErrorReport>& errors,
                         const Json& comparison = Json(),
                         const std::string& timestamp = "") {
  Json report;
  report["schema"] = "mfde-tau-report/1";
  report["problem"] = Json{{"source", source}, {"name", problem.name}, {"K", problem.K}};
  report["run"] = Json{{"n", run.sol.n},
                       {"d", run.sol.d},
                       {"path", path_name(run.sol.path)},
                       {"order", run.sys.order()}};
  report["diagnostics"] = detail::to_json(run.sol.diagnostics);
  const std::vector<double> residuals = perturbed_residual(run.sol, run.disc);
  Json steps = Json::array();
  for (int k = 0; k <= run.sol.K - 2; ++k) {
    steps.push_back(Json{{"k", k},
                         {"interval", Json::array({k, k + 1})},
                         {"coefficients", run.sol.steps[static_cast<std::size_t>(k)].coefficients()},
                         {"tau", run.sol.taus[static_cast<std::size_t>(k)]},
                         {"perturbed_residual", residuals[static_cast<std::size_t>(k)]}});
  }
  report["steps"] = std::move(steps);
  report["continuity_gap"] = run.sol.max_continuity_gap;
  if (errors) {
    report["errors"] = Json{{"nodes_per_subinterval", errors->nodes_per_subinterval},
                            {"per_subinterval", errors->per_subinterval},
                            {"global", errors->global}};
  } else {
    report["errors"] = nullptr;
  }
  if (!comparison.is_null()) report["comparison"] = comparison;
  report["metadata"] = Json{{"generated_at", timestamp}};
  return report;
}

inline Json comparison_report(const PathComparison& cmp, const TauSolution& other,
                              const std::optional<ErrorReport>& other_errors) {
  Json j;
  j["other_path"] = path_name(other.path);
  j["per_step_coefficient_diff"] = cmp.coefficient_diff;
  j["per_step_value_diff"] = cmp.value_diff;
  j["max_coefficient_diff"] = cmp.max_coefficient_diff;
  j["max_value_diff"] = cmp.max_value_diff;
  j["other_continuity_gap"] = other.max_continuity_gap;
  if (other_errors) j["other_global_error"] = other_errors->global;
  return j;
}

/// One sweep cell; failures keep the sweep going and are recorded in place.
struct SweepCell {
  int n = 0, K = 0, d = 0;
  std::string path;
  bool ok = false;
  std::string message;
  double global_error = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> per_subinterval;
  double relative_residual = std::numeric_limits<double>::quiet_NaN();
  double condition_estimate = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* kSweepCsvHeader =
    "n,K,d,path,global_error,per_subinterval_errors...,residual,cond_estimate";

inline void write_sweep_csv(const std::vector<SweepCell>& cells, std::ostream& os) {
  os << kSweepCsvHeader << '\n';
  char buf[32];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const SweepCell& cell : cells) {
    os << cell.n << ',' << cell.K << ',' << cell.d << ',' << cell.path << ',';
    os << num(cell.global_error);
    for (double e : cell.per_subinterval) os << ',' << num(e);
    os << ',' << num(cell.relative_residual) << ',' << num(cell.condition_estimate) << '\n';
  }
}

namespace detail {

struct SvgCanvas {
  double width = 860, height = 420;
  double left = 70, right = 20, top = 36, bottom = 46;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const {
    return left + (x - x0) / (x1 - x0) * (width - left - right);
  }
  double py(double y) const {
    return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom);
  }
};

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % 8];
}

inline void svg_open(std::ostream& os, const SvgCanvas& c, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width << "\" height=\""
     << c.height << "\" viewBox=\"0 0 " << c.width << ' ' << c.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << c.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
}

inline void svg_axes(std::ostream& os, const SvgCanvas& c, const std::string& xlabel,
                     const std::string& ylabel, int ticks = 6) {
  os << "<g stroke=\"#333\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<line x1=\"" << c.px(c.x0) << "\" y1=\"" << c.py(c.y0) << "\" x2=\"" << c.px(c.x1)
     << "\" y2=\"" << c.py(c.y0) << "\"/>\n";
  os << "<line x1=\"" << c.px(c.x0) << "\" y1=\"" << c.py(c.y0) << "\" x2=\"" << c.px(c.x0)
     << "\" y2=\"" << c.py(c.y1) << "\"/>\n";
  char buf[48];
  for (int i = 0; i <= ticks; ++i) {
    const double xv = c.x0 + (c.x1 - c.x0) * i / ticks;
    const double yv = c.y0 + (c.y1 - c.y0) * i / ticks;
    std::snprintf(buf, sizeof(buf), "%.3g", xv);
    os << "<line x1=\"" << c.px(xv) << "\" y1=\"" << c.py(c.y0) << "\" x2=\"" << c.px(xv)
       << "\" y2=\"" << c.py(c.y0) + 4 << "\"/>"
       << "<text x=\"" << c.px(xv) << "\" y=\"" << c.py(c.y0) + 16
       << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", yv);
    os << "<line x1=\"" << c.px(c.x0) - 4 << "\" y1=\"" << c.py(yv) << "\" x2=\"" << c.px(c.x0)
       << "\" y2=\"" << c.py(yv) << "\"/>"
       << "<text x=\"" << c.px(c.x0) - 6 << "\" y=\"" << c.py(yv) + 4
       << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#333\">" << buf << "</text>\n";
  }
  os << "<text x=\"" << (c.px(c.x0) + c.px(c.x1)) / 2 << "\" y=\"" << c.height - 8
     << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\">" << xlabel << "</text>\n";
  os << "<text x=\"14\" y=\"" << (c.py(c.y0) + c.py(c.y1)) / 2
     << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\" transform=\"rotate(-90 14 "
     << (c.py(c.y0) + c.py(c.y1)) / 2 << ")\">" << ylabel << "</text>\n";
  os << "</g>\n";
}

inline void svg_polyline(std::ostream& os, const SvgCanvas& c,
                         const std::vector<std::pair<double, double>>& points,
                         const char* color, const char* dash = nullptr) {
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
  if (dash) os << " stroke-dasharray=\"" << dash << "\"";
  os << " points=\"";
  for (const auto& [x, y] : points) os << c.px(x) << ',' << c.py(y) << ' ';
  os << "\"/>\n";
}

}  // namespace detail

/// Log-scale error-vs-K chart of a sweep, one polyline per n.
inline void write_sweep_svg(const std::vector<SweepCell>& cells, std::ostream& os) {
  std::vector<int> ns;
  double kmin = 1e300, kmax = -1e300, emin = 0.0, emax = -300.0;
  for (const SweepCell& cell : cells) {
    if (!cell.ok || !(cell.global_error > 0.0)) continue;
    if (std::find(ns.begin(), ns.end(), cell.n) == ns.end()) ns.push_back(cell.n);
    kmin = std::min(kmin, static_cast<double>(cell.K));
    kmax = std::max(kmax, static_cast<double>(cell.K));
    const double le = std::log10(cell.global_error);
    emin = std::min(emin, le);
    emax = std::max(emax, le);
  }
  std::sort(ns.begin(), ns.end());
  detail::SvgCanvas canvas;
  canvas.x0 = kmin;
  canvas.x1 = kmax > kmin ? kmax : kmin + 1;
  canvas.y0 = std::floor(emin) - 0.5;
  canvas.y1 = std::ceil(emax) + 0.5;
  detail::svg_open(os, canvas, "infinity-norm error vs K");
  detail::svg_axes(os, canvas, "K", "log10 error");
  std::size_t idx = 0;
  for (int n : ns) {
    std::vector<std::pair<double, double>> pts;
    for (const SweepCell& cell : cells) {
      if (cell.n == n && cell.ok && cell.global_error > 0.0) {
        pts.emplace_back(cell.K, std::log10(cell.global_error));
      }
    }
    std::sort(pts.begin(), pts.end());
    const char* color = detail::series_color(idx);
    detail::svg_polyline(os, canvas, pts, color);
    os << "<text x=\"" << canvas.width - 110 << "\" y=\"" << 40 + 16 * idx
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">n = " << n
       << "</text>\n";
    ++idx;
  }
  os << "</svg>\n";
}

/// Numerical solution on (0, K-1], overlaid with the analytic one when
/// available, plus an absolute-error panel underneath in that case.
inline void write_solution_svg(const TauSolution& sol, const MfdeProblem& problem,
                               std::ostream& os) {
  std::vector<std::pair<double, double>> numeric, analytic, error_curve;
  double ymin = 1e300, ymax = -1e300;
  for (int k = 0; k <= problem.K - 2; ++k) {
    for (int i = 1; i <= kErrorNodesPerSubinterval; ++i) {
      const double t = k + static_cast<double>(i) / kErrorNodesPerSubinterval;
      const double v = eval(sol.steps[static_cast<std::size_t>(k)], t - k);
      numeric.emplace_back(t, v);
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
      if (problem.exact) {
        const double ev = eval(*problem.exact, t);
        analytic.emplace_back(t, ev);
        ymin = std::min(ymin, ev);
        ymax = std::max(ymax, ev);
        error_curve.emplace_back(t, std::log10(std::abs(v - ev) + 1e-300));
      }
    }
  }
  const bool with_error = !error_curve.empty();
  detail::SvgCanvas top;
  top.height = with_error ? 320 : 420;
  top.x0 = 0.0;
  top.x1 = problem.K - 1.0;
  const double pad = 0.05 * (ymax - ymin + 1e-12);
  top.y0 = ymin - pad;
  top.y1 = ymax + pad;

  double total_height = with_error ? 640.0 : top.height;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << top.width << "\" height=\""
     << total_height << "\" viewBox=\"0 0 " << top.width << ' ' << total_height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << top.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">piecewise Tau solution"
     << (with_error ? " and analytic overlay" : "") << "</text>\n";
  detail::svg_axes(os, top, "t", "x(t)");
  detail::svg_polyline(os, top, numeric, detail::series_color(0));
  if (with_error) {
    detail::svg_polyline(os, top, analytic, detail::series_color(1), "6 4");
    os << "<text x=\"" << top.width - 170 << "\" y=\"40\" font-family=\"sans-serif\""
       << " font-size=\"12\" fill=\"" << detail::series_color(0) << "\">numerical</text>\n";
    os << "<text x=\"" << top.width - 170 << "\" y=\"56\" font-family=\"sans-serif\""
       << " font-size=\"12\" fill=\"" << detail::series_color(1) << "\">analytical</text>\n";

    detail::SvgCanvas bottom;
    bottom.height = 300;
    bottom.top = 16;
    bottom.x0 = 0.0;
    bottom.x1 = problem.K - 1.0;
    double lo = 0.0, hi = -300.0;
    for (const auto& [t, le] : error_curve) {
      lo = std::min(lo, le);
      hi = std::max(hi, le);
    }
    bottom.y0 = std::floor(lo) - 0.5;
    bottom.y1 = std::ceil(hi) + 0.5;
    os << "<g transform=\"translate(0," << 330 << ")\">\n";
    detail::svg_axes(os, bottom, "t", "log10 |error|");
    detail::svg_polyline(os, bottom, error_curve, detail::series_color(2));
    os << "</g>\n";
  }
  os << "</svg>\n";
}

}  // namespace mfdetau
