#pragma once

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfdetau/report.hpp"
#include "mfdetau/solution.hpp"

namespace mfdetau {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,   // bad flags, malformed config, unknown catalog entry
  kExitIoError = 3,       // unreadable input or unwritable output
  kExitNumericError = 4,  // singular system, domain error, rejected configuration
  kExitInternalError = 5,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // problem source: exactly one of catalog / config_path
  std::string catalog_name;
  std::string config_path;
  std::map<std::string, double> params;  // catalog parameters (m, ...)

  int n = 7;
  int d = 0;
  int K = 3;
  std::string path = "direct";  // direct | canonical | auto
  bool compare_paths = false;

  std::string out_json;
  std::string out_csv;
  std::string out_svg;
  std::string dump_system;  // debug CSV of A and rhs
  bool plot = false;

  std::vector<int> n_list;  // sweep mode
  std::vector<int> K_list;
};

inline void validate(const RunConfig& cfg, bool sweep_mode) {
  if (cfg.catalog_name.empty() == cfg.config_path.empty()) {
    throw ConfigError("exactly one of --catalog and --config is required");
  }
  if (cfg.n < 1) throw ConfigError("n must be at least 1");
  if (cfg.d < 0 || cfg.d > cfg.n) throw ConfigError("require 0 <= d <= n");
  if (cfg.K < 2) throw ConfigError("K must be at least 2");
  if (cfg.path != "direct" && cfg.path != "canonical" && cfg.path != "auto") {
    throw ConfigError("unknown assembly path '" + cfg.path + "'");
  }
  if (sweep_mode && (cfg.n_list.empty() || cfg.K_list.empty())) {
    throw ConfigError("sweep mode requires non-empty n and K lists");
  }
  for (int n : cfg.n_list) {
    if (n < 1 || cfg.d > n) throw ConfigError("sweep n values must satisfy 1 <= d <= n");
  }
  for (int K : cfg.K_list) {
    if (K < 2) throw ConfigError("sweep K values must be at least 2");
  }
}

/// Resolves the user-facing path name against the discretization degree:
/// "auto" picks the closed-form expansion when d = 0 and the direct
/// assembly otherwise; "canonical" with d = 0 is the autonomous expansion.
inline AssemblyPath resolve_path(const std::string& name, int d) {
  if (name == "direct") return AssemblyPath::direct;
  if (name == "canonical" || name == "auto") {
    return d == 0 ? AssemblyPath::autonomous : AssemblyPath::canonical;
  }
  if (name == "autonomous") return AssemblyPath::autonomous;
  throw ConfigError("unknown assembly path '" + name + "'");
}

inline AssemblyPath other_path(AssemblyPath path, int d) {
  if (path == AssemblyPath::direct) {
    return d == 0 ? AssemblyPath::autonomous : AssemblyPath::canonical;
  }
  return AssemblyPath::direct;
}

/// Problem config schema: one of
///   {"a","b","c","psi1","psi2","exact"?: strings, "K": int}
///   {"family_F": string, "K": int}
///   {"catalog": name, "params": {...}}
inline MfdeProblem problem_from_json(const Json& j) {
  try {
    if (j.contains("catalog")) {
      std::map<std::string, double> params;
      if (j.contains("params")) {
        for (const auto& [key, value] : j.at("params").items()) {
          params[key] = value.get<double>();
        }
      }
      return catalog(j.at("catalog").get<std::string>(), params);
    }
    if (j.contains("family_F")) {
      return family_from_F(parse_expression(j.at("family_F").get<std::string>()),
                           j.at("K").get<int>());
    }
    MfdeProblem p;
    p.a = parse_expression(j.at("a").get<std::string>());
    p.b = parse_expression(j.at("b").get<std::string>());
    p.c = parse_expression(j.at("c").get<std::string>());
    p.psi1 = parse_expression(j.at("psi1").get<std::string>());
    p.psi2 = parse_expression(j.at("psi2").get<std::string>());
    if (j.contains("exact") && !j.at("exact").is_null()) {
      p.exact = parse_expression(j.at("exact").get<std::string>());
    }
    p.K = j.at("K").get<int>();
    if (p.K < 2) throw ConfigError("config: K must be at least 2");
    p.name = "config";
    return p;
  } catch (const Json::exception& err) {
    throw ConfigError(std::string("malformed problem config: ") + err.what());
  } catch (const ParseError& err) {
    throw ConfigError(std::string("bad expression in problem config: ") + err.what());
  }
}

inline MfdeProblem load_problem(const RunConfig& cfg) {
  if (!cfg.catalog_name.empty()) {
    std::map<std::string, double> params = cfg.params;
    params["K"] = cfg.K;
    try {
      return catalog(cfg.catalog_name, params);
    } catch (const ProblemError& err) {
      throw ConfigError(err.what());
    }
  }
  std::ifstream in(cfg.config_path);
  if (!in) throw IoError("cannot open config file '" + cfg.config_path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& err) {
    throw ConfigError(std::string("config file is not valid JSON: ") + err.what());
  }
  return problem_from_json(j);
}

namespace detail {

inline std::string timestamp_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write output file '" + path + "'");
  return os;
}

}  // namespace detail

/// Runs one solve and emits the requested artifacts. Returns the report so
/// front ends and tests can inspect it.
inline Json run_solve(const RunConfig& cfg, std::ostream& log) {
  validate(cfg, false);
  const MfdeProblem problem = load_problem(cfg);
  const AssemblyPath path = resolve_path(cfg.path, cfg.d);
  PipelineResult run = solve_mfde(problem, cfg.n, cfg.d, path);

  std::optional<ErrorReport> errors;
  if (problem.exact) errors = error_report(run.sol, problem);

  Json comparison;
  if (cfg.compare_paths) {
    const AssemblyPath other = other_path(path, cfg.d);
    PipelineResult second = solve_mfde(problem, cfg.n, cfg.d, other, ContinuityCheck::record);
    const PathComparison cmp = compare_paths(run.sol, second.sol);
    std::optional<ErrorReport> second_errors;
    if (problem.exact) second_errors = error_report(second.sol, problem);
    comparison = comparison_report(cmp, second.sol, second_errors);
  }

  const std::string source =
      cfg.catalog_name.empty() ? "config:" + cfg.config_path : "catalog:" + cfg.catalog_name;
  const Json report =
      solve_report(source, problem, run, errors, comparison, detail::timestamp_now());

  if (!cfg.dump_system.empty()) {
    auto os = detail::open_output(cfg.dump_system);
    dump_csv(run.sys, os);
  }
  if (!cfg.out_json.empty()) {
    auto os = detail::open_output(cfg.out_json);
    os << report.dump(2) << '\n';
  }
  if (!cfg.out_svg.empty() || cfg.plot) {
    const std::string path_svg = cfg.out_svg.empty() ? "solution.svg" : cfg.out_svg;
    auto os = detail::open_output(path_svg);
    write_solution_svg(run.sol, problem, os);
  }

  log << "order " << run.sys.order() << ", path " << path_name(run.sol.path)
      << ", relative residual " << run.sol.diagnostics.relative_residual
      << ", condition estimate " << run.sol.diagnostics.condition_estimate << '\n';
  if (errors) {
    log << "infinity-norm error on (0," << problem.K - 1 << "]: " << errors->global << '\n';
  }
  return report;
}

/// Cartesian sweep over (n, K); one CSV row per cell, cells that fail keep
/// the sweep going. Returns all cells for inspection.
inline std::vector<SweepCell> run_sweep(const RunConfig& cfg, std::ostream& log) {
  validate(cfg, true);
  std::vector<SweepCell> cells;
  for (int n : cfg.n_list) {
    for (int K : cfg.K_list) {
      SweepCell cell;
      cell.n = n;
      cell.K = K;
      cell.d = cfg.d;
      cell.path = cfg.path;
      RunConfig cell_cfg = cfg;
      cell_cfg.n = n;
      cell_cfg.K = K;
      try {
        const MfdeProblem problem = load_problem(cell_cfg);
        const AssemblyPath path = resolve_path(cfg.path, cfg.d);
        PipelineResult run = solve_mfde(problem, n, cfg.d, path);
        cell.ok = true;
        cell.relative_residual = run.sol.diagnostics.relative_residual;
        cell.condition_estimate = run.sol.diagnostics.condition_estimate;
        if (problem.exact) {
          const ErrorReport report = error_report(run.sol, problem);
          cell.global_error = report.global;
          cell.per_subinterval = report.per_subinterval;
        }
      } catch (const std::exception& err) {
        cell.ok = false;
        cell.message = err.what();
        log << "sweep cell n=" << n << " K=" << K << " failed: " << err.what() << '\n';
      }
      cells.push_back(std::move(cell));
    }
  }
  if (!cfg.out_csv.empty()) {
    auto os = detail::open_output(cfg.out_csv);
    write_sweep_csv(cells, os);
  }
  if (!cfg.out_svg.empty()) {
    auto os = detail::open_output(cfg.out_svg);
    write_sweep_svg(cells, os);
  }
  return cells;
}

/// Solve followed by an SVG plot of the solution (with analytic overlay and
/// error panel when the problem has a known solution).
inline Json run_plot(RunConfig cfg, std::ostream& log) {
  cfg.plot = true;
  return run_solve(cfg, log);
}

/// Maps exceptions escaping the commands onto process exit codes.
inline int guard(std::ostream& err_stream, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& err) {
    err_stream << "config error: " << err.what() << '\n';
    return kExitConfigError;
  } catch (const IoError& err) {
    err_stream << "io error: " << err.what() << '\n';
    return kExitIoError;
  } catch (const ParseError& err) {
    err_stream << "config error: " << err.what() << '\n';
    return kExitConfigError;
  } catch (const ProblemError& err) {
    err_stream << "config error: " << err.what() << '\n';
    return kExitConfigError;
  } catch (const SingularMatrixError& err) {
    err_stream << "numeric error: " << err.what() << '\n';
    return kExitNumericError;
  } catch (const CanonicalError& err) {
    err_stream << "numeric error: " << err.what() << '\n';
    return kExitNumericError;
  } catch (const AssemblyError& err) {
    err_stream << "numeric error: " << err.what() << '\n';
    return kExitNumericError;
  } catch (const SolutionError& err) {
    err_stream << "numeric error: " << err.what() << '\n';
    return kExitNumericError;
  } catch (const EvalDomainError& err) {
    err_stream << "numeric error: " << err.what() << '\n';
    return kExitNumericError;
  } catch (const std::exception& err) {
    err_stream << "internal error: " << err.what() << '\n';
    return kExitInternalError;
  }
}

}  // namespace mfdetau
