#pragma once

// solve / certify / bench. Each command returns the process exit code and
// writes human-readable diagnostics to the supplied stream.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "monosplit/fejer.hpp"
#include "monosplit/hpe.hpp"
#include "monosplit/io.hpp"

namespace monosplit::cli {

using io::json;

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 1;
inline constexpr int max_iters = 2;
inline constexpr int rejected = 3;
inline constexpr int violation = 4;
}  // namespace exit_code

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "MONOSPLIT_OUT_DIR";

inline std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? std::string(env) : std::string("monosplit_out");
}

struct RunOutcome {
  SolveTrace trace;
  FejerReport fejer;
  double final_distance = 0.0;
  double wall_seconds = 0.0;
};

/// Runs a validated setup; certificate rejections end the run instead of throwing.
inline RunOutcome execute(const io::RunSetup& run) {
  RunOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    out.trace = hpe_solve(run.oracle, run.x0, run.config);
  } catch (const CertificateRejected& e) {
    out.trace = e.trace();
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.fejer = p1_monitor(out.trace, run.problem.reference_solution);
  out.final_distance = (out.trace.x_final - run.problem.reference_solution).norm();
  return out;
}

inline json summary_json(const io::RunSetup& run, const RunOutcome& out) {
  json warnings = json::array();
  for (const auto& w : out.trace.warnings) warnings.push_back(w);
  return json{{"problem", run.problem.name},
              {"method", io::to_string(run.method)},
              {"sigma", run.sigma},
              {"termination", to_string(out.trace.termination)},
              {"iterations", out.trace.records.size()},
              {"x_final", io::to_json(out.trace.x_final)},
              {"final_residual", out.trace.final_residual},
              {"reference_solution", io::to_json(run.problem.reference_solution)},
              {"reference_provenance", to_string(run.problem.provenance)},
              {"distance_to_reference", out.final_distance},
              {"fejer_verdict", to_string(out.fejer.verdict)},
              {"fejer_min_slack", out.fejer.slacks.empty() ? 0.0 : out.fejer.min_slack},
              {"error_partial_sum", out.fejer.rho_partial_sum},
              {"errors_summable", out.fejer.rho_summable},
              {"warnings", warnings}};
}

/// solve --config <path> --out <dir>: writes <dir>/trace.jsonl and <dir>/summary.json.
inline int cmd_solve(const std::string& config_path, const std::string& out_dir, std::ostream& log = std::cerr) {
  std::optional<io::RunSetup> run;
  try {
    run.emplace(io::make_run(io::read_json_file(config_path)));
  } catch (const Error& e) {
    log << "solve: config error: " << e.what() << '\n';
    return exit_code::config_error;
  } catch (const json::exception& e) {
    log << "solve: config error: " << e.what() << '\n';
    return exit_code::config_error;
  }

  RunOutcome out;
  try {
    out = execute(*run);
  } catch (const Error& e) {
    log << "solve: " << e.what() << '\n';
    return exit_code::config_error;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto trace_path = std::filesystem::path(out_dir) / "trace.jsonl";
  const auto summary_path = std::filesystem::path(out_dir) / "summary.json";
  {
    std::ofstream tf(trace_path);
    if (!tf) {
      log << "solve: cannot write " << trace_path << '\n';
      return exit_code::config_error;
    }
    io::write_trace(tf, *run, out.trace);
    std::ofstream sf(summary_path);
    sf << summary_json(*run, out).dump(2) << '\n';
  }
  for (const auto& w : out.trace.warnings) log << "solve: warning: " << w << '\n';
  log << "solve: " << to_string(out.trace.termination) << " after " << out.trace.records.size()
      << " iterations, distance to reference " << out.final_distance << '\n';

  switch (out.trace.termination) {
    case Termination::converged: return exit_code::ok;
    case Termination::max_iters: return exit_code::max_iters;
    case Termination::rejected: return exit_code::rejected;
  }
  return exit_code::config_error;
}

// ---------------------------------------------------------------------------
// certify

struct Violation {
  std::size_t line = 0;  // 1-based line in the trace file
  std::string reason;
};

struct CertifyResult {
  bool passed = true;
  std::size_t lines_checked = 0;
  std::vector<Violation> violations;
  std::optional<FejerReport> fejer;
};

namespace detail {

inline bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * (1.0 + std::abs(a) + std::abs(b)); }

inline bool same(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

}  // namespace detail

/// Replays every step of a trace against the run configuration.
inline CertifyResult certify_trace(std::istream& trace_in, const io::RunSetup& run) {
  CertifyResult res;
  auto flag = [&res](std::size_t line, std::string reason) {
    res.passed = false;
    res.violations.push_back({line, std::move(reason)});
  };

  std::string text;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<double> distances;
  std::vector<double> rhos;
  Vector expected_prev = run.x0;
  std::size_t expected_k = 1;
  const Eigen::Index n = run.problem.dim();
  const Vector& x_star = run.problem.reference_solution;

  while (std::getline(trace_in, text)) {
    ++line_no;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      flag(line_no, std::string("malformed JSON: ") + e.what());
      break;
    }
    if (!header_seen) {
      try {
        io::check_trace_header(j);
      } catch (const Error& e) {
        flag(line_no, e.what());
        break;
      }
      if (j.at("method") != io::to_string(run.method) || j.at("problem") != run.problem.name) {
        flag(line_no, "header does not match the configuration");
      }
      header_seen = true;
      continue;
    }

    io::TraceLine t;
    try {
      t = io::trace_line_from(j);
    } catch (const Error& e) {
      flag(line_no, std::string("schema: ") + e.what());
      break;
    }
    ++res.lines_checked;
    if (t.y.size() != n || t.v.size() != n || t.x_prev.size() != n || t.x_next.size() != n || t.r.size() != n) {
      flag(line_no, "vector dimension mismatch");
      break;
    }
    if (t.k != expected_k) flag(line_no, "step index " + std::to_string(t.k) + ", expected " + std::to_string(expected_k));
    if (t.lambda != run.config.lambdas.at(t.k)) flag(line_no, "lambda differs from the configured schedule");
    if (!detail::same(t.x_prev, expected_prev)) flag(line_no, "x_prev does not continue from the previous step");
    if (t.eps < 0.0) flag(line_no, "eps is negative");

    const Certificate cert{t.y, t.v, t.eps};
    const SigmaReport rep = check_sigma_resolvent(t.x_prev, t.lambda, run.sigma, cert);
    if (!rep.satisfied) {
      flag(line_no, "sigma criterion violated: lhs " + std::to_string(rep.lhs) + " > rhs " + std::to_string(rep.rhs));
    }
    if (!detail::close(rep.lhs, t.lhs, 1e-12) || !detail::close(rep.rhs, t.rhs, 1e-12) ||
        rep.satisfied != t.satisfied) {
      flag(line_no, "recorded lhs/rhs/satisfied disagree with replay");
    }

    const Vector expected_r =
        run.config.errors ? run.config.errors->at(t.k, n) : Vector(Vector::Zero(n));
    if ((t.r - expected_r).norm() > 1e-12 * (1.0 + expected_r.norm())) {
      flag(line_no, "injected error differs from the configured schedule");
    }
    const Vector identity = t.x_prev - t.lambda * t.v + t.r;
    const double id_tol = 1e-12 * (1.0 + t.x_prev.norm() + t.lambda * t.v.norm() + t.r.norm());
    if ((t.x_next - identity).norm() > id_tol) flag(line_no, "step identity x_next = x_prev - lambda*v + r fails");

    if (distances.empty()) distances.push_back((x_star - t.x_prev).norm());
    distances.push_back((x_star - t.x_next).norm());
    rhos.push_back(t.r.norm());

    expected_prev = t.x_next;
    ++expected_k;
  }
  if (!header_seen && res.violations.empty()) flag(1, "empty trace (no header)");

  if (!distances.empty()) {
    res.fejer = fejer_report(distances, rhos, run.config.errors ? run.config.errors->summable : true);
    if (res.fejer->verdict == FejerVerdict::violated) {
      // step k is on line k + 1 (after the header)
      flag(res.fejer->first_violation + 1, "Fejer inequality violated toward the reference solution");
    }
  }
  return res;
}

inline json certify_report_json(const CertifyResult& res) {
  json v = json::array();
  for (const auto& viol : res.violations) v.push_back({{"line", viol.line}, {"reason", viol.reason}});
  json out{{"passed", res.passed}, {"lines_checked", res.lines_checked}, {"violations", v}};
  if (res.fejer) {
    out["fejer"] = {{"verdict", to_string(res.fejer->verdict)},
                    {"min_slack", res.fejer->slacks.empty() ? 0.0 : res.fejer->min_slack},
                    {"rho_partial_sum", res.fejer->rho_partial_sum},
                    {"rho_summable", res.fejer->rho_summable}};
  }
  return out;
}

/// certify --trace <path> --config <path> [--report <path>]
inline int cmd_certify(const std::string& trace_path, const std::string& config_path,
                       const std::string& report_path = "", std::ostream& log = std::cerr) {
  std::optional<io::RunSetup> run;
  try {
    run.emplace(io::make_run(io::read_json_file(config_path)));
  } catch (const Error& e) {
    log << "certify: config error: " << e.what() << '\n';
    return exit_code::config_error;
  } catch (const json::exception& e) {
    log << "certify: config error: " << e.what() << '\n';
    return exit_code::config_error;
  }
  std::ifstream in(trace_path);
  if (!in) {
    log << "certify: cannot open '" << trace_path << "'\n";
    return exit_code::config_error;
  }
  const CertifyResult res = certify_trace(in, *run);

  const std::string out_path = report_path.empty() ? trace_path + ".certify.json" : report_path;
  std::ofstream rf(out_path);
  if (rf) rf << certify_report_json(res).dump(2) << '\n';

  if (!res.passed) {
    const auto& first = res.violations.front();
    log << "certify: FAILED at line " << first.line << ": " << first.reason << '\n';
    return exit_code::violation;
  }
  log << "certify: " << res.lines_checked << " steps verified";
  if (res.fejer) log << ", " << to_string(res.fejer->verdict);
  log << '\n';
  return exit_code::ok;
}

// ---------------------------------------------------------------------------
// bench

inline const char* kBenchHeader = "problem,method,sigma,iterations,final_residual,final_distance,fejer_verdict,wall_time_s";

/// Built-in suite: three problems with every applicable method plus two
/// error-injected runs (summable p = 2 and non-summable p = 1).
inline json default_suite() {
  const json ql1 = {{"name", "quadratic_l1"}, {"b", {3.0, -0.2, 5.0}}, {"w", 1.0}};
  const json box = {{"name", "random_affine_box_vi"}, {"n", 4}, {"seed", 11}};
  return json{
      {"runs",
       {
           {{"problem", ql1}, {"method", "hpe_exact"}, {"lambda", 1.0}, {"x0", {0.0, 0.0, 0.0}}, {"max_iters", 5000}, {"stop_tol", 1e-10}},
           {{"problem", ql1}, {"method", "fb"}, {"lambda", 1.0}, {"x0", {0.0, 0.0, 0.0}}, {"max_iters", 5000}, {"stop_tol", 1e-10}},
           {{"problem", ql1}, {"method", "tseng"}, {"lambda", 0.9}, {"x0", {0.0, 0.0, 0.0}}, {"max_iters", 5000}, {"stop_tol", 1e-10}},
           {{"problem", "rotation_vi"}, {"method", "tseng"}, {"lambda", 0.9}, {"x0", {1.0, 0.0}}, {"max_iters", 5000}, {"stop_tol", 1e-10}},
           {{"problem", "rotation_vi"}, {"method", "korpelevich"}, {"lambda", 0.9}, {"x0", {1.0, 0.0}}, {"max_iters", 5000}, {"stop_tol", 1e-10}},
           {{"problem", box}, {"method", "tseng"}, {"lambda", {{"fraction_of_limit", 0.9}}}, {"x0", {0.0, 0.0, 0.0, 0.0}}, {"max_iters", 10000}, {"stop_tol", 1e-10}},
           {{"problem", box}, {"method", "korpelevich"}, {"lambda", {{"fraction_of_limit", 0.9}}}, {"x0", {0.0, 0.0, 0.0, 0.0}}, {"max_iters", 10000}, {"stop_tol", 1e-10}},
           {{"label", "summable errors"}, {"problem", "rotation_vi"}, {"method", "korpelevich"}, {"lambda", 0.9}, {"x0", {1.0, 0.0}}, {"max_iters", 10000}, {"stop_tol", 1e-10}, {"errors", {{"c", 0.1}, {"p", 2.0}, {"seed", 7}}}},
           {{"label", "non-summable errors"}, {"problem", ql1}, {"method", "fb"}, {"lambda", 1.0}, {"x0", {0.0, 0.0, 0.0}}, {"max_iters", 2000}, {"stop_tol", 1e-4}, {"errors", {{"c", 0.1}, {"p", 1.0}, {"seed", 7}}}},
       }}};
}

inline std::string csv_number(double d) { return json(d).dump(); }

/// Runs every entry of {"runs": [config, ...]} and writes one CSV row per run.
/// Returns 0 if every run executed (whatever its termination), 1 otherwise.
inline int run_bench(const json& suite, std::ostream& csv, std::ostream& log = std::cerr) {
  if (!suite.is_object() || !suite.contains("runs") || !suite.at("runs").is_array()) {
    log << "bench: suite must be {\"runs\": [...]}\n";
    return exit_code::config_error;
  }
  int status = exit_code::ok;
  csv << kBenchHeader << '\n';
  std::size_t idx = 0;
  for (const auto& cfg : suite.at("runs")) {
    ++idx;
    const std::string label = cfg.is_object() && cfg.contains("problem")
                                  ? (cfg.at("problem").is_string() ? cfg.at("problem").get<std::string>()
                                                                   : cfg.at("problem").value("name", "?"))
                                  : "?";
    const std::string method = cfg.is_object() ? cfg.value("method", "?") : "?";
    try {
      const io::RunSetup run = io::make_run(cfg);
      const RunOutcome out = execute(run);
      csv << run.problem.name << ',' << io::to_string(run.method) << ',' << csv_number(run.sigma) << ','
          << out.trace.records.size() << ',' << csv_number(out.trace.final_residual) << ','
          << csv_number(out.final_distance) << ',' << to_string(out.fejer.verdict) << ','
          << csv_number(out.wall_seconds) << '\n';
    } catch (const std::exception& e) {
      log << "bench: run " << idx << " (" << label << ", " << method << ") failed: " << e.what() << '\n';
      csv << label << ',' << method << ",,,,,error,\n";
      status = exit_code::config_error;
    }
    csv.flush();
  }
  return status;
}

/// bench --suite <path> --out <csv>; an empty suite path runs the built-in suite.
inline int cmd_bench(const std::string& suite_path, const std::string& out_csv, std::ostream& log = std::cerr) {
  json suite;
  try {
    suite = suite_path.empty() ? default_suite() : io::read_json_file(suite_path);
  } catch (const Error& e) {
    log << "bench: " << e.what() << '\n';
    return exit_code::config_error;
  }
  const auto parent = std::filesystem::path(out_csv).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream csv(out_csv);
  if (!csv) {
    log << "bench: cannot write '" << out_csv << "'\n";
    return exit_code::config_error;
  }
  return run_bench(suite, csv, log);
}

}  // namespace monosplit::cli
