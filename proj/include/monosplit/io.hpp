#pragma once

// JSON run configurations and the JSON-lines trace format.
//
// Trace files start with one header line followed by one line per step:
//
//   {"format":"monosplit-trace","version":1,"method":"fb","problem":"quadratic_l1","sigma":0.7071,"dim":1}
//   {"k":1,"lambda":1.0,"y":[..],"v":[..],"eps":..,"x_prev":[..],"x_next":[..],"r":[..],
//    "lhs":..,"rhs":..,"satisfied":true}
//
// Doubles are written in shortest round-trip form, so a replay sees exactly
// the values the solver produced.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "monosplit/errors.hpp"
#include "monosplit/hpe.hpp"
#include "monosplit/operators.hpp"
#include "monosplit/problems.hpp"
#include "monosplit/splittings.hpp"

namespace monosplit::io {

using json = nlohmann::json;

inline constexpr const char* kTraceFormat = "monosplit-trace";
inline constexpr int kTraceVersion = 1;

// ---------------------------------------------------------------------------
// Primitive conversions

inline json to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline double number_from(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number");
  const double d = j.get<double>();
  if (!std::isfinite(d)) throw ConfigError(what + ": not finite");
  return d;
}

inline Vector vector_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_from(j[i], what);
  return v;
}

inline Matrix matrix_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  if (cols == 0) throw ConfigError(what + ": empty row");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vector_from(j[static_cast<std::size_t>(r)], what);
    if (row.size() != cols) throw ConfigError(what + ": ragged matrix");
    m.row(r) = row.transpose();
  }
  return m;
}

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& what) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(what + ": unknown field '" + key + "'");
  }
}

inline const json& required(const json& obj, const std::string& key, const std::string& what) {
  if (!obj.contains(key)) throw ConfigError(what + ": missing field '" + key + "'");
  return obj.at(key);
}

inline std::uint64_t seed_from(const json& j, const std::string& what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(what + ": seed must be an integer");
  return j.get<std::uint64_t>();
}

// ---------------------------------------------------------------------------
// Operators

/// Builds an operator from {"kind": ..., ...}; kinds mirror the factory functions.
inline MonotoneOp make_operator(const json& desc) {
  if (!desc.is_object()) throw ConfigError("operator: expected an object");
  const std::string kind = required(desc, "kind", "operator").get<std::string>();
  if (kind == "affine") {
    reject_unknown_keys(desc, {"kind", "M", "q"}, "affine");
    return affine(matrix_from(required(desc, "M", "affine"), "affine.M"),
                  vector_from(required(desc, "q", "affine"), "affine.q"));
  }
  if (kind == "subdiff_l1") {
    reject_unknown_keys(desc, {"kind", "weights"}, "subdiff_l1");
    return subdiff_l1(vector_from(required(desc, "weights", "subdiff_l1"), "subdiff_l1.weights"));
  }
  if (kind == "normal_cone_box") {
    reject_unknown_keys(desc, {"kind", "lo", "hi"}, "normal_cone_box");
    return normal_cone_box(vector_from(required(desc, "lo", "normal_cone_box"), "normal_cone_box.lo"),
                           vector_from(required(desc, "hi", "normal_cone_box"), "normal_cone_box.hi"));
  }
  if (kind == "normal_cone_ball") {
    reject_unknown_keys(desc, {"kind", "radius", "dim"}, "normal_cone_ball");
    return normal_cone_ball(number_from(required(desc, "radius", "normal_cone_ball"), "normal_cone_ball.radius"),
                            required(desc, "dim", "normal_cone_ball").get<Eigen::Index>());
  }
  if (kind == "grad_quadratic") {
    reject_unknown_keys(desc, {"kind", "Q", "b"}, "grad_quadratic");
    return grad_quadratic(matrix_from(required(desc, "Q", "grad_quadratic"), "grad_quadratic.Q"),
                          vector_from(required(desc, "b", "grad_quadratic"), "grad_quadratic.b"));
  }
  if (kind == "scaled") {
    reject_unknown_keys(desc, {"kind", "factor", "inner"}, "scaled");
    return scaled(number_from(required(desc, "factor", "scaled"), "scaled.factor"),
                  make_operator(required(desc, "inner", "scaled")));
  }
  if (kind == "sum") {
    reject_unknown_keys(desc, {"kind", "left", "right"}, "sum");
    return sum(make_operator(required(desc, "left", "sum")), make_operator(required(desc, "right", "sum")));
  }
  throw ConfigError("operator: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Problems

/// A problem by name ("quadratic_l1", "rotation_vi", "random_affine_box_vi")
/// or an inline object {"name": ..., parameters...}.
inline Problem make_problem(const json& desc) {
  if (desc.is_string()) {
    const auto name = desc.get<std::string>();
    if (name == "quadratic_l1") return make_quadratic_l1(Vector::Constant(1, 3.0), 1.0);
    if (name == "rotation_vi") return make_rotation_vi();
    throw ConfigError("problem: '" + name + "' needs inline parameters or is unknown");
  }
  if (!desc.is_object()) throw ConfigError("problem: expected a name or an object");
  const std::string name = required(desc, "name", "problem").get<std::string>();
  if (name == "quadratic_l1") {
    reject_unknown_keys(desc, {"name", "b", "w"}, "quadratic_l1");
    return make_quadratic_l1(vector_from(required(desc, "b", "quadratic_l1"), "quadratic_l1.b"),
                             number_from(required(desc, "w", "quadratic_l1"), "quadratic_l1.w"));
  }
  if (name == "rotation_vi") {
    reject_unknown_keys(desc, {"name"}, "rotation_vi");
    return make_rotation_vi();
  }
  if (name == "affine_box_vi") {
    reject_unknown_keys(desc, {"name", "M", "q", "lo", "hi"}, "affine_box_vi");
    return make_affine_box_vi(matrix_from(required(desc, "M", name), name + ".M"),
                              vector_from(required(desc, "q", name), name + ".q"),
                              vector_from(required(desc, "lo", name), name + ".lo"),
                              vector_from(required(desc, "hi", name), name + ".hi"));
  }
  if (name == "random_affine_box_vi") {
    reject_unknown_keys(desc, {"name", "n", "seed"}, name);
    return make_random_affine_box_vi(required(desc, "n", name).get<Eigen::Index>(),
                                     seed_from(required(desc, "seed", name), name + ".seed"));
  }
  throw ConfigError("problem: unknown name '" + name + "'");
}

// ---------------------------------------------------------------------------
// Run configuration

enum class SolverMethod { hpe_exact, fb, tseng, korpelevich };

inline const char* to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::hpe_exact: return "hpe_exact";
    case SolverMethod::fb: return "fb";
    case SolverMethod::tseng: return "tseng";
    case SolverMethod::korpelevich: return "korpelevich";
  }
  return "unknown";
}

inline SolverMethod solver_method_from(const std::string& s) {
  if (s == "hpe_exact") return SolverMethod::hpe_exact;
  if (s == "fb") return SolverMethod::fb;
  if (s == "tseng") return SolverMethod::tseng;
  if (s == "korpelevich") return SolverMethod::korpelevich;
  throw ConfigError("method: unknown method '" + s + "'");
}

inline Method split_method(SolverMethod m) {
  switch (m) {
    case SolverMethod::fb: return Method::fb;
    case SolverMethod::tseng: return Method::tseng;
    case SolverMethod::korpelevich: return Method::korpelevich;
    default: throw ConfigError("hpe_exact is not a splitting method");
  }
}

/// A fully validated run: problem, oracle and solver configuration.
struct RunSetup {
  json source;
  Problem problem;
  SolverMethod method;
  double sigma;
  HpeConfig config;
  Vector x0;
  CertificateOracle oracle;
};

inline const std::set<std::string>& run_config_keys() {
  static const std::set<std::string> keys{"label", "problem", "method", "sigma",  "lambda", "lambda_bounds",
                                          "x0",    "max_iters", "stop_tol", "errors", "policy"};
  return keys;
}

inline RunSetup make_run(const json& cfg) {
  if (!cfg.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown_keys(cfg, run_config_keys(), "config");

  Problem problem = make_problem(required(cfg, "problem", "config"));
  const SolverMethod method = solver_method_from(required(cfg, "method", "config").get<std::string>());

  const json& lam = required(cfg, "lambda", "config");
  std::vector<double> lambdas;
  if (lam.is_array()) {
    for (const auto& l : lam) lambdas.push_back(number_from(l, "lambda"));
  } else if (lam.is_object()) {
    // {"fraction_of_limit": f}: λ = f·2α (FB) or f/L (Tseng, Korpelevich)
    reject_unknown_keys(lam, {"fraction_of_limit"}, "lambda");
    if (method == SolverMethod::hpe_exact) throw ConfigError("lambda: hpe_exact needs an explicit step size");
    const double f = number_from(required(lam, "fraction_of_limit", "lambda"), "lambda.fraction_of_limit");
    const double limit = problem.lambda_limit(split_method(method));
    if (!(f > 0.0 && f < 1.0) || !std::isfinite(limit) || !(limit > 0.0)) {
      throw ConfigError("lambda: fraction_of_limit needs 0 < f < 1 and a finite method limit");
    }
    lambdas.push_back(f * limit);
  } else {
    lambdas.push_back(number_from(lam, "lambda"));
  }
  if (lambdas.empty()) throw ConfigError("lambda: empty list");
  double lambda_lo = *std::min_element(lambdas.begin(), lambdas.end());
  double lambda_hi = *std::max_element(lambdas.begin(), lambdas.end());
  if (cfg.contains("lambda_bounds")) {
    const Vector b = vector_from(cfg.at("lambda_bounds"), "lambda_bounds");
    if (b.size() != 2) throw ConfigError("lambda_bounds: expected [lo, hi]");
    lambda_lo = b(0);
    lambda_hi = b(1);
  }
  LambdaSchedule schedule(lambdas, lambda_lo, lambda_hi);

  Vector x0 = cfg.contains("x0") ? vector_from(cfg.at("x0"), "x0") : Vector(Vector::Ones(problem.dim()));
  if (x0.size() != problem.dim()) throw ConfigError("x0: dimension does not match the problem");

  CertificateOracle oracle;
  double default_sigma = 0.0;
  if (method == SolverMethod::hpe_exact) {
    if (!problem.joint_resolvent) {
      throw ConfigError("hpe_exact: problem '" + problem.name + "' has no closed-form resolvent of A + B");
    }
    oracle = exact_prox_oracle(*problem.joint_resolvent);
  } else {
    SplitProblem split = make_split(problem, split_method(method), lambda_lo, lambda_hi);
    default_sigma = method_sigma(split);
    oracle = split_oracle(std::move(split));
  }
  const double sigma = cfg.contains("sigma") ? number_from(cfg.at("sigma"), "sigma") : default_sigma;

  const auto max_iters = required(cfg, "max_iters", "config").get<std::int64_t>();
  if (max_iters < 1) throw ConfigError("max_iters: must be >= 1");
  HpeConfig config(sigma, std::move(schedule), static_cast<std::size_t>(max_iters),
                   number_from(required(cfg, "stop_tol", "config"), "stop_tol"));

  if (cfg.contains("errors")) {
    const json& e = cfg.at("errors");
    reject_unknown_keys(e, {"c", "p", "seed"}, "errors");
    config.errors = make_error_schedule(number_from(required(e, "c", "errors"), "errors.c"),
                                        number_from(required(e, "p", "errors"), "errors.p"),
                                        seed_from(required(e, "seed", "errors"), "errors.seed"));
  }
  if (cfg.contains("policy")) {
    const auto pol = cfg.at("policy").get<std::string>();
    if (pol == "strict") config.policy = RejectionPolicy::strict;
    else if (pol == "warn") config.policy = RejectionPolicy::warn;
    else throw ConfigError("policy: expected 'strict' or 'warn'");
  }

  return RunSetup{cfg, std::move(problem), method, sigma, std::move(config), std::move(x0), std::move(oracle)};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Trace lines

inline json trace_header(const RunSetup& run) {
  return json{{"format", kTraceFormat},
              {"version", kTraceVersion},
              {"method", to_string(run.method)},
              {"problem", run.problem.name},
              {"sigma", run.sigma},
              {"dim", run.problem.dim()}};
}

inline json to_json(const StepRecord& rec) {
  return json{{"k", rec.k},
              {"lambda", rec.lambda},
              {"y", to_json(rec.cert.y)},
              {"v", to_json(rec.cert.v)},
              {"eps", rec.cert.eps},
              {"x_prev", to_json(rec.x_prev)},
              {"x_next", to_json(rec.x_next)},
              {"r", to_json(rec.injected_error)},
              {"lhs", rec.sigma_report.lhs},
              {"rhs", rec.sigma_report.rhs},
              {"satisfied", rec.sigma_report.satisfied}};
}

/// A step line as read back from disk. Values are not validated beyond shape.
struct TraceLine {
  std::size_t k = 0;
  double lambda = 0.0;
  Vector y, v;
  double eps = 0.0;
  Vector x_prev, x_next, r;
  double lhs = 0.0, rhs = 0.0;
  bool satisfied = false;
};

class TraceSchemaError : public Error {
 public:
  using Error::Error;
};

inline TraceLine trace_line_from(const json& j) {
  static const std::set<std::string> keys{"k", "lambda", "y", "v", "eps", "x_prev", "x_next", "r", "lhs", "rhs",
                                          "satisfied"};
  if (!j.is_object()) throw TraceSchemaError("step line is not an object");
  for (const auto& [key, _] : j.items()) {
    if (!keys.count(key)) throw TraceSchemaError("unknown field '" + key + "'");
  }
  for (const auto& key : keys) {
    if (!j.contains(key)) throw TraceSchemaError("missing field '" + key + "'");
  }
  try {
    TraceLine t;
    t.k = j.at("k").get<std::size_t>();
    t.lambda = number_from(j.at("lambda"), "lambda");
    t.y = vector_from(j.at("y"), "y");
    t.v = vector_from(j.at("v"), "v");
    t.eps = number_from(j.at("eps"), "eps");
    t.x_prev = vector_from(j.at("x_prev"), "x_prev");
    t.x_next = vector_from(j.at("x_next"), "x_next");
    t.r = vector_from(j.at("r"), "r");
    t.lhs = number_from(j.at("lhs"), "lhs");
    t.rhs = number_from(j.at("rhs"), "rhs");
    if (!j.at("satisfied").is_boolean()) throw TraceSchemaError("'satisfied' must be a boolean");
    t.satisfied = j.at("satisfied").get<bool>();
    return t;
  } catch (const ConfigError& e) {
    throw TraceSchemaError(e.what());
  } catch (const json::exception& e) {
    throw TraceSchemaError(e.what());
  }
}

inline void check_trace_header(const json& j) {
  static const std::set<std::string> keys{"format", "version", "method", "problem", "sigma", "dim"};
  if (!j.is_object()) throw TraceSchemaError("header is not an object");
  for (const auto& [key, _] : j.items()) {
    if (!keys.count(key)) throw TraceSchemaError("header: unknown field '" + key + "'");
  }
  if (j.value("format", "") != kTraceFormat) throw TraceSchemaError("header: not a monosplit trace");
  if (j.value("version", 0) != kTraceVersion) throw TraceSchemaError("header: unsupported trace version");
}

inline void write_trace(std::ostream& out, const RunSetup& run, const SolveTrace& trace) {
  out << trace_header(run).dump() << '\n';
  for (const auto& rec : trace.records) out << to_json(rec).dump() << '\n';
}

}  // namespace monosplit::io
