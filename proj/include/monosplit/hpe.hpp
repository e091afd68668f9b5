#pragma once

// Hybrid Proximal-Extragradient driver.
//
// Each iteration asks a certificate oracle for (y, v, ε) at the current point,
// checks the relative-error condition
//
//     ‖λv + y − x‖² + 2λε ≤ σ²‖y − x‖²,
//
// and moves to x − λv (+ an optional injected error r_k). Every step is kept
// in the returned trace so it can be audited afterwards.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "monosplit/enlargement.hpp"
#include "monosplit/errors.hpp"
#include "monosplit/operators.hpp"

namespace monosplit {

/// Relative tolerance for the HPE inequalities: lhs/rhs are quadratic in the step length.
inline double tol_ineq(double step_norm) { return 1e-9 * (1.0 + step_norm * step_norm); }

/// Step sizes λ_k for k = 1, 2, ...; a finite list repeats its last entry.
class LambdaSchedule {
 public:
  static LambdaSchedule constant(double lambda) { return LambdaSchedule({lambda}, lambda, lambda); }

  static LambdaSchedule sequence(std::vector<double> values) {
    if (values.empty()) throw ValidationError("lambda schedule: empty");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double l = *lo, h = *hi;
    return LambdaSchedule(std::move(values), l, h);
  }

  LambdaSchedule(std::vector<double> values, double lower, double upper)
      : values_(std::move(values)), lower_(lower), upper_(upper) {
    if (values_.empty()) throw ValidationError("lambda schedule: empty");
    if (!(lower_ > 0.0) || !(lower_ <= upper_) || !std::isfinite(upper_)) {
      throw ValidationError("lambda schedule: need 0 < lambda_lo <= lambda_hi");
    }
    for (double v : values_) {
      if (!(v >= lower_ && v <= upper_)) {
        throw ValidationError("lambda schedule: value " + std::to_string(v) + " outside [lambda_lo, lambda_hi]");
      }
    }
  }

  double at(std::size_t k) const {
    const std::size_t idx = k == 0 ? 0 : std::min(k - 1, values_.size() - 1);
    return values_[idx];
  }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
  double lower_;
  double upper_;
};

/// Error sequence r_k with ‖r_k‖ = c·k^(−p) along a seeded pseudo-random unit direction.
struct ErrorSchedule {
  double c = 0.0;
  double p = 2.0;
  std::uint64_t seed = 0;
  bool summable = true;

  double norm_at(std::size_t k) const { return c * std::pow(static_cast<double>(k), -p); }

  Vector at(std::size_t k, Eigen::Index dim) const {
    if (c == 0.0) return Vector::Zero(dim);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector dir(dim);
    do {
      for (Eigen::Index i = 0; i < dim; ++i) dir(i) = gauss(rng);
    } while (dir.norm() == 0.0);
    return (norm_at(k) / dir.norm()) * dir;
  }

  double partial_sum(std::size_t K) const {
    double s = 0.0;
    for (std::size_t k = 1; k <= K; ++k) s += norm_at(k);
    return s;
  }

  /// Σ_k ‖r_k‖ = c·ζ(p); infinite when p ≤ 1 and c > 0.
  double total() const {
    if (c == 0.0) return 0.0;
    if (!summable) return std::numeric_limits<double>::infinity();
    return c * std::riemann_zeta(p);
  }
};

inline ErrorSchedule make_error_schedule(double c, double p, std::uint64_t seed) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("error schedule: c must be >= 0");
  if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("error schedule: p must be > 0");
  return ErrorSchedule{c, p, seed, c == 0.0 || p > 1.0};
}

enum class RejectionPolicy { strict, warn };

struct HpeConfig {
  double sigma;
  LambdaSchedule lambdas;
  std::size_t max_iters;
  double stop_tol;
  std::optional<ErrorSchedule> errors;
  RejectionPolicy policy = RejectionPolicy::strict;

  HpeConfig(double sigma_, LambdaSchedule lambdas_, std::size_t max_iters_, double stop_tol_)
      : sigma(sigma_), lambdas(std::move(lambdas_)), max_iters(max_iters_), stop_tol(stop_tol_) {
    validate();
  }

  void validate() const {
    if (!(sigma >= 0.0 && sigma < 1.0)) {
      throw ValidationError("hpe config: sigma must lie in [0, 1), got " + std::to_string(sigma));
    }
    if (!(stop_tol > 0.0)) throw ValidationError("hpe config: stop_tol must be > 0");
    if (max_iters < 1) throw ValidationError("hpe config: max_iters must be >= 1");
  }
};

struct SigmaReport {
  double lhs = 0.0;  // ‖λv + y − x‖² + 2λε
  double rhs = 0.0;  // σ²‖y − x‖²
  bool satisfied = false;
  Vector z;  // x − λv
  double step_norm = 0.0;
  bool bound_v_ok = false;
  bool bound_zy_ok = false;
};

/// Checks whether x − λ·cert.v is a σ-approximate resolvent point of λT at x.
inline SigmaReport check_sigma_resolvent(const Vector& x, double lambda, double sigma, const Certificate& cert) {
  if (x.size() != cert.y.size() || x.size() != cert.v.size()) {
    throw DimensionError("check_sigma_resolvent: dimension mismatch");
  }
  if (!(lambda > 0.0)) throw ValidationError("check_sigma_resolvent: lambda must be > 0");
  SigmaReport r;
  const Vector step = cert.y - x;
  r.step_norm = step.norm();
  r.lhs = (lambda * cert.v + step).squaredNorm() + 2.0 * lambda * cert.eps;
  r.rhs = sigma * sigma * step.squaredNorm();
  const double tol = tol_ineq(r.step_norm);
  r.satisfied = r.lhs <= r.rhs + tol;
  r.z = x - lambda * cert.v;
  r.bound_v_ok = (lambda * cert.v).norm() <= (1.0 + sigma) * r.step_norm + tol;
  r.bound_zy_ok = (r.z - cert.y).norm() <= sigma * r.step_norm + tol;
  return r;
}

struct StepRecord {
  std::size_t k = 0;
  double lambda = 0.0;
  Certificate cert;
  Vector x_prev;
  Vector x_next;
  Vector injected_error;
  SigmaReport sigma_report;
};

enum class Termination { converged, max_iters, rejected };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::rejected: return "rejected";
  }
  return "unknown";
}

struct SolveTrace {
  std::vector<StepRecord> records;
  Termination termination = Termination::max_iters;
  Vector x_final;
  double final_residual = std::numeric_limits<double>::infinity();
  bool errors_summable = true;
  std::vector<std::string> warnings;
};

/// Thrown under the strict policy when a certificate fails the σ-criterion.
/// Carries the trace up to and including the offending step.
class CertificateRejected : public Error {
 public:
  CertificateRejected(const std::string& what, SolveTrace trace) : Error(what), trace_(std::move(trace)) {}
  const SolveTrace& trace() const { return trace_; }

 private:
  SolveTrace trace_;
};

/// (x, λ) ↦ certificate for an inexact λ-scaled proximal step at x.
using CertificateOracle = std::function<Certificate(const Vector& x, double lambda)>;
using StepMonitor = std::function<void(const StepRecord&)>;
using ResolventFn = std::function<Vector(double lambda, const Vector& x)>;

/// Residual used by the stopping rule: max(‖v‖, ε, ‖y − x‖).
inline double step_residual(const Certificate& cert, const Vector& x_prev) {
  return std::max({cert.v.norm(), cert.eps, (cert.y - x_prev).norm()});
}

inline SolveTrace hpe_solve(const CertificateOracle& oracle, const Vector& x0, const HpeConfig& config,
                            const std::vector<StepMonitor>& monitors = {}) {
  config.validate();
  detail::require_finite(x0, "hpe_solve x0");
  const Eigen::Index n = x0.size();

  SolveTrace trace;
  trace.x_final = x0;
  if (config.errors) {
    trace.errors_summable = config.errors->summable;
    if (!config.errors->summable) {
      trace.warnings.push_back("error schedule with p = " + std::to_string(config.errors->p) +
                               " is not summable; convergence is not guaranteed");
    }
  }

  Vector x = x0;
  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    const double lambda = config.lambdas.at(k);
    Certificate cert = oracle(x, lambda);
    if (cert.y.size() != n || cert.v.size() != n) throw OracleError("hpe_solve: oracle returned wrong dimension");
    if (!cert.y.allFinite() || !cert.v.allFinite() || !std::isfinite(cert.eps)) {
      throw OracleError("hpe_solve: oracle returned non-finite certificate at k = " + std::to_string(k));
    }

    StepRecord rec;
    rec.k = k;
    rec.lambda = lambda;
    rec.sigma_report = check_sigma_resolvent(x, lambda, config.sigma, cert);
    rec.injected_error = config.errors ? config.errors->at(k, n) : Vector(Vector::Zero(n));
    rec.x_prev = x;
    rec.x_next = x - lambda * cert.v + rec.injected_error;
    const double residual = step_residual(cert, x);
    rec.cert = std::move(cert);

    const bool ok = rec.sigma_report.satisfied && rec.cert.eps >= 0.0;
    trace.records.push_back(rec);
    for (const auto& m : monitors) m(trace.records.back());

    if (!ok) {
      const std::string msg = "certificate rejected at k = " + std::to_string(k) +
                              ": lhs = " + std::to_string(rec.sigma_report.lhs) +
                              ", rhs = " + std::to_string(rec.sigma_report.rhs);
      if (config.policy == RejectionPolicy::strict) {
        trace.termination = Termination::rejected;
        trace.x_final = x;
        throw CertificateRejected(msg, std::move(trace));
      }
      trace.warnings.push_back(msg);
    }

    x = rec.x_next;
    trace.x_final = x;
    trace.final_residual = residual;
    if (residual <= config.stop_tol) {
      trace.termination = Termination::converged;
      return trace;
    }
  }
  trace.termination = Termination::max_iters;
  return trace;
}

/// σ = 0 oracle built from an exact resolvent: y = J_{λT}(x), v = (x − y)/λ, ε = 0.
inline CertificateOracle exact_prox_oracle(ResolventFn resolve) {
  return [resolve = std::move(resolve)](const Vector& x, double lambda) {
    Vector y = resolve(lambda, x);
    Vector v = (x - y) / lambda;
    return make_certificate(std::move(y), std::move(v), 0.0);
  };
}

inline CertificateOracle exact_prox_oracle(const MonotoneOp& op) {
  if (!op.capabilities().resolvent) {
    throw CapabilityError(std::string("exact_prox_oracle: operator '") + to_string(op.kind()) +
                          "' has no resolvent");
  }
  return exact_prox_oracle([op](double lambda, const Vector& x) { return resolvent(op, lambda, x); });
}

}  // namespace monosplit
