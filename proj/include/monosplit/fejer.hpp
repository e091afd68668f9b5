#pragma once

// Runtime monitors for Fejér / Quasi-Fejér behaviour of iterate sequences,
// and a fixture for a map that is Fejér convergent but fails property P2.
//
// P1: ‖x* − F(z)‖ ≤ ‖x* − z‖ for every solution x* (per-step, checked on traces).
// P2: if z_k is bounded and ‖x* − z_k‖ − ‖x* − F(z_k)‖ → 0, every cluster point
//     of z_k is a solution. This is asymptotic and cannot be certified from a
//     finite run; only the explicit counterexample witness is provided for it.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "monosplit/errors.hpp"
#include "monosplit/hpe.hpp"

namespace monosplit {

enum class FejerVerdict { fejer, quasi_fejer, violated };

inline const char* to_string(FejerVerdict v) {
  switch (v) {
    case FejerVerdict::fejer: return "fejer";
    case FejerVerdict::quasi_fejer: return "quasi_fejer";
    case FejerVerdict::violated: return "violated";
  }
  return "unknown";
}

struct FejerReport {
  std::vector<double> slacks;  // (d_{k−1} + ρ_k) − d_k
  std::vector<double> distances;  // d_0, d_1, ..., d_K
  double min_slack = std::numeric_limits<double>::infinity();
  double rho_partial_sum = 0.0;
  // Whether the error sequence that produced ρ is summable. A finite trace
  // cannot tell, so the verdict is based on the per-step inequalities only.
  bool rho_summable = true;
  std::size_t first_violation = 0;  // 1-based step index, 0 if none
  FejerVerdict verdict = FejerVerdict::fejer;
};

/// Per-step tolerance for the distance inequality.
inline double fejer_tol(double d_prev) { return 1e-9 * (1.0 + d_prev); }

/// Classifies a distance sequence with per-step perturbations ρ_k.
inline FejerReport fejer_report(std::vector<double> distances, const std::vector<double>& rhos,
                                bool rho_summable = true) {
  FejerReport rep;
  rep.rho_summable = rho_summable;
  if (distances.size() > 1 && rhos.size() != distances.size() - 1) {
    throw ValidationError("fejer_report: need one rho per step");
  }
  bool any_rho = false;
  bool ok = true;
  for (std::size_t k = 1; k < distances.size(); ++k) {
    const double rho = rhos[k - 1];
    any_rho = any_rho || rho > 0.0;
    rep.rho_partial_sum += rho;
    const double slack = distances[k - 1] + rho - distances[k];
    rep.slacks.push_back(slack);
    rep.min_slack = std::min(rep.min_slack, slack);
    if (slack < -fejer_tol(distances[k - 1]) && ok) {
      ok = false;
      rep.first_violation = k;
    }
  }
  rep.distances = std::move(distances);
  if (!ok) {
    rep.verdict = FejerVerdict::violated;
  } else {
    rep.verdict = any_rho ? FejerVerdict::quasi_fejer : FejerVerdict::fejer;
  }
  return rep;
}

/// Distances ‖x* − x_k‖ along a trace with ρ_k = ‖r_k‖ (the injected error).
inline FejerReport p1_monitor(const SolveTrace& trace, const Vector& x_star) {
  if (trace.records.empty()) {
    FejerReport rep;
    rep.rho_summable = trace.errors_summable;
    return rep;
  }
  std::vector<double> d;
  std::vector<double> rho;
  d.reserve(trace.records.size() + 1);
  detail::require_dim(x_star.size(), trace.records.front().x_prev, "p1_monitor");
  d.push_back((x_star - trace.records.front().x_prev).norm());
  for (const auto& rec : trace.records) {
    detail::require_dim(x_star.size(), rec.x_next, "p1_monitor");
    d.push_back((x_star - rec.x_next).norm());
    rho.push_back(rec.injected_error.size() ? rec.injected_error.norm() : 0.0);
  }
  return fejer_report(std::move(d), rho, trace.errors_summable);
}

/// d_n^p ≤ d_{n−1}^p + ρ_n for every n, to within 1e-12.
inline bool quasi_fejer_check(const std::vector<double>& distances, const std::vector<double>& rhos, double p = 1.0) {
  if (!(p > 0.0)) throw ValidationError("quasi_fejer_check: p must be > 0");
  if (distances.empty() ? !rhos.empty() : rhos.size() != distances.size() - 1) {
    throw ValidationError("quasi_fejer_check: need len(rhos) == len(distances) - 1");
  }
  for (double d : distances) {
    if (!(d >= 0.0)) throw ValidationError("quasi_fejer_check: negative distance");
  }
  for (double r : rhos) {
    if (!(r >= 0.0)) throw ValidationError("quasi_fejer_check: negative rho");
  }
  for (std::size_t n = 1; n < distances.size(); ++n) {
    if (std::pow(distances[n], p) > std::pow(distances[n - 1], p) + rhos[n - 1] + 1e-12) return false;
  }
  return true;
}

/// Scalar map F(x) = −x (x > 0), x/2 (x ≤ 0) with Ω = {0}.
///
/// Iterates x_n = F(x_{n−1}) are Fejér convergent to {0} and converge to 0,
/// yet the constant sequence z_k = 1 with ẑ_k = F(1) = −1 makes zero progress
/// |0 − z_k| − |0 − ẑ_k| = 0 while its limit 1 is not in Ω.
struct P2Counterexample {
  std::function<double(double)> map;
  std::vector<double> omega;

  std::vector<double> iterates(double x0, std::size_t n) const {
    std::vector<double> xs{x0};
    for (std::size_t i = 0; i < n; ++i) xs.push_back(map(xs.back()));
    return xs;
  }

  double witness_point = 1.0;  // z_k for every k
  double witness_image() const { return map(witness_point); }
  double witness_progress() const { return std::abs(0.0 - witness_point) - std::abs(0.0 - witness_image()); }
  bool witness_limit_in_omega() const {
    for (double w : omega) {
      if (w == witness_point) return true;
    }
    return false;
  }
};

inline P2Counterexample p2_counterexample() {
  P2Counterexample fx;
  fx.map = [](double x) { return x > 0.0 ? -x : x / 2.0; };
  fx.omega = {0.0};
  return fx;
}

}  // namespace monosplit
