#pragma once

// ε-enlargement certificates.
//
// A Certificate (y, v, ε) claims v ∈ T^[ε](y), i.e. ⟨y − z, v − u⟩ ≥ −ε for
// every graph pair (z, u) of T. The calculus here (transport for cocoercive
// maps, sums, scaling) produces certificates whose validity is guaranteed;
// check_certificate is an empirical falsifier for any certificate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "monosplit/errors.hpp"
#include "monosplit/operators.hpp"

namespace monosplit {

struct Certificate {
  Vector y;
  Vector v;
  double eps = 0.0;
};

/// Validated construction: eps ≥ 0, matching dimensions, finite entries.
inline Certificate make_certificate(Vector y, Vector v, double eps) {
  if (y.size() != v.size()) throw DimensionError("certificate: y and v dimensions differ");
  if (y.size() < 1) throw DimensionError("certificate: empty vectors");
  detail::require_finite(y, "certificate y");
  detail::require_finite(v, "certificate v");
  if (!std::isfinite(eps)) throw ValidationError("certificate: eps is not finite");
  if (eps < 0.0) throw ValidationError("certificate: eps must be >= 0, got " + std::to_string(eps));
  return Certificate{std::move(y), std::move(v), eps};
}

/// Outcome of a sampling-based membership test.
///
/// One-sided: a failed verdict proves v ∉ T^[ε](y) (up to tol_gap), while a
/// passed verdict only means no probe found a violation.
struct ProbeVerdict {
  bool passed = true;
  double worst_gap = 0.0;  // min over probes of ⟨y − z, v − u⟩ + ε
  std::optional<GraphPair> witness;
  double tol_gap = 0.0;
  std::size_t probes = 0;
};

namespace detail {

inline double enlargement_gap(const Certificate& cert, const GraphPair& p) {
  return (cert.y - p.z).dot(cert.v - p.u) + cert.eps;
}

// Deterministic probe: when T is single-valued at y, (y, T(y)); otherwise the
// graph point generated from y + λv, which equals (y, v) whenever v ∈ T(y).
inline std::optional<GraphPair> anchor_probe(const MonotoneOp& op, const Certificate& cert, double lambda) {
  const auto& caps = op.capabilities();
  if (caps.eval) return GraphPair{cert.y, eval(op, cert.y)};
  if (caps.graph_sample) return graph_point_from(op, lambda, cert.y + lambda * cert.v);
  return std::nullopt;
}

}  // namespace detail

/// Evaluates a certificate against an explicit probe set.
inline ProbeVerdict check_certificate_on(const Certificate& cert, const std::vector<GraphPair>& probes) {
  ProbeVerdict verdict;
  verdict.probes = probes.size();
  double radius = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& p : probes) {
    detail::require_dim(cert.y.size(), p.z, "probe");
    radius = std::max(radius, (p.z - cert.y).norm());
    const double gap = detail::enlargement_gap(cert, p);
    if (gap < worst) {
      worst = gap;
      verdict.witness = p;
    }
  }
  const double diameter = 2.0 * radius;
  verdict.tol_gap = 1e-9 * (1.0 + cert.v.norm() * diameter);
  verdict.worst_gap = probes.empty() ? cert.eps : worst;
  verdict.passed = verdict.worst_gap >= -verdict.tol_gap;
  return verdict;
}

/// Samples m graph pairs of op around cert.y and looks for a violation of
/// ⟨cert.y − z, cert.v − u⟩ ≥ −cert.eps.
inline ProbeVerdict check_certificate(const MonotoneOp& op, const Certificate& cert, double lambda_probe,
                                      std::uint64_t seed, std::size_t m) {
  if (m < 1) throw ValidationError("check_certificate: need at least one probe");
  detail::require_dim(op.dim(), cert.y, "check_certificate y");
  detail::require_dim(op.dim(), cert.v, "check_certificate v");
  SampleCloud cloud{cert.y, 1.0 + cert.y.norm()};
  auto probes = graph_sample(op, lambda_probe, seed, m, cloud);
  if (auto anchor = detail::anchor_probe(op, cert, lambda_probe)) probes.push_back(std::move(*anchor));
  return check_certificate_on(cert, probes);
}

/// A(z) ∈ A^[ε](x) with ε = ‖x − z‖²/(4α) for α-cocoercive A.
inline Certificate transport_cocoercive(const MonotoneOp& A, const Vector& x, const Vector& z) {
  const auto alpha = A.cocoercivity();
  if (!alpha) throw CapabilityError("transport_cocoercive: operator has no cocoercivity modulus");
  detail::require_dim(A.dim(), x, "transport_cocoercive x");
  detail::require_dim(A.dim(), z, "transport_cocoercive z");
  const double eps = std::isinf(*alpha) ? 0.0 : (x - z).squaredNorm() / (4.0 * *alpha);
  return make_certificate(x, eval(A, z), eps);
}

/// T₁^[ε₁](y) + T₂^[ε₂](y) ⊂ (T₁+T₂)^[ε₁+ε₂](y).
inline Certificate combine_sum(const Certificate& a, const Certificate& b) {
  if (a.y.size() != b.y.size()) throw DimensionError("combine_sum: dimension mismatch");
  if ((a.y - b.y).norm() > 0.0) throw BasePointMismatch("combine_sum: certificates have different base points");
  return make_certificate(a.y, a.v + b.v, a.eps + b.eps);
}

/// λ·T^[ε](y) = (λT)^[λε](y).
inline Certificate scale_certificate(const Certificate& cert, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("scale_certificate: lambda must be > 0");
  return make_certificate(cert.y, lambda * cert.v, lambda * cert.eps);
}

}  // namespace monosplit
