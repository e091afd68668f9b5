#pragma once

// Forward-Backward, Tseng's modified Forward-Backward and Korpelevich's
// extragradient method, each written as a single step that also emits the
// certificate (y, v, ε) making it an HPE step with x_next = x − λv.

#include <cmath>
#include <string>

#include "monosplit/enlargement.hpp"
#include "monosplit/errors.hpp"
#include "monosplit/hpe.hpp"
#include "monosplit/operators.hpp"

namespace monosplit {

enum class Method { fb, tseng, korpelevich };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::fb: return "fb";
    case Method::tseng: return "tseng";
    case Method::korpelevich: return "korpelevich";
  }
  return "unknown";
}

/// Margin keeping σ = λ_hi·L strictly below one.
inline constexpr double kSigmaMargin = 1e-12;

/// 0 ∈ (A + B)x with A single-valued and B resolvent-capable, validated for one method.
struct SplitProblem {
  Method method;
  MonotoneOp A;
  MonotoneOp B;
  double modulus;  // α for FB, L for Tseng/Korpelevich
  double lambda_lo;
  double lambda_hi;
};

inline SplitProblem make_split_problem(Method method, MonotoneOp A, MonotoneOp B, double lambda_lo,
                                       double lambda_hi) {
  if (A.dim() != B.dim()) throw DimensionError("split problem: A and B dimensions differ");
  if (!A.capabilities().eval) throw CapabilityError("split problem: A must be single-valued (EVAL)");
  if (!B.capabilities().resolvent) throw CapabilityError("split problem: B must have a resolvent");
  if (!(lambda_lo > 0.0) || !(lambda_lo <= lambda_hi)) {
    throw ValidationError("split problem: need 0 < lambda_lo <= lambda_hi");
  }
  double modulus = 0.0;
  switch (method) {
    case Method::fb: {
      const auto alpha = A.cocoercivity();
      if (!alpha) throw ValidationError("fb: A has no cocoercivity modulus alpha");
      if (!(lambda_hi < 2.0 * *alpha)) {
        throw ValidationError("fb: lambda_hi = " + std::to_string(lambda_hi) + " must be < 2*alpha = " +
                              std::to_string(2.0 * *alpha));
      }
      modulus = *alpha;
      break;
    }
    case Method::korpelevich:
      if (!B.is_normal_cone()) throw ValidationError("korpelevich: B must be a normal cone");
      [[fallthrough]];
    case Method::tseng: {
      const auto L = A.lipschitz();
      if (!L) throw ValidationError(std::string(to_string(method)) + ": A has no Lipschitz constant");
      if (!(lambda_hi * *L < 1.0 - kSigmaMargin)) {
        throw ValidationError(std::string(to_string(method)) + ": lambda_hi * L = " +
                              std::to_string(lambda_hi * *L) + " must be < 1");
      }
      modulus = *L;
      break;
    }
  }
  return SplitProblem{method, std::move(A), std::move(B), modulus, lambda_lo, lambda_hi};
}

/// σ for which every step with λ ≤ λ_hi is accepted by the HPE criterion.
inline double method_sigma(const SplitProblem& prob, double lambda) {
  if (prob.method == Method::fb) return std::isinf(prob.modulus) ? 0.0 : std::sqrt(lambda / (2.0 * prob.modulus));
  return lambda * prob.modulus;
}
inline double method_sigma(const SplitProblem& prob) { return method_sigma(prob, prob.lambda_hi); }

struct StepOutput {
  Vector x_next;
  Certificate cert;
};

namespace detail {

inline void check_step_size(const SplitProblem& prob, Method expected, double lambda) {
  if (prob.method != expected) {
    throw ValidationError(std::string("step: problem was validated for ") + to_string(prob.method) + ", not " +
                          to_string(expected));
  }
  if (!(lambda >= prob.lambda_lo && lambda <= prob.lambda_hi)) {
    throw ValidationError("step: lambda = " + std::to_string(lambda) + " outside [" +
                          std::to_string(prob.lambda_lo) + ", " + std::to_string(prob.lambda_hi) + "]");
  }
}

}  // namespace detail

/// x⁺ = J_{λB}(x − λA(x)); certificate (x⁺, (x − x⁺)/λ, ‖x⁺ − x‖²/(4α)).
inline StepOutput fb_step(const SplitProblem& prob, double lambda, const Vector& x) {
  detail::check_step_size(prob, Method::fb, lambda);
  Vector x_next = resolvent(prob.B, lambda, x - lambda * eval(prob.A, x));
  Vector v = (x - x_next) / lambda;
  const double eps = std::isinf(prob.modulus) ? 0.0 : (x_next - x).squaredNorm() / (4.0 * prob.modulus);
  Certificate cert = make_certificate(x_next, std::move(v), eps);
  return {std::move(x_next), std::move(cert)};
}

/// y = J_{λB}(x − λA(x)), x⁺ = y − λ(A(y) − A(x)); certificate (y, a + A(y), 0).
inline StepOutput tseng_step(const SplitProblem& prob, double lambda, const Vector& x) {
  detail::check_step_size(prob, Method::tseng, lambda);
  const Vector ax = eval(prob.A, x);
  const Vector forward = x - lambda * ax;
  Vector y = resolvent(prob.B, lambda, forward);
  const Vector ay = eval(prob.A, y);
  Vector x_next = y - lambda * (ay - ax);
  const Vector a = (forward - y) / lambda;  // a ∈ B(y)
  Certificate cert = make_certificate(std::move(y), a + ay, 0.0);
  return {std::move(x_next), std::move(cert)};
}

/// y = P_C(x − λA(x)), z = P_C(x − λA(y)); certificate (y, ν + A(y), ⟨ν, z − y⟩)
/// with ν = (x − λA(y) − z)/λ ∈ N_C(z).
inline StepOutput korpelevich_step(const SplitProblem& prob, double lambda, const Vector& x) {
  detail::check_step_size(prob, Method::korpelevich, lambda);
  Vector y = resolvent(prob.B, lambda, x - lambda * eval(prob.A, x));
  const Vector ay = eval(prob.A, y);
  const Vector extra = x - lambda * ay;
  Vector z = resolvent(prob.B, lambda, extra);
  const Vector nu = (extra - z) / lambda;
  double eps = nu.dot(z - y);
  // ⟨ν, z − y⟩ ≥ 0 because y ∈ C and ν ∈ N_C(z); only rounding can push it below.
  const double round_tol = 1e-12 * (1.0 + nu.norm() * (z - y).norm());
  if (eps < -round_tol) {
    throw OracleError("korpelevich: enlargement " + std::to_string(eps) + " is negative beyond rounding");
  }
  eps = std::max(eps, 0.0);
  Certificate cert = make_certificate(std::move(y), nu + ay, eps);
  return {std::move(z), std::move(cert)};
}

inline StepOutput split_step(const SplitProblem& prob, double lambda, const Vector& x) {
  switch (prob.method) {
    case Method::fb: return fb_step(prob, lambda, x);
    case Method::tseng: return tseng_step(prob, lambda, x);
    case Method::korpelevich: return korpelevich_step(prob, lambda, x);
  }
  throw ValidationError("split_step: unknown method");
}

/// The method's step as an HPE certificate oracle.
inline CertificateOracle split_oracle(SplitProblem prob) {
  return [prob = std::move(prob)](const Vector& x, double lambda) { return split_step(prob, lambda, x).cert; };
}

/// The sum operator A + B the certificates refer to.
inline MonotoneOp total_operator(const SplitProblem& prob) { return sum(prob.A, prob.B); }

struct StagedStep {
  Vector x_next;
  double residual_bound;  // bound on ‖x_next − exact step‖
};

/// Two-stage step x ↦ G(x, H(x) + u) + r, with the Lipschitz constant of the
/// G stage turning the stage errors into a bound on the total deviation.
inline StagedStep staged_step_with_errors(Method method, const SplitProblem& prob, double lambda, const Vector& x,
                                          const Vector& u_err, const Vector& r_err) {
  if (method == Method::fb) throw ValidationError("staged_step_with_errors: method must be tseng or korpelevich");
  detail::check_step_size(prob, method, lambda);
  detail::require_dim(x.size(), u_err, "staged_step_with_errors u_err");
  detail::require_dim(x.size(), r_err, "staged_step_with_errors r_err");

  const Vector ax = eval(prob.A, x);
  const Vector y = resolvent(prob.B, lambda, x - lambda * ax) + u_err;
  const Vector ay = eval(prob.A, y);
  Vector x_next;
  double lip_g = 0.0;
  if (method == Method::tseng) {
    x_next = y - lambda * (ay - ax) + r_err;
    lip_g = 1.0 + 2.0 * prob.lambda_hi * prob.modulus;
  } else {
    x_next = resolvent(prob.B, lambda, x - lambda * ay) + r_err;
    lip_g = 1.0 + prob.lambda_hi * prob.modulus;
  }
  return {std::move(x_next), lip_g * u_err.norm() + r_err.norm()};
}

}  // namespace monosplit
