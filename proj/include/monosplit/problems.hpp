#pragma once

// Test problems 0 ∈ A(x) + B(x) with reference solutions that never come from
// the solvers under test: either closed form or a brute-force active-set
// enumeration for box-constrained affine variational inequalities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "monosplit/errors.hpp"
#include "monosplit/hpe.hpp"
#include "monosplit/operators.hpp"
#include "monosplit/splittings.hpp"

namespace monosplit {

enum class Provenance { closed_form, active_set_oracle };

inline const char* to_string(Provenance p) {
  return p == Provenance::closed_form ? "closed_form" : "active_set_oracle";
}

struct Problem {
  std::string name;
  MonotoneOp A;
  MonotoneOp B;
  Vector reference_solution;
  Provenance provenance = Provenance::closed_form;
  std::vector<Method> methods;
  // Closed-form J_{λ(A+B)} when one exists; enables the exact proximal point method.
  std::optional<ResolventFn> joint_resolvent;

  Eigen::Index dim() const { return A.dim(); }
  std::optional<double> alpha() const { return A.cocoercivity(); }
  std::optional<double> lipschitz() const { return A.lipschitz(); }
  bool supports(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

  /// Exclusive upper bound on λ for a method: 2α for FB, 1/L otherwise.
  double lambda_limit(Method m) const {
    if (m == Method::fb) return alpha() ? 2.0 * *alpha() : 0.0;
    const double L = lipschitz().value_or(0.0);
    return L > 0.0 ? 1.0 / L : std::numeric_limits<double>::infinity();
  }
};

/// SplitProblem for one of the problem's methods; refuses methods whose preconditions fail.
inline SplitProblem make_split(const Problem& prob, Method method, double lambda_lo, double lambda_hi) {
  if (!prob.supports(method)) {
    // Re-run validation so the error names the failing hypothesis.
    make_split_problem(method, prob.A, prob.B, lambda_lo, lambda_hi);
    throw ValidationError(std::string(to_string(method)) + " is not applicable to problem '" + prob.name + "'");
  }
  return make_split_problem(method, prob.A, prob.B, lambda_lo, lambda_hi);
}

/// Residual test: with u = −A(x*), check u ∈ B(x*) through J_B(x* + u) = x*.
inline bool verify_reference(const Problem& prob, double tol = 1e-8) {
  const Vector& xs = prob.reference_solution;
  const Vector u = -eval(prob.A, xs);
  return (resolvent(prob.B, 1.0, xs + u) - xs).norm() <= tol;
}

/// A(x) = x − b (α = L = 1), B = ∂(w‖·‖₁); x* = soft-threshold(b, w).
inline Problem make_quadratic_l1(const Vector& b, double w) {
  if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("quadratic_l1: w must be > 0");
  if (b.size() < 1) throw DimensionError("quadratic_l1: empty b");
  const Eigen::Index n = b.size();
  Problem p{"quadratic_l1", grad_quadratic(Matrix::Identity(n, n), b), subdiff_l1(Vector::Constant(n, w)),
            Vector(n), Provenance::closed_form, {Method::fb, Method::tseng}, std::nullopt};
  for (Eigen::Index i = 0; i < n; ++i) p.reference_solution(i) = detail::soft_threshold(b(i), w);
  // argmin_y λ(½‖y − b‖² + w‖y‖₁) + ½‖y − x‖²
  p.joint_resolvent = [b, w](double lambda, const Vector& x) {
    Vector y(x.size());
    const double thresh = lambda * w / (1.0 + lambda);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      y(i) = detail::soft_threshold((x(i) + lambda * b(i)) / (1.0 + lambda), thresh);
    }
    return y;
  };
  return p;
}

/// A(x₁, x₂) = (x₂, −x₁) on C = [−1, 1]²; monotone and 1-Lipschitz but not cocoercive.
inline Problem make_rotation_vi() {
  Matrix rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  return Problem{"rotation_vi",
                 affine(rot, Vector::Zero(2)),
                 normal_cone_box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)),
                 Vector::Zero(2),
                 Provenance::closed_form,
                 {Method::tseng, Method::korpelevich},
                 std::nullopt};
}

/// Solves 0 ∈ Mx + q + N_[lo,hi](x) by enumerating all 3ⁿ active sets
/// (each coordinate at lo, at hi or free) and checking the KKT signs.
inline Vector solve_box_vi_by_enumeration(const Matrix& M, const Vector& q, const Vector& lo, const Vector& hi) {
  const Eigen::Index n = M.rows();
  if (n < 1 || n > 8) throw ValidationError("box VI enumeration: dimension must be in [1, 8]");
  detail::require_dim(n, q, "box VI q");
  detail::require_dim(n, lo, "box VI lo");
  detail::require_dim(n, hi, "box VI hi");

  const double scale = 1.0 + M.cwiseAbs().maxCoeff() * std::max(lo.cwiseAbs().maxCoeff(), hi.cwiseAbs().maxCoeff()) +
                       q.cwiseAbs().maxCoeff();
  const double tol = 1e-9 * scale;

  std::size_t patterns = 1;
  for (Eigen::Index i = 0; i < n; ++i) patterns *= 3;

  std::vector<int> state(static_cast<std::size_t>(n));  // 0 = lower, 1 = upper, 2 = free
  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t c = code;
    std::vector<Eigen::Index> free_idx;
    Vector x = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
      c /= 3;
      if (state[static_cast<std::size_t>(i)] == 0) x(i) = lo(i);
      else if (state[static_cast<std::size_t>(i)] == 1) x(i) = hi(i);
      else free_idx.push_back(i);
    }

    if (!free_idx.empty()) {
      const auto nf = static_cast<Eigen::Index>(free_idx.size());
      Matrix Mff(nf, nf);
      Vector rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        rhs(a) = -q(free_idx[a]);
        for (Eigen::Index j = 0; j < n; ++j) {
          if (state[static_cast<std::size_t>(j)] != 2) rhs(a) -= M(free_idx[a], j) * x(j);
        }
        for (Eigen::Index b = 0; b < nf; ++b) Mff(a, b) = M(free_idx[a], free_idx[b]);
      }
      const Vector xf = Mff.completeOrthogonalDecomposition().solve(rhs);
      if ((Mff * xf - rhs).norm() > tol) continue;
      for (Eigen::Index a = 0; a < nf; ++a) x(free_idx[a]) = xf(a);
    }

    const Vector r = M * x + q;
    bool ok = true;
    for (Eigen::Index i = 0; i < n && ok; ++i) {
      switch (state[static_cast<std::size_t>(i)]) {
        case 0: ok = r(i) >= -tol; break;
        case 1: ok = r(i) <= tol; break;
        default: ok = x(i) >= lo(i) - tol && x(i) <= hi(i) + tol && std::abs(r(i)) <= tol; break;
      }
    }
    if (ok) return x.cwiseMax(lo).cwiseMin(hi);
  }
  throw OracleError("box VI enumeration: no active set satisfies the KKT conditions");
}

/// A(x) = Mx + q on the box [lo, hi]; reference solution from the enumeration oracle.
inline Problem make_affine_box_vi(const Matrix& M, const Vector& q, const Vector& lo, const Vector& hi,
                                  std::string name = "affine_box_vi") {
  MonotoneOp A = affine(M, q);
  MonotoneOp B = normal_cone_box(lo, hi);
  Problem p{std::move(name), A, B, solve_box_vi_by_enumeration(M, q, lo, hi), Provenance::active_set_oracle,
            {Method::tseng, Method::korpelevich}, std::nullopt};
  if (A.cocoercivity()) p.methods.insert(p.methods.begin(), Method::fb);
  return p;
}

/// Random strongly monotone affine VI on [−1, 1]ⁿ: M = 0.1·I + GᵀG/n + K with K skew.
inline Problem make_random_affine_box_vi(Eigen::Index n, std::uint64_t seed) {
  if (n < 1 || n > 8) throw ValidationError("random_affine_box_vi: n must be in [1, 8]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix G(n, n), S(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      G(i, j) = gauss(rng);
      S(i, j) = gauss(rng);
    }
  }
  const Matrix K = 0.5 * (S - S.transpose());
  const Matrix M = 0.1 * Matrix::Identity(n, n) + G.transpose() * G / static_cast<double>(n) + K;
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = 2.0 * gauss(rng);
  return make_affine_box_vi(M, q, Vector::Constant(n, -1.0), Vector::Constant(n, 1.0), "random_affine_box_vi");
}

}  // namespace monosplit
