#pragma once

// Maximal monotone operators on R^n with closed-form resolvents.
//
// MonotoneOp is an immutable value handle: copies share the same validated
// node, so operators can be passed around and shared across threads freely.
// Construction goes through the factory functions below, each of which
// validates monotonicity and fills in capabilities and moduli.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "monosplit/errors.hpp"

namespace monosplit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute tolerance for monotonicity and validation checks.
inline constexpr double kTolMono = 1e-10;

namespace detail {

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite coordinate");
  }
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite entry");
  }
}

inline void require_dim(Eigen::Index expected, const Vector& v, const char* what) {
  if (v.size() != expected) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(v.size()));
  }
}

inline double soft_threshold(double t, double thresh) {
  if (t > thresh) return t - thresh;
  if (t < -thresh) return t + thresh;
  return 0.0;
}

}  // namespace detail

struct Capabilities {
  bool eval = false;
  bool resolvent = false;
  bool graph_sample = false;
};

enum class OpKind { affine, subdiff_l1, normal_cone_box, normal_cone_ball, grad_quadratic, scaled, sum };

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::affine: return "affine";
    case OpKind::subdiff_l1: return "subdiff_l1";
    case OpKind::normal_cone_box: return "normal_cone_box";
    case OpKind::normal_cone_ball: return "normal_cone_ball";
    case OpKind::grad_quadratic: return "grad_quadratic";
    case OpKind::scaled: return "scaled";
    case OpKind::sum: return "sum";
  }
  return "unknown";
}

struct OpNode;

class MonotoneOp {
 public:
  explicit MonotoneOp(std::shared_ptr<const OpNode> node) : node_(std::move(node)) {}

  OpKind kind() const;
  Eigen::Index dim() const;
  const Capabilities& capabilities() const;
  /// Cocoercivity modulus; +inf for the zero operator, empty when not cocoercive.
  std::optional<double> cocoercivity() const;
  std::optional<double> lipschitz() const;
  /// True for N_C (box or ball), also when wrapped in `scaled`, since λN_C = N_C.
  bool is_normal_cone() const;

  const OpNode& node() const { return *node_; }

 private:
  std::shared_ptr<const OpNode> node_;
};

struct AffineData {
  Matrix M;
  Vector q;
};
struct SubdiffL1Data {
  Vector weights;
};
struct BoxData {
  Vector lo, hi;
};
struct BallData {
  double radius;
  Eigen::Index dim;
};
struct GradQuadraticData {
  Matrix Q;
  Vector b;
};
struct ScaledData {
  double factor;
  MonotoneOp inner;
};
struct SumData {
  MonotoneOp left, right;
};

struct OpNode {
  std::variant<AffineData, SubdiffL1Data, BoxData, BallData, GradQuadraticData, ScaledData, SumData> data;
  OpKind kind;
  Eigen::Index dim;
  Capabilities caps;
  std::optional<double> alpha;
  std::optional<double> lipschitz;
};

inline OpKind MonotoneOp::kind() const { return node_->kind; }
inline Eigen::Index MonotoneOp::dim() const { return node_->dim; }
inline const Capabilities& MonotoneOp::capabilities() const { return node_->caps; }
inline std::optional<double> MonotoneOp::cocoercivity() const { return node_->alpha; }
inline std::optional<double> MonotoneOp::lipschitz() const { return node_->lipschitz; }

inline bool MonotoneOp::is_normal_cone() const {
  switch (node_->kind) {
    case OpKind::normal_cone_box:
    case OpKind::normal_cone_ball: return true;
    case OpKind::scaled: return std::get<ScaledData>(node_->data).inner.is_normal_cone();
    default: return false;
  }
}

namespace detail {

inline MonotoneOp make_node(OpNode node) { return MonotoneOp(std::make_shared<const OpNode>(std::move(node))); }

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionError(std::string(what) + ": matrix must be square and non-empty");
  }
}

// Smallest and largest eigenvalue of the symmetric part of m.
inline std::pair<double, double> symmetric_part_spectrum(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

inline double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

// α = 1/λ_max for a symmetric PSD matrix; the zero matrix is cocoercive with every α.
inline double cocoercivity_of_psd(double lambda_max) {
  return lambda_max > kTolMono ? 1.0 / lambda_max : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factories (validated construction)

/// x ↦ Mx + q. Requires M + Mᵀ PSD. α is filled when M is symmetric.
inline MonotoneOp affine(Matrix M, Vector q) {
  detail::require_square(M, "affine");
  detail::require_dim(M.rows(), q, "affine q");
  detail::require_finite(M, "affine M");
  detail::require_finite(q, "affine q");
  const auto [min_eig, max_eig] = detail::symmetric_part_spectrum(M);
  if (min_eig < -kTolMono) {
    throw ValidationError("affine: M + M^T has negative eigenvalue " + std::to_string(2 * min_eig) +
                          " (operator is not monotone)");
  }
  OpNode node{AffineData{M, q}, OpKind::affine, M.rows(), {true, true, true}, std::nullopt, std::nullopt};
  node.lipschitz = detail::spectral_norm(M);
  if ((M - M.transpose()).cwiseAbs().maxCoeff() <= kTolMono) {
    node.alpha = detail::cocoercivity_of_psd(max_eig);
  }
  return detail::make_node(std::move(node));
}

/// The zero operator on R^n.
inline MonotoneOp zero_operator(Eigen::Index n) { return affine(Matrix::Zero(n, n), Vector::Zero(n)); }

/// ∂(Σ w_i |x_i|).
inline MonotoneOp subdiff_l1(Vector weights) {
  if (weights.size() < 1) throw DimensionError("subdiff_l1: empty weights");
  detail::require_finite(weights, "subdiff_l1 weights");
  if ((weights.array() < 0.0).any()) throw ValidationError("subdiff_l1: weights must be >= 0");
  const auto n = weights.size();
  return detail::make_node(
      OpNode{SubdiffL1Data{std::move(weights)}, OpKind::subdiff_l1, n, {false, true, true}, std::nullopt, std::nullopt});
}

/// Normal cone of the box [lo, hi].
inline MonotoneOp normal_cone_box(Vector lo, Vector hi) {
  if (lo.size() < 1) throw DimensionError("normal_cone_box: empty bounds");
  detail::require_dim(lo.size(), hi, "normal_cone_box hi");
  detail::require_finite(lo, "normal_cone_box lo");
  detail::require_finite(hi, "normal_cone_box hi");
  if ((lo.array() > hi.array()).any()) throw ValidationError("normal_cone_box: lo > hi");
  const auto n = lo.size();
  return detail::make_node(
      OpNode{BoxData{std::move(lo), std::move(hi)}, OpKind::normal_cone_box, n, {false, true, true}, std::nullopt,
             std::nullopt});
}

/// Normal cone of the centered Euclidean ball of the given radius in R^dim.
inline MonotoneOp normal_cone_ball(double radius, Eigen::Index dim) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("normal_cone_ball: radius must be > 0");
  if (dim < 1) throw DimensionError("normal_cone_ball: dim must be >= 1");
  return detail::make_node(
      OpNode{BallData{radius, dim}, OpKind::normal_cone_ball, dim, {false, true, true}, std::nullopt, std::nullopt});
}

/// ∇(½xᵀQx − bᵀx) = Qx − b for symmetric PSD Q. α = 1/λ_max(Q), L = λ_max(Q).
inline MonotoneOp grad_quadratic(Matrix Q, Vector b) {
  detail::require_square(Q, "grad_quadratic");
  detail::require_dim(Q.rows(), b, "grad_quadratic b");
  detail::require_finite(Q, "grad_quadratic Q");
  detail::require_finite(b, "grad_quadratic b");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > kTolMono) {
    throw ValidationError("grad_quadratic: Q must be symmetric");
  }
  const auto [min_eig, max_eig] = detail::symmetric_part_spectrum(Q);
  if (min_eig < -kTolMono) throw ValidationError("grad_quadratic: Q must be positive semidefinite");
  const auto n = Q.rows();
  OpNode node{GradQuadraticData{std::move(Q), std::move(b)}, OpKind::grad_quadratic, n, {true, true, true},
              detail::cocoercivity_of_psd(max_eig), std::max(max_eig, 0.0)};
  return detail::make_node(std::move(node));
}

/// λ·T.
inline MonotoneOp scaled(double factor, MonotoneOp inner) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ValidationError("scaled: factor must be > 0");
  OpNode node{ScaledData{factor, inner}, OpKind::scaled, inner.dim(), inner.capabilities(), std::nullopt,
              std::nullopt};
  if (inner.cocoercivity()) node.alpha = *inner.cocoercivity() / factor;
  if (inner.lipschitz()) node.lipschitz = *inner.lipschitz() * factor;
  return detail::make_node(std::move(node));
}

/// T₁ + T₂. Never has a resolvent. Graph sampling works when at least one side
/// is single-valued and the other can be sampled.
inline MonotoneOp sum(MonotoneOp left, MonotoneOp right) {
  if (left.dim() != right.dim()) throw DimensionError("sum: operand dimensions differ");
  const auto& lc = left.capabilities();
  const auto& rc = right.capabilities();
  Capabilities caps;
  caps.eval = lc.eval && rc.eval;
  caps.resolvent = false;
  caps.graph_sample = caps.eval || (lc.eval && rc.graph_sample) || (rc.eval && lc.graph_sample);
  OpNode node{SumData{left, right}, OpKind::sum, left.dim(), caps, std::nullopt, std::nullopt};
  if (caps.eval && left.lipschitz() && right.lipschitz()) node.lipschitz = *left.lipschitz() + *right.lipschitz();
  if (left.cocoercivity() && right.cocoercivity()) {
    // ‖a₁+a₂‖² ≤ (1/α₁ + 1/α₂)(α₁‖a₁‖² + α₂‖a₂‖²)
    node.alpha = 1.0 / (1.0 / *left.cocoercivity() + 1.0 / *right.cocoercivity());
  }
  return detail::make_node(std::move(node));
}

// ---------------------------------------------------------------------------
// Evaluation

inline Vector eval(const MonotoneOp& op, const Vector& x) {
  if (!op.capabilities().eval) {
    throw CapabilityError(std::string("eval: operator '") + to_string(op.kind()) + "' is set-valued");
  }
  detail::require_dim(op.dim(), x, "eval");
  const OpNode& n = op.node();
  Vector out;
  switch (n.kind) {
    case OpKind::affine: {
      const auto& d = std::get<AffineData>(n.data);
      out = d.M * x + d.q;
      break;
    }
    case OpKind::grad_quadratic: {
      const auto& d = std::get<GradQuadraticData>(n.data);
      out = d.Q * x - d.b;
      break;
    }
    case OpKind::scaled: {
      const auto& d = std::get<ScaledData>(n.data);
      out = d.factor * eval(d.inner, x);
      break;
    }
    case OpKind::sum: {
      const auto& d = std::get<SumData>(n.data);
      out = eval(d.left, x) + eval(d.right, x);
      break;
    }
    default: throw CapabilityError("eval: unsupported operator kind");
  }
  detail::require_finite(out, "eval result");
  return out;
}

/// J_{λT}(x) = (I + λT)^{-1}(x).
inline Vector resolvent(const MonotoneOp& op, double lambda, const Vector& x) {
  if (!op.capabilities().resolvent) {
    throw CapabilityError(std::string("resolvent: operator '") + to_string(op.kind()) + "' has no resolvent");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("resolvent: lambda must be > 0");
  detail::require_dim(op.dim(), x, "resolvent");
  const OpNode& n = op.node();
  Vector y;
  switch (n.kind) {
    case OpKind::affine: {
      const auto& d = std::get<AffineData>(n.data);
      const Matrix system = Matrix::Identity(n.dim, n.dim) + lambda * d.M;
      Eigen::FullPivLU<Matrix> lu(system);
      if (!lu.isInvertible()) throw SingularSolveError("resolvent: I + lambda*M is singular");
      y = lu.solve(x - lambda * d.q);
      break;
    }
    case OpKind::grad_quadratic: {
      const auto& d = std::get<GradQuadraticData>(n.data);
      const Matrix system = Matrix::Identity(n.dim, n.dim) + lambda * d.Q;
      Eigen::LLT<Matrix> llt(system);
      if (llt.info() != Eigen::Success) throw SingularSolveError("resolvent: I + lambda*Q is not SPD");
      y = llt.solve(x + lambda * d.b);
      break;
    }
    case OpKind::subdiff_l1: {
      const auto& d = std::get<SubdiffL1Data>(n.data);
      y.resize(n.dim);
      for (Eigen::Index i = 0; i < n.dim; ++i) y(i) = detail::soft_threshold(x(i), lambda * d.weights(i));
      break;
    }
    case OpKind::normal_cone_box: {
      const auto& d = std::get<BoxData>(n.data);
      y = x.cwiseMax(d.lo).cwiseMin(d.hi);
      break;
    }
    case OpKind::normal_cone_ball: {
      const auto& d = std::get<BallData>(n.data);
      const double nx = x.norm();
      y = nx > d.radius ? Vector(x * (d.radius / nx)) : x;
      break;
    }
    case OpKind::scaled: {
      const auto& d = std::get<ScaledData>(n.data);
      y = resolvent(d.inner, lambda * d.factor, x);
      break;
    }
    case OpKind::sum: throw CapabilityError("resolvent: sum operators have no resolvent");
  }
  detail::require_finite(y, "resolvent result");
  return y;
}

// ---------------------------------------------------------------------------
// Graph sampling

struct GraphPair {
  Vector z;
  Vector u;  // u ∈ T(z)
};

/// Where sampled inputs are drawn: isotropic Gaussian with the given centre and scale.
struct SampleCloud {
  Vector center;  // empty means the origin
  double scale = 1.0;
};

namespace detail {

// Maps a raw draw w to an exact graph pair of op.
inline GraphPair graph_point_from(const MonotoneOp& op, double lambda, const Vector& w) {
  const auto& caps = op.capabilities();
  if (caps.resolvent) {
    Vector z = resolvent(op, lambda, w);
    Vector u = (w - z) / lambda;
    return {std::move(z), std::move(u)};
  }
  if (caps.eval) return {w, eval(op, w)};
  const OpNode& n = op.node();
  if (n.kind == OpKind::scaled) {
    const auto& d = std::get<ScaledData>(n.data);
    GraphPair p = graph_point_from(d.inner, lambda, w);
    p.u *= d.factor;
    return p;
  }
  if (n.kind == OpKind::sum) {
    const auto& d = std::get<SumData>(n.data);
    if (d.left.capabilities().eval && d.right.capabilities().graph_sample) {
      GraphPair p = graph_point_from(d.right, lambda, w);
      p.u += eval(d.left, p.z);
      return p;
    }
    if (d.right.capabilities().eval && d.left.capabilities().graph_sample) {
      GraphPair p = graph_point_from(d.left, lambda, w);
      p.u += eval(d.right, p.z);
      return p;
    }
  }
  throw CapabilityError(std::string("graph_sample: operator '") + to_string(op.kind()) + "' cannot be sampled");
}

}  // namespace detail

/// m pairs (z, u) with u ∈ T(z), deterministic for a fixed seed.
inline std::vector<GraphPair> graph_sample(const MonotoneOp& op, double lambda, std::uint64_t seed, std::size_t m,
                                           const SampleCloud& cloud = {}) {
  if (!op.capabilities().graph_sample) {
    throw CapabilityError(std::string("graph_sample: operator '") + to_string(op.kind()) + "' cannot be sampled");
  }
  if (!(lambda > 0.0)) throw ValidationError("graph_sample: lambda must be > 0");
  const Vector center = cloud.center.size() == 0 ? Vector(Vector::Zero(op.dim())) : cloud.center;
  detail::require_dim(op.dim(), center, "graph_sample center");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<GraphPair> out;
  out.reserve(m);
  Vector w(op.dim());
  for (std::size_t i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = center(j) + cloud.scale * gauss(rng);
    out.push_back(detail::graph_point_from(op, lambda, w));
  }
  return out;
}

}  // namespace monosplit
