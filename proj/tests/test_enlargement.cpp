#include <gtest/gtest.h>

#include <random>

#include "monosplit/enlargement.hpp"
#include "oracles.hpp"

using namespace monosplit;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

MonotoneOp identity(Eigen::Index n) { return affine(Matrix::Identity(n, n), Vector::Zero(n)); }

}  // namespace

TEST(Certificate, Construction) {
  EXPECT_THROW(make_certificate(vec({0.0}), vec({0.0}), -1.0), ValidationError);
  EXPECT_THROW(make_certificate(vec({0.0}), vec({0.0, 1.0}), 0.0), DimensionError);
  EXPECT_THROW(make_certificate(vec({std::nan("")}), vec({0.0}), 0.0), ValidationError);
}

TEST(CheckCertificate, ExactGraphPointPasses) {
  const auto v = check_certificate(identity(1), make_certificate(vec({0.0}), vec({0.0}), 0.0), 1.0, 1, 100);
  EXPECT_TRUE(v.passed);
  EXPECT_GE(v.worst_gap, 0.0);
  EXPECT_EQ(v.probes, 101u);  // 100 random + the anchor probe
}

TEST(CheckCertificate, HandProbes) {
  const Certificate cert = make_certificate(vec({0.0}), vec({1.0}), 0.0);
  // gaps: ⟨0−2, 1−2⟩ = 2, ⟨0+2, 1+2⟩ = 6, ⟨−0.5, 0.5⟩ = −0.25
  const std::vector<GraphPair> probes{{vec({2.0}), vec({2.0})}, {vec({-2.0}), vec({-2.0})}, {vec({0.5}), vec({0.5})}};
  const auto v = check_certificate_on(cert, probes);
  EXPECT_FALSE(v.passed);
  EXPECT_DOUBLE_EQ(v.worst_gap, -0.25);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(v.witness->z, vec({0.5}));

  const std::vector<GraphPair> benign(probes.begin(), probes.begin() + 2);
  const auto ok = check_certificate_on(cert, benign);
  EXPECT_TRUE(ok.passed);
  EXPECT_DOUBLE_EQ(ok.worst_gap, 2.0);
}

TEST(CheckCertificate, CorruptedCertificateIsFalsified) {
  // v = 1.5·T(y) is not in T(y) = {y} for the identity.
  const auto v = check_certificate(identity(2), make_certificate(vec({1.0, 0.0}), vec({1.5, 0.0}), 0.0), 1.0, 3, 1000);
  EXPECT_FALSE(v.passed);
  EXPECT_LT(v.worst_gap, 0.0);
}

TEST(Transport, Examples) {
  const auto c = transport_cocoercive(identity(2), vec({0.0, 0.0}), vec({2.0, 0.0}));
  EXPECT_EQ(c.y, vec({0.0, 0.0}));
  EXPECT_EQ(c.v, vec({2.0, 0.0}));
  EXPECT_DOUBLE_EQ(c.eps, 1.0);

  const auto same = transport_cocoercive(identity(2), vec({1.0, 2.0}), vec({1.0, 2.0}));
  EXPECT_EQ(same.eps, 0.0);
  EXPECT_EQ(same.v, vec({1.0, 2.0}));

  const auto gq = grad_quadratic(Matrix::Identity(1, 1), vec({3.0}));
  const auto c2 = transport_cocoercive(gq, vec({1.0}), vec({0.0}));
  EXPECT_EQ(c2.y, vec({1.0}));
  EXPECT_EQ(c2.v, vec({-3.0}));
  EXPECT_DOUBLE_EQ(c2.eps, 0.25);
  EXPECT_TRUE(check_certificate(gq, c2, 1.0, 5, 1000).passed);

  EXPECT_THROW(transport_cocoercive(affine((Matrix(2, 2) << 0, 1, -1, 0).finished(), Vector::Zero(2)),
                                    vec({0.0, 0.0}), vec({1.0, 0.0})),
               CapabilityError);
}

TEST(Transport, AlwaysPasses) {
  std::mt19937_64 rng(21);
  Matrix Q(3, 3);
  Q << 4.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0;
  const auto A = grad_quadratic(Q, vec({1.0, -2.0, 0.5}));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Vector x = oracle::gaussian_vector(rng, 3, 2.0);
    const Vector z = oracle::gaussian_vector(rng, 3, 2.0);
    const auto cert = transport_cocoercive(A, x, z);
    const auto v = check_certificate(A, cert, 1.0, seed, 500);
    EXPECT_TRUE(v.passed) << "seed " << seed << " worst " << v.worst_gap;
  }
}

TEST(Transport, EpsilonIsTight) {
  // The ε of the transport formula cannot be shrunk: for A = I in R¹, x = 0,
  // z = 2 the infimum of ⟨x − y, A z − A y⟩ over y is −1 = −‖x − z‖²/4 at y = 1.
  const Certificate cert = transport_cocoercive(identity(1), vec({0.0}), vec({2.0}));
  const std::vector<GraphPair> probe{{vec({1.0}), vec({1.0})}};
  EXPECT_NEAR(check_certificate_on(cert, probe).worst_gap, 0.0, 1e-15);
  Certificate smaller = cert;
  smaller.eps *= 0.99;
  EXPECT_FALSE(check_certificate_on(smaller, probe).passed);
}

TEST(CombineSum, Examples) {
  const Vector y = vec({1.0, -1.0});
  const auto c = combine_sum(make_certificate(y, vec({1.0, 2.0}), 0.0), make_certificate(y, vec({3.0, 4.0}), 0.0));
  EXPECT_EQ(c.v, vec({4.0, 6.0}));
  EXPECT_EQ(c.eps, 0.0);
  EXPECT_THROW(combine_sum(make_certificate(y, y, 0.0), make_certificate(vec({1.0, -0.999}), y, 0.0)),
               BasePointMismatch);
}

TEST(CombineSum, ForwardBackwardConstruction) {
  // z = J_{λB}(x − λA x); A(x) ∈ A^[ε](z) by transport, b ∈ B(z) exactly;
  // their sum lies in (A + B)^[ε](z).
  const auto A = grad_quadratic(Matrix::Identity(1, 1), vec({3.0}));
  const auto B = subdiff_l1(vec({1.0}));
  const double lambda = 1.0;
  const Vector x = vec({0.0});
  const Vector z = resolvent(B, lambda, x - lambda * eval(A, x));
  const Vector b = (x - lambda * eval(A, x) - z) / lambda;
  const auto certA = transport_cocoercive(A, z, x);
  const auto certB = make_certificate(z, b, 0.0);
  const auto total = combine_sum(certA, certB);
  EXPECT_DOUBLE_EQ(total.eps, certA.eps);
  EXPECT_DOUBLE_EQ(total.eps, 1.0);  // ‖2 − 0‖²/4
  EXPECT_TRUE(check_certificate(sum(A, B), total, 1.0, 8, 1000).passed);
}

TEST(ScaleCertificate, Examples) {
  const auto c = make_certificate(vec({1.0}), vec({2.0}), 2.0);
  const auto same = scale_certificate(c, 1.0);
  EXPECT_EQ(same.v, c.v);
  EXPECT_EQ(same.eps, c.eps);
  const auto half = scale_certificate(c, 0.5);
  EXPECT_EQ(half.v, vec({1.0}));
  EXPECT_EQ(half.eps, 1.0);
  EXPECT_THROW(scale_certificate(c, 0.0), ValidationError);

  const auto exact = make_certificate(vec({0.7}), vec({0.7}), 0.0);
  EXPECT_TRUE(check_certificate(scaled(3.0, identity(1)), scale_certificate(exact, 3.0), 1.0, 2, 1000).passed);
}

TEST(Properties, MonotoneInEpsilon) {
  std::mt19937_64 rng(2);
  const auto op = normal_cone_box(vec({-1.0, -1.0}), vec({1.0, 1.0}));
  for (int trial = 0; trial < 100; ++trial) {
    const auto probes = graph_sample(op, 1.0, static_cast<std::uint64_t>(trial), 50, {Vector::Zero(2), 2.0});
    const Vector y = oracle::gaussian_vector(rng, 2);
    const Vector v = oracle::gaussian_vector(rng, 2);
    const double eps = std::abs(oracle::gaussian_vector(rng, 1)(0));
    const bool base = check_certificate_on(make_certificate(y, v, eps), probes).passed;
    const bool larger = check_certificate_on(make_certificate(y, v, eps + 0.5), probes).passed;
    if (base) { EXPECT_TRUE(larger); }
  }
}

TEST(Properties, ZeroEpsilonGraphPointsPass) {
  const auto op = subdiff_l1(vec({1.0, 0.5, 2.0}));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pts = graph_sample(op, 1.0, seed + 100, 1, {Vector::Zero(3), 3.0});
    const auto cert = make_certificate(pts[0].z, pts[0].u, 0.0);
    const auto v = check_certificate(op, cert, 1.0, seed, 300);
    EXPECT_TRUE(v.passed);
    EXPECT_GE(v.worst_gap, -v.tol_gap);
  }
}

TEST(Properties, ScalingCommutesWithVerdict) {
  std::mt19937_64 rng(12);
  const auto T = subdiff_l1(vec({1.0, 1.0}));
  const double lambda = 2.5;
  int failures_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto probes = graph_sample(T, 1.0, static_cast<std::uint64_t>(trial), 40, {Vector::Zero(2), 2.0});
    std::vector<GraphPair> scaled_probes;
    for (const auto& p : probes) scaled_probes.push_back({p.z, lambda * p.u});
    const Certificate cert = make_certificate(oracle::gaussian_vector(rng, 2), oracle::gaussian_vector(rng, 2), 0.3);
    const auto a = check_certificate_on(cert, probes);
    const auto b = check_certificate_on(scale_certificate(cert, lambda), scaled_probes);
    EXPECT_EQ(a.passed, b.passed);
    EXPECT_NEAR(b.worst_gap, lambda * a.worst_gap, 1e-12 * (1.0 + std::abs(b.worst_gap)));
    failures_seen += !a.passed;
  }
  EXPECT_GT(failures_seen, 0);  // the trial set exercises both verdicts
}
