#include <gtest/gtest.h>

#include <random>

#include "covqec/sdp.hpp"
#include "covqec/spectral.hpp"
#include "test_util.hpp"

using namespace covqec;
using namespace covqec::testing;

namespace {

// min x s.t. x*1 - A >= 0 : the largest eigenvalue
SdpProblem lambda_max_problem(const Mat& A, double scale = 1.0) {
  SdpBuilder b;
  int x = b.add_scalar();
  b.set_cost(x, scale);
  int blk = b.add_block(static_cast<int>(A.rows()));
  b.add_const(blk, -A);
  b.add_term(blk, x, Mat::Identity(A.rows(), A.cols()));
  return b.build();
}

}  // namespace

TEST(Sdp, SpectralNormOfZ) {
  SdpSolution s = solve_sdp(lambda_max_problem(pauli_z()));
  ASSERT_EQ(s.status, SdpStatus::optimal);
  EXPECT_NEAR(s.primal_value, 1.0, 1e-8);
  EXPECT_NEAR(s.dual_value, 1.0, 1e-8);
}

TEST(Sdp, LambdaMaxOracleAndDuality) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    int d = 2 + t % 7;
    Mat A = random_hermitian(rng, d);
    SdpSolution s = solve_sdp(lambda_max_problem(A));
    ASSERT_EQ(s.status, SdpStatus::optimal) << to_string(s.status);
    EXPECT_NEAR(s.primal_value, lambda_max(A), 1e-6);
    EXPECT_LE(s.dual_value, s.primal_value + 1e-9);
    // the dual is a density matrix supported on the top eigenspace
    EXPECT_NEAR(s.Z[0].trace().real(), 1.0, 1e-7);
    EXPECT_NEAR((A * s.Z[0]).trace().real(), lambda_max(A), 1e-6);
  }
}

TEST(Sdp, ScalingCovariance) {
  std::mt19937_64 rng(12);
  Mat A = random_hermitian(rng, 5);
  double base = solve_sdp(lambda_max_problem(A)).primal_value;
  for (double s : {0.01, 3.0, 250.0}) {
    SdpSolution sol = solve_sdp(lambda_max_problem(A, s));
    ASSERT_EQ(sol.status, SdpStatus::optimal);
    EXPECT_NEAR(sol.primal_value / (s * base), 1.0, 1e-8);
  }
}

// min t s.t. [[t, (A - x B)^dag],[A - x B, t]] >= 0 : min over x of ||A - x B||, brute-forced on a grid
TEST(Sdp, NormMinimizationOracle) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    int d = 2 + 2 * trial % 7;
    Mat A = random_matrix(rng, d, d), B = random_hermitian(rng, d);
    SdpBuilder b;
    int t = b.add_scalar(), x = b.add_scalar();
    b.set_cost(t, 1.0);
    int blk = b.add_block(2 * d);
    b.add_term(blk, t, Mat::Identity(2 * d, 2 * d));
    b.add_const(blk, A, d, 0);
    b.add_term(blk, x, -B, d, 0);
    SdpSolution s = solve_sdp(b.build());
    ASSERT_EQ(s.status, SdpStatus::optimal);
    auto f = [&](double v) { return spectral_norm(A - v * B); };
    // golden-section oracle on a bracket found by coarse grid
    double best = 1e300, arg = 0;
    for (double v = -20; v <= 20; v += 0.01)
      if (f(v) < best) best = f(v), arg = v;
    double lo = arg - 0.01, hi = arg + 0.01;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int k = 0; k < 100; ++k) {
      double a = hi - g * (hi - lo), c = lo + g * (hi - lo);
      (f(a) < f(c) ? hi : lo) = (f(a) < f(c) ? c : a);
    }
    EXPECT_NEAR(s.primal_value, f(0.5 * (lo + hi)), 1e-6);
    EXPECT_NEAR(s.x(1), 0.5 * (lo + hi), 1e-3);
  }
}

TEST(Sdp, EqualityConstraints) {
  // min x0 + x1 s.t. x0 - x1 = 1, diag(x0, x1) >= 0  -> x = (1, 0)
  SdpBuilder b;
  int x0 = b.add_scalar(), x1 = b.add_scalar();
  b.set_cost(x0, 1);
  b.set_cost(x1, 1);
  int blk = b.add_block(2);
  Mat E0 = Mat::Zero(2, 2), E1 = Mat::Zero(2, 2);
  E0(0, 0) = 1;
  E1(1, 1) = 1;
  b.add_term(blk, x0, E0);
  b.add_term(blk, x1, E1);
  b.add_equality({{x0, 1}, {x1, -1}}, 1);
  SdpSolution s = solve_sdp(b.build());
  ASSERT_EQ(s.status, SdpStatus::optimal);
  EXPECT_NEAR(s.primal_value, 1.0, 1e-8);
  EXPECT_NEAR(s.x(0), 1.0, 1e-7);
}

TEST(Sdp, InconsistentEqualitiesReportRay) {
  SdpBuilder b;
  int x = b.add_scalar();
  b.set_cost(x, 1);
  int blk = b.add_block(1);
  b.add_term(blk, x, Mat::Identity(1, 1));
  b.add_equality({{x, 1}}, 1);
  b.add_equality({{x, 1}}, 2);
  SdpSolution s = solve_sdp(b.build());
  EXPECT_EQ(s.status, SdpStatus::infeasible);
  ASSERT_EQ(s.ray.size(), 2);
  // A^T y = 0 and b^T y != 0
  EXPECT_NEAR(s.ray(0) + s.ray(1), 0.0, 1e-12);
  EXPECT_GT(std::abs(s.ray(0) + 2 * s.ray(1)), 0.5);
}

TEST(Sdp, UnboundedDetected) {
  // min x s.t. diag(1) + x*0 ... use x >= -inf: block [1 + 0x] -> unbounded below
  SdpBuilder b;
  int x = b.add_scalar(), y = b.add_scalar();
  b.set_cost(x, 1);
  int blk = b.add_block(1);
  b.add_term(blk, y, Mat::Identity(1, 1));
  b.add_const(blk, Mat::Identity(1, 1));
  SdpSolution s = solve_sdp(b.build());
  EXPECT_EQ(s.status, SdpStatus::unbounded);
}

TEST(Sdp, ComplexBlock) {
  // lambda_max of Pauli Y needs the complex embedding
  SdpSolution s = solve_sdp(lambda_max_problem(pauli_y()));
  ASSERT_EQ(s.status, SdpStatus::optimal);
  EXPECT_NEAR(s.primal_value, 1.0, 1e-8);
  Mat Z = s.Z[0];
  EXPECT_NEAR((pauli_y() * Z).trace().real(), 1.0, 1e-7);
}

TEST(Sdp, HermitianBasisOrthonormal) {
  const auto& B = herm_basis(3);
  ASSERT_EQ(B.size(), 9u);
  for (size_t a = 0; a < B.size(); ++a)
    for (size_t c = 0; c < B.size(); ++c)
      EXPECT_NEAR((B[a] * B[c]).trace().real(), a == c ? 1.0 : 0.0, 1e-14);
}

TEST(Sdp, PrimalInfeasibleDetected) {
  // diag(x, -x - 1) >= 0 has no solution
  SdpBuilder b;
  int x = b.add_scalar();
  b.set_cost(x, 1);
  int blk = b.add_block(2);
  Mat F = Mat::Zero(2, 2), F0 = Mat::Zero(2, 2);
  F(0, 0) = 1;
  F(1, 1) = -1;
  F0(1, 1) = -1;
  b.add_const(blk, F0);
  b.add_term(blk, x, F);
  SdpSolution s = solve_sdp(b.build());
  EXPECT_EQ(s.status, SdpStatus::infeasible);
}
