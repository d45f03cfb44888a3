#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "covqec/codes.hpp"
#include "covqec/spectral.hpp"
#include "test_util.hpp"

using namespace covqec;
using namespace covqec::testing;

namespace {

Mat corrected(const Recovery& rec, const NoiseModel& noise, const Mat& W) {
  Mat out = Mat::Zero(2, 2);
  Mat e01 = Mat::Zero(2, 2);
  e01(0, 1) = 1;
  for (const Mat& L : logical_kraus(rec, noise, W)) out += L * e01 * L.adjoint();
  return out;
}

}  // namespace

TEST(Dicke, NormalizedWithRightWeight) {
  Vec v = dicke_state(6, 2);
  EXPECT_NEAR(v.norm(), 1.0, 1e-14);
  for (long x = 0; x < v.size(); ++x)
    if (std::abs(v(x)) > 0) EXPECT_EQ(std::popcount(static_cast<unsigned long>(x)), 4);
  EXPECT_NEAR(std::abs(dicke_state(5, 5)(31)), 1.0, 1e-15);
  EXPECT_THROW(dicke_state(6, 1), InputError);
  EXPECT_THROW(dicke_state(4, 6), InputError);
}

TEST(ThermoParams, Validation) {
  EXPECT_THROW((ThermoParams{7, 2, 0.5}).validate(), InputError);
  EXPECT_THROW((ThermoParams{8, 2, 1.5}).validate(), InputError);
  EXPECT_THROW((ThermoParams{8, 8, 0.5}).validate(), InputError);
  EXPECT_NO_THROW((ThermoParams{8, 2, 0.5}).validate());
}

TEST(ThermoClosedForms, ReferenceValues) {
  auto r = thermo_closed_forms({64, 2, 0.5});
  EXPECT_NEAR(r.delta_group, 16.0 / 65, 1e-12);
  EXPECT_NEAR(r.delta_point, 66 / std::sqrt(65.0), 1e-12);
  EXPECT_NEAR(r.delta_charge, 66.0 / 65, 1e-12);
  EXPECT_NEAR(r.frak_b, std::sqrt(8704.0 / 65), 1e-12);
  EXPECT_NEAR(r.epsilon_lower, 1.0 / 130, 1e-14);
  EXPECT_NEAR(r.diamond_upper, 5.92e-5, 5e-7);
  EXPECT_GE(r.epsilon_tilde, r.epsilon_lower);
  EXPECT_LE(r.epsilon_tilde, 0.0077);

  auto s = thermo_closed_forms({6, 2, 0.0});
  EXPECT_NEAR(s.epsilon_lower, 1.0 / 6, 1e-14);
  EXPECT_NEAR(s.epsilon_tilde, 0.1691010, 1e-6);
  EXPECT_NEAR(s.chi, 2.0, 1e-14);
  EXPECT_NEAR(s.delta_group, 0.0, 1e-14);

  EXPECT_NEAR(thermo_closed_forms({64, 2, 1.0}).delta_charge, 2.0, 1e-14);
  EXPECT_NEAR(thermo_closed_forms({64, 2, 1.0}).chi, 0.0, 1e-14);
}

TEST(ThermoCode, DualChargeMatchesClosedForm) {
  for (int n : {6, 8, 10})
    for (double q : {0.0, 0.3, 1.0}) {
      U1Code c = thermo_code({n, 2, q});
      EXPECT_LT(maxabs(c.W.adjoint() * c.W - Mat::Identity(2, 2)), 1e-13);
      Mat D = dual_charge(c);
      double k = thermo_closed_forms({n, 2, q}).dual_HS_coeff;
      EXPECT_NEAR(D(0, 0).real(), k, 1e-12);
      EXPECT_NEAR(D(1, 1).real(), -k, 1e-12);
      EXPECT_NEAR(std::abs(D(0, 1)), 0.0, 1e-12);
    }
}

TEST(ThermoRecovery, CorrectedChannelIsDephasing) {
  for (int n : {6, 8, 10, 12})
    for (double q : {0.0, 0.5, 1.0}) {
      ThermoParams p{n, 2, q};
      U1Code c = thermo_code(p);
      NoiseModel noise = NoiseModel::erasure_mixture(n);
      Recovery rec = thermo_optimal_recovery(p);
      EXPECT_LT(rec.tp_residual(), 1e-12);
      Mat out = corrected(rec, noise, c.W);
      double factor = std::sqrt((n + 2.0) * (n + (2 * q - 1) * 2.0)) / (n + 2 * q);
      EXPECT_NEAR(out(0, 1).real(), factor, 1e-10) << n << " " << q;
      EXPECT_NEAR(out(0, 1).imag(), 0.0, 1e-12);
      EXPECT_NEAR(std::abs(out(0, 0)), 0.0, 1e-12);
      auto reg = c.analytic_recovery(noise);
      ASSERT_TRUE(reg.has_value());
      EXPECT_NEAR(c.epsilon_lower(noise), thermo_closed_forms(p).epsilon_lower, 1e-15);
      EXPECT_EQ(c.epsilon_lower(NoiseModel::dephasing_mixture(n, 0.1)), 0.0);
    }
  EXPECT_THROW(thermo_optimal_recovery({4, 2, 0.5}), InputError);
}

TEST(ReedMuller, GeneratorAndShortening) {
  auto G = rm_generator(1, 3);
  ASSERT_EQ(G.size(), 4u);
  for (int j = 0; j < 8; ++j) EXPECT_EQ(G[0][j], 1);
  EXPECT_EQ(rm_generator(2, 4).size(), 11u);
  for (int t : {3, 4}) {
    auto w = rm_shortened_codewords(1, t);
    EXPECT_EQ(static_cast<int>(w.size()), 1 << t);
    for (const auto& c : w) {
      int wt = 0;
      for (int b : c) wt += b;
      EXPECT_TRUE(wt == 0 || wt == (1 << (t - 1)));
    }
  }
  EXPECT_THROW((RmParams{5}).validate(), InputError);
}

TEST(ReedMuller, ChargeMoments) {
  for (int t : {3, 4}) {
    U1Code c = rm_code({t});
    const int n = (1 << t) - 1;
    EXPECT_LT(maxabs(c.W.adjoint() * c.W - Mat::Identity(2, 2)), 1e-13);
    EXPECT_LT(maxabs(dual_charge(c)), 1e-12);
    Mat h2 = c.W.adjoint() * c.physical.apply(c.physical.apply(c.W));
    EXPECT_LT(maxabs(h2 - 0.25 * n * Mat::Identity(2, 2)), 1e-12);
  }
}

TEST(ReedMuller, StabilizersFixCodewords) {
  for (int t : {3, 4}) {
    RmParams p{t};
    U1Code c = rm_code(p);
    auto [xs, zs] = rm_stabilizers(p);
    EXPECT_EQ(static_cast<int>(xs.size()), (1 << t) - 1);
    for (long x : xs)
      for (long i = 0; i < c.W.rows(); ++i) EXPECT_LT(std::abs(c.W(i, 0) - c.W(i ^ x, 0)), 1e-14);
    for (long z : zs)
      for (long i = 0; i < c.W.rows(); ++i)
        for (int k = 0; k < 2; ++k)
          if (std::abs(c.W(i, k)) > 0) EXPECT_EQ(std::popcount(static_cast<unsigned long>(i & z)) % 2, 0);
  }
}

TEST(ReedMuller, ClosedForms) {
  auto r = rm_closed_forms({3});
  EXPECT_NEAR(r.delta_group, std::sqrt(7.0) / 4, 1e-14);
  EXPECT_NEAR(r.delta_point, std::sqrt(8.0), 1e-14);
  EXPECT_NEAR(r.delta_charge, 1.0, 1e-14);
  EXPECT_NEAR(r.frak_b, std::sqrt(14.0), 1e-14);
  double best = 0;
  for (int k = 0; k < 4096; ++k) best = std::max(best, rm_profile({3}, 2 * kPi * k / 4096));
  EXPECT_NEAR(best, r.delta_group, 1e-12);
}

TEST(Repetition, RoundTripIsIdentity) {
  std::mt19937_64 rng(5);
  for (int d : {2, 3, 4}) {
    Mat B = random_unitary(rng, d);
    auto [enc, rec] = repetition_code(d, B);
    EXPECT_EQ(rec.size(), d);
    EXPECT_LT(rec.tp_residual(), 1e-12);
    Channel rt = compose(rec, enc);
    EXPECT_LT(maxabs(choi(rt) - choi(identity_channel(2))), 1e-12);
  }
  EXPECT_THROW(repetition_code(2, Mat::Ones(2, 2)), InputError);
}

TEST(Dicke, SmallExamplesAndOrthogonality) {
  Vec v = dicke_state(2, 0);
  EXPECT_NEAR(v(1).real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v(2).real(), 1 / std::sqrt(2.0), 1e-15);
  for (int a = -6; a <= 6; a += 2)
    for (int b = -6; b <= 6; b += 2) EXPECT_NEAR(std::abs(dicke_state(6, a).dot(dicke_state(6, b))), a == b ? 1.0 : 0.0, 1e-14);
}

TEST(ThermoCode, SmallInstanceChargeViolation) {
  EXPECT_NEAR(delta_charge(thermo_code({6, 2, 0.5})), 8.0 / 7, 1e-12);
  EXPECT_NEAR(thermo_closed_forms({6, 2, 0.5}).delta_charge, 8.0 / 7, 1e-14);
  EXPECT_NEAR(thermo_closed_forms({8, 2, 1.0}).epsilon_tilde, 0.0, 1e-15);
  // chi interpolates from m down to 0 monotonically
  double prev = 3;
  for (double q = 0; q <= 1.0001; q += 0.125) {
    double chi = charge_fluctuation(thermo_code({8, 2, q})).value;
    EXPECT_LT(chi, prev);
    prev = chi;
  }
  EXPECT_THROW(thermo_code({18, 2, 0.5}), InputError);
}

TEST(Repetition, CorrectsBitFlipsAndIsCovariant) {
  auto [enc, rec] = repetition_code(2);
  Channel flip = unitary_channel(kron(pauli_x(), Mat::Identity(2, 2)));
  Channel noisy = mix({identity_channel(4), flip}, {0.7, 0.3});
  EXPECT_LT(maxabs(choi(compose(rec, compose(noisy, enc))) - choi(identity_channel(2))), 1e-12);

  RVec hl(3);
  hl << 0.3, -1.0, 2.0;
  U1Rep L(Mat(hl.cast<cx>().asDiagonal()));
  Mat B = L.eigenvectors();
  Mat ordered(3, 3);
  ordered << B.col(2), B.col(0), B.col(1);  // 0_L on the top eigenvalue, 1_L on the bottom
  auto [e3, r3] = repetition_code(3, ordered);
  EXPECT_LT(r3.tp_residual(), 1e-12);
  RVec hc(2);
  hc << 0.5 * L.range(), -0.5 * L.range();
  U1Rep C = U1Rep::diagonal(hc);
  for (int k = 0; k < 16; ++k) {
    double th = 0.37 * k;
    Mat lhs = e3.kraus()[0] * u1_unitary(C, th);
    Mat rhs = kron(u1_unitary(L, th), Mat::Identity(2, 2)) * e3.kraus()[0];
    cx phase = (rhs.adjoint() * lhs)(0, 0);
    EXPECT_LT(maxabs(lhs - phase * rhs), 1e-12) << th;
  }
}
