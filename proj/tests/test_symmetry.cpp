#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covqec/codes.hpp"
#include "covqec/spectral.hpp"
#include "test_util.hpp"

using namespace covqec;
using namespace covqec::testing;

namespace {

U1Code random_code(std::mt19937_64& rng, int dL, int dS) {
  std::uniform_int_distribution<int> charge(-2, 2);
  RVec hl(dL), hs(dS);
  do {
    for (int i = 0; i < dL; ++i) hl(i) = charge(rng);
  } while (hl.maxCoeff() == hl.minCoeff());
  do {
    for (int i = 0; i < dS; ++i) hs(i) = 0.5 * charge(rng);
  } while (hs.maxCoeff() == hs.minCoeff());
  return make_code("random", Channel({random_isometry(rng, dS, dL)}), U1Rep::diagonal(hl), U1Rep::diagonal(hs));
}

}  // namespace

TEST(MakeCode, RejectsBadInput) {
  RVec hl(2), hs(4);
  hl << 0.5, -0.5;
  hs << 0, 0, 0, 0;
  Mat W = Mat::Identity(4, 2);
  EXPECT_THROW(make_code("x", Channel({W}), U1Rep::diagonal(hl), U1Rep::diagonal(hs)), InputError);
  hs << 0, 1, 2, 3;
  EXPECT_THROW(make_code("x", Channel({W}), U1Rep::diagonal(hs), U1Rep::diagonal(hs)), InputError);
  hs << 0, 1, std::sqrt(2.0), 3;
  EXPECT_THROW(make_code("x", Channel({W}), U1Rep::diagonal(hl), U1Rep::diagonal(hs)), InputError);
}

TEST(ThetaScan, FindsSharpMaximum) {
  auto r = theta_scan([](double t) { return -std::pow(t - 1.2345678, 2); }, 2 * kPi);
  EXPECT_NEAR(r.theta, 1.2345678, 1e-6);
  EXPECT_NEAR(r.value, 0.0, 1e-11);
}

TEST(Symmetry, TrivialEncodingIsCovariant) {
  RVec h(3);
  h << -1, 0, 1;
  U1Code c = make_code("id", identity_channel(3), U1Rep::diagonal(h), U1Rep::diagonal(h));
  // sqrt(1 - f^2) turns rounding in f into ~1e-8
  EXPECT_NEAR(delta_group(c).value, 0.0, NUM_TOL);
  EXPECT_NEAR(delta_point(c), 0.0, 1e-6);
  EXPECT_NEAR(delta_charge(c), 0.0, 1e-12);
  EXPECT_NEAR(delta_group_choi(c).value, 0.0, NUM_TOL);
}

TEST(Symmetry, ReedMullerT3) {
  U1Code c = rm_code({3});
  EXPECT_NEAR(c.tau, 2 * kPi, 1e-9);
  auto g = delta_group(c);
  EXPECT_NEAR(g.value, std::sqrt(7.0) / 4, 1e-6);
  EXPECT_EQ(g.certified, Certification::exact);
  EXPECT_NEAR(delta_point(c), std::sqrt(8.0), 1e-6);
  EXPECT_NEAR(delta_charge(c), 1.0, 1e-10);
  EXPECT_NEAR(charge_fluctuation(c).value, 0.0, 1e-10);
  auto b = frak_b(c);
  EXPECT_NEAR(b.value, std::sqrt(14.0), 1e-6);
  EXPECT_LE(b.value, b.cap + 1e-7);
}

TEST(Symmetry, ThermoMatchesClosedForms) {
  for (int n : {8, 12, 16})
    for (double q : {0.0, 0.25, 0.5, 1.0}) {
      ThermoParams p{n, 2, q};
      U1Code c = thermo_code(p);
      auto cf = thermo_closed_forms(p);
      EXPECT_NEAR(delta_group(c).value, cf.delta_group, 1e-6) << n << " " << q;
      EXPECT_NEAR(delta_point(c), cf.delta_point, 1e-6) << n << " " << q;
      EXPECT_NEAR(delta_charge(c), cf.delta_charge, 1e-8);
      EXPECT_NEAR(charge_fluctuation(c).value, cf.chi, 1e-8);
      EXPECT_NEAR(frak_b(c).value, cf.frak_b, 1e-6) << n << " " << q;
      EXPECT_GE(delta_point(c), delta_charge(c) - 1e-7);
    }
}

TEST(Symmetry, ChiUsesExtremeEigenvectors) {
  U1Code c = thermo_code({8, 2, 0.0});
  auto chi = charge_fluctuation(c);
  EXPECT_NEAR(chi.value, 2.0, 1e-10);
  EXPECT_NEAR(std::abs(chi.zero_L(0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(chi.one_L(1)), 1.0, 1e-12);
}

TEST(Symmetry, DiamondEqualsWorstCaseOnIsometry) {
  U1Code c = thermo_code({16, 2, 0.5});
  auto g = delta_group(c);
  auto d = delta_group_diamond(c);
  EXPECT_EQ(d.failed_points, 0);
  EXPECT_NEAR(d.value, g.value, 1e-6);
  EXPECT_GE(d.value, g.value * g.value / 2 - 1e-7);
}

TEST(Symmetry, RandomIsometricCodes) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    U1Code c = random_code(rng, 2, 4);
    double g = delta_group(c).value;
    EXPECT_LE(delta_group_choi(c).value, g + 1e-7);
    EXPECT_GE(delta_point(c), delta_charge(c) - 1e-7);
    EXPECT_LE(frak_b(c).value, std::sqrt(2.0) * c.physical.range() + 1e-7);
  }
  for (int k = 0; k < 30; ++k) {
    U1Code c = random_code(rng, 3, 5);
    EXPECT_GE(delta_point(c), delta_charge(c) - 1e-7);
    auto b = frak_b(c);
    EXPECT_LE(b.value, b.cap + 1e-7);
  }
}

TEST(Symmetry, UnitScaling) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 5; ++k) {
    U1Code c = random_code(rng, 2, 4);
    U1Code s = make_code("scaled", c.encoder, c.logical.scaled(3.0), c.physical.scaled(3.0));
    EXPECT_NEAR(delta_point(s), 3 * delta_point(c), 1e-6 * (1 + delta_point(s)));
    EXPECT_NEAR(delta_charge(s), 3 * delta_charge(c), 1e-8 * (1 + delta_charge(s)));
    EXPECT_NEAR(delta_group(s).value, delta_group(c).value, 1e-7);
    U1Code sh = make_code("shifted", c.encoder, c.logical.shifted(0.5), c.physical.shifted(-1.5));
    EXPECT_NEAR(delta_charge(sh), delta_charge(c), 1e-10);
  }
}

TEST(Symmetry, NonIsometricPointAgreesWithIsometricPath) {
  // same isometry written with two Kraus operators
  std::mt19937_64 rng(8);
  U1Code c = random_code(rng, 2, 4);
  Mat W = c.W;
  U1Code split = make_code("split", Channel({W / std::sqrt(2.0), W / std::sqrt(2.0)}), c.logical, c.physical);
  EXPECT_FALSE(split.isometric());
  EXPECT_NEAR(delta_point(split), delta_point(c), 1e-5);
  EXPECT_NEAR(delta_charge(split), delta_charge(c), 1e-10);
}

TEST(DeltaPointStar, MatchesDenseFiniteDifference) {
  for (double q : {1.0, 0.5}) {
    ThermoParams p{6, 2, q};
    U1Code c = thermo_code(p);
    NoiseModel noise = NoiseModel::erasure_mixture(6);
    Recovery rec = thermo_optimal_recovery(p);
    Channel rn = compose(recovery_channel(rec, noise), noise.dense());
    auto family = [&](double th) {
      Mat V = u1_unitary(c.physical, th) * c.W * u1_unitary(c.logical, th).adjoint();
      std::vector<Mat> K;
      for (const Mat& k : rn.kraus()) K.push_back(k * V);
      return K;
    };
    const double h = 1e-5;
    auto kp = family(h), km = family(-h), k0 = family(0);
    std::vector<Mat> dk;
    for (size_t i = 0; i < k0.size(); ++i) dk.push_back((kp[i] - km[i]) / (2 * h));
    double oracle = std::sqrt(channel_qfi_at_zero(k0, dk).value);
    double star = delta_point_star(c, noise, rec);
    EXPECT_NEAR(star, oracle, 1e-6) << q;
    EXPECT_LE(star, delta_point(c) + 1e-6);
  }
}

TEST(DeltaPointStar, ThermoExactEndBelowDeltaP) {
  // At this particular recovery the leaked population off the recovery blocks still carries
  // Fisher information, so the value sits between delta_C and delta_P.
  ThermoParams p{16, 2, 1.0};
  U1Code c = thermo_code(p);
  NoiseModel noise = NoiseModel::erasure_mixture(16);
  double star = delta_point_star(c, noise, thermo_optimal_recovery(p));
  EXPECT_LE(star, delta_point(c) + 1e-6);
  EXPECT_GE(star, delta_charge(c) - 1e-6);
}

TEST(DeltaPointStar, CovariantExactIsZero) {
  RVec h(2);
  h << 0.5, -0.5;
  U1Code c = make_code("id", identity_channel(2), U1Rep::diagonal(h), U1Rep::diagonal(h));
  NoiseModel noise = NoiseModel::identity(2);
  Recovery rec;
  rec.dim_logical = 2;
  rec.fallback = Vec::Unit(2, 0);
  rec.blocks.push_back({0, Mat::Identity(2, 2), {Mat::Identity(2, 2)}});
  EXPECT_NEAR(delta_point_star(c, noise, rec), 0.0, 1e-6);
}
