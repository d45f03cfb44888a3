#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covqec/codes.hpp"
#include "covqec/qec.hpp"
#include "covqec/spectral.hpp"
#include "test_util.hpp"

using namespace covqec;
using namespace covqec::testing;

namespace {

// output charge of the erasure mixture: sector l keeps the other n-1 qubits
U1Rep erasure_output_charge(int n) {
  const long half = 1L << (n - 1);
  RVec h(n * half);
  for (int l = 0; l < n; ++l)
    for (long r = 0; r < half; ++r) {
      int ones = __builtin_popcountl(static_cast<unsigned long>(r));
      h(l * half + r) = -0.5 * ((n - 1 - ones) - ones);
    }
  return U1Rep::diagonal(h);
}

Mat half_z() {
  Mat Z = Mat::Zero(2, 2);
  Z(0, 0) = 0.5;
  Z(1, 1) = -0.5;
  return Z;
}

}  // namespace

TEST(EpsilonChoi, IdentityNoiseGivesZero) {
  U1Code c = thermo_code({6, 2, 0.5});
  EpsilonChoiResult r = epsilon_choi(c, NoiseModel::identity(64));
  EXPECT_LE(r.value, 1e-6);
  EXPECT_TRUE(r.ok);
}

TEST(EpsilonChoi, ReedMullerIsExact) {
  U1Code c = rm_code({3});
  NoiseModel nm = NoiseModel::erasure_mixture(7);
  EpsilonChoiResult r = epsilon_choi(c, nm);
  EXPECT_LE(r.value, 1e-6);
  KlDeviation kl = kl_deviation(c, nm);
  EXPECT_LE(kl.max_violation, 1e-8);
  EXPECT_LE(kl.residual, 1e-10);
  EpsilonBracket b = epsilon_bracket(c, nm);
  EXPECT_LE(b.upper, 1e-6);
  EpsilonBracket dm = epsilon_diamond_bracket(c, nm, b);
  EXPECT_LE(dm.upper, 1e-6);
  EXPECT_LE(dm.lower, 1e-12);
}

TEST(EpsilonChoi, ThermoSandwich) {
  for (int n : {6, 8, 10, 12})
    for (double q : {0.0, 0.5, 1.0}) {
      ThermoParams p{n, 2, q};
      U1Code c = thermo_code(p);
      NoiseModel nm = NoiseModel::erasure_mixture(n);
      ClosedFormRecord cf = thermo_closed_forms(p);
      EpsilonChoiResult ec = epsilon_choi(c, nm);
      EpsilonBracket b = epsilon_bracket(c, nm);
      const double low = (1 - q) * 2 / (2 * (n + q * 2));
      SCOPED_TRACE(::testing::Message() << "n=" << n << " q=" << q);
      EXPECT_TRUE(ec.ok);
      EXPECT_GE(ec.value, low - 1e-7);
      EXPECT_LE(ec.certified_lower, ec.value + 1e-9);
      EXPECT_LE(ec.value, b.upper + 1e-7);
      EXPECT_LE(b.lower, b.upper + 1e-9);
      EXPECT_LE(b.upper, cf.epsilon_tilde + 1e-6);
      EXPECT_GE(b.lower, low - 1e-7);
    }
}

TEST(EpsilonBracket, ThermoSixCovariantInterval) {
  U1Code c = thermo_code({6, 2, 0.0});
  EpsilonBracket b = epsilon_bracket(c, NoiseModel::erasure_mixture(6));
  const double tilde = std::sqrt(0.5 - std::sqrt(8.0 * 4.0) / 12.0);  // 0.16910198...
  EXPECT_GE(b.lower, 1.0 / 6 - 1e-7);
  EXPECT_LE(b.upper, tilde + 1e-7);
  EXPECT_EQ(b.upper_cert, Certification::exact);
}

TEST(EpsilonBracket, ThermoExactEnd) {
  for (int n : {6, 8}) {
    U1Code c = thermo_code({n, 2, 1.0});
    NoiseModel nm = NoiseModel::erasure_mixture(n);
    EXPECT_LE(epsilon_choi(c, nm).value, 1e-6);
    EXPECT_LE(kl_deviation(c, nm).max_violation, 1e-8);
    EpsilonBracket b = epsilon_bracket(c, nm);
    EXPECT_LE(b.upper, 1e-6);
  }
}

TEST(EpsilonDiamond, ThermoMatchesClosedForm) {
  for (int n : {6, 8, 10})
    for (double q : {0.0, 0.5}) {
      ThermoParams p{n, 2, q};
      U1Code c = thermo_code(p);
      NoiseModel nm = NoiseModel::erasure_mixture(n);
      EpsilonBracket b = epsilon_bracket(c, nm);
      EpsilonBracket dm = epsilon_diamond_bracket(c, nm, b);
      // closed form diamond value of the analytic recovery
      const double cf = 0.5 - std::sqrt((n + 2.0) * (n + (2 * q - 1) * 2)) / (2 * (n + 2 * q));
      EXPECT_NEAR(dm.upper, cf, 1e-6) << n << " " << q;
      EXPECT_NEAR(dm.lower, b.lower * b.lower, 1e-12);
      EXPECT_LE(dm.lower, dm.upper + 1e-9);
    }
}

TEST(KlDeviation, IdentityNoiseHasNoViolation) {
  U1Code c = thermo_code({6, 2, 0.5});
  KlDeviation kl = kl_deviation(c, NoiseModel::identity(64));
  EXPECT_EQ(kl.max_violation, 0.0);
}

TEST(KlDeviation, ThermoCovariantEndRecoversChi) {
  const int n = 8;
  U1Code c = thermo_code({n, 2, 0.0});
  NoiseModel nm = NoiseModel::erasure_mixture(n);
  KlDeviation kl = kl_deviation(c, nm);
  // H_S = sum_i h_i K_i^dag K_i with h = -n z_b / 2 on Kraus index 2 l + b
  Mat recombined = Mat::Zero(2, 2);
  for (int i = 0; i < 2 * n; ++i) {
    const double h = (i % 2 == 0 ? -0.5 : 0.5) * n;
    const Mat A = nm.kraus()[i].apply(c.W);
    recombined += h * (A.adjoint() * A - kl.lambda(i, i) * Mat::Identity(2, 2));
  }
  ChiResult chi = charge_fluctuation(c);
  Vec z0 = chi.zero_L, z1 = chi.one_L;
  const double diff = (z0.adjoint() * recombined * z0).real()(0) - (z1.adjoint() * recombined * z1).real()(0);
  EXPECT_NEAR(diff, 2.0, 1e-9);
  EXPECT_NEAR(chi.value, 2.0, 1e-9);
  EXPECT_GT(kl.max_violation, 1e-3);
}

TEST(KlDeviation, RejectsNonIsometricEncoder) {
  std::mt19937_64 rng(3);
  Channel enc = random_channel(rng, 2, 4, 2);
  U1Code c = make_code("mixed", enc, U1Rep(half_z()), U1Rep::diagonal(RVec::LinSpaced(4, -1, 1)));
  EXPECT_THROW(kl_deviation(c, NoiseModel::identity(4)), InputError);
}

TEST(TransposeRecovery, IsTracePreservingAndExactOnRm) {
  U1Code c = rm_code({3});
  NoiseModel nm = NoiseModel::erasure_mixture(7);
  Recovery r = transpose_recovery(c, nm);
  EXPECT_LE(r.tp_residual(), 1e-9);
  EXPECT_LE(std::sqrt(std::max(0.0, 1 - choi_fidelity_sq(c, nm, r))), 1e-6);
}

TEST(Twirl, CovariantRecoveryUnchanged) {
  U1Rep rep(half_z());
  Channel id = identity_channel(2);
  TwirlResult t = twirl_recovery(id, rep, rep, 2 * kPi, 16);
  EXPECT_LE(maxabs(choi(t.recovery) - choi(id)), 1e-8);
  EXPECT_LE(t.covariance_residual, 1e-8);
}

TEST(Twirl, ConvergesAndRespectsGateError) {
  const int n = 6;
  U1Code c = thermo_code({n, 2, 0.5});
  NoiseModel nm = NoiseModel::erasure_mixture(n);
  EpsilonBracket b = epsilon_bracket(c, nm);
  Channel R = recovery_channel(b.recovery_witness, nm);
  U1Rep out = erasure_output_charge(n);
  TwirlResult t64 = twirl_recovery(R, c.logical, out, c.tau, 64);
  TwirlResult t128 = twirl_recovery(R, c.logical, out, c.tau, 128);
  EXPECT_LE(maxabs(choi(t64.recovery) - choi(t128.recovery)), 1e-4);
  EXPECT_LE(t128.covariance_residual, 1e-6);
  // the covariant recovery does no worse than the gate error of the recovery it came from
  Channel corrected = compose(t128.recovery, compose(nm.dense(), c.encoder));
  double p_cov = worst_case_purified_distance(corrected, identity_channel(2)).value;
  ScanResult gamma = gate_error_at(c, nm, b.recovery_witness);
  EXPECT_LE(p_cov, gamma.value + 1e-4);
}

TEST(TwoLevelProtocol, ExactCovariantIdentityCase) {
  Mat I = Mat::Identity(2, 2);
  U1Code c = make_code("trivial", Channel({I}), U1Rep(half_z()), U1Rep(half_z()));
  NoiseModel nm = NoiseModel::identity(2);
  EpsilonBracket b = epsilon_bracket(c, nm);
  TwoLevelProtocol p = two_level_protocol(c, nm, b.recovery_witness, {0.0, 0.3});
  EXPECT_NEAR(std::abs(p.xi0), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(p.xi[1] - std::exp(cx(0, -0.3))), 0.0, 1e-8);
  EXPECT_NEAR(p.params[1].p, 0.0, 1e-8);
}

TEST(TwoLevelProtocol, ThermoInequalities) {
  for (int n : {6, 8, 10})
    for (double q : {0.0, 0.5, 1.0}) {
      ThermoParams tp{n, 2, q};
      U1Code c = thermo_code(tp);
      NoiseModel nm = NoiseModel::erasure_mixture(n);
      ClosedFormRecord cf = thermo_closed_forms(tp);
      EpsilonBracket b = epsilon_bracket(c, nm);
      TwoLevelProtocol p = two_level_protocol(c, nm, b.recovery_witness);
      const double e = b.upper;
      SCOPED_TRACE(::testing::Message() << "n=" << n << " q=" << q);
      EXPECT_GE(std::abs(p.xi0), 1 - 2 * e * e - 1e-7);
      EXPECT_GE(std::abs(p.dxi0), std::abs(cf.chi) - 2 * e * cf.frak_b - 1e-7);
      EXPECT_LE(p.dxi_error, 1e-7);
      // the protocol QFI cannot beat the global noise quantity, itself below n^2
      EXPECT_LE(p.qfi_at_zero, static_cast<double>(n * n) + 1e-5);
    }
}

TEST(GateError, BracketIsOrdered) {
  for (double q : {0.0, 0.5}) {
    ThermoParams tp{8, 2, q};
    U1Code c = thermo_code(tp);
    NoiseModel nm = NoiseModel::erasure_mixture(8);
    ClosedFormRecord cf = thermo_closed_forms(tp);
    EpsilonBracket b = epsilon_bracket(c, nm);
    NoiseStructureBounds ns = noise_structure_bounds(nm);
    GateErrorBracket g = gate_error_bracket(c, nm, b, cf.delta_group, ns.frak_f);
    EXPECT_TRUE(g.hks);
    EXPECT_GT(g.lower, 0.0);
    EXPECT_LE(g.lower, g.upper + 1e-9);
    EXPECT_LE(g.upper, b.upper + cf.delta_group + 1e-9);
  }
}

TEST(GateError, CovariantEndUpperIsEpsilon) {
  // q = 0 is exactly covariant, so the gate error equals the worst-case inaccuracy
  ThermoParams tp{8, 2, 0.0};
  U1Code c = thermo_code(tp);
  NoiseModel nm = NoiseModel::erasure_mixture(8);
  EpsilonBracket b = epsilon_bracket(c, nm);
  ScanResult s = gate_error_at(c, nm, b.recovery_witness);
  EXPECT_NEAR(s.value, b.upper, 1e-7);
}
