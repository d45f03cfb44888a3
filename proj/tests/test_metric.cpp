#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covqec/metric.hpp"
#include "covqec/spectral.hpp"
#include "test_util.hpp"

using namespace covqec;
using namespace covqec::testing;

namespace {

Mat proj(const Vec& v) { return v * v.adjoint(); }

Vec basis(int d, int i) {
  Vec v = Vec::Zero(d);
  v(i) = 1;
  return v;
}

Vec plus() {
  Vec v(2);
  v << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  return v;
}

double lemma_purified(double p, double phi) { return std::sqrt(0.5 * (1 - (1 - 2 * p) * std::cos(phi))); }
double lemma_diamond(double p, double phi) {
  double a = 1 - 2 * p;
  return 0.5 * std::sqrt(1 - 2 * a * std::cos(phi) + a * a);
}

}  // namespace

TEST(Metric, StateFidelityExamples) {
  EXPECT_NEAR(state_fidelity(proj(basis(2, 0)), proj(basis(2, 1))), 0.0, 1e-12);
  EXPECT_NEAR(purified_distance_states(proj(basis(2, 0)), proj(basis(2, 1))), 1.0, 1e-12);
  EXPECT_NEAR(state_fidelity(proj(basis(2, 0)), proj(plus())), 1 / std::sqrt(2.0), 1e-12);
}

TEST(Metric, StateFidelityRejectsNonStates) {
  EXPECT_THROW(state_fidelity(Mat::Identity(2, 2), proj(basis(2, 0))), InputError);
  EXPECT_THROW(state_fidelity(pauli_z(), proj(basis(2, 0))), InputError);
}

TEST(Metric, FidelityPropertiesAndFuchsVanDeGraaf) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + trial % 4;
    Mat r = random_density(rng, d, 1 + trial % d), s = random_density(rng, d);
    double f = state_fidelity(r, s);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    EXPECT_NEAR(f, state_fidelity(s, r), 1e-10);
    EXPECT_NEAR(state_fidelity(r, r), 1.0, 1e-7);
    EXPECT_LE(1 - f, trace_distance(r, s) + 1e-10);
  }
}

TEST(Metric, ChoiFidelity) {
  EXPECT_NEAR(choi_fidelity(dephasing(0.3), dephasing(0.3)), 1.0, 1e-7);
  EXPECT_NEAR(choi_fidelity(identity_channel(2), dephasing(0.5)), std::sqrt(0.5), 1e-12);
  // Choi state of dephasing is (1-p)|Phi><Phi| + p|Phi_-><Phi_-|, overlap with |Phi> is 1-p
  for (double p : {0.05, 0.2, 0.4}) EXPECT_NEAR(choi_fidelity(identity_channel(2), dephasing(p)), std::sqrt(1 - p), 1e-12);
}

TEST(Metric, WorstCaseExamples) {
  DistanceResult same = worst_case_purified_distance(identity_channel(2), identity_channel(2));
  EXPECT_NEAR(same.value, 0.0, 1e-7);
  DistanceResult z = worst_case_purified_distance(identity_channel(2), unitary_channel(pauli_z()));
  EXPECT_EQ(z.certified, Certification::exact);
  EXPECT_NEAR(z.value, 1.0, 1e-12);
}

TEST(Metric, RotatedDephasingClosedForms) {
  for (double p : {0.0, 0.1, 0.3, 0.5, 0.8})
    for (double phi : {0.0, 0.4, 1.3, kPi, 4.0}) {
      Channel ch = rotated_dephasing(p, phi);
      DistanceResult P = worst_case_purified_distance(ch, identity_channel(2));
      EXPECT_EQ(P.certified, Certification::exact);
      // value is a square root; an absolute SDP error e gives about sqrt(e) near zero
      EXPECT_NEAR(P.value * P.value, lemma_purified(p, phi) * lemma_purified(p, phi), 1e-7) << p << " " << phi;
      DistanceResult D = diamond_distance(ch, identity_channel(2));
      EXPECT_EQ(D.certified, Certification::exact);
      EXPECT_NEAR(D.value, lemma_diamond(p, phi), 1e-7) << p << " " << phi;
      EXPECT_NEAR(D.value, D.dual_value, 1e-7);
    }
  EXPECT_NEAR(diamond_distance(rotated_dephasing(0, kPi), identity_channel(2)).value, 1.0, 1e-7);
}

TEST(Metric, NumericalRangeDistance) {
  Mat M = Mat::Identity(2, 2);
  EXPECT_NEAR(numerical_range_distance(M), 1.0, 1e-12);
  EXPECT_NEAR(numerical_range_distance(pauli_z()), 0.0, 1e-12);
  // normal matrix with eigenvalues 1 and i: distance to the segment is 1/sqrt 2
  Mat N = Mat::Zero(2, 2);
  N(0, 0) = 1;
  N(1, 1) = cx(0, 1);
  EXPECT_NEAR(numerical_range_distance(N), 1 / std::sqrt(2.0), 1e-10);
}

TEST(Metric, IsometricComparatorMatchesExactPath) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    Mat U = random_unitary(rng, 2), W = random_unitary(rng, 2);
    double exact = worst_case_purified_distance(unitary_channel(U), unitary_channel(W)).value;
    DistanceResult sdp = isometric_comparator_distance({U}, W);
    EXPECT_EQ(sdp.certified, Certification::exact);
    EXPECT_NEAR(sdp.value * sdp.value, exact * exact, 1e-7);
  }
}

TEST(Metric, DiamondDominatesPurifiedSquared) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Channel a = random_channel(rng, 2, 2, 2);
    Channel id = identity_channel(2);
    DistanceResult D = diamond_distance(a, id);
    DistanceResult P = worst_case_purified_distance(a, id);
    ASSERT_TRUE(D.ok);
    EXPECT_GE(D.value, P.value * P.value - 1e-7);
    EXPECT_GE(D.value, 1 - std::sqrt(1 - P.value * P.value) - 1e-7);
  }
}

TEST(Metric, DiamondOfIdenticalChannelsIsZero) {
  std::mt19937_64 rng(24);
  Channel a = random_channel(rng, 2, 3, 2);
  EXPECT_NEAR(diamond_distance(a, a).value, 0.0, 1e-7);
}

TEST(Metric, MonotonicityUnderPostProcessing) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 5; ++trial) {
    Mat U = random_unitary(rng, 2);
    Channel a = unitary_channel(U), id = identity_channel(2);
    Channel R = random_channel(rng, 2, 2, 2);
    double before = worst_case_purified_distance(a, id).value;
    double after = worst_case_purified_distance(compose(R, a), R, 7).value;
    // the post-processed pair is generic, so the value is a lower estimate; monotonicity still bounds it
    EXPECT_LE(after, before + 1e-7);
  }
}

TEST(Metric, TriangleInequality) {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 5; ++trial) {
    Channel a = unitary_channel(random_unitary(rng, 2)), b = unitary_channel(random_unitary(rng, 2)),
            c = unitary_channel(random_unitary(rng, 2));
    double ab = worst_case_purified_distance(a, b).value, bc = worst_case_purified_distance(b, c).value,
           ac = worst_case_purified_distance(a, c).value;
    EXPECT_LE(ac, ab + bc + 1e-7);
  }
}

TEST(Metric, PureStateQfiExamples) {
  Mat hz = pauli_z() / 2.0;
  Vec z0 = basis(2, 0);
  EXPECT_NEAR(pure_state_qfi(z0, cx(0, -1) * hz * z0), 0.0, 1e-14);
  Vec p = plus();
  EXPECT_NEAR(pure_state_qfi(p, cx(0, -1) * hz * p), 1.0, 1e-14);
}

TEST(Metric, PureStateQfiGaugeAndFiniteDifference) {
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 10; ++trial) {
    Mat H = random_hermitian(rng, 3);
    Vec psi = random_isometry(rng, 3, 1).col(0);
    Vec dpsi = cx(0, -1) * H * psi;
    double F = pure_state_qfi(psi, dpsi);
    EXPECT_NEAR(pure_state_qfi(psi, dpsi + cx(0, 0.7) * psi), F, 1e-10);
    const double d = 1e-4;
    Spectrum s = eigh(H);
    Vec phase = (s.values.cast<cx>() * cx(0, -d)).array().exp();
    Vec moved = s.vectors * phase.asDiagonal() * s.vectors.adjoint() * psi;
    double fd = 8 * (1 - std::abs(psi.dot(moved))) / (d * d);
    EXPECT_NEAR(fd, F, 1e-4 * std::max(1.0, F));
  }
}

TEST(Metric, ChannelQfiOfUnitaryFamily) {
  std::mt19937_64 rng(28);
  Mat H = random_hermitian(rng, 3);
  RVec ev = eigvalsh(H);
  double spread = ev(2) - ev(0);
  QfiResult r = channel_qfi_at_zero({Mat::Identity(3, 3)}, {cx(0, -1) * H});
  EXPECT_TRUE(r.certified);
  // worst-case variance over inputs is (range/2)^2
  EXPECT_NEAR(r.value, spread * spread, 1e-6);
}

TEST(Metric, ChannelQfiOfCovariantIsometryIsZero) {
  // W maps a qubit into two qubits with H_S W = W H_L, H_S = (Z1+Z2)/2, H_L = Z
  Mat W = Mat::Zero(4, 2);
  W(0, 0) = 1;
  W(3, 1) = 1;
  Mat HS = (kron(pauli_z(), Mat::Identity(2, 2)) + kron(Mat::Identity(2, 2), pauli_z())) / 2.0;
  Mat HL = pauli_z();
  Mat dK = cx(0, -1) * (HS * W - W * HL);
  QfiResult r = channel_qfi_at_zero({W}, {dK});
  EXPECT_NEAR(r.value, 0.0, 1e-7);
}

TEST(Metric, ChannelQfiOfPreparationEqualsStateQfi) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    Mat H = random_hermitian(rng, 3);
    Vec psi = random_isometry(rng, 3, 1).col(0);
    Mat K = psi;  // 1 -> 3 preparation
    Mat dK = cx(0, -1) * H * psi;
    QfiResult r = channel_qfi_at_zero({K}, {dK});
    EXPECT_NEAR(r.value, pure_state_qfi(psi, dK.col(0)), 1e-6);
  }
}

TEST(Metric, ChannelQfiGaugeInvariance) {
  // a dephasing family written with two different Kraus gauges gives the same value
  std::mt19937_64 rng(30);
  double p = 0.2;
  std::vector<Mat> K = {std::sqrt(1 - p) * Mat::Identity(2, 2), std::sqrt(p) * pauli_z()};
  std::vector<Mat> dK;
  for (auto& k : K) dK.push_back(cx(0, -1) * (pauli_x() * k - k * pauli_x()) / 2.0);
  double v1 = channel_qfi_at_zero(K, dK).value;
  Mat U = random_unitary(rng, 2);
  std::vector<Mat> K2(2), dK2(2);
  for (int i = 0; i < 2; ++i) {
    K2[i] = U(i, 0) * K[0] + U(i, 1) * K[1];
    dK2[i] = U(i, 0) * dK[0] + U(i, 1) * dK[1];
  }
  EXPECT_NEAR(channel_qfi_at_zero(K2, dK2).value, v1, 1e-6);
}
