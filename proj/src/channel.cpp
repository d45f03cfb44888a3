#include "covqec/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "covqec/spectral.hpp"

namespace covqec {

KrausMap::KrausMap(std::vector<Mat> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw InputError("Kraus list is empty");
  const auto r = kraus_.front().rows(), c = kraus_.front().cols();
  if (r == 0 || c == 0) throw InputError("empty Kraus operator");
  for (const auto& K : kraus_)
    if (K.rows() != r || K.cols() != c) throw InputError("inconsistent Kraus dimensions");
}

Mat KrausMap::apply(const Mat& rho) const {
  if (rho.rows() != dim_in() || rho.cols() != dim_in()) throw InputError("apply: input dimension mismatch");
  Mat out = Mat::Zero(dim_out(), dim_out());
  for (const auto& K : kraus_) out += K * rho * K.adjoint();
  return out;
}

Mat KrausMap::kraus_gram() const {
  Mat g = Mat::Zero(dim_in(), dim_in());
  for (const auto& K : kraus_) g += K.adjoint() * K;
  return g;
}

Channel::Channel(std::vector<Mat> kraus) : KrausMap(std::move(kraus)) {
  tp_residual_ = max_abs(kraus_gram() - Mat::Identity(dim_in(), dim_in()));
  if (tp_residual_ > STRUCT_TOL) {
    std::ostringstream os;
    os << "channel is not trace preserving (residual " << tp_residual_ << ")";
    throw InputError(os.str(), tp_residual_);
  }
}

Channel make_channel(std::vector<Mat> kraus) { return Channel(std::move(kraus)); }

Mat choi(const KrausMap& ch) {
  const int di = ch.dim_in(), d_o = ch.dim_out();
  // column k is vec K_k with out index major: v[(o, i)] = K(o, i)
  Mat V(static_cast<Eigen::Index>(d_o) * di, ch.size());
  for (int k = 0; k < ch.size(); ++k) {
    const Mat& K = ch.kraus()[k];
    for (int o = 0; o < d_o; ++o)
      for (int i = 0; i < di; ++i) V(o * di + i, k) = K(o, i);
  }
  Mat J = V * V.adjoint();
  return J;
}

KrausMap dual_channel(const KrausMap& ch) {
  std::vector<Mat> ks;
  for (const auto& K : ch.kraus()) ks.push_back(K.adjoint());
  return KrausMap(std::move(ks));
}

Channel complementary_channel(const Channel& ch) {
  const int r = ch.size(), d_o = ch.dim_out(), di = ch.dim_in();
  std::vector<Mat> ks;
  for (int a = 0; a < d_o; ++a) {
    Mat F(r, di);
    for (int i = 0; i < r; ++i) F.row(i) = ch.kraus()[i].row(a);
    ks.push_back(F);
  }
  return Channel(std::move(ks));
}

Channel compose(const Channel& outer, const Channel& inner) {
  if (outer.dim_in() != inner.dim_out()) throw InputError("compose: dimension mismatch");
  std::vector<Mat> ks;
  for (const auto& A : outer.kraus())
    for (const auto& B : inner.kraus()) ks.push_back(A * B);
  return Channel(std::move(ks));
}

Channel tensor(const Channel& a, const Channel& b) {
  std::vector<Mat> ks;
  for (const auto& A : a.kraus())
    for (const auto& B : b.kraus()) ks.push_back(kron(A, B));
  return Channel(std::move(ks));
}

Channel mix(const std::vector<Channel>& chs, const std::vector<double>& probs) {
  if (chs.empty() || chs.size() != probs.size()) throw InputError("mix: need one probability per channel");
  double total = 0;
  for (double p : probs) {
    if (p < 0) throw InputError("mix: negative probability", p);
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("mix: probabilities do not sum to one", total - 1.0);
  std::vector<Mat> ks;
  for (size_t c = 0; c < chs.size(); ++c) {
    if (chs[c].dim_in() != chs[0].dim_in() || chs[c].dim_out() != chs[0].dim_out())
      throw InputError("mix: dimension mismatch");
    if (probs[c] == 0) continue;
    for (const auto& K : chs[c].kraus()) ks.push_back(std::sqrt(probs[c]) * K);
  }
  return Channel(std::move(ks));
}

Channel conjugate_by_unitary(const Channel& ch, const Mat& U_out, const Mat& U_in) {
  if (U_out.rows() != ch.dim_out() || U_in.cols() != ch.dim_in()) throw InputError("conjugate: dimension mismatch");
  std::vector<Mat> ks;
  for (const auto& K : ch.kraus()) ks.push_back(U_out * K * U_in.adjoint());
  return Channel(std::move(ks));
}

Channel identity_channel(int d) { return Channel({Mat::Identity(d, d)}); }

Channel unitary_channel(const Mat& U) {
  Operator(U, kUnitary);
  return Channel({U});
}

Channel isometry_channel(const Mat& V) {
  Operator(V, kIsometry);
  return Channel({V});
}

Channel dephasing(double p) {
  if (p < 0 || p > 1) throw InputError("dephasing: p outside [0,1]", p);
  return Channel({std::sqrt(1 - p) * Mat::Identity(2, 2), std::sqrt(p) * pauli_z()});
}

Channel rotated_dephasing(double p, double phi) {
  if (p < 0 || p > 1) throw InputError("rotated_dephasing: p outside [0,1]", p);
  Mat R = Mat::Zero(2, 2);
  R(0, 0) = std::exp(cx(0, -phi / 2));
  R(1, 1) = std::exp(cx(0, phi / 2));
  return Channel({std::sqrt(1 - p) * R, std::sqrt(p) * pauli_z() * R});
}

Channel erasure(int d) {
  std::vector<Mat> ks;
  for (int i = 0; i < d; ++i) {
    Mat K = Mat::Zero(d + 1, d);
    K(d, i) = 1.0;
    ks.push_back(K);
  }
  return Channel(std::move(ks));
}

Channel erasure_mixture_dense(int n, int d) {
  if (n < 1) throw InputError("erasure_mixture_dense: n must be positive");
  Mat embed = Mat::Zero(d + 1, d);
  for (int i = 0; i < d; ++i) embed(i, i) = 1.0;
  std::vector<Mat> ks;
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < d; ++i) {
      std::vector<Mat> f(n, embed);
      f[l] = Mat::Zero(d + 1, d);
      f[l](d, i) = 1.0;
      ks.push_back(kron_all(f) / std::sqrt(static_cast<double>(n)));
    }
  return Channel(std::move(ks));
}

Channel amplitude_damping(double g) {
  Mat K0 = Mat::Zero(2, 2), K1 = Mat::Zero(2, 2);
  K0(0, 0) = 1;
  K0(1, 1) = std::sqrt(1 - g);
  K1(0, 1) = std::sqrt(g);
  return Channel({K0, K1});
}

DephasingParams extract_dephasing(const KrausMap& ch) {
  if (ch.dim_in() != 2 || ch.dim_out() != 2) throw InputError("extract_dephasing: qubit channel required");
  Mat e00 = Mat::Zero(2, 2), e11 = Mat::Zero(2, 2), e01 = Mat::Zero(2, 2);
  e00(0, 0) = 1;
  e11(1, 1) = 1;
  e01(0, 1) = 1;
  Mat o01 = ch.apply(e01);
  DephasingParams out;
  out.xi = o01(0, 1);
  double res = std::max(max_abs(ch.apply(e00) - e00), max_abs(ch.apply(e11) - e11));
  res = std::max({res, std::abs(o01(0, 0)), std::abs(o01(1, 0)), std::abs(o01(1, 1))});
  out.residual = res;
  if (res > FIT_TOL) {
    std::ostringstream os;
    os << "channel is not a rotated dephasing channel (residual " << res << ")";
    throw InputError(os.str(), res);
  }
  double a = std::abs(out.xi);
  out.p = std::clamp((1.0 - a) / 2.0, 0.0, 1.0);
  out.phi = a > 0 ? -std::arg(out.xi) : 0.0;
  if (out.phi < 0) out.phi += 2 * kPi;
  if (out.phi >= 2 * kPi) out.phi -= 2 * kPi;
  return out;
}

// ---------------------------------------------------------------- U(1)

namespace {

struct Rational {
  long long num, den;
};

bool reconstruct(double x, Rational& r) {
  const long long max_den = 1000000;
  double sign = x < 0 ? -1.0 : 1.0;
  double y = std::abs(x);
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double frac = y;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(frac);
    long long ai = static_cast<long long>(a);
    long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(y - static_cast<double>(h1) / static_cast<double>(k1)) <= 1e-9 * std::max(1.0, y)) {
      r = {static_cast<long long>(sign) * h1, k1};
      return true;
    }
    double rem = frac - a;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  return false;
}

}  // namespace

double common_period(const std::vector<RVec>& spectra) {
  std::vector<Rational> gaps;
  for (const auto& s : spectra) {
    for (Eigen::Index i = 1; i < s.size(); ++i) {
      double g = s(i) - s(0);
      if (std::abs(g) <= 1e-9) continue;
      Rational r{};
      if (!reconstruct(g, r)) {
        std::ostringstream os;
        os << "charge gap " << g << " is not rational with denominator <= 1e6";
        throw InputError(os.str(), g);
      }
      gaps.push_back(r);
    }
  }
  if (gaps.empty()) return 2 * kPi;
  long long L = 1;
  for (auto& r : gaps) L = std::lcm(L, r.den);
  long long G = 0;
  for (auto& r : gaps) G = std::gcd(G, std::llabs(r.num) * (L / r.den));
  return 2 * kPi * static_cast<double>(L) / static_cast<double>(G);
}

U1Rep::U1Rep(const Mat& H) : diagonal_(false), H_(H) {
  Spectrum s = eigh(H);
  if (hermiticity_residual(H) > 1e-12) throw InputError("charge must be Hermitian", hermiticity_residual(H));
  values_ = s.values;
  vectors_ = s.vectors;
  tau_ = common_period({values_});
}

U1Rep U1Rep::diagonal(const RVec& charges) {
  U1Rep r;
  r.diagonal_ = true;
  r.diag_ = charges;
  r.values_ = charges;
  std::sort(r.values_.data(), r.values_.data() + r.values_.size());
  r.tau_ = common_period({r.values_});
  return r;
}

Mat U1Rep::dense() const {
  if (diagonal_) return diag_.cast<cx>().asDiagonal();
  return H_;
}

Mat U1Rep::apply(const Mat& X) const {
  if (X.rows() != dim()) throw InputError("U1Rep::apply: dimension mismatch");
  if (diagonal_) return diag_.cast<cx>().asDiagonal() * X;
  return H_ * X;
}

Mat U1Rep::exp_apply(double theta, const Mat& X) const {
  if (X.rows() != dim()) throw InputError("U1Rep::exp_apply: dimension mismatch");
  if (diagonal_) {
    Vec ph(dim());
    for (int i = 0; i < dim(); ++i) ph(i) = std::exp(cx(0, -diag_(i) * theta));
    return ph.asDiagonal() * X;
  }
  Vec ph(dim());
  for (int i = 0; i < dim(); ++i) ph(i) = std::exp(cx(0, -values_(i) * theta));
  return vectors_ * (ph.asDiagonal() * (vectors_.adjoint() * X));
}

U1Rep U1Rep::scaled(double c) const {
  if (diagonal_) return U1Rep::diagonal(c * diag_);
  return U1Rep(Mat(c * H_));
}

U1Rep U1Rep::shifted(double c) const {
  if (diagonal_) return U1Rep::diagonal((diag_.array() + c).matrix());
  return U1Rep(Mat(H_ + c * Mat::Identity(dim(), dim())));
}

Mat u1_unitary(const U1Rep& rep, double theta) { return rep.exp_apply(theta, Mat::Identity(rep.dim(), rep.dim())); }

}  // namespace covqec
