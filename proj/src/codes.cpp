#include "covqec/codes.hpp"

#include <bit>
#include <functional>
#include <cmath>

#include "covqec/spectral.hpp"

namespace covqec {

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

RVec popcount_charges(int n) {
  // -1/2 sum Z_l = popcount - n/2
  RVec h(1L << n);
  for (long x = 0; x < h.size(); ++x) h(x) = std::popcount(static_cast<unsigned long>(x)) - 0.5 * n;
  return h;
}

}  // namespace

void ThermoParams::validate() const {
  if (n < 4) throw InputError("thermo: n must be at least 4");
  if (m < 2 || m >= n) throw InputError("thermo: need 2 <= m < n");
  if ((n + m) % 2 != 0) throw InputError("thermo: n + m must be even");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("thermo: q outside [0,1]", q);
}

Vec dicke_state(int n, int m) {
  if (n < 1 || n > 24) throw InputError("dicke_state: n out of range");
  if (std::abs(m) > n || (n + m) % 2 != 0) throw InputError("dicke_state: n + m must be even and |m| <= n");
  const int w = (n + m) / 2;
  Vec v = Vec::Zero(1L << n);
  const double amp = 1.0 / std::sqrt(binom(n, w));
  for (long x = 0; x < v.size(); ++x)
    if (std::popcount(static_cast<unsigned long>(x)) == w) v(x) = amp;
  return v;
}

U1Code thermo_code(const ThermoParams& p) {
  p.validate();
  if (p.n > 16) throw InputError("thermo: n > 16 exceeds the dense path; use thermo_closed_forms");
  const int n = p.n, m = p.m;
  const double q = p.q;
  const double a = std::sqrt(n / (n + q * m)), b = std::sqrt(q * m / (n + q * m));
  Mat W(1L << n, 2);
  W.col(0) = a * dicke_state(n, m) + b * dicke_state(n, -n);
  W.col(1) = a * dicke_state(n, -m) + b * dicke_state(n, n);
  RVec hl(2);
  hl << 0.5 * m, -0.5 * m;
  U1Code c = make_code("thermo", Channel({W}), U1Rep::diagonal(hl), U1Rep::diagonal(popcount_charges(n)));
  ThermoParams keep = p;
  c.epsilon_lower = [keep](const NoiseModel& nm) {
    if (nm.kind() != "erasure" || nm.sites() != keep.n) return 0.0;
    return (1 - keep.q) * keep.m / (2 * (keep.n + keep.q * keep.m));
  };
  c.analytic_recovery = [keep](const NoiseModel& nm) -> std::optional<Recovery> {
    if (nm.kind() != "erasure" || nm.sites() != keep.n || keep.n < keep.m + 4) return std::nullopt;
    return thermo_optimal_recovery(keep);
  };
  return c;
}

ClosedFormRecord thermo_closed_forms(const ThermoParams& p) {
  p.validate();
  const double n = p.n, m = p.m, q = p.q;
  ClosedFormRecord r;
  const double s = n + q * m;
  // 1/2 - x/2 with x the off-diagonal factor sqrt((n+m)(n+(2q-1)m))/s, written without the cancellation
  // near q = 1: s^2 - (n+m)(n+(2q-1)m) = m^2 (1-q)^2
  const double root = std::sqrt((n + m) * (n + (2 * q - 1) * m));
  r.diamond_upper = m * m * (1 - q) * (1 - q) / (2 * s * (s + root));
  r.epsilon_tilde = std::sqrt(r.diamond_upper);
  r.epsilon_leading = (1 - q) * m / (2 * n);
  r.epsilon_lower = (1 - q) * m / (2 * s);
  r.delta_group = 2 * std::sqrt(n * q * m) / s;  // sqrt(1 - ((n - qm)/s)^2)
  r.delta_point = std::sqrt(q * m * (m + n) * (m + n) / s);
  r.delta_charge = q * m * (n + m) / s;
  r.dual_HS_coeff = m * n * (1 - q) / (2 * s);
  r.chi = 2 * r.dual_HS_coeff;
  r.frak_b = std::sqrt(2 * m * n * (m + q * n) / s);
  r.range_HL = m;
  r.range_HS = n;
  return r;
}

Recovery thermo_optimal_recovery(const ThermoParams& p) {
  p.validate();
  if (p.n > 16) throw InputError("thermo recovery: n > 16 exceeds the dense path");
  if (p.n < p.m + 4) throw InputError("thermo recovery: needs n >= m + 4 for orthogonal recovery vectors");
  const int n = p.n, m = p.m;
  const double q = p.q;
  const int k = n - 1;
  const double den = n + (2 * q - 1) * m;
  const double u = std::sqrt((n - m) / den), v = std::sqrt(2 * q * m / den);
  Mat Q(1L << k, 4);
  Q.col(0) = dicke_state(k, m - 1);
  Q.col(1) = u * dicke_state(k, -m - 1) + v * dicke_state(k, k);
  Q.col(2) = u * dicke_state(k, m + 1) + v * dicke_state(k, -k);
  Q.col(3) = dicke_state(k, -m + 1);
  double orth_res = max_abs(Q.adjoint() * Q - Mat::Identity(4, 4));
  if (orth_res > 1e-12) throw InputError("thermo recovery: recovery vectors not orthonormal", orth_res);
  Mat R1 = Mat::Zero(2, 4), R2 = Mat::Zero(2, 4);
  R1(0, 0) = R1(1, 1) = 1;
  R2(0, 2) = R2(1, 3) = 1;
  Recovery rec;
  rec.dim_logical = 2;
  rec.fallback = Vec::Zero(2);
  rec.fallback(0) = 1;
  rec.method = "analytic";
  for (int l = 0; l < n; ++l) rec.blocks.push_back({l, Q, {R1, R2}});
  return rec;
}

void RmParams::validate() const {
  if (t < 3 || t > 4) throw InputError("rm: t must be 3 or 4");
}

std::vector<std::vector<int>> rm_generator(int r, int t) {
  const int N = 1 << t;
  std::vector<std::vector<int>> rows;
  // monomials as variable subsets; degree first, then lexicographic in the variable list
  for (int deg = 0; deg <= r; ++deg) {
    std::vector<int> vars(deg);
    std::function<void(int, int)> rec = [&](int start, int pos) {
      if (pos == deg) {
        std::vector<int> row(N);
        for (int j = 0; j < N; ++j) {
          int val = 1;
          for (int vi : vars) val &= (j >> (t - 1 - vi)) & 1;
          row[j] = val;
        }
        rows.push_back(row);
        return;
      }
      for (int s = start; s < t; ++s) {
        vars[pos] = s;
        rec(s + 1, pos + 1);
      }
    };
    rec(0, 0);
  }
  return rows;
}

std::vector<std::vector<int>> rm_shortened_codewords(int r, int t) {
  auto G = rm_generator(r, t);
  const int k = static_cast<int>(G.size()), N = 1 << t;
  std::vector<std::vector<int>> out;
  for (long mask = 0; mask < (1L << k); ++mask) {
    std::vector<int> w(N, 0);
    for (int i = 0; i < k; ++i)
      if ((mask >> i) & 1)
        for (int j = 0; j < N; ++j) w[j] ^= G[i][j];
    if (w[0] != 0) continue;
    out.emplace_back(w.begin() + 1, w.end());
  }
  return out;
}

namespace {
long to_index(const std::vector<int>& bits) {
  long x = 0;
  for (int b : bits) x = (x << 1) | b;
  return x;
}
}  // namespace

U1Code rm_code(const RmParams& p) {
  p.validate();
  const int n = p.n();
  auto words = rm_shortened_codewords(1, p.t);
  for (const auto& w : words) {
    int wt = 0;
    for (int b : w) wt += b;
    if (wt != 0 && wt != (1 << (p.t - 1))) throw InputError("rm: unexpected codeword weight", wt);
  }
  const double amp = 1.0 / std::sqrt(static_cast<double>(words.size()));
  Mat W = Mat::Zero(1L << n, 2);
  const long all = (1L << n) - 1;
  for (const auto& w : words) {
    long x = to_index(w);
    W(x, 0) += amp;
    W(x ^ all, 1) += amp;
  }
  RVec hl(2);
  hl << 0.5, -0.5;
  return make_code("rm", Channel({W}), U1Rep::diagonal(hl), U1Rep::diagonal(popcount_charges(n)));
}

ClosedFormRecord rm_closed_forms(const RmParams& p) {
  p.validate();
  const double n = p.n();
  ClosedFormRecord r;
  const double ratio = (n - 1) / (n + 1);
  r.delta_group = std::sqrt(1 - ratio * ratio);
  r.delta_point = std::sqrt(n + 1);
  r.delta_charge = 1;
  r.frak_b = std::sqrt(2 * n);
  r.range_HL = 1;
  r.range_HS = n;
  return r;
}

double rm_profile(const RmParams& p, double theta) {
  const double n = p.n();
  const double f = (n + std::cos((n + 1) * theta / 2)) / (n + 1);
  return std::sqrt(std::max(0.0, 1 - f * f));
}

std::pair<std::vector<long>, std::vector<long>> rm_stabilizers(const RmParams& p) {
  p.validate();
  std::vector<long> xs, zs;
  for (const auto& w : rm_shortened_codewords(1, p.t)) {
    long x = to_index(w);
    if (x) xs.push_back(x);
  }
  for (const auto& w : rm_shortened_codewords(p.t - 2, p.t)) {
    long z = to_index(w);
    if (z) zs.push_back(z);
  }
  return {xs, zs};
}

std::pair<Channel, Channel> repetition_code(int d_L, const Mat& basis_in) {
  if (d_L < 2) throw InputError("repetition_code: d_L must be at least 2");
  Mat B = basis_in.size() ? basis_in : Mat::Identity(d_L, d_L);
  if (B.rows() != d_L || B.cols() != d_L || max_abs(B.adjoint() * B - Mat::Identity(d_L, d_L)) > STRUCT_TOL)
    throw InputError("repetition_code: basis must be a d_L x d_L unitary");
  const int D = 2 * d_L;
  auto ket = [&](int l, int a) {  // |l_L a_A>, index (L, A)
    Vec v = Vec::Zero(D);
    for (int r = 0; r < d_L; ++r) v(r * 2 + a) = B(r, l);
    return v;
  };
  Mat V(D, 2);
  V.col(0) = ket(0, 0);
  V.col(1) = ket(1, 1);
  std::vector<Mat> rs;
  for (int i = 0; i < d_L; ++i) {
    int a0 = i, a1 = i;  // logical index paired with A=0 and A=1
    if (i == 0) a1 = 1;
    if (i == 1) a1 = 0;
    Mat R = Mat::Zero(2, D);
    R.row(0) = ket(a0, 0).adjoint();
    R.row(1) = ket(a1, 1).adjoint();
    rs.push_back(R);
  }
  return {Channel({V}), Channel(rs)};
}

}  // namespace covqec
