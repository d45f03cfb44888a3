#include "covqec/qec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covqec/codes.hpp"
#include "covqec/spectral.hpp"

namespace covqec {

namespace {

// encoder Kraus side by side: D x (m d)
Mat stacked_encoder(const U1Code& c, double theta = 0.0) {
  const auto& ks = c.encoder.kraus();
  const int d = c.dim_logical();
  Mat X(c.dim_physical(), static_cast<Eigen::Index>(ks.size()) * d);
  for (size_t e = 0; e < ks.size(); ++e)
    X.middleCols(static_cast<Eigen::Index>(e) * d, d) = theta == 0.0 ? ks[e] : c.physical.exp_apply(theta, ks[e]);
  return X;
}

std::vector<Mat> split_columns(const std::vector<Mat>& ls, int d) {
  std::vector<Mat> out;
  for (const Mat& L : ls)
    for (Eigen::Index e = 0; e < L.cols() / d; ++e) out.push_back(L.middleCols(e * d, d));
  return out;
}

struct Component {
  int sector = 0;
  Mat Q;                 // sector_dim x q
  std::vector<Mat> B;    // q x d each
};

// Groups the Kraus operators of N o E into blocks with mutually orthogonal ranges.
std::vector<Component> components(const U1Code& c, const NoiseModel& noise) {
  if (noise.dim_in() != c.dim_physical()) throw InputError("qec: noise dimension does not match the code");
  const int d = c.dim_logical();
  Mat X = stacked_encoder(c);
  std::vector<std::vector<Mat>> per_sector(noise.num_sectors());
  double scale = 0;
  for (const auto& k : noise.kraus()) {
    Mat Y = k.apply(X);
    for (Eigen::Index e = 0; e < Y.cols() / d; ++e) {
      Mat A = Y.middleCols(e * d, d);
      double nrm = A.norm();
      if (nrm == 0.0) continue;
      scale = std::max(scale, nrm);
      per_sector[k.sector].push_back(A);
    }
  }
  std::vector<Component> out;
  for (int s = 0; s < noise.num_sectors(); ++s) {
    const auto& As = per_sector[s];
    const int r = static_cast<int>(As.size());
    if (r == 0) continue;
    std::vector<int> parent(r);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j)
        if (max_abs(As[i].adjoint() * As[j]) > 1e-13 * scale * scale) parent[find(i)] = find(j);
    std::vector<int> roots;
    for (int i = 0; i < r; ++i)
      if (find(i) == i) roots.push_back(i);
    for (int root : roots) {
      std::vector<const Mat*> members;
      for (int i = 0; i < r; ++i)
        if (find(i) == root) members.push_back(&As[i]);
      Mat H(As[0].rows(), static_cast<Eigen::Index>(members.size()) * d);
      for (size_t i = 0; i < members.size(); ++i) H.middleCols(static_cast<Eigen::Index>(i) * d, d) = *members[i];
      Component comp;
      comp.sector = s;
      comp.Q = orth(H, 1e-12);
      for (const Mat* A : members) comp.B.push_back(comp.Q.adjoint() * *A);
      out.push_back(std::move(comp));
    }
  }
  return out;
}

Vec default_fallback(int d) { return Vec::Unit(d, 0); }

// Completes R so that sum R^dag R = 1_q: normalizes on the support and sends the rest to `fallback`.
std::vector<Mat> make_tp(std::vector<Mat> R, int q, const Vec& fallback) {
  Mat S = Mat::Zero(q, q);
  for (const Mat& r : R) S += r.adjoint() * r;
  Spectrum sp = eigh(herm_part(S));
  const double top = std::max(sp.values.maxCoeff(), 0.0);
  Mat Sinv = Mat::Zero(q, q);
  std::vector<int> null;
  for (int i = 0; i < q; ++i) {
    if (sp.values(i) > 1e-12 * std::max(top, 1e-300))
      Sinv += sp.vectors.col(i) * sp.vectors.col(i).adjoint() / std::sqrt(sp.values(i));
    else
      null.push_back(i);
  }
  for (Mat& r : R) r = r * Sinv;
  for (int i : null) R.push_back(fallback * sp.vectors.col(i).adjoint());
  return R;
}

// SDP over the recovery Choi matrix of one component; returns an upper bound on the component's
// contribution to d^2 f^2 (from a feasible dual point) and the recovery Kraus operators.
struct BlockSolve {
  double upper = 0.0;
  std::vector<Mat> R;
  bool ok = false;
};

BlockSolve solve_block(const Component& comp, int d) {
  const int q = static_cast<int>(comp.Q.cols());
  const int D = d * q;
  Mat C = Mat::Zero(D, D);
  for (const Mat& B : comp.B) {
    Vec u(D);
    for (int a = 0; a < d; ++a)
      for (int s = 0; s < q; ++s) u(a * q + s) = B(s, a);
    C += u.conjugate() * u.transpose();
  }
  C = herm_part(C);
  SdpBuilder sb;
  const int y0 = sb.add_herm(q);
  const auto& basis = herm_basis(q);
  for (int a = 0; a < q * q; ++a) sb.set_cost(y0 + a, basis[a].trace().real());
  const int blk = sb.add_block(D);
  sb.add_const(blk, -C);
  sb.add_herm_term(blk, y0, q, [&](const Mat& E) { return kron(Mat::Identity(d, d), E); });
  SdpSolution sol = solve_sdp(sb.build());
  BlockSolve out;
  out.ok = sol.certified();

  // feasible dual point: shift Y until 1 (x) Y - C >= 0
  Mat Y = herm_from_coords(sol.x, y0, q);
  double lm = lambda_min(kron(Mat::Identity(d, d), Y) - C);
  if (!Y.allFinite()) Y = lambda_max(C) * Mat::Identity(q, q);
  else if (lm < 0) Y += -lm * (1 + 1e-12) * Mat::Identity(q, q);
  out.upper = Y.trace().real();

  Mat J = sol.Z.empty() ? Mat::Identity(D, D) / d : herm_part(sol.Z[0]);
  Spectrum sp = eigh(J);
  const double top = std::max(sp.values.maxCoeff(), 0.0);
  for (int i = 0; i < D; ++i) {
    if (sp.values(i) <= 1e-12 * std::max(top, 1e-300)) continue;
    Vec r = std::sqrt(sp.values(i)) * sp.vectors.col(i);
    Mat R(d, q);
    for (int a = 0; a < d; ++a)
      for (int s = 0; s < q; ++s) R(a, s) = r(a * q + s);
    out.R.push_back(R);
  }
  out.R = make_tp(std::move(out.R), q, default_fallback(d));
  return out;
}

std::optional<DephasingParams> try_dephasing(const std::vector<Mat>& kraus) {
  if (kraus.empty() || kraus[0].rows() != 2 || kraus[0].cols() != 2) return std::nullopt;
  try {
    DephasingParams p = extract_dephasing(KrausMap(kraus));
    if (p.residual <= 1e-12) return p;
  } catch (const InputError&) {
  }
  return std::nullopt;
}

double lemma_purified(const DephasingParams& p) {
  return std::sqrt(std::max(0.0, 0.5 * (1 - (1 - 2 * p.p) * std::cos(p.phi))));
}
double lemma_diamond(const DephasingParams& p) {
  const double a = 1 - 2 * p.p;
  return 0.5 * std::sqrt(std::max(0.0, 1 - 2 * a * std::cos(p.phi) + a * a));
}

// P(channel, V) with lower end in dual_value
DistanceResult distance_to_isometry(const std::vector<Mat>& kraus, const Mat& V) {
  std::vector<Mat> rel;
  for (const Mat& K : kraus) rel.push_back(V.adjoint() * K);
  if (V.rows() == V.cols()) {
    if (auto p = try_dephasing(rel)) {
      DistanceResult r;
      r.value = r.dual_value = lemma_purified(*p);
      r.certified = Certification::exact;
      return r;
    }
  }
  DistanceResult r = isometric_comparator_distance(kraus, V);
  const double hi = std::max(r.value, r.dual_value), lo = std::min(r.value, r.dual_value);
  r.value = hi;
  r.dual_value = lo;
  return r;
}

}  // namespace

std::vector<Mat> corrected_kraus_theta(const U1Code& c, const NoiseModel& noise, const Recovery& rec, double theta) {
  if (rec.dim_logical != c.dim_logical()) throw InputError("qec: recovery dimension mismatch");
  return split_columns(logical_kraus(rec, noise, stacked_encoder(c, theta)), c.dim_logical());
}

std::vector<Mat> corrected_kraus(const U1Code& c, const NoiseModel& noise, const Recovery& rec) {
  return corrected_kraus_theta(c, noise, rec, 0.0);
}

double choi_infidelity_sq(const U1Code& c, const NoiseModel& noise, const Recovery& rec) {
  // 1 - sum |tr L|^2/d^2 = (d - sum |L|^2)/d + sum |L - (tr L/d) 1|^2/d; the second form has no cancellation
  const int d = c.dim_logical();
  double spread = 0, mass = 0;
  for (const Mat& L : corrected_kraus(c, noise, rec)) {
    const cx t = L.trace() / double(d);
    spread += (L - t * Mat::Identity(d, d)).squaredNorm();
    mass += L.squaredNorm();
  }
  // a trace-preserving recovery makes the deficit vanish exactly; keep it only when it is structural
  const double deficit = rec.tp_residual() <= STRUCT_TOL ? 0.0 : (d - mass) / d;
  return std::clamp(deficit + spread / d, 0.0, 1.0);
}

double choi_fidelity_sq(const U1Code& c, const NoiseModel& noise, const Recovery& rec) {
  return 1 - choi_infidelity_sq(c, noise, rec);
}

Recovery transpose_recovery(const U1Code& c, const NoiseModel& noise) {
  const int d = c.dim_logical();
  Recovery rec;
  rec.dim_logical = d;
  rec.fallback = default_fallback(d);
  rec.method = "transpose";
  for (const Component& comp : components(c, noise)) {
    const int q = static_cast<int>(comp.Q.cols());
    Mat N = Mat::Zero(q, q);
    for (const Mat& B : comp.B) N += B * B.adjoint();
    Mat Ni = inv_sqrtm_psd(herm_part(N));
    std::vector<Mat> R;
    for (const Mat& B : comp.B) R.push_back(B.adjoint() * Ni);
    rec.blocks.push_back({comp.sector, comp.Q, make_tp(std::move(R), q, rec.fallback)});
  }
  return rec;
}

EpsilonChoiResult epsilon_choi(const U1Code& c, const NoiseModel& noise) {
  const int d = c.dim_logical();
  Recovery sdp_rec;
  sdp_rec.dim_logical = d;
  sdp_rec.fallback = default_fallback(d);
  sdp_rec.method = "sdp";
  double upper_f = 0;
  bool ok = true;
  for (const Component& comp : components(c, noise)) {
    BlockSolve bs = solve_block(comp, d);
    ok = ok && bs.ok;
    upper_f += bs.upper;
    sdp_rec.blocks.push_back({comp.sector, comp.Q, std::move(bs.R)});
  }
  EpsilonChoiResult r;
  r.ok = ok;
  r.certified_lower = std::sqrt(std::max(0.0, 1 - upper_f / (double(d) * d)));

  std::vector<Recovery> cands{sdp_rec, transpose_recovery(c, noise)};
  if (c.analytic_recovery)
    if (auto a = c.analytic_recovery(noise)) cands.push_back(*a);
  r.value = 2.0;
  for (auto& rec : cands) {
    double v = std::sqrt(choi_infidelity_sq(c, noise, rec));
    if (v < r.value) {
      r.value = v;
      r.recovery = rec;
      r.method = rec.method;
    }
  }
  r.candidates = std::move(cands);
  return r;
}

DistanceResult recovery_distance(const U1Code& c, const NoiseModel& noise, const Recovery& rec) {
  return distance_to_isometry(corrected_kraus(c, noise, rec), Mat::Identity(c.dim_logical(), c.dim_logical()));
}

EpsilonBracket epsilon_bracket(const U1Code& c, const NoiseModel& noise) {
  EpsilonChoiResult ec = epsilon_choi(c, noise);
  EpsilonBracket b;
  b.epsilon_choi = ec.value;
  b.lower = ec.certified_lower;
  b.lower_method = "choi-sdp";
  if (c.epsilon_lower) {
    double reg = c.epsilon_lower(noise);
    if (reg > b.lower) {
      b.lower = reg;
      b.lower_method = "complementary-channel";
    }
  }
  b.upper = 2.0;
  for (const Recovery& rec : ec.candidates) {
    DistanceResult dr = recovery_distance(c, noise, rec);
    if (dr.value < b.upper) {
      b.upper = dr.value;
      b.witness_lower = dr.dual_value;
      b.upper_cert = dr.certified;
      b.recovery_witness = rec;
      b.upper_method = rec.method;
    }
  }
  return b;
}

EpsilonBracket epsilon_diamond_bracket(const U1Code& c, const NoiseModel& noise, const EpsilonBracket& eps) {
  EpsilonBracket b = eps;
  b.lower = eps.lower * eps.lower;
  b.lower_method = eps.lower_method + "^2";
  std::vector<Mat> ks = corrected_kraus(c, noise, eps.recovery_witness);
  if (auto p = try_dephasing(ks)) {
    b.upper = lemma_diamond(*p);
    b.upper_cert = Certification::exact;
    b.upper_method = eps.upper_method + "+dephasing";
  } else {
    DistanceResult dr = diamond_distance(KrausMap(ks), identity_channel(c.dim_logical()));
    b.upper = dr.value;
    b.upper_cert = dr.ok ? dr.certified : Certification::heuristic;
    b.upper_method = eps.upper_method + "+diamond-sdp";
  }
  b.lower = std::min(b.lower, b.upper);
  return b;
}

EpsilonBracket epsilon_diamond_bracket(const U1Code& c, const NoiseModel& noise) {
  return epsilon_diamond_bracket(c, noise, epsilon_bracket(c, noise));
}

KlDeviation kl_deviation(const U1Code& c, const NoiseModel& noise) {
  if (!c.isometric()) throw InputError("kl_deviation: encoder is not an isometry");
  const int d = c.dim_logical();
  std::vector<std::pair<int, Mat>> A;
  for (const auto& k : noise.kraus()) A.push_back({k.sector, k.apply(c.W)});
  const int r = static_cast<int>(A.size());
  KlDeviation out;
  out.lambda = Mat::Zero(r, r);
  out.B_norms = RMat::Zero(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      if (A[i].first != A[j].first) continue;
      Mat G = A[i].second.adjoint() * A[j].second;
      cx lam = G.trace() / double(d);
      Mat B = G - lam * Mat::Identity(d, d);
      out.lambda(i, j) = lam;
      out.B_norms(i, j) = spectral_norm(B);
      out.max_violation = std::max(out.max_violation, out.B_norms(i, j));
      out.residual = std::max(out.residual, max_abs(lam * Mat::Identity(d, d) + B - G));
    }
  return out;
}

TwirlResult twirl_recovery(const Channel& R, const U1Rep& logical, const U1Rep& physical, double tau, int resolution) {
  if (resolution < 2) throw InputError("twirl_recovery: resolution must be at least 2");
  if (R.dim_in() != physical.dim() || R.dim_out() != logical.dim())
    throw InputError("twirl_recovery: charge dimensions do not match the recovery");
  const int din = R.dim_in(), dout = R.dim_out(), D = din * dout;
  // in the charge eigenbases U_L^dag K U_S only rephases K(o, i) by exp(i theta (hL_o - hS_i))
  const RVec hL = logical.is_diagonal() ? logical.diag() : logical.eigenvalues();
  const RVec hS = physical.is_diagonal() ? physical.diag() : physical.eigenvalues();
  Mat P;  // vec K = P vec K_eig
  if (!logical.is_diagonal() || !physical.is_diagonal()) {
    Mat PL = logical.is_diagonal() ? Mat(Mat::Identity(dout, dout)) : logical.eigenvectors();
    Mat PS = physical.is_diagonal() ? Mat(Mat::Identity(din, din)) : physical.eigenvectors();
    P = kron(PL, PS.conjugate());
  }
  Mat J = choi(R);
  if (P.size()) J = P.adjoint() * J * P;
  RVec w(D);
  for (int o = 0; o < dout; ++o)
    for (int i = 0; i < din; ++i) w(o * din + i) = hL(o) - hS(i);
  Mat Jt(D, D);
  for (int b = 0; b < D; ++b)
    for (int a = 0; a < D; ++a) {
      if (J(a, b) == 0.0) {
        Jt(a, b) = 0.0;
        continue;
      }
      cx avg = 0.0;
      for (int k = 0; k < resolution; ++k) avg += std::polar(1.0, tau * k / resolution * (w(a) - w(b)));
      Jt(a, b) = J(a, b) * avg / double(resolution);
    }
  TwirlResult out;
  out.covariance_residual = 0.0;
  for (int k = 0; k < 16; ++k) {
    const double th = tau * (k + 0.5) / 16;
    Mat Dm(D, D);
    for (int b = 0; b < D; ++b)
      for (int a = 0; a < D; ++a) {
        const int oa = a / din, ia = a % din, ob = b / din, ib = b % din;
        cx l = std::polar(1.0, -th * (hL(oa) - hL(ob))), r = std::polar(1.0, -th * (hS(ia) - hS(ib)));
        Dm(a, b) = Jt(a, b) * (l - r);
      }
    if (P.size()) Dm = P * Dm * P.adjoint();
    out.covariance_residual = std::max(out.covariance_residual, max_abs(Dm));
  }
  if (P.size()) Jt = P * Jt * P.adjoint();
  Spectrum sp = eigh(herm_part(Jt));
  const double top = sp.values.maxCoeff();
  std::vector<Mat> ks;
  for (int i = 0; i < sp.values.size(); ++i) {
    if (sp.values(i) <= 1e-13 * top) continue;
    Mat K(dout, din);
    for (int o = 0; o < dout; ++o)
      for (int a = 0; a < din; ++a) K(o, a) = std::sqrt(sp.values(i)) * sp.vectors(o * din + a, i);
    ks.push_back(K);
  }
  // remove the tiny TP drift left by discarding negligible eigenvalues
  Mat S = Mat::Zero(din, din);
  for (const Mat& K : ks) S += K.adjoint() * K;
  Mat Si = inv_sqrtm_psd(herm_part(S));
  for (Mat& K : ks) K = K * Si;
  out.recovery = Channel(std::move(ks));
  return out;
}

namespace {

// logical basis with 0_L on the largest and 1_L on the smallest H_L eigenvalue
Mat protocol_basis(const U1Code& c) {
  Spectrum sp = eigh(c.logical.dense());
  const int d = c.dim_logical();
  Mat B(d, d);
  B.col(0) = sp.vectors.col(d - 1);
  B.col(1) = sp.vectors.col(0);
  for (int i = 1; i + 1 < d; ++i) B.col(i + 1) = sp.vectors.col(i);
  return B;
}

std::vector<Mat> lift_protocol(const std::vector<Mat>& ls, const Mat& B, const Channel& enc, const Channel& rec) {
  std::vector<Mat> out;
  const Mat& V = enc.kraus()[0];
  for (const Mat& L : ls) {
    Mat T = kron(B.adjoint() * L * B, Mat::Identity(2, 2)) * V;
    for (const Mat& R : rec.kraus()) out.push_back(R * T);
  }
  return out;
}

cx xi_of(const std::vector<Mat>& ks) {
  cx s = 0;
  for (const Mat& K : ks) s += K(0, 0) * std::conj(K(1, 1));
  return s;
}

}  // namespace

std::vector<Mat> protocol_kraus(const U1Code& c, const NoiseModel& noise, const Recovery& rec, double theta) {
  auto [enc, rr] = repetition_code(c.dim_logical());
  return lift_protocol(corrected_kraus_theta(c, noise, rec, theta), protocol_basis(c), enc, rr);
}

TwoLevelProtocol two_level_protocol(const U1Code& c, const NoiseModel& noise, const Recovery& rec,
                                    const std::vector<double>& thetas) {
  if (c.dim_logical() < 2) throw InputError("two_level_protocol: logical dimension below 2");
  auto [enc, rr] = repetition_code(c.dim_logical());
  const Mat B = protocol_basis(c);
  auto kraus_at = [&](double th) { return lift_protocol(corrected_kraus_theta(c, noise, rec, th), B, enc, rr); };
  TwoLevelProtocol p;
  p.range_HL = c.logical.range();
  for (double th : thetas) {
    auto ks = kraus_at(th);
    p.theta.push_back(th);
    p.xi.push_back(xi_of(ks));
    try {
      p.params.push_back(extract_dephasing(KrausMap(ks)));
    } catch (const InputError& e) {
      throw InputError(std::string("two_level_protocol: protocol channel is not rotated dephasing at theta = ") +
                           std::to_string(th),
                       e.residual());
    }
  }
  p.xi0 = xi_of(kraus_at(0.0));
  const double h = 1e-5;
  auto D = [&](double s) { return (xi_of(kraus_at(s)) - xi_of(kraus_at(-s))) / (2 * s); };
  cx d1 = D(h), d2 = D(h / 2);
  p.dxi0 = (4.0 * d2 - d1) / 3.0;
  p.dxi_error = std::abs(p.dxi0 - d2);

  // derivative Kraus at theta = 0 in one pass through the recovery
  const auto& eks = c.encoder.kraus();
  const int d = c.dim_logical(), m = static_cast<int>(eks.size());
  Mat X(c.dim_physical(), 2 * m * d);
  for (int e = 0; e < m; ++e) {
    X.middleCols(e * d, d) = eks[e];
    X.middleCols((m + e) * d, d) = c.physical.apply(eks[e]);
  }
  std::vector<Mat> K, dK;
  const Mat& V = enc.kraus()[0];
  for (const Mat& L : logical_kraus(rec, noise, X)) {
    for (int e = 0; e < m; ++e) {
      Mat A = B.adjoint() * L.middleCols(e * d, d) * B;
      Mat dA = cx(0, -1) * (B.adjoint() * L.middleCols((m + e) * d, d) * B);
      Mat T = kron(A, Mat::Identity(2, 2)) * V, dT = kron(dA, Mat::Identity(2, 2)) * V;
      for (const Mat& R : rr.kraus()) {
        K.push_back(R * T);
        dK.push_back(R * dT);
      }
    }
  }
  p.qfi_at_zero = channel_qfi_at_zero(K, dK).value;
  return p;
}

ScanResult gate_error_at(const U1Code& c, const NoiseModel& noise, const Recovery& rec, int grid) {
  int failed = 0;
  bool all_exact = true;
  auto f = [&](double th) {
    DistanceResult r = distance_to_isometry(corrected_kraus_theta(c, noise, rec, th), u1_unitary(c.logical, th));
    if (!r.ok) ++failed;
    if (r.certified != Certification::exact) all_exact = false;
    return r.value;
  };
  ScanResult s = theta_scan(f, c.tau, grid, 3);
  s.failed_points = failed;
  s.ok = failed == 0;
  s.certified = all_exact ? Certification::exact : Certification::heuristic;
  return s;
}

GateErrorBracket gate_error_bracket(const U1Code& c, const NoiseModel& noise, const EpsilonBracket& eps,
                                    double delta_group, double frak_f) {
  GateErrorBracket g;
  ScanResult direct = gate_error_at(c, noise, eps.recovery_witness);
  g.upper = eps.upper + delta_group;
  g.upper_method = "epsilon+delta_G";
  if (direct.value < g.upper) {
    g.upper = direct.value;
    g.upper_method = "direct:" + eps.upper_method;
  }
  if (!std::isfinite(frak_f) || std::isnan(frak_f)) {
    g.hks = false;
    g.lower = 0.0;
    return g;
  }
  EllResult l = ell_inverse(Ell::l1, c.logical.range() / (2 * std::sqrt(frak_f)));
  g.lower = l.value;
  g.lower_saturated = l.saturated;
  return g;
}

}  // namespace covqec
