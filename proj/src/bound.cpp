#include "covqec/bound.hpp"

#include <algorithm>
#include <cmath>

#include "covqec/spectral.hpp"

namespace covqec {

namespace {

// Hermitian coordinates y_a of h with H = sum_a y_a S_a, S_a = sum_ij (E_a)_ij K_i^dag K_j
void add_hks_constraint(SdpBuilder& sb, int h0, const std::vector<Mat>& kraus, const Mat& H) {
  const int r = static_cast<int>(kraus.size()), din = static_cast<int>(H.rows());
  const auto& Eh = herm_basis(r);
  const auto& Gd = herm_basis(din);
  std::vector<Mat> S(r * r);
  for (int a = 0; a < r * r; ++a) {
    S[a] = Mat::Zero(din, din);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        if (Eh[a](i, j) != 0.0) S[a] += Eh[a](i, j) * kraus[i].adjoint() * kraus[j];
  }
  for (int c = 0; c < din * din; ++c) {
    std::vector<std::pair<int, double>> row;
    for (int a = 0; a < r * r; ++a) {
      double v = (Gd[c] * S[a]).trace().real();
      if (std::abs(v) > 1e-15) row.push_back({h0 + a, v});
    }
    sb.add_equality(row, (Gd[c] * H).trace().real());
  }
}

void check_inputs(const std::vector<Mat>& kraus, const Mat& H) {
  if (kraus.empty()) throw InputError("hks: empty Kraus list");
  if (H.rows() != kraus[0].cols() || H.cols() != H.rows()) throw InputError("hks: charge dimension mismatch");
  double res = hermiticity_residual(H);
  if (res > STRUCT_TOL) throw InputError("hks: charge is not Hermitian", res);
}

Mat stacked(const std::vector<Mat>& kraus) {
  const Eigen::Index dout = kraus[0].rows();
  Mat K(dout * static_cast<Eigen::Index>(kraus.size()), kraus[0].cols());
  for (size_t i = 0; i < kraus.size(); ++i) K.middleRows(static_cast<Eigen::Index>(i) * dout, dout) = kraus[i];
  return K;
}

HksResult finish(const SdpSolution& sol, double scale, int h0, int r) {
  HksResult out;
  out.status = sol.status;
  if (sol.status == SdpStatus::infeasible) {
    out.feasible = false;
    out.ok = true;
    return out;
  }
  out.feasible = true;
  out.ok = sol.certified();
  out.value = scale * sol.primal_value;
  out.h = herm_from_coords(sol.x, h0, r);
  return out;
}

HksResult frak_f_impl(const std::vector<Mat>& kraus, const Mat& H, bool subtract) {
  check_inputs(kraus, H);
  const int r = static_cast<int>(kraus.size()), din = static_cast<int>(H.rows());
  const int dout = static_cast<int>(kraus[0].rows());
  Mat K = stacked(kraus);
  Mat H2 = subtract ? Mat(H * H) : Mat::Zero(din, din);
  SdpBuilder sb;
  const int h0 = sb.add_herm(r);
  const int t = sb.add_scalar();
  sb.set_cost(t, 1.0);
  const int D = din + r * dout;
  const int blk = sb.add_block(D);
  Mat F0 = Mat::Zero(D, D);
  F0.topLeftCorner(din, din) = H2;
  F0.bottomRightCorner(r * dout, r * dout).setIdentity();
  sb.add_const(blk, F0);
  Mat T = Mat::Zero(D, D);
  T.topLeftCorner(din, din).setIdentity();
  sb.add_term(blk, t, T);
  sb.add_herm_term(blk, h0, r, [&](const Mat& E) { return Mat(kron(E, Mat::Identity(dout, dout)) * K); }, din, 0);
  add_hks_constraint(sb, h0, kraus, H);
  HksResult out = finish(solve_sdp(sb.build()), 4.0, h0, r);
  if (out.feasible) {
    Mat hK = kron(out.h, Mat::Identity(dout, dout)) * K;
    out.contraction_check = lambda_min(herm_part(hK.adjoint() * hK - H * H));
    if (subtract && out.contraction_check < -1e-8)
      throw InputError("frak_f: one-sided lift invalid for this instance", out.contraction_check);
  }
  return out;
}

}  // namespace

HksResult frak_j(const std::vector<Mat>& kraus, const Mat& H) {
  check_inputs(kraus, H);
  const int r = static_cast<int>(kraus.size());
  SdpBuilder sb;
  const int h0 = sb.add_herm(r);
  const int nu = sb.add_scalar();
  const int x = sb.add_scalar();
  sb.set_cost(x, 2.0);
  const int blk = sb.add_block(2 * r);
  Mat I = Mat::Identity(r, r);
  Mat X = Mat::Zero(2 * r, 2 * r);
  X.topLeftCorner(r, r) = I;
  X.bottomRightCorner(r, r) = I;
  sb.add_term(blk, x, X);
  sb.add_term(blk, nu, -I, r, 0);
  sb.add_herm_term(blk, h0, r, [](const Mat& E) { return E; }, r, 0);
  add_hks_constraint(sb, h0, kraus, H);
  return finish(solve_sdp(sb.build()), 1.0, h0, r);
}

HksResult frak_f(const std::vector<Mat>& kraus, const Mat& H) { return frak_f_impl(kraus, H, true); }
HksResult frak_f_tilde(const std::vector<Mat>& kraus, const Mat& H) { return frak_f_impl(kraus, H, false); }

double rld_channel_qfi(const std::vector<Mat>& kraus, const Mat& H) {
  check_inputs(kraus, H);
  const int r = static_cast<int>(kraus.size());
  // orthogonalize the Kraus operators under the trace inner product
  Mat G(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) G(i, j) = (kraus[i].adjoint() * kraus[j]).trace();
  Spectrum sp = eigh(herm_part(G));
  const double top = sp.values.maxCoeff();
  std::vector<Mat> K;
  std::vector<double> lam;
  for (int k = 0; k < r; ++k) {
    if (sp.values(k) <= 1e-12 * top) continue;
    Mat M = Mat::Zero(kraus[0].rows(), kraus[0].cols());
    for (int b = 0; b < r; ++b) M += sp.vectors(b, k) * kraus[b];
    K.push_back(M);
    lam.push_back(sp.values(k));
  }
  const int m = static_cast<int>(K.size());
  // K_l H = sum_k K_k A_kl, else the support condition fails
  Mat A(m, m);
  double leak = 0, scale = 0;
  for (int l = 0; l < m; ++l) {
    Mat KH = K[l] * H;
    Mat rest = KH;
    for (int k = 0; k < m; ++k) {
      A(k, l) = (K[k].adjoint() * KH).trace() / lam[k];
      rest -= A(k, l) * K[k];
    }
    leak += rest.squaredNorm();
    scale += KH.squaredNorm();
  }
  if (std::sqrt(leak) > 1e-8 * std::max(1.0, std::sqrt(scale))) return kInf;
  // with V = [vec K] of Gram diag(lam): D J^+ D = -V S^2 V^dag, S = A - A^dag
  Mat S = A - A.adjoint();
  Mat X = -(S * S);
  Mat T = Mat::Zero(H.rows(), H.cols());
  for (int b = 0; b < m; ++b)
    for (int c = 0; c < m; ++c)
      if (X(b, c) != 0.0) T += X(b, c) * (K[c].adjoint() * K[b]);
  return spectral_norm(herm_part(T));
}

NoiseStructureBounds noise_structure_bounds(const std::vector<NoisePart>& parts, bool mixture) {
  NoiseStructureBounds b;
  b.mixture = mixture;
  if (parts.empty()) {
    b.note = "no local structure";
    return b;
  }
  double jmax = 0, jsum = 0, fsum = 0, ftsum = 0;
  for (const auto& p : parts) {
    HksResult j = frak_j(p.channel.kraus(), p.charge);
    HksResult f = frak_f(p.channel.kraus(), p.charge);
    HksResult ft = frak_f_tilde(p.channel.kraus(), p.charge);
    if (!j.feasible) {
      b.note = "local HKS violated";
      return b;
    }
    b.local_j.push_back(j.value);
    b.local_f.push_back(f.value);
    b.local_f_tilde.push_back(ft.value);
    jmax = std::max(jmax, j.value / p.prob);
    jsum += j.value;
    fsum += f.value;
    ftsum += ft.value / p.prob;
  }
  b.available = true;
  if (mixture) {
    b.frak_j = jmax;
    b.frak_f = ftsum;
    b.note = "local mixture";
  } else {
    b.frak_j = jsum;
    b.frak_f = fsum;
    b.note = "independent";
  }
  return b;
}

NoiseStructureBounds noise_structure_bounds(const NoiseModel& noise) {
  NoiseStructureBounds b = noise_structure_bounds(noise.parts(), noise.mixture_of_parts());
  if (b.available && noise.kind() == "erasure") {
    double sq = 0, tot = 0;
    const double n = static_cast<double>(noise.parts().size());
    for (const auto& p : noise.parts()) {
      double rg = spectral_range(p.charge);
      sq += rg * rg;
      tot += rg;
    }
    b.sqrt_f_plus_b = n * (std::sqrt(sq / n) + std::sqrt(2.0) * tot / n);
  }
  return b;
}

double ell_domain_end(Ell kind, double variance, double range) {
  switch (kind) {
    case Ell::l1: return 1 / std::sqrt(2.0);
    case Ell::l2: return 1 / (6 * std::sqrt(2.0));
    case Ell::l3:
      if (!(variance > 0) || !(range > 0)) throw InputError("ell l3: needs positive variance and range");
      return std::sqrt(2.0) * variance / (3 * range * range);
  }
  return 0;
}

double ell_forward(Ell kind, double y, double variance, double range) {
  const double base = 1 - 3 * y * y + y * y * y * y;
  switch (kind) {
    case Ell::l1: return y * std::sqrt(1 - y * y) / (1 - 2 * y * y);
    case Ell::l2: return y / std::sqrt(base * (1 - 6 * std::sqrt(2.0) * y * y));
    case Ell::l3: return y / std::sqrt(base * (1 - 3 * range * range * y / (std::sqrt(2.0) * variance)));
  }
  return 0;
}

EllResult ell_inverse(Ell kind, double x, double variance, double range) {
  if (!(x >= 0)) throw InputError("ell_inverse: negative argument", x);
  const double end = ell_domain_end(kind, variance, range);
  EllResult r;
  if (x == 0) return r;
  double lo = 0, hi = end;
  // supremum is finite only for l2 at its domain end
  if (kind == Ell::l2 && x >= ell_forward(kind, end, variance, range)) {
    r.value = end;
    r.saturated = true;
    return r;
  }
  while (hi - lo > 1e-13) {
    double mid = 0.5 * (lo + hi);
    double f = ell_forward(kind, mid, variance, range);
    if (!std::isfinite(f) || f >= x)
      hi = mid;
    else
      lo = mid;
  }
  r.value = 0.5 * (lo + hi);
  return r;
}

double global_bound_g(double G, double range_HS) {
  if (G < 0) return 0.0;
  if (G > range_HS) return std::sqrt(3.0 / 8);
  return std::min(std::sqrt(G * (range_HS - 0.5 * G)) / range_HS, std::sqrt(3.0 / 8));
}

namespace {

bool have(double v) { return !std::isnan(v); }

struct Collector {
  std::vector<BoundEvaluation> out;
  void add(std::string name, double lhs, double rhs, std::string note = "") {
    BoundEvaluation e;
    e.name = std::move(name);
    e.applicable = true;
    e.lhs = lhs;
    e.rhs = rhs;
    e.slack = lhs - rhs;
    e.satisfied = lhs >= rhs - BOUND_TOL;
    e.note = std::move(note);
    out.push_back(std::move(e));
  }
  void skip(std::string name, std::string why) {
    BoundEvaluation e;
    e.name = std::move(name);
    e.note = std::move(why);
    out.push_back(std::move(e));
  }
};

}  // namespace

std::vector<BoundEvaluation> evaluate_bounds(const BoundInputs& in) {
  Collector c;
  const double dL = in.range_HL, dS = in.range_HS;
  const double e = in.eps_lower;  // every epsilon-dependent bound below is hardest at the lower end
  const bool hks = in.hks;
  const bool haveJ = hks && have(in.frak_j) && std::isfinite(in.frak_j);
  const bool haveF = hks && have(in.frak_f) && std::isfinite(in.frak_f);
  const bool haveB = have(in.frak_b);
  const bool haveE = have(e);
  const char* no_hks = "HKS condition not established";

  auto metro = [&](double eps) { return 2 * eps * (std::sqrt((1 - eps * eps) * in.frak_f) + in.frak_b); };

  // global covariance vs epsilon
  if (in.isometric && haveJ && haveE && have(in.delta_group)) {
    double G = dL - 2 * e * in.frak_j;
    c.add("global_kl", in.delta_group, global_bound_g(G, dS), G < 0 ? "G < 0, trivial branch" : (G > dS ? "sqrt(3/8) branch" : ""));
  } else {
    c.skip("global_kl", in.isometric ? no_hks : "non-isometric encoder");
  }
  if (in.isometric && haveF && haveB && haveE && have(in.delta_group)) {
    double G = dL - metro(e);
    c.add("global_metrology", in.delta_group, global_bound_g(G, dS), G < 0 ? "G < 0, trivial branch" : (G > dS ? "sqrt(3/8) branch" : ""));
  } else {
    c.skip("global_metrology", in.isometric ? no_hks : "non-isometric encoder");
  }
  if (in.isometric && hks && have(in.chi) && have(in.delta_group))
    c.add("global_charge_fluctuation", in.delta_group, global_bound_g(std::abs(dL - in.chi), dS));
  else
    c.skip("global_charge_fluctuation", "needs an isometric code with HKS");
  if (in.isometric && hks && have(in.delta_charge) && have(in.delta_group))
    c.add("global_charge_violation", in.delta_group, global_bound_g(in.delta_charge, dS));
  else
    c.skip("global_charge_violation", "needs an isometric code with HKS");

  // exactly covariant codes
  const bool covariant = have(in.delta_group) && in.delta_group <= 1e-9;
  if (covariant && haveJ && haveE)
    c.add("covariant_kl", e, dL / (2 * in.frak_j));
  else
    c.skip("covariant_kl", covariant ? no_hks : "code is not exactly covariant");
  if (covariant && haveF && haveB && haveE) {
    if (2 * e * in.frak_b >= dL)
      c.add("covariant_metrology", 2 * e * in.frak_b, dL, "2 eps B >= Delta H_L branch");
    else
      c.add("covariant_metrology", e * std::sqrt(1 - e * e) / (1 - 2 * e * in.frak_b / dL), dL / (2 * std::sqrt(in.frak_f)));
  } else {
    c.skip("covariant_metrology", covariant ? no_hks : "code is not exactly covariant");
  }
  if (covariant && haveF && haveE && 1 - 2 * e * e > 0)
    c.add("covariant_reference", e * std::sqrt(1 - e * e) / (1 - 2 * e * e), dL / (2 * std::sqrt(in.frak_f)));
  else
    c.skip("covariant_reference", covariant ? no_hks : "code is not exactly covariant");

  // exactly correcting codes
  const bool exact = have(in.eps_upper) && in.eps_upper <= 1e-8;
  if (exact && hks && in.isometric && have(in.delta_group)) {
    c.add("exact_global", in.delta_group, global_bound_g(dL, dS));
    if (have(in.delta_point)) c.add("exact_point", in.delta_point, dL);
  } else {
    c.skip("exact_global", exact ? "needs an isometric code with HKS" : "code is not exactly correcting");
    c.skip("exact_point", exact ? "needs an isometric code with HKS" : "code is not exactly correcting");
  }
  if (exact && hks && have(in.delta_charge))
    c.add("exact_charge", in.delta_charge, dL);
  else
    c.skip("exact_charge", exact ? no_hks : "code is not exactly correcting");
  if (exact && haveF && have(in.delta_group)) {
    EllResult l = ell_inverse(Ell::l1, dL / (2 * std::sqrt(in.frak_f)));
    c.add("exact_gate_metrology", in.delta_group, l.value);
  } else {
    c.skip("exact_gate_metrology", exact ? no_hks : "code is not exactly correcting");
  }

  // gate implementation error
  if (haveF && haveE && have(in.delta_group)) {
    EllResult l = ell_inverse(Ell::l1, dL / (2 * std::sqrt(in.frak_f)));
    c.add("gate_metrology", e + in.delta_group, l.value);
  } else {
    c.skip("gate_metrology", no_hks);
  }
  const bool rld_ok = in.noise_commutes && have(in.rld) && std::isfinite(in.rld) && in.rld > 0;
  if (rld_ok && haveE && have(in.delta_group)) {
    EllResult l = ell_inverse(Ell::l2, dL / std::sqrt(4 * in.rld));
    if (l.saturated)
      c.skip("gate_rld_worst", "argument beyond the l2 domain");
    else
      c.add("gate_rld_worst", e + in.delta_group, l.value);
  } else {
    c.skip("gate_rld_worst", in.noise_commutes ? "RLD QFI unavailable or infinite" : "noise does not commute with the symmetry");
  }
  if (rld_ok && have(in.eps_choi_lower) && have(in.delta_group_choi) && have(in.variance_HL) && in.variance_HL > 0) {
    EllResult l = ell_inverse(Ell::l3, std::sqrt(in.variance_HL / in.rld), in.variance_HL, dL);
    c.add("gate_rld_choi", in.eps_choi_lower + in.delta_group_choi, l.value);
  } else {
    c.skip("gate_rld_choi", in.noise_commutes ? "RLD QFI or Choi inputs unavailable" : "noise does not commute with the symmetry");
  }

  // local covariance vs epsilon
  if (in.isometric && haveJ && haveE) {
    if (have(in.delta_point)) c.add("local_kl_point", in.delta_point + 2 * e * in.frak_j, dL);
    if (have(in.delta_charge)) c.add("local_kl_charge", in.delta_charge + 2 * e * in.frak_j, dL);
  } else {
    c.skip("local_kl_point", in.isometric ? no_hks : "non-isometric encoder");
    c.skip("local_kl_charge", in.isometric ? no_hks : "non-isometric encoder");
  }
  if (haveF && haveB && haveE && have(in.delta_charge))
    c.add("local_metrology_charge", in.delta_charge + metro(e), dL);
  else
    c.skip("local_metrology_charge", no_hks);
  if (in.isometric && haveF && haveB && haveE && have(in.delta_point))
    c.add("local_metrology_point", in.delta_point + metro(e), dL);
  else
    c.skip("local_metrology_point", in.isometric ? no_hks : "non-isometric encoder");
  if (haveF && haveE && have(in.delta_point))
    c.add("local_point", in.delta_point + 2 * e * (std::sqrt((1 - e * e) * in.frak_f) + e * dL), dL);
  else
    c.skip("local_point", no_hks);

  // charge fluctuation and the spread of E^dag(H_S)
  if (in.isometric && haveJ && haveE && have(in.chi)) {
    c.add("charge_kl", 2 * e * in.frak_j, std::abs(in.chi));
    if (have(in.dual_range)) c.add("dual_spread_kl", 2 * e * in.frak_j, in.dual_range);
  } else {
    c.skip("charge_kl", in.isometric ? no_hks : "non-isometric encoder");
    c.skip("dual_spread_kl", in.isometric ? no_hks : "non-isometric encoder");
  }
  if (haveF && haveB && haveE && have(in.chi)) {
    c.add("charge_metrology", metro(e), std::abs(in.chi));
    if (have(in.dual_range)) c.add("dual_spread_metrology", metro(e), in.dual_range);
  } else {
    c.skip("charge_metrology", no_hks);
    c.skip("dual_spread_metrology", no_hks);
  }

  // refinement with delta_P* at one recovery and that recovery's own epsilon
  if (in.isometric && haveF && have(in.delta_point_star) && have(in.eps_star)) {
    const double es = in.eps_star;
    const double denom = 1 - 2 * es * es - in.delta_point_star / dL;
    if (denom > 0)
      c.add("refined_point", es * std::sqrt(1 - es * es) / denom, dL / std::sqrt(4 * in.frak_f));
    else
      c.skip("refined_point", "1 - 2 eps^2 <= delta_P*/Delta H_L, bound silent");
  } else {
    c.skip("refined_point", "delta_P* not evaluated");
  }

  // structural inequalities
  if (in.isometric && have(in.delta_point) && have(in.delta_charge))
    c.add("point_vs_charge", in.delta_point, in.delta_charge);
  else
    c.skip("point_vs_charge", "needs an isometric code");
  if (in.frak_exact && haveJ && haveF)
    c.add("frak_j_vs_f", in.frak_j * in.frak_j, in.frak_f);
  else
    c.skip("frak_j_vs_f", "needs both quantities from the global programs");
  if (have(in.delta_group_diamond) && have(in.delta_group))
    c.add("diamond_vs_group", in.delta_group_diamond, in.delta_group * in.delta_group / 2);
  else
    c.skip("diamond_vs_group", "diamond variant not evaluated");
  if (have(in.chi) && have(in.delta_charge))
    c.add("chi_vs_charge", std::abs(in.chi), dL - in.delta_charge);
  else
    c.skip("chi_vs_charge", "missing inputs");
  return c.out;
}

double transversal_gate_bound(double delta_TL, const std::vector<double>& delta_TS) {
  if (!(delta_TL > 0)) throw InputError("transversal_gate_bound: logical range must be positive", delta_TL);
  double sum = 0;
  for (double t : delta_TS) {
    if (!(t >= 0)) throw InputError("transversal_gate_bound: negative site range", t);
    sum += t;
  }
  const double a = 4 * kPi * std::sqrt(2.0 / 3.0) * (delta_TL + sum);
  const double b = 2 * std::sqrt(2.0) * kPi * std::sqrt(sum / delta_TL) * (delta_TL + sum);
  return std::max(a, b);
}

int clifford_level_cap(double D) {
  if (!(D >= 1)) throw InputError("clifford_level_cap: D must be at least 1", D);
  return static_cast<int>(std::floor(std::log2(D) + 1e-12));
}

}  // namespace covqec
