#include "covqec/metric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "covqec/sdp.hpp"
#include "covqec/spectral.hpp"

namespace covqec {

std::string to_string(Certification c) {
  switch (c) {
    case Certification::exact: return "exact";
    case Certification::upper_bound: return "upper_bound";
    case Certification::lower_bound: return "lower_bound";
    case Certification::heuristic: return "heuristic";
  }
  return "unknown";
}

namespace {

void check_state(const Mat& rho, const char* who) {
  if (rho.rows() != rho.cols()) throw InputError(std::string(who) + ": state must be square");
  double tr = std::abs(rho.trace() - 1.0);
  if (tr > STRUCT_TOL) throw InputError(std::string(who) + ": state trace differs from one", tr);
  if (hermiticity_residual(rho) > STRUCT_TOL) throw InputError(std::string(who) + ": state not Hermitian");
  double lo = lambda_min(rho);
  if (lo < -STRUCT_TOL) throw InputError(std::string(who) + ": state not positive", -lo);
}

// sqrt with clipping at the small negative eigenvalues rounding produces
Mat sqrt_clip(const Mat& A) {
  return herm_func(herm_part(A), [](double x) { return x > 0 ? std::sqrt(x) : 0.0; });
}

double fidelity_unchecked(const Mat& rho, const Mat& sigma) {
  double f = trace_norm(sqrt_clip(rho) * sqrt_clip(sigma));
  return std::clamp(f, 0.0, 1.0);
}

bool single_isometry(const KrausMap& ch, Mat& V) {
  if (ch.size() != 1) return false;
  const Mat& K = ch.kraus()[0];
  if (max_abs(K.adjoint() * K - Mat::Identity(K.cols(), K.cols())) > STRUCT_TOL) return false;
  V = K;
  return true;
}

// Output of (ch (x) 1) on the purification vec(sqrt(rho)).
Mat extended_output(const KrausMap& ch, const Mat& sqrt_rho) {
  const int d_o = ch.dim_out(), di = ch.dim_in();
  Mat out = Mat::Zero(d_o * di, d_o * di);
  for (const auto& K : ch.kraus()) {
    Mat A = K * sqrt_rho;
    Vec v(d_o * di);
    for (int o = 0; o < d_o; ++o)
      for (int i = 0; i < di; ++i) v(o * di + i) = A(o, i);
    out += v * v.adjoint();
  }
  return out;
}

}  // namespace

double state_fidelity(const Mat& rho, const Mat& sigma) {
  check_state(rho, "state_fidelity");
  check_state(sigma, "state_fidelity");
  if (rho.rows() != sigma.rows()) throw InputError("state_fidelity: dimension mismatch");
  return fidelity_unchecked(rho, sigma);
}

double purified_distance_states(const Mat& rho, const Mat& sigma) {
  double f = state_fidelity(rho, sigma);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double trace_distance(const Mat& rho, const Mat& sigma) { return 0.5 * trace_norm(rho - sigma); }

double choi_fidelity(const KrausMap& a, const KrausMap& b) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out()) throw InputError("choi_fidelity: dimension mismatch");
  const double d = a.dim_in();
  return fidelity_unchecked(choi(a) / d, choi(b) / d);
}

double choi_purified_distance(const KrausMap& a, const KrausMap& b) {
  double f = choi_fidelity(a, b);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double golden_max(const std::function<double(double)>& f, double a, double b, double tol, double* arg) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  double fx = f(x);
  double best = fx, bx = x;
  if (fc > best) best = fc, bx = c;
  if (fd > best) best = fd, bx = d;
  if (arg) *arg = bx;
  return best;
}

double numerical_range_distance(const Mat& M) {
  if (M.rows() != M.cols()) throw InputError("numerical_range_distance: square matrix required");
  auto g = [&](double phi) {
    Mat R = std::exp(cx(0, -phi)) * M;
    if (M.rows() == 2) {
      double a = R(0, 0).real(), d = R(1, 1).real();
      cx b = 0.5 * (R(0, 1) + std::conj(R(1, 0)));
      return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
    }
    return lambda_min(herm_part(R));
  };
  const int seeds = 256;
  std::vector<std::pair<double, double>> vals;
  for (int k = 0; k < seeds; ++k) {
    double phi = 2 * kPi * k / seeds;
    vals.push_back({g(phi), phi});
  }
  std::sort(vals.begin(), vals.end(), [](auto& x, auto& y) { return x.first > y.first; });
  double best = vals[0].first;
  const double h = 2 * kPi / seeds;
  for (int k = 0; k < 3; ++k) best = std::max(best, golden_max(g, vals[k].second - h, vals[k].second + h, 1e-12));
  return std::max(0.0, best);
}

DistanceResult isometric_comparator_distance(const std::vector<Mat>& kraus, const Mat& V) {
  if (kraus.empty()) throw InputError("isometric_comparator_distance: empty Kraus list");
  const int d = static_cast<int>(V.cols());
  for (const auto& K : kraus)
    if (K.rows() != V.rows() || K.cols() != V.cols()) throw InputError("isometric_comparator_distance: dimension mismatch");
  const auto& basis = herm_basis(d);
  const int nb = d * d;
  const int r = static_cast<int>(kraus.size());
  Mat T(r, nb);
  for (int i = 0; i < r; ++i) {
    Mat A = V.adjoint() * kraus[i];
    for (int a = 0; a < nb; ++a) T(i, a) = (A * basis[a]).trace();
  }
  RMat G = (T.adjoint() * T).real();
  G = 0.5 * (G + G.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(G);
  std::vector<RVec> rows;
  double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  for (int k = 0; k < nb; ++k)
    if (es.eigenvalues()(k) > 1e-14 * top) rows.push_back(std::sqrt(es.eigenvalues()(k)) * es.eigenvectors().col(k));
  const int q = static_cast<int>(rows.size());

  SdpBuilder b;
  int x0 = b.add_herm(d);
  int s = b.add_scalar();
  b.set_cost(s, 1.0);
  int blk_rho = b.add_block(d);
  b.add_herm_term(blk_rho, x0, d, [](const Mat& E) { return E; });
  std::vector<std::pair<int, double>> tr;
  for (int a = 0; a < d; ++a) tr.push_back({x0 + a, 1.0});
  b.add_equality(tr, 1.0);
  if (q > 0) {
    int blk = b.add_block(1 + q);
    Mat e = Mat::Zero(1 + q, 1 + q);
    e(0, 0) = 1;
    b.add_term(blk, s, e);
    Mat one = Mat::Zero(1 + q, 1 + q);
    one.bottomRightCorner(q, q) = Mat::Identity(q, q);
    b.add_const(blk, one);
    for (int a = 0; a < nb; ++a) {
      Mat col = Mat::Zero(q, 1);
      for (int k = 0; k < q; ++k) col(k, 0) = rows[k](a);
      // place L x in the lower-left column; builder mirrors the adjoint
      Mat F = Mat::Zero(1 + q, 1 + q);
      F.block(1, 0, q, 1) = col;
      F.block(0, 1, 1, q) = col.adjoint();
      b.add_term(blk, x0 + a, F);
    }
  } else {
    int blk = b.add_block(1);
    b.add_term(blk, s, Mat::Identity(1, 1));
  }
  SdpSolution sol = solve_sdp(b.build());
  DistanceResult out;
  out.ok = sol.certified();
  out.certified = sol.certified() ? Certification::exact : Certification::heuristic;
  out.dual_value = std::sqrt(std::max(0.0, 1.0 - std::clamp(sol.dual_value, 0.0, 1.0)));
  out.witness = herm_from_coords(sol.x, x0, d);
  // value at the optimal input, as a sum of non-negative terms so that near-exact maps are not
  // swamped by the rounding of 1 - F^2
  Mat sr = sqrt_clip(out.witness);
  sr /= std::sqrt(std::max(sr.squaredNorm(), 1e-300));
  double leak = 0, spread = 0, mass = 0;
  for (const auto& K : kraus) {
    const Mat L = V.adjoint() * K * sr;
    const cx t = (sr * L).trace();
    leak += (K * sr - V * L).squaredNorm();
    spread += (L - t * sr).squaredNorm();
    mass += (K * sr).squaredNorm();
  }
  const double deficit = std::abs(1 - mass) <= STRUCT_TOL ? 0.0 : 1 - mass;
  out.value = std::sqrt(std::clamp(deficit + leak + spread, 0.0, 1.0));
  return out;
}

namespace {

DistanceResult heuristic_worst_case(const KrausMap& a, const KrausMap& b, std::uint64_t seed) {
  const int d = a.dim_in();
  auto infid = [&](const RVec& p) {
    Mat G(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) G(i, j) = cx(p(2 * (i * d + j)), p(2 * (i * d + j) + 1));
    Mat rho = G * G.adjoint();
    double tr = rho.trace().real();
    if (tr <= 1e-300) return 0.0;
    rho /= tr;
    Mat sr = sqrt_clip(rho);
    double f = fidelity_unchecked(extended_output(a, sr), extended_output(b, sr));
    return 1.0 - f * f;
  };
  const int np = 2 * d * d;
  double best = -1;
  RVec best_p;
  for (int restart = 0; restart < 32; ++restart) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(restart));
    std::normal_distribution<double> g;
    RVec p(np);
    for (int k = 0; k < np; ++k) p(k) = g(rng);
    double val = infid(p), step = 0.1;
    for (int it = 0; it < 200 && step > 1e-10; ++it) {
      RVec grad(np);
      const double h = 1e-6;
      for (int k = 0; k < np; ++k) {
        RVec q = p;
        q(k) += h;
        double up = infid(q);
        q(k) -= 2 * h;
        grad(k) = (up - infid(q)) / (2 * h);
      }
      double gn = grad.norm();
      if (gn < 1e-12) break;
      RVec cand = p + step * grad / gn;
      double cv = infid(cand);
      if (cv > val) {
        p = cand;
        val = cv;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (val > best) best = val, best_p = p;
  }
  DistanceResult out;
  out.value = std::sqrt(std::max(0.0, best));
  out.certified = Certification::heuristic;
  Mat G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = cx(best_p(2 * (i * d + j)), best_p(2 * (i * d + j) + 1));
  Mat rho = G * G.adjoint();
  out.witness = rho / rho.trace().real();
  return out;
}

}  // namespace

DistanceResult worst_case_purified_distance(const KrausMap& a, const KrausMap& b, std::uint64_t seed) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out())
    throw InputError("worst_case_purified_distance: dimension mismatch");
  Mat Va, Vb;
  bool ia = single_isometry(a, Va), ib = single_isometry(b, Vb);
  if (ia && ib) {
    DistanceResult out;
    double dist = numerical_range_distance(Vb.adjoint() * Va);
    out.value = std::sqrt(std::max(0.0, 1.0 - dist * dist));
    out.dual_value = out.value;
    out.certified = Certification::exact;
    return out;
  }
  if (ib) return isometric_comparator_distance(a.kraus(), Vb);
  if (ia) return isometric_comparator_distance(b.kraus(), Va);
  return heuristic_worst_case(a, b, seed);
}

DistanceResult diamond_distance(const KrausMap& a, const KrausMap& b) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out()) throw InputError("diamond_distance: dimension mismatch");
  const int di = a.dim_in();
  // compress both outputs onto their joint range
  Mat cols(a.dim_out(), (a.size() + b.size()) * di);
  int c = 0;
  for (const auto& K : a.kraus()) cols.middleCols(di * c++, di) = K;
  for (const auto& K : b.kraus()) cols.middleCols(di * c++, di) = K;
  Mat Q = orth(cols, 1e-13);
  const int q = std::max<int>(1, static_cast<int>(Q.cols()));
  if (Q.cols() == 0) Q = Mat::Zero(a.dim_out(), 1);
  std::vector<Mat> ka, kb;
  for (const auto& K : a.kraus()) ka.push_back(Q.adjoint() * K);
  for (const auto& K : b.kraus()) kb.push_back(Q.adjoint() * K);
  Mat J = choi(KrausMap(ka)) - choi(KrausMap(kb));
  J = herm_part(J);
  const int n = q * di;

  SdpBuilder bld;
  int w0 = bld.add_herm(n);
  int r0 = bld.add_herm(di);
  const auto& bn = herm_basis(n);
  for (int k = 0; k < n * n; ++k) bld.set_cost(w0 + k, -(J * bn[k]).trace().real());
  int b0 = bld.add_block(n);
  bld.add_herm_term(b0, w0, n, [](const Mat& E) { return E; });
  int b1 = bld.add_block(n);
  bld.add_herm_term(b1, r0, di, [&](const Mat& E) { return kron(Mat::Identity(q, q), E); });
  bld.add_herm_term(b1, w0, n, [](const Mat& E) { return Mat(-E); });
  std::vector<std::pair<int, double>> tr;
  for (int k = 0; k < di; ++k) tr.push_back({r0 + k, 1.0});
  bld.add_equality(tr, 1.0);
  SdpSolution sol = solve_sdp(bld.build());
  DistanceResult out;
  out.ok = sol.certified();
  out.certified = sol.certified() ? Certification::exact : Certification::heuristic;
  out.value = std::max(0.0, -sol.primal_value);
  out.dual_value = std::max(0.0, -sol.dual_value);
  out.witness = herm_from_coords(sol.x, r0, di);
  return out;
}

double pure_state_qfi(const Vec& psi, const Vec& dpsi) {
  if (std::abs(psi.norm() - 1.0) > STRUCT_TOL) throw InputError("pure_state_qfi: state not normalized");
  cx ov = psi.dot(dpsi);
  return std::max(0.0, 4.0 * (dpsi.squaredNorm() - std::norm(ov)));
}

QfiResult channel_qfi_at_zero(const std::vector<Mat>& K_in, const std::vector<Mat>& dK_in) {
  if (K_in.empty() || K_in.size() != dK_in.size()) throw InputError("channel_qfi_at_zero: need matching Kraus and derivative lists");
  const int r0 = static_cast<int>(K_in.size());
  const int d_o = static_cast<int>(K_in[0].rows()), di = static_cast<int>(K_in[0].cols());

  // output compression
  Mat cols(d_o, 2 * r0 * di);
  for (int j = 0; j < r0; ++j) {
    cols.middleCols(2 * j * di, di) = K_in[j];
    cols.middleCols((2 * j + 1) * di, di) = dK_in[j];
  }
  Mat Q = orth(cols, 1e-13);
  if (Q.cols() == 0) return {0.0, true, Mat::Zero(1, 1)};
  const int q = static_cast<int>(Q.cols());
  // Kraus-index compression: rows [vec K_j, vec dK_j]
  Mat rowsM(r0, 2 * q * di);
  for (int j = 0; j < r0; ++j) {
    Mat a = Q.adjoint() * K_in[j], b = Q.adjoint() * dK_in[j];
    rowsM.row(j).head(q * di) = Eigen::Map<const Vec>(a.data(), q * di).transpose();
    rowsM.row(j).tail(q * di) = Eigen::Map<const Vec>(b.data(), q * di).transpose();
  }
  Eigen::BDCSVD<Mat> svd(rowsM, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sv = svd.singularValues();
  int r = 0;
  while (r < sv.size() && sv(r) > 1e-13 * std::max(1.0, sv(0))) ++r;
  if (r == 0) return {0.0, true, Mat::Zero(1, 1)};
  Mat reduced = svd.matrixU().leftCols(r).adjoint() * rowsM;
  std::vector<Mat> K(r), dK(r);
  for (int j = 0; j < r; ++j) {
    Vec a = reduced.row(j).head(q * di).transpose(), b = reduced.row(j).tail(q * di).transpose();
    K[j] = Eigen::Map<Mat>(a.data(), q, di);
    dK[j] = Eigen::Map<Mat>(b.data(), q, di);
  }

  Mat Ks(r * q, di), dKs(r * q, di);
  for (int j = 0; j < r; ++j) {
    Ks.middleRows(j * q, q) = K[j];
    dKs.middleRows(j * q, q) = dK[j];
  }
  SdpBuilder b;
  int h0 = b.add_herm(r);
  int t = b.add_scalar();
  b.set_cost(t, 1.0);
  const int n = di + r * q;
  int blk = b.add_block(n);
  Mat tI = Mat::Zero(n, n);
  tI.topLeftCorner(di, di) = Mat::Identity(di, di);
  b.add_term(blk, t, tI);
  Mat lower = Mat::Zero(n, n);
  lower.bottomRightCorner(r * q, r * q) = Mat::Identity(r * q, r * q);
  b.add_const(blk, lower);
  b.add_const(blk, dKs, di, 0);
  const auto& basis = herm_basis(r);
  for (int a = 0; a < r * r; ++a) b.add_term(blk, h0 + a, Mat(cx(0, -1) * kron(basis[a], Mat::Identity(q, q)) * Ks), di, 0);
  SdpSolution sol = solve_sdp(b.build());
  QfiResult out;
  out.certified = sol.certified();
  out.h = herm_from_coords(sol.x, h0, r);
  // exact value at the returned gauge generator
  Mat M = dKs - cx(0, 1) * kron(out.h, Mat::Identity(q, q)) * Ks;
  double exact = lambda_max(herm_part(M.adjoint() * M));
  out.value = 4.0 * std::max(0.0, exact);
  return out;
}

}  // namespace covqec
