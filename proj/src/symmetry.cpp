#include "covqec/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "covqec/spectral.hpp"

namespace covqec {

namespace {

// W^dag P_k W for the distinct eigenvalues of H_S, so W^dag U_S(theta) W is a short sum
struct IsoFamily {
  std::vector<double> lam;
  std::vector<Mat> G;

  explicit IsoFamily(const U1Code& c) {
    Mat Wt;
    RVec ev;
    if (c.physical.is_diagonal()) {
      Wt = c.W;
      ev = c.physical.diag();
    } else {
      Wt = c.physical.eigenvectors().adjoint() * c.W;
      ev = c.physical.eigenvalues();
    }
    std::map<long long, int> idx;
    for (Eigen::Index r = 0; r < Wt.rows(); ++r) {
      if (Wt.row(r).squaredNorm() == 0.0) continue;
      long long key = std::llround(ev(r) * 1e8);
      auto it = idx.find(key);
      int k;
      if (it == idx.end()) {
        k = static_cast<int>(lam.size());
        idx[key] = k;
        lam.push_back(ev(r));
        G.push_back(Mat::Zero(Wt.cols(), Wt.cols()));
      } else {
        k = it->second;
      }
      G[k] += Wt.row(r).adjoint() * Wt.row(r);
    }
  }

  Mat sandwich(double theta) const {  // W^dag e^{-i H_S theta} W
    Mat S = Mat::Zero(G.empty() ? 0 : G[0].rows(), G.empty() ? 0 : G[0].cols());
    for (size_t k = 0; k < lam.size(); ++k) S += std::exp(cx(0, -lam[k] * theta)) * G[k];
    return S;
  }
};

Mat apply_physical(const U1Code& c, const Mat& X) { return c.physical.apply(X); }

std::vector<Mat> shifted_kraus(const U1Code& c, double theta, bool physical_side) {
  std::vector<Mat> out;
  Mat UL = u1_unitary(c.logical, theta);
  for (const auto& K : c.encoder.kraus()) out.push_back(physical_side ? c.physical.exp_apply(theta, K) : Mat(K * UL));
  return out;
}

}  // namespace

U1Code make_code(std::string name, const Channel& encoder, const U1Rep& logical, const U1Rep& physical) {
  if (logical.dim() != encoder.dim_in()) throw InputError("code: logical charge dimension mismatch");
  if (physical.dim() != encoder.dim_out()) throw InputError("code: physical charge dimension mismatch");
  if (logical.range() <= STRUCT_TOL) throw InputError("code: logical charge is constant");
  if (physical.range() <= STRUCT_TOL) throw InputError("code: physical charge is constant");
  U1Code c;
  c.name = std::move(name);
  c.encoder = encoder;
  c.logical = logical;
  c.physical = physical;
  if (encoder.size() == 1) {
    const Mat& K = encoder.kraus()[0];
    double res = max_abs(K.adjoint() * K - Mat::Identity(K.cols(), K.cols()));
    if (res > STRUCT_TOL) throw InputError("code: single Kraus encoder is not an isometry", res);
    c.W = K;
  }
  c.tau = common_period({logical.eigenvalues(), physical.eigenvalues()});
  for (const RVec* ev : {&logical.eigenvalues(), &physical.eigenvalues()}) {
    for (Eigen::Index i = 1; i < ev->size(); ++i) {
      double r = std::abs(std::exp(cx(0, -((*ev)(i) - (*ev)(0)) * c.tau)) - 1.0);
      if (r > 1e-8) throw InputError("code: charges have no common period", r);
    }
  }
  c.epsilon_lower = [](const NoiseModel&) { return 0.0; };
  c.analytic_recovery = [](const NoiseModel&) { return std::optional<Recovery>(); };
  return c;
}

ScanResult theta_scan(const std::function<double(double)>& f, double tau, int grid, int refine) {
  std::vector<std::pair<double, double>> vals(grid);
  for (int k = 0; k < grid; ++k) {
    double th = tau * k / grid;
    vals[k] = {f(th), th};
  }
  std::vector<std::pair<double, double>> sorted = vals;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  ScanResult r;
  r.value = sorted[0].first;
  r.theta = sorted[0].second;
  const double h = tau / grid;
  for (int k = 0; k < std::min(refine, grid); ++k) {
    double arg = 0;
    double v = golden_max(f, sorted[k].second - h, sorted[k].second + h, 1e-10, &arg);
    if (v > r.value) {
      r.value = v;
      r.theta = std::fmod(arg + tau, tau);
    }
  }
  return r;
}

Mat dual_charge(const U1Code& c) {
  if (c.isometric()) return herm_part(c.W.adjoint() * apply_physical(c, c.W));
  Mat out = Mat::Zero(c.dim_logical(), c.dim_logical());
  for (const auto& K : c.encoder.kraus()) out += K.adjoint() * apply_physical(c, K);
  return herm_part(out);
}

ScanResult delta_group(const U1Code& c, std::uint64_t seed) {
  if (c.isometric()) {
    IsoFamily fam(c);
    auto f = [&](double th) {
      Mat M = u1_unitary(c.logical, th).adjoint() * fam.sandwich(th);
      double d = numerical_range_distance(M);
      return std::sqrt(std::max(0.0, 1.0 - d * d));
    };
    ScanResult r = theta_scan(f, c.tau);
    r.certified = Certification::exact;
    return r;
  }
  auto f = [&](double th) {
    Channel a(shifted_kraus(c, th, true)), b(shifted_kraus(c, th, false));
    return worst_case_purified_distance(a, b, seed).value;
  };
  ScanResult r = theta_scan(f, c.tau, 64, 1);
  r.certified = Certification::heuristic;
  return r;
}

ScanResult delta_group_choi(const U1Code& c) {
  const double d = c.dim_logical();
  if (c.isometric()) {
    IsoFamily fam(c);
    auto f = [&](double th) {
      Mat M = u1_unitary(c.logical, th).adjoint() * fam.sandwich(th);
      double fid = std::min(1.0, std::abs(M.trace()) / d);
      return std::sqrt(std::max(0.0, 1.0 - fid * fid));
    };
    return theta_scan(f, c.tau);
  }
  auto f = [&](double th) {
    return choi_purified_distance(KrausMap(shifted_kraus(c, th, true)), KrausMap(shifted_kraus(c, th, false)));
  };
  return theta_scan(f, c.tau);
}

ScanResult delta_group_diamond(const U1Code& c, int grid) {
  int failed = 0;
  auto f = [&](double th) {
    DistanceResult r = diamond_distance(KrausMap(shifted_kraus(c, th, true)), KrausMap(shifted_kraus(c, th, false)));
    if (!r.ok) ++failed;
    return r.value;
  };
  ScanResult r = theta_scan(f, c.tau, grid);
  r.failed_points = failed;
  r.ok = failed == 0;
  r.certified = r.ok ? Certification::exact : Certification::heuristic;
  return r;
}

double delta_point(const U1Code& c) {
  Mat HL = c.logical.dense();
  if (c.isometric()) {
    Mat HW = apply_physical(c, c.W);
    Mat A1 = herm_part(c.W.adjoint() * HW);
    Mat A2 = herm_part(HW.adjoint() * HW);
    Mat C = A2 - A1 * A1;
    Mat D = A1 - HL;
    auto g = [&](double b) {
      Mat E = D + b * Mat::Identity(D.rows(), D.cols());
      return -lambda_max(herm_part(C + E * E));
    };
    double R = 2 * (spectral_norm(D) + 1.0);
    double best = golden_max(g, -R, R, 1e-13);
    return 2.0 * std::sqrt(std::max(0.0, -best));
  }
  std::vector<Mat> K = c.encoder.kraus(), dK;
  for (const auto& k : K) dK.push_back(cx(0, -1) * (apply_physical(c, k) - k * HL));
  return std::sqrt(channel_qfi_at_zero(K, dK).value);
}

double delta_charge(const U1Code& c) { return spectral_range(c.logical.dense() - dual_charge(c)); }

ChiResult charge_fluctuation(const U1Code& c) {
  if (c.dim_logical() < 2) throw InputError("charge_fluctuation: logical dimension must be at least 2");
  Spectrum s = eigh(c.logical.dense());
  ChiResult r;
  r.zero_L = s.vectors.col(s.vectors.cols() - 1);
  r.one_L = s.vectors.col(0);
  Mat A = dual_charge(c);
  r.value = (r.zero_L.dot(A * r.zero_L) - r.one_L.dot(A * r.one_L)).real();
  return r;
}

FrakBResult frak_b(const U1Code& c) {
  Mat A1 = dual_charge(c), A2;
  if (c.isometric()) {
    Mat HW = apply_physical(c, c.W);
    A2 = herm_part(HW.adjoint() * HW);
  } else {
    A2 = Mat::Zero(c.dim_logical(), c.dim_logical());
    for (const auto& K : c.encoder.kraus()) {
      Mat HK = apply_physical(c, K);
      A2 += HK.adjoint() * HK;
    }
    A2 = herm_part(A2);
  }
  auto var = [&](const Vec& psi) {
    double m1 = psi.dot(A1 * psi).real(), m2 = psi.dot(A2 * psi).real();
    return m2 - m1 * m1;
  };
  FrakBResult r;
  r.cap = std::sqrt(2.0) * c.physical.range();
  const int d = c.dim_logical();
  double best = 0;
  if (d == 2) {
    auto bloch = [&](double t, double p) {
      Vec psi(2);
      psi << std::cos(t / 2), std::exp(cx(0, p)) * std::sin(t / 2);
      return var(psi);
    };
    const int np = 720, nt = 360;
    double bt = 0, bp = 0;
    best = -1;
    for (int i = 0; i <= nt; ++i)
      for (int j = 0; j < np; ++j) {
        double t = kPi * i / nt, p = 2 * kPi * j / np;
        double v = bloch(t, p);
        if (v > best) best = v, bt = t, bp = p;
      }
    double ht = kPi / nt, hp = 2 * kPi / np;
    for (int round = 0; round < 40; ++round) {
      double nt_arg = bt, np_arg = bp;
      golden_max([&](double t) { return bloch(t, bp); }, bt - ht, bt + ht, 1e-13, &nt_arg);
      bt = nt_arg;
      best = golden_max([&](double p) { return bloch(bt, p); }, bp - hp, bp + hp, 1e-13, &np_arg);
      bp = np_arg;
      best = std::max(best, bloch(bt, bp));
    }
    r.certified = Certification::exact;
  } else {
    for (int start = 0; start < 32; ++start) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(start));
      std::normal_distribution<double> g;
      Vec psi(d);
      for (int i = 0; i < d; ++i) psi(i) = cx(g(rng), g(rng));
      psi.normalize();
      double step = 0.1, v = var(psi);
      for (int it = 0; it < 500 && step > 1e-12; ++it) {
        double m1 = psi.dot(A1 * psi).real();
        Vec grad = 2.0 * (A2 * psi - 2 * m1 * (A1 * psi));
        grad -= psi.dot(grad) * psi;
        if (grad.norm() < 1e-14) break;
        Vec cand = (psi + step * grad / grad.norm()).normalized();
        double cv = var(cand);
        if (cv > v) {
          psi = cand;
          v = cv;
          step *= 1.5;
        } else {
          step *= 0.5;
        }
      }
      best = std::max(best, v);
    }
    r.certified = Certification::lower_bound;
  }
  r.value = std::sqrt(std::max(0.0, 8 * best));
  return r;
}

double delta_point_star(const U1Code& c, const NoiseModel& noise, const Recovery& rec) {
  if (noise.dim_in() != c.dim_physical()) throw InputError("delta_point_star: noise dimension mismatch");
  if (rec.dim_logical != c.dim_logical()) throw InputError("delta_point_star: recovery dimension mismatch");
  const auto& ks = c.encoder.kraus();
  const int d = c.dim_logical(), m = static_cast<int>(ks.size());
  Mat X(c.dim_physical(), 2 * m * d);
  for (int e = 0; e < m; ++e) {
    X.middleCols(e * d, d) = ks[e];
    X.middleCols((m + e) * d, d) = apply_physical(c, ks[e]);
  }
  Mat HL = c.logical.dense();
  std::vector<Mat> K, dK;
  for (const auto& L : logical_kraus(rec, noise, X)) {
    for (int e = 0; e < m; ++e) {
      Mat A = L.middleCols(e * d, d), B = L.middleCols((m + e) * d, d);
      K.push_back(A);
      dK.push_back(cx(0, -1) * (B - A * HL));
    }
  }
  return std::sqrt(channel_qfi_at_zero(K, dK).value);
}

SymmetryReport symmetry_report(const U1Code& c, bool with_diamond) {
  SymmetryReport r;
  r.delta_group = delta_group(c);
  r.delta_group_choi = delta_group_choi(c);
  if (with_diamond) r.delta_group_diamond = delta_group_diamond(c);
  r.delta_point = delta_point(c);
  r.delta_charge = delta_charge(c);
  r.chi = charge_fluctuation(c).value;
  FrakBResult b = frak_b(c);
  r.frak_b = b.value;
  r.frak_b_cert = b.certified;
  return r;
}

}  // namespace covqec
