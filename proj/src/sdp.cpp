#include "covqec/sdp.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <map>
#include <mutex>

namespace covqec {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

const std::vector<Mat>& herm_basis(int d) {
  static std::mutex mu;
  static std::map<int, std::vector<Mat>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;
  std::vector<Mat> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    Mat e = Mat::Zero(d, d);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Mat e = Mat::Zero(d, d);
      e(i, j) = r;
      e(j, i) = r;
      basis.push_back(e);
      Mat f = Mat::Zero(d, d);
      f(i, j) = cx(0, -r);
      f(j, i) = cx(0, r);
      basis.push_back(f);
    }
  return cache.emplace(d, std::move(basis)).first->second;
}

Mat herm_from_coords(const RVec& x, int offset, int d) {
  const auto& basis = herm_basis(d);
  Mat out = Mat::Zero(d, d);
  for (int a = 0; a < d * d; ++a) out += x(offset + a) * basis[a];
  return out;
}

// ---------------------------------------------------------------- builder

int SdpBuilder::add_scalar() { return nvars_++; }

int SdpBuilder::add_herm(int d) {
  int first = nvars_;
  nvars_ += d * d;
  return first;
}

void SdpBuilder::set_cost(int var, double c) { costs_.emplace_back(var, c); }

int SdpBuilder::add_block(int dim) {
  SdpProblem::Block b;
  b.F0 = Mat::Zero(dim, dim);
  blocks_.push_back(std::move(b));
  return static_cast<int>(blocks_.size()) - 1;
}

namespace {
void place(Mat& target, const Mat& F, int row, int col) {
  target.block(row, col, F.rows(), F.cols()) += F;
  if (row != col) target.block(col, row, F.cols(), F.rows()) += F.adjoint();
}
}  // namespace

void SdpBuilder::add_const(int blk, const Mat& F0, int row, int col) { place(blocks_[blk].F0, F0, row, col); }

void SdpBuilder::add_term(int blk, int var, const Mat& F, int row, int col) {
  auto& terms = blocks_[blk].terms;
  auto it = std::find_if(terms.begin(), terms.end(), [&](const auto& t) { return t.first == var; });
  if (it == terms.end()) {
    terms.emplace_back(var, Mat::Zero(blocks_[blk].F0.rows(), blocks_[blk].F0.cols()));
    it = terms.end() - 1;
  }
  place(it->second, F, row, col);
}

void SdpBuilder::add_equality(const std::vector<std::pair<int, double>>& coeffs, double rhs) {
  eq_rows_.push_back(coeffs);
  eq_rhs_.push_back(rhs);
}

SdpProblem SdpBuilder::build() const {
  SdpProblem p;
  p.c = RVec::Zero(nvars_);
  for (auto [v, c] : costs_) p.c(v) += c;
  p.blocks = blocks_;
  p.A = RMat::Zero(static_cast<Eigen::Index>(eq_rows_.size()), nvars_);
  p.b = RVec::Zero(static_cast<Eigen::Index>(eq_rows_.size()));
  for (size_t r = 0; r < eq_rows_.size(); ++r) {
    for (auto [v, a] : eq_rows_[r]) p.A(r, v) += a;
    p.b(r) = eq_rhs_[r];
  }
  return p;
}

// ---------------------------------------------------------------- solver

namespace {

// Real symmetric image of a Hermitian matrix; complex blocks double in size.
RMat embed(const Mat& H, bool complex_block) {
  if (!complex_block) return 0.5 * (H.real() + H.real().transpose());
  const Eigen::Index n = H.rows();
  RMat A = 0.5 * (H.real() + H.real().transpose());
  RMat B = 0.5 * (H.imag() - H.imag().transpose());
  RMat out(2 * n, 2 * n);
  out << A, -B, B, A;
  return out;
}

// Tr(embed(F) Z) = Re Tr(F Zc) with this Zc.
Mat unembed_dual(const RMat& Z, Eigen::Index n, bool complex_block) {
  if (!complex_block) return Z.cast<cx>();
  Mat out(n, n);
  out.real() = Z.topLeftCorner(n, n) + Z.bottomRightCorner(n, n);
  out.imag() = Z.bottomLeftCorner(n, n) - Z.topRightCorner(n, n);
  return 0.5 * (out + out.adjoint());
}

struct RealBlock {
  Eigen::Index n = 0;
  RMat F0;
  RMat Fvec;                 // n*n x m, column j = vec(F_j)
  std::vector<int> present;  // columns that are not identically zero
  bool cplx = false;
  Eigen::Index orig_n = 0;
};

double max_step(const RMat& X, const RMat& dX) {
  Eigen::LLT<RMat> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  RMat T = llt.matrixL().solve(dX);
  RMat Tt = T.transpose();
  T = llt.matrixL().solve(Tt);
  T = 0.5 * (T + T.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(T, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues()(0);
  if (lo >= 0) return INFINITY;
  return -1.0 / lo;
}

RMat sym(const RMat& X) { return 0.5 * (X + X.transpose()); }

double inner(const RMat& A, const RMat& B) { return (A.array() * B.array()).sum(); }

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opt) {
  const Eigen::Index m = p.c.size();
  if (m == 0) throw InputError("solve_sdp: at least one variable required");
  if (p.blocks.empty()) throw InputError("solve_sdp: at least one block required");
  for (const auto& blk : p.blocks) {
    if (blk.F0.rows() != blk.F0.cols() || blk.F0.rows() == 0) throw InputError("solve_sdp: bad block shape");
    for (const auto& [v, F] : blk.terms) {
      if (v < 0 || v >= m) throw InputError("solve_sdp: variable index out of range");
      if (F.rows() != blk.F0.rows() || F.cols() != blk.F0.cols())
        throw InputError("solve_sdp: coefficient shape mismatch");
    }
  }

  SdpSolution sol;

  // ---- eliminate equalities: x = x0 + N z
  RVec x0 = RVec::Zero(m);
  RMat N = RMat::Identity(m, m);
  if (p.A.rows() > 0) {
    if (p.A.cols() != m || p.b.size() != p.A.rows()) throw InputError("solve_sdp: equality shape mismatch");
    Eigen::JacobiSVD<RMat> svd(p.A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVec& s = svd.singularValues();
    double smax = s.size() ? s(0) : 0.0;
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > 1e-11 * std::max(1.0, smax)) ++r;
    const RMat& U = svd.matrixU();
    const RMat& V = svd.matrixV();
    RVec ub = U.leftCols(r).transpose() * p.b;
    for (Eigen::Index i = 0; i < r; ++i) ub(i) /= s(i);
    x0 = V.leftCols(r) * ub;
    RVec resid = p.b - p.A * x0;
    if (resid.norm() > 1e-9 * (1.0 + p.b.norm())) {
      sol.status = SdpStatus::infeasible;
      sol.ray = resid / resid.norm();
      sol.x = x0;
      sol.primal_value = INFINITY;
      sol.dual_value = INFINITY;
      sol.primal_infeas = resid.norm();
      return sol;
    }
    N = V.rightCols(m - r);
  }
  const Eigen::Index mr = N.cols();
  const RVec cr = N.transpose() * p.c;
  const double offset = p.c.dot(x0);

  // ---- reduce and embed blocks
  std::vector<RealBlock> blocks;
  for (const auto& blk : p.blocks) {
    RealBlock rb;
    rb.orig_n = blk.F0.rows();
    rb.cplx = blk.F0.imag().cwiseAbs().maxCoeff() > 0.0;
    for (const auto& t : blk.terms) rb.cplx = rb.cplx || t.second.imag().cwiseAbs().maxCoeff() > 0.0;
    Mat F0 = blk.F0;
    for (const auto& [v, F] : blk.terms)
      if (x0(v) != 0.0) F0 += x0(v) * F;
    rb.F0 = embed(F0, rb.cplx);
    rb.n = rb.F0.rows();
    rb.Fvec = RMat::Zero(rb.n * rb.n, mr);
    for (Eigen::Index j = 0; j < mr; ++j) {
      Mat Fj = Mat::Zero(rb.orig_n, rb.orig_n);
      bool any = false;
      for (const auto& [v, F] : blk.terms) {
        double w = N(v, j);
        if (std::abs(w) > 1e-14) {
          Fj += w * F;
          any = true;
        }
      }
      if (any && Fj.cwiseAbs().maxCoeff() > 1e-14) {
        RMat Fr = embed(Fj, rb.cplx);
        rb.Fvec.col(j) = Eigen::Map<const RVec>(Fr.data(), Fr.size());
        rb.present.push_back(static_cast<int>(j));
      }
    }
    blocks.push_back(std::move(rb));
  }
  const size_t nb = blocks.size();

  auto finish_x = [&](const RVec& z) { return RVec(x0 + N * z); };

  if (mr == 0) {
    // fully determined by the equalities
    sol.x = x0;
    sol.primal_value = offset;
    sol.dual_value = offset;
    bool psd = true;
    for (const auto& b : blocks) {
      Eigen::SelfAdjointEigenSolver<RMat> es(b.F0, Eigen::EigenvaluesOnly);
      psd = psd && es.eigenvalues()(0) >= -1e-9;
      sol.Z.push_back(Mat::Zero(b.orig_n, b.orig_n));
    }
    sol.status = psd ? SdpStatus::optimal : SdpStatus::infeasible;
    sol.rel_gap = 0;
    sol.primal_infeas = 0;
    sol.dual_infeas = 0;
    return sol;
  }

  // ---- initial point
  double ntot = 0, normF0 = 0, normF = 0;
  for (const auto& b : blocks) {
    ntot += static_cast<double>(b.n);
    normF0 = std::max(normF0, b.F0.norm());
  }
  double ratio = 0;
  for (Eigen::Index j = 0; j < mr; ++j) {
    double fj = 0;
    for (const auto& b : blocks) fj += b.Fvec.col(j).squaredNorm();
    fj = std::sqrt(fj);
    normF = std::max(normF, fj);
    ratio = std::max(ratio, (1.0 + std::abs(cr(j))) / (1.0 + fj));
  }
  const double normc = cr.norm();
  const double eta = std::max({10.0, std::sqrt(ntot), normF0, normF});
  const double xi = std::max({10.0, std::sqrt(ntot), ntot * ratio});

  RVec x = RVec::Zero(mr);
  std::vector<RMat> S(nb), Z(nb);
  for (size_t b = 0; b < nb; ++b) {
    S[b] = eta * RMat::Identity(blocks[b].n, blocks[b].n);
    Z[b] = xi * RMat::Identity(blocks[b].n, blocks[b].n);
  }

  auto Fx = [&](size_t b, const RVec& v) {
    RVec fv = blocks[b].Fvec * v;
    return RMat(Eigen::Map<RMat>(fv.data(), blocks[b].n, blocks[b].n));
  };

  struct Best {
    double score = INFINITY;
    RVec x;
    std::vector<RMat> Z;
    double pobj = 0, dobj = 0, gap = INFINITY, pinf = INFINITY, dinf = INFINITY;
  } best;

  const bool trace = std::getenv("COVQEC_SDP_TRACE") != nullptr;
  int stall = 0;
  int it = 0;
  bool diverged_primal = false, diverged_dual = false;
  bool converged = false;
  for (; it < opt.max_iter; ++it) {
    std::vector<RMat> Rp(nb);
    double rp2 = 0, pobj = cr.dot(x) + offset, dobj = offset, sz = 0;
    RVec rd = cr;
    for (size_t b = 0; b < nb; ++b) {
      Rp[b] = blocks[b].F0 + Fx(b, x) - S[b];
      rp2 += Rp[b].squaredNorm();
      rd -= blocks[b].Fvec.transpose() * Eigen::Map<const RVec>(Z[b].data(), Z[b].size());
      dobj -= inner(blocks[b].F0, Z[b]);
      sz += inner(S[b], Z[b]);
    }
    const double mu = sz / ntot;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double pinf = std::sqrt(rp2) / (1.0 + normF0);
    const double dinf = rd.norm() / (1.0 + normc);
    const double score = std::max({gap, pinf, dinf});
    if (trace) std::fprintf(stderr, "it %3d pobj %.12e dobj %.12e gap %.2e pinf %.2e dinf %.2e mu %.2e\n", it, pobj, dobj, gap, pinf, dinf, mu);
    if (score < best.score) {
      best = {score, x, Z, pobj, dobj, gap, pinf, dinf};
    }
    if (gap < opt.gap_tol && pinf < opt.feas_tol && dinf < opt.feas_tol) {
      converged = true;
      break;
    }
    if (!std::isfinite(score)) break;
    // improving rays once the iterates blow up
    double trz = 0;
    for (size_t b = 0; b < nb; ++b) trz += Z[b].trace();
    if (trz > 1e8 * (1.0 + normc + normF0)) {
      RVec fz = RVec::Zero(mr);
      double f0z = 0;
      for (size_t b = 0; b < nb; ++b) {
        fz += blocks[b].Fvec.transpose() * Eigen::Map<const RVec>(Z[b].data(), Z[b].size());
        f0z += inner(blocks[b].F0, Z[b]);
      }
      if (fz.norm() / trz < 1e-8 && -f0z / trz > 1e-8) {
        diverged_dual = true;
        break;
      }
    }
    if (x.norm() > 1e8 * (1.0 + normc + normF0)) {
      RVec xn = x / x.norm();
      bool psd = true;
      for (size_t b = 0; b < nb && psd; ++b) {
        Eigen::SelfAdjointEigenSolver<RMat> es(Fx(b, xn), Eigen::EigenvaluesOnly);
        psd = es.eigenvalues()(0) >= -1e-8;
      }
      if (psd && cr.dot(xn) < -1e-8) {
        diverged_primal = true;
        break;
      }
    }

    // ---- Schur complement
    std::vector<RMat> Sinv(nb);
    RMat M = RMat::Zero(mr, mr);
    bool chol_ok = true;
    for (size_t b = 0; b < nb; ++b) {
      const auto& blk = blocks[b];
      Eigen::LLT<RMat> llt(S[b]);
      if (llt.info() != Eigen::Success) {
        chol_ok = false;
        break;
      }
      Sinv[b] = llt.solve(RMat::Identity(blk.n, blk.n));
      Sinv[b] = sym(Sinv[b]);
      if (blk.present.empty()) continue;
      RMat G(blk.n * blk.n, static_cast<Eigen::Index>(blk.present.size()));
      RMat Fp(blk.n * blk.n, static_cast<Eigen::Index>(blk.present.size()));
      for (size_t q = 0; q < blk.present.size(); ++q) {
        int j = blk.present[q];
        Eigen::Map<const RMat> Fj(blk.Fvec.col(j).data(), blk.n, blk.n);
        RMat Gj = Z[b] * Fj * Sinv[b];
        G.col(q) = Eigen::Map<const RVec>(Gj.data(), Gj.size());
        Fp.col(q) = blk.Fvec.col(j);
      }
      RMat Mb = Fp.transpose() * G;
      for (size_t a = 0; a < blk.present.size(); ++a)
        for (size_t q = 0; q < blk.present.size(); ++q) M(blk.present[a], blk.present[q]) += Mb(a, q);
    }
    if (!chol_ok) break;
    M = sym(M);
    double diagmax = M.diagonal().cwiseAbs().maxCoeff();
    Eigen::LLT<RMat> mchol(M);
    if (mchol.info() != Eigen::Success) {
      M.diagonal().array() += 1e-13 * std::max(1.0, diagmax);
      mchol.compute(M);
    }
    Eigen::LDLT<RMat> mldlt;
    bool use_ldlt = mchol.info() != Eigen::Success;
    if (use_ldlt) mldlt.compute(M);

    auto solve_dir = [&](const std::vector<RMat>& SinvRc, RVec& dx, std::vector<RMat>& dS, std::vector<RMat>& dZ) {
      RVec h = -rd;
      for (size_t b = 0; b < nb; ++b) {
        RMat T = SinvRc[b] - Sinv[b] * Rp[b] * Z[b];
        h += blocks[b].Fvec.transpose() * Eigen::Map<const RVec>(T.data(), T.size());
      }
      dx = use_ldlt ? RVec(mldlt.solve(h)) : RVec(mchol.solve(h));
      dS.resize(nb);
      dZ.resize(nb);
      for (size_t b = 0; b < nb; ++b) {
        dS[b] = Rp[b] + Fx(b, dx);
        dZ[b] = sym(SinvRc[b] - Sinv[b] * dS[b] * Z[b]);
      }
    };

    // predictor
    std::vector<RMat> rc(nb);
    for (size_t b = 0; b < nb; ++b) rc[b] = -Z[b];
    RVec dxa;
    std::vector<RMat> dSa, dZa;
    solve_dir(rc, dxa, dSa, dZa);
    double ap = 1.0, ad = 1.0;
    for (size_t b = 0; b < nb; ++b) {
      ap = std::min(ap, max_step(S[b], dSa[b]));
      ad = std::min(ad, max_step(Z[b], dZa[b]));
    }
    double mu_aff = 0;
    for (size_t b = 0; b < nb; ++b) mu_aff += inner(S[b] + ap * dSa[b], Z[b] + ad * dZa[b]);
    mu_aff /= ntot;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // corrector
    for (size_t b = 0; b < nb; ++b) rc[b] = sigma * mu * Sinv[b] - Z[b] - Sinv[b] * dSa[b] * dZa[b];
    RVec dx;
    std::vector<RMat> dS, dZ;
    solve_dir(rc, dx, dS, dZ);
    double sp = INFINITY, sd = INFINITY;
    for (size_t b = 0; b < nb; ++b) {
      sp = std::min(sp, max_step(S[b], dS[b]));
      sd = std::min(sd, max_step(Z[b], dZ[b]));
    }
    const double tau = 0.98;
    ap = std::min(1.0, tau * sp);
    ad = std::min(1.0, tau * sd);
    if (trace) std::fprintf(stderr, "   sigma %.2e sp %.3e sd %.3e\n", sigma, sp, sd);
    x += ap * dx;
    for (size_t b = 0; b < nb; ++b) {
      S[b] = sym(S[b] + ap * dS[b]);
      Z[b] = sym(Z[b] + ad * dZ[b]);
    }
    if (ap < 1e-9 && ad < 1e-9) {
      if (++stall >= 3) break;
    } else {
      stall = 0;
    }
  }

  const RVec& xb = converged ? x : best.x;
  const std::vector<RMat>& Zb = converged ? Z : best.Z;
  sol.x = finish_x(xb);
  sol.iterations = it;
  sol.primal_value = p.c.dot(sol.x);
  sol.dual_value = offset;
  for (size_t b = 0; b < nb; ++b) sol.dual_value -= inner(blocks[b].F0, Zb[b]);
  for (size_t b = 0; b < nb; ++b) sol.Z.push_back(unembed_dual(Zb[b], blocks[b].orig_n, blocks[b].cplx));
  sol.rel_gap = best.gap;
  sol.primal_infeas = best.pinf;
  sol.dual_infeas = best.dinf;
  if (converged) {
    sol.rel_gap = std::abs(sol.primal_value - sol.dual_value) /
                  (1.0 + std::abs(sol.primal_value) + std::abs(sol.dual_value));
  }
  const bool gap_ok = std::abs(sol.primal_value - sol.dual_value) <= SDP_TOL * (1.0 + std::abs(sol.primal_value));
  if (gap_ok && sol.primal_infeas <= 1e-8 && sol.dual_infeas <= 1e-8) {
    sol.status = SdpStatus::optimal;
  } else if (diverged_primal) {
    sol.status = SdpStatus::unbounded;
  } else if (diverged_dual) {
    sol.status = SdpStatus::infeasible;
  } else {
    sol.status = SdpStatus::max_iter;
  }
  return sol;
}

}  // namespace covqec
