#include "covqec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace covqec {

namespace {

std::string fmt_residual(const char* what, double r) {
  std::ostringstream os;
  os << what << " (residual " << r << ")";
  return os.str();
}

void normalize_phase(Eigen::Ref<Vec> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double a = std::abs(v(i));
    if (a > 1e-12) {
      v *= std::conj(v(i)) / a;
      return;
    }
  }
}

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i).real() - b(i).real()) > 1e-12) return a(i).real() < b(i).real();
    if (std::abs(a(i).imag() - b(i).imag()) > 1e-12) return a(i).imag() < b(i).imag();
  }
  return false;
}

}  // namespace

Operator::Operator(Mat data, unsigned tags) : data_(std::move(data)), tags_(tags) {
  const Eigen::Index r = data_.rows(), c = data_.cols();
  if (r == 0 || c == 0) throw InputError("empty operator");
  if (tags_ & (kHermitian | kUnitary | kPsd)) {
    if (r != c) throw InputError("tag requires a square operator");
  }
  if (tags_ & (kHermitian | kPsd)) {
    double res = hermiticity_residual(data_);
    if (res > 1e-12) throw InputError(fmt_residual("hermitian tag violated", res), res);
  }
  if (tags_ & (kIsometry | kUnitary)) {
    Mat g = data_.adjoint() * data_ - Mat::Identity(c, c);
    double res = max_abs(g);
    if (res > STRUCT_TOL) throw InputError(fmt_residual("isometry tag violated", res), res);
  }
  if (tags_ & kUnitary) {
    Mat g = data_ * data_.adjoint() - Mat::Identity(r, r);
    double res = max_abs(g);
    if (res > STRUCT_TOL) throw InputError(fmt_residual("unitary tag violated", res), res);
  }
  if (tags_ & kPsd) {
    double lo = lambda_min(data_);
    if (lo < -STRUCT_TOL) throw InputError(fmt_residual("psd tag violated", -lo), -lo);
  }
}

double max_abs(const Mat& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

double hermiticity_residual(const Mat& A) {
  if (A.rows() != A.cols()) return INFINITY;
  return max_abs(A - A.adjoint());
}

Mat herm_part(const Mat& A) { return 0.5 * (A + A.adjoint()); }

Spectrum eigh(const Mat& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw InputError("eigh: square nonempty matrix required");
  double res = hermiticity_residual(A);
  double scale = std::max(1.0, max_abs(A));
  if (res > STRUCT_TOL * scale) throw InputError(fmt_residual("eigh: non-Hermitian input", res), res);

  Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(A));
  Spectrum s{es.eigenvalues(), es.eigenvectors()};
  const Eigen::Index n = s.values.size();
  for (Eigen::Index k = 0; k < n; ++k) normalize_phase(s.vectors.col(k));

  // deterministic order inside numerically degenerate clusters (lexicographically largest first)
  double tie = 1e-12 * std::max(1.0, s.values.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && s.values(end) - s.values(end - 1) <= tie) ++end;
    if (end - start > 1) {
      std::vector<Eigen::Index> idx(end - start);
      std::iota(idx.begin(), idx.end(), start);
      std::vector<Vec> cols;
      for (auto i : idx) cols.push_back(s.vectors.col(i));
      std::vector<Eigen::Index> order(idx.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return lex_less(cols[b], cols[a]); });
      for (size_t k = 0; k < order.size(); ++k) s.vectors.col(start + k) = cols[order[k]];
    }
    start = end;
  }
  return s;
}

RVec eigvalsh(const Mat& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw InputError("eigvalsh: square nonempty matrix required");
  double res = hermiticity_residual(A);
  if (res > STRUCT_TOL * std::max(1.0, max_abs(A)))
    throw InputError(fmt_residual("eigvalsh: non-Hermitian input", res), res);
  Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(A), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double spectral_range(const Mat& A) {
  RVec ev = eigvalsh(A);
  return std::max(0.0, ev(ev.size() - 1) - ev(0));
}

double lambda_max(const Mat& A) {
  RVec ev = eigvalsh(A);
  return ev(ev.size() - 1);
}

double lambda_min(const Mat& A) { return eigvalsh(A)(0); }

Mat herm_func(const Mat& A, const std::function<double(double)>& f) {
  Spectrum s = eigh(A);
  RVec fv(s.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) {
    fv(i) = f(s.values(i));
    if (!std::isfinite(fv(i))) throw DomainError("herm_func: function undefined on eigenvalue", s.values(i));
  }
  return s.vectors * fv.cast<cx>().asDiagonal() * s.vectors.adjoint();
}

Mat sqrtm_psd(const Mat& A) {
  return herm_func(A, [](double x) {
    if (x < -1e-10) throw DomainError("sqrt of negative eigenvalue", x);
    return x > 0 ? std::sqrt(x) : 0.0;
  });
}

Mat inv_sqrtm_psd(const Mat& A, double support_tol) {
  Spectrum s = eigh(A);
  double top = std::max(s.values.cwiseAbs().maxCoeff(), 1e-300);
  RVec fv(s.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) {
    double x = s.values(i);
    if (x < -1e-10 * std::max(1.0, top)) throw DomainError("inverse sqrt of negative eigenvalue", x);
    fv(i) = x > support_tol * top ? 1.0 / std::sqrt(x) : 0.0;
  }
  return s.vectors * fv.cast<cx>().asDiagonal() * s.vectors.adjoint();
}

Mat pinv_herm(const Mat& A, double tol, std::vector<int>* support) {
  Spectrum s = eigh(A);
  double top = std::max(s.values.cwiseAbs().maxCoeff(), 1e-300);
  RVec fv = RVec::Zero(s.values.size());
  if (support) support->clear();
  for (Eigen::Index i = 0; i < fv.size(); ++i) {
    if (std::abs(s.values(i)) > tol * top) {
      fv(i) = 1.0 / s.values(i);
      if (support) support->push_back(static_cast<int>(i));
    }
  }
  return s.vectors * fv.cast<cx>().asDiagonal() * s.vectors.adjoint();
}

RVec singular_values(const Mat& A) {
  Eigen::BDCSVD<Mat> svd(A);
  return svd.singularValues();
}

double trace_norm(const Mat& A) { return singular_values(A).sum(); }

double spectral_norm(const Mat& A) {
  RVec s = singular_values(A);
  return s.size() ? s(0) : 0.0;
}

Mat kron(const Mat& A, const Mat& B) {
  Mat out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

Mat kron_all(const std::vector<Mat>& ops) {
  if (ops.empty()) return Mat::Identity(1, 1);
  Mat out = ops[0];
  for (size_t i = 1; i < ops.size(); ++i) out = kron(out, ops[i]);
  return out;
}

Mat partial_trace(const Mat& A, const std::vector<int>& dims, const std::vector<int>& keep_in) {
  long total = 1;
  for (int d : dims) {
    if (d <= 0) throw InputError("partial_trace: nonpositive subsystem dimension");
    total *= d;
  }
  if (A.rows() != total || A.cols() != total) throw InputError("partial_trace: dims do not match operator");
  std::vector<int> keep = keep_in;
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  const int ns = static_cast<int>(dims.size());
  std::vector<bool> kept(ns, false);
  for (int k : keep) {
    if (k < 0 || k >= ns) throw InputError("partial_trace: keep index out of range");
    kept[k] = true;
  }
  std::vector<long> stride(ns, 1);
  for (int i = ns - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

  long dk = 1, dt = 1;
  for (int i = 0; i < ns; ++i) (kept[i] ? dk : dt) *= dims[i];

  // full index for (kept multi-index, traced multi-index)
  auto offsets = [&](bool want_kept) {
    long count = want_kept ? dk : dt;
    std::vector<long> off(count, 0);
    for (long c = 0; c < count; ++c) {
      long rem = c, o = 0;
      for (int i = ns - 1; i >= 0; --i) {
        if (kept[i] != want_kept) continue;
        o += (rem % dims[i]) * stride[i];
        rem /= dims[i];
      }
      off[c] = o;
    }
    return off;
  };
  std::vector<long> ko = offsets(true), to = offsets(false);

  Mat out = Mat::Zero(dk, dk);
  for (long a = 0; a < dk; ++a)
    for (long b = 0; b < dk; ++b) {
      cx s = 0;
      for (long t = 0; t < dt; ++t) s += A(ko[a] + to[t], ko[b] + to[t]);
      out(a, b) = s;
    }
  return out;
}

Mat orth(const Mat& A, double rel_tol) {
  if (A.cols() == 0 || A.rows() == 0) return Mat(A.rows(), 0);
  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0) return Mat(A.rows(), 0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  Mat U = svd.matrixU().leftCols(r);
  for (Eigen::Index k = 0; k < r; ++k) normalize_phase(U.col(k));
  return U;
}

Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Mat pauli_y() {
  Mat m(2, 2);
  m << 0, cx(0, -1), cx(0, 1), 0;
  return m;
}

Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace covqec
