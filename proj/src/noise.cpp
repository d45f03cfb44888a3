#include "covqec/noise.hpp"

#include <cmath>

#include "covqec/spectral.hpp"

namespace covqec {

namespace {

// rows of X whose bit at `site` (MSB = site 0) equals `bit`, in increasing order of the remaining bits
Mat select_bit(const Mat& X, int n, int site, int bit) {
  const long half = 1L << (n - 1);
  Mat out(half, X.cols());
  const int shift = n - 1 - site;
  const long low_mask = (1L << shift) - 1;
  for (long r = 0; r < half; ++r) {
    long high = r >> shift, low = r & low_mask;
    long x = (high << (shift + 1)) | (static_cast<long>(bit) << shift) | low;
    out.row(r) = X.row(x);
  }
  return out;
}

}  // namespace

NoiseModel NoiseModel::erasure_mixture(int n) {
  if (n < 1 || n > 20) throw InputError("erasure_mixture: n out of range");
  NoiseModel m;
  m.kind_ = "erasure";
  m.dim_in_ = 1 << n;
  m.sites_ = n;
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int l = 0; l < n; ++l) {
    m.sector_dims_.push_back(1 << (n - 1));
    for (int i = 0; i < 2; ++i)
      m.kraus_.push_back({l, [n, l, i, s](const Mat& X) { return Mat(s * select_bit(X, n, l, i)); }});
    m.parts_.push_back({erasure(2), 0.5 * Mat(-pauli_z()), 1.0 / n});
  }
  m.mixture_ = true;
  return m;
}

NoiseModel NoiseModel::dephasing_mixture(int n, double p) {
  if (n < 1 || n > 20) throw InputError("dephasing_mixture: n out of range");
  if (p < 0 || p > 1) throw InputError("dephasing_mixture: p outside [0,1]", p);
  NoiseModel m;
  m.kind_ = "dephasing";
  m.dim_in_ = 1 << n;
  m.sites_ = n;
  m.sector_dims_ = {1 << n};
  const double a = std::sqrt(1 - p), b = std::sqrt(p / n);
  if (a > 0) m.kraus_.push_back({0, [a](const Mat& X) { return Mat(a * X); }});
  if (b > 0) {
    for (int l = 0; l < n; ++l) {
      m.kraus_.push_back({0, [n, l, b](const Mat& X) {
                            Mat Y = b * X;
                            const int shift = n - 1 - l;
                            for (long x = 0; x < Y.rows(); ++x)
                              if ((x >> shift) & 1) Y.row(x) *= -1.0;
                            return Y;
                          }});
    }
  }
  for (int l = 0; l < n; ++l) m.parts_.push_back({dephasing(p), 0.5 * Mat(-pauli_z()), 1.0 / n});
  m.mixture_ = true;
  return m;
}

NoiseModel NoiseModel::from_channel(const Channel& ch, std::string kind) {
  NoiseModel m;
  m.kind_ = std::move(kind);
  m.dim_in_ = ch.dim_in();
  m.sector_dims_ = {ch.dim_out()};
  for (const auto& K : ch.kraus()) m.kraus_.push_back({0, [K](const Mat& X) { return Mat(K * X); }});
  return m;
}

NoiseModel NoiseModel::identity(int D) {
  NoiseModel m = from_channel(identity_channel(D), "identity");
  return m;
}

Channel NoiseModel::dense(int max_dim) const {
  long total = 0;
  std::vector<long> offset;
  for (int d : sector_dims_) {
    offset.push_back(total);
    total += d;
  }
  if (total > max_dim || dim_in_ > max_dim) throw InputError("noise model too large for dense form");
  Mat I = Mat::Identity(dim_in_, dim_in_);
  std::vector<Mat> ks;
  for (const auto& k : kraus_) {
    Mat K = Mat::Zero(total, dim_in_);
    K.middleRows(offset[k.sector], sector_dims_[k.sector]) = k.apply(I);
    ks.push_back(K);
  }
  return Channel(std::move(ks));
}

std::vector<Mat> NoiseModel::apply_all(const Mat& X) const {
  if (X.rows() != dim_in_) throw InputError("noise: input dimension mismatch");
  std::vector<Mat> out;
  out.reserve(kraus_.size());
  for (const auto& k : kraus_) out.push_back(k.apply(X));
  return out;
}

}  // namespace covqec
