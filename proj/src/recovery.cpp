#include "covqec/recovery.hpp"

#include <algorithm>

#include "covqec/spectral.hpp"

namespace covqec {

double Recovery::tp_residual() const {
  double worst = 0;
  for (const auto& b : blocks) {
    Mat S = Mat::Zero(b.Q.cols(), b.Q.cols());
    for (const auto& R : b.R) S += R.adjoint() * R;
    worst = std::max(worst, max_abs(S - Mat::Identity(S.rows(), S.cols())));
  }
  return worst;
}

std::vector<Mat> logical_kraus(const Recovery& rec, const NoiseModel& noise, const Mat& X) {
  const int dl = rec.dim_logical;
  std::vector<std::vector<const RecoveryBlock*>> by_sector(noise.num_sectors());
  for (const auto& b : rec.blocks) {
    if (b.sector < 0 || b.sector >= noise.num_sectors()) throw InputError("recovery: sector index out of range");
    if (b.Q.rows() != noise.sector_dim(b.sector)) throw InputError("recovery: block dimension mismatch");
    by_sector[b.sector].push_back(&b);
  }
  std::vector<Mat> out;
  for (const auto& k : noise.kraus()) {
    Mat Y = k.apply(X);
    Mat Z = Y;
    for (const RecoveryBlock* b : by_sector[k.sector]) {
      Mat c = b->Q.adjoint() * Y;
      for (const auto& R : b->R) out.push_back(R * c);
      Z -= b->Q * c;
    }
    Mat G = Z.adjoint() * Z;
    Spectrum s = eigh(herm_part(G));
    double scale = std::max(1.0, (Y.adjoint() * Y).trace().real());
    for (int i = 0; i < s.values.size(); ++i)
      if (s.values(i) > 1e-28 * scale) out.push_back(std::sqrt(s.values(i)) * rec.fallback * s.vectors.col(i).adjoint());
  }
  if (out.empty()) out.push_back(Mat::Zero(dl, X.cols()));
  return out;
}

Channel recovery_channel(const Recovery& rec, const NoiseModel& noise) {
  std::vector<long> offset;
  long total = 0;
  for (int s = 0; s < noise.num_sectors(); ++s) {
    offset.push_back(total);
    total += noise.sector_dim(s);
  }
  if (total > 4096) throw InputError("recovery_channel: output space too large for dense form");
  std::vector<Mat> ks;
  for (int s = 0; s < noise.num_sectors(); ++s) {
    const int ds = noise.sector_dim(s);
    Mat P = Mat::Zero(ds, ds);
    for (const auto& b : rec.blocks) {
      if (b.sector != s) continue;
      for (const auto& R : b.R) {
        Mat K = Mat::Zero(rec.dim_logical, total);
        K.middleCols(offset[s], ds) = R * b.Q.adjoint();
        ks.push_back(K);
      }
      P += b.Q * b.Q.adjoint();
    }
    Mat comp = orth(Mat::Identity(ds, ds) - P, 1e-10);
    for (int c = 0; c < comp.cols(); ++c) {
      Mat K = Mat::Zero(rec.dim_logical, total);
      K.middleCols(offset[s], ds) = rec.fallback * comp.col(c).adjoint();
      ks.push_back(K);
    }
  }
  return Channel(std::move(ks));
}

}  // namespace covqec
