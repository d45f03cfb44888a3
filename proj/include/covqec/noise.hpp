#pragma once

#include <functional>
#include <string>
#include <vector>

#include "covqec/channel.hpp"

namespace covqec {

// Noise channel whose Kraus operators each map into one of several mutually orthogonal
// output sectors. Kraus operators act on tall matrices (D x k -> sector_dim x k) so that
// n-qubit erasure never materializes the (d+1)^n output space.
struct NoiseKraus {
  int sector = 0;
  std::function<Mat(const Mat&)> apply;
};

// Local structure for noise-structure bounds: each part acts on one site.
struct NoisePart {
  Channel channel;  // local channel on the site
  Mat charge;       // local charge H_{S_l}
  double prob = 1.0;
};

class NoiseModel {
 public:
  NoiseModel() = default;

  // uniform mixture of single-qubit erasures on n qubits; sector l has dimension 2^{n-1}
  static NoiseModel erasure_mixture(int n);
  // (1-p) id + (p/n) sum_l Z_l . Z_l
  static NoiseModel dephasing_mixture(int n, double p);
  static NoiseModel from_channel(const Channel& ch, std::string kind = "custom");
  static NoiseModel identity(int D);

  const std::string& kind() const { return kind_; }
  int dim_in() const { return dim_in_; }
  int num_sectors() const { return static_cast<int>(sector_dims_.size()); }
  int sector_dim(int s) const { return sector_dims_[s]; }
  const std::vector<NoiseKraus>& kraus() const { return kraus_; }
  int size() const { return static_cast<int>(kraus_.size()); }
  int sites() const { return sites_; }
  // per-site structure, empty when the model has none
  const std::vector<NoisePart>& parts() const { return parts_; }
  bool mixture_of_parts() const { return mixture_; }

  // Dense channel with the sectors stacked as a direct sum (sector 0 first).
  Channel dense(int max_dim = 4096) const;
  // K_b X for every Kraus operator
  std::vector<Mat> apply_all(const Mat& X) const;

 private:
  std::string kind_;
  int dim_in_ = 0;
  int sites_ = 0;
  std::vector<int> sector_dims_;
  std::vector<NoiseKraus> kraus_;
  std::vector<NoisePart> parts_;
  bool mixture_ = true;
};

}  // namespace covqec
