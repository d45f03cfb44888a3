#pragma once

#include <string>
#include <vector>

#include "covqec/noise.hpp"

namespace covqec {

// Recovery acting on the sector-structured output of a NoiseModel. Each block covers the
// span of Q (orthonormal columns inside one sector); blocks sharing a sector are mutually
// orthogonal. Everything outside the blocks is traced out and replaced by `fallback`.
struct RecoveryBlock {
  int sector = 0;
  Mat Q;                 // sector_dim x q
  std::vector<Mat> R;    // d_L x q each, sum R^dag R = 1_q
};

struct Recovery {
  int dim_logical = 0;
  std::vector<RecoveryBlock> blocks;
  Vec fallback;  // logical state prepared off the blocks
  std::string method;

  double tp_residual() const;
};

// Kraus operators of R o N restricted to inputs spanned by the columns of X (D x k).
// Output operators are d_L x k.
std::vector<Mat> logical_kraus(const Recovery& rec, const NoiseModel& noise, const Mat& X);

// dense channel form (small sector dimensions only)
Channel recovery_channel(const Recovery& rec, const NoiseModel& noise);

}  // namespace covqec
