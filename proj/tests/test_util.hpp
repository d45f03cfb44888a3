#pragma once

#include <random>

#include "covqec/types.hpp"

namespace covqec::testing {

inline Mat random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g;
  Mat A(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) A(i, j) = cx(g(rng), g(rng));
  return A;
}

inline Mat random_hermitian(std::mt19937_64& rng, int d) {
  Mat A = random_matrix(rng, d, d);
  return 0.5 * (A + A.adjoint());
}

inline Mat random_density(std::mt19937_64& rng, int d, int rank = -1) {
  Mat G = random_matrix(rng, d, rank < 0 ? d : rank);
  Mat rho = G * G.adjoint();
  return rho / rho.trace().real();
}

inline Mat random_unitary(std::mt19937_64& rng, int d) {
  Eigen::HouseholderQR<Mat> qr(random_matrix(rng, d, d));
  return qr.householderQ() * Mat::Identity(d, d);
}

inline Mat random_isometry(std::mt19937_64& rng, int rows, int cols) {
  return random_unitary(rng, rows).leftCols(cols);
}

inline double maxabs(const Mat& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace covqec::testing

#include "covqec/channel.hpp"

namespace covqec::testing {

// Kraus operators read off the blocks of a random isometry
inline Channel random_channel(std::mt19937_64& rng, int din, int dout, int r) {
  Mat V = random_isometry(rng, dout * r, din);
  std::vector<Mat> K;
  for (int i = 0; i < r; ++i) K.push_back(V.middleRows(i * dout, dout));
  return Channel(K);
}

}  // namespace covqec::testing
