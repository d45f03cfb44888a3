#pragma once

#include <string>
#include <vector>

#include "covqec/types.hpp"

namespace covqec {

// Completely positive map in Kraus form. No trace-preservation requirement.
class KrausMap {
 public:
  KrausMap() = default;
  explicit KrausMap(std::vector<Mat> kraus);

  const std::vector<Mat>& kraus() const { return kraus_; }
  int dim_in() const { return static_cast<int>(kraus_.front().cols()); }
  int dim_out() const { return static_cast<int>(kraus_.front().rows()); }
  int size() const { return static_cast<int>(kraus_.size()); }

  Mat apply(const Mat& rho) const;
  // Sum K_i^dag K_i
  Mat kraus_gram() const;

 protected:
  std::vector<Mat> kraus_;
};

// CPTP map; construction checks max|sum K^dag K - 1| <= STRUCT_TOL.
class Channel : public KrausMap {
 public:
  Channel() = default;
  explicit Channel(std::vector<Mat> kraus);
  double tp_residual() const { return tp_residual_; }

 private:
  double tp_residual_ = 0.0;
};

Channel make_channel(std::vector<Mat> kraus);

// Choi operator in out (x) in ordering: J = sum_ij Phi(|i><j|) (x) |i><j|.
Mat choi(const KrausMap& ch);
// Heisenberg-picture map X -> sum K^dag X K, as a Kraus map out -> in.
KrausMap dual_channel(const KrausMap& ch);
// Environment output of the stacked Stinespring isometry; environment dimension = Kraus count.
Channel complementary_channel(const Channel& ch);

Channel compose(const Channel& outer, const Channel& inner);  // outer o inner
Channel tensor(const Channel& a, const Channel& b);
Channel mix(const std::vector<Channel>& chs, const std::vector<double>& probs);
// U Phi(U^dag . U) U^dag for square unitaries on both sides.
Channel conjugate_by_unitary(const Channel& ch, const Mat& U_out, const Mat& U_in);

Channel identity_channel(int d);
Channel unitary_channel(const Mat& U);
Channel isometry_channel(const Mat& V);
Channel dephasing(double p);
Channel rotated_dephasing(double p, double phi);
// d -> d+1 with the vacuum appended as the last basis vector
Channel erasure(int d);
// uniform mixture of single-site erasures on n sites of dimension d; each site enlarged to d+1
Channel erasure_mixture_dense(int n, int d = 2);
Channel amplitude_damping(double g);

struct DephasingParams {
  double p = 0.0;
  double phi = 0.0;
  double residual = 0.0;  // structural fit residual
  cx xi = 1.0;            // <0|ch(|0><1|)|1>
};

// Fits ch to the rotated-dephasing family. Throws InputError (carrying the residual) when
// the Choi matrix deviates from the family by more than FIT_TOL.
DephasingParams extract_dephasing(const KrausMap& ch);

// U(1) representation with a period; H may be stored diagonally.
class U1Rep {
 public:
  U1Rep() = default;
  explicit U1Rep(const Mat& H);
  static U1Rep diagonal(const RVec& charges);

  int dim() const { return static_cast<int>(values_.size()); }
  bool is_diagonal() const { return diagonal_; }
  double tau() const { return tau_; }
  const RVec& eigenvalues() const { return values_; }  // ascending
  // eigenvectors, identity for diagonal storage (diag entries keep their original order there)
  const Mat& eigenvectors() const { return vectors_; }
  const RVec& diag() const { return diag_; }
  double range() const { return values_(values_.size() - 1) - values_(0); }
  Mat dense() const;
  Mat apply(const Mat& X) const;                // H X
  Mat exp_apply(double theta, const Mat& X) const;  // e^{-i H theta} X
  U1Rep scaled(double c) const;
  U1Rep shifted(double c) const;

 private:
  bool diagonal_ = false;
  RVec diag_;
  Mat H_;
  RVec values_;
  Mat vectors_;
  double tau_ = 2 * kPi;
};

Mat u1_unitary(const U1Rep& rep, double theta);

// 2 pi / gcd of all spectral gaps of the given spectra, after rational reconstruction
// (denominator bound 1e6). Throws InputError when some gap is not rational at that bound.
double common_period(const std::vector<RVec>& spectra);

}  // namespace covqec
