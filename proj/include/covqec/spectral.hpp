#pragma once

#include <functional>
#include <vector>

#include "covqec/types.hpp"

namespace covqec {

enum OperatorTag : unsigned {
  kHermitian = 1u,
  kUnitary = 2u,
  kIsometry = 4u,
  kPsd = 8u,
};

// Dense operator with optional structural assertions, checked on construction.
class Operator {
 public:
  Operator() = default;
  explicit Operator(Mat data, unsigned tags = 0);

  const Mat& data() const { return data_; }
  unsigned tags() const { return tags_; }
  bool has(OperatorTag t) const { return (tags_ & t) != 0; }
  Eigen::Index dim_out() const { return data_.rows(); }
  Eigen::Index dim_in() const { return data_.cols(); }

 private:
  Mat data_;
  unsigned tags_ = 0;
};

struct Spectrum {
  RVec values;  // ascending
  Mat vectors;  // columns, orthonormal
};

double max_abs(const Mat& A);
double hermiticity_residual(const Mat& A);
Mat herm_part(const Mat& A);

// Throws InputError when A is not Hermitian within STRUCT_TOL * max(1, max|A|).
Spectrum eigh(const Mat& A);
RVec eigvalsh(const Mat& A);

double spectral_range(const Mat& A);
double lambda_max(const Mat& A);
double lambda_min(const Mat& A);

Mat herm_func(const Mat& A, const std::function<double(double)>& f);
// Negative eigenvalues in [-1e-10, 0) are clipped; anything lower is a DomainError.
Mat sqrtm_psd(const Mat& A);
Mat inv_sqrtm_psd(const Mat& A, double support_tol = 1e-12);
// Pseudo-inverse on the support; `support` receives the kept eigenvalue indices.
Mat pinv_herm(const Mat& A, double tol = 1e-12, std::vector<int>* support = nullptr);

RVec singular_values(const Mat& A);
double trace_norm(const Mat& A);
double spectral_norm(const Mat& A);

Mat kron(const Mat& A, const Mat& B);
Mat kron_all(const std::vector<Mat>& ops);
Mat partial_trace(const Mat& A, const std::vector<int>& dims, const std::vector<int>& keep);

// Orthonormal basis of the column span (rank decided relative to the largest singular value).
Mat orth(const Mat& A, double rel_tol = 1e-12);

Mat pauli_x();
Mat pauli_y();
Mat pauli_z();

}  // namespace covqec
