#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace covqec {

using cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double STRUCT_TOL = 1e-10;  // malformed-input threshold
inline constexpr double NUM_TOL = 1e-7;      // reported quantities
inline constexpr double SDP_TOL = 1e-7;
inline constexpr double FIT_TOL = 1e-7;
inline constexpr int ITER_MAX = 200;

inline constexpr double kPi = 3.14159265358979323846;

// Rejected input; carries the offending residual when there is one.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what, double residual = 0.0)
      : std::invalid_argument(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Function evaluated outside its domain (e.g. sqrt of a negative eigenvalue).
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, double value)
      : std::domain_error(what), value_(value) {}
  double value() const { return value_; }

 private:
  double value_;
};

}  // namespace covqec
