#pragma once

#include <limits>
#include <string>
#include <vector>

#include "covqec/noise.hpp"
#include "covqec/sdp.hpp"

namespace covqec {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct HksResult {
  bool feasible = false;  // false: H is not in span{K_i^dag K_j} (HKS violated)
  double value = kInf;
  Mat h;                  // optimal r x r coefficient matrix
  SdpStatus status = SdpStatus::max_iter;
  bool ok = false;        // SDP certified (or infeasibility certified)
  double contraction_check = 0.0;  // min eig of (hK)^dag(hK) - H^2, frak_f only
};

// min Delta(h) over Hermitian h with H = sum h_ij K_i^dag K_j
HksResult frak_j(const std::vector<Mat>& kraus, const Mat& H);
// 4 min || sum (h^2)_ij K_i^dag K_j - H^2 ||
HksResult frak_f(const std::vector<Mat>& kraus, const Mat& H);
// 4 min || sum (h^2)_ij K_i^dag K_j ||
HksResult frak_f_tilde(const std::vector<Mat>& kraus, const Mat& H);

// RLD channel QFI of theta -> N(e^{-iH theta} . e^{iH theta}); +inf when the support condition fails.
double rld_channel_qfi(const std::vector<Mat>& kraus, const Mat& H);

struct NoiseStructureBounds {
  bool available = false;
  bool mixture = true;
  double frak_j = kInf;          // upper bound
  double frak_f = kInf;          // upper bound
  double sqrt_f_plus_b = kInf;   // erasure mixtures only
  std::vector<double> local_j, local_f, local_f_tilde;
  std::string note;
};

// Upper bounds on frak_j / frak_f from the per-site structure of the noise model.
NoiseStructureBounds noise_structure_bounds(const std::vector<NoisePart>& parts, bool mixture);
NoiseStructureBounds noise_structure_bounds(const NoiseModel& noise);

enum class Ell { l1, l2, l3 };
struct EllResult {
  double value = 0.0;
  bool saturated = false;  // x beyond the supremum of the forward map; value is the domain end
};
// variance = Tr(H_L^2)/d - Tr(H_L)^2/d^2 and range = Delta H_L, used by l3 only
double ell_forward(Ell kind, double y, double variance = 0.0, double range = 0.0);
EllResult ell_inverse(Ell kind, double x, double variance = 0.0, double range = 0.0);
double ell_domain_end(Ell kind, double variance = 0.0, double range = 0.0);

// Inputs for evaluate_bounds. NaN marks a missing quantity; the bound needing it is skipped.
struct BoundInputs {
  double range_HL = NAN, range_HS = NAN, variance_HL = NAN;
  bool isometric = true;
  bool hks = true;
  bool noise_commutes = false;

  double eps_lower = NAN, eps_upper = NAN;            // worst-case bracket
  double eps_choi_lower = NAN;                        // certified lower bound on the Choi inaccuracy
  double delta_group = NAN, delta_group_choi = NAN, delta_group_diamond = NAN;
  double delta_point = NAN, delta_charge = NAN, chi = NAN, dual_range = NAN;
  double frak_b = NAN;                                // exact value or a certified upper bound
  double frak_j = NAN, frak_f = NAN;                  // exact values or upper bounds
  bool frak_exact = false;                            // both from the global SDP
  double rld = NAN;
  double delta_point_star = NAN, eps_star = NAN;      // at one recovery, with that recovery's own epsilon
};

struct BoundEvaluation {
  std::string name;
  double lhs = NAN, rhs = NAN;
  bool satisfied = true;
  double slack = NAN;
  bool applicable = false;
  std::string note;
};

inline constexpr double BOUND_TOL = 1e-7;

std::vector<BoundEvaluation> evaluate_bounds(const BoundInputs& in);

// min{sqrt(G(Delta H_S - G/2))/Delta H_S, sqrt(3/8)} with the branch conventions of the global bound
double global_bound_g(double G, double range_HS);

double transversal_gate_bound(double delta_TL, const std::vector<double>& delta_TS);
int clifford_level_cap(double D);

}  // namespace covqec
