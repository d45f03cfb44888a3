#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "covqec/channel.hpp"

namespace covqec {

enum class Certification { exact, upper_bound, lower_bound, heuristic };
std::string to_string(Certification c);

struct DistanceResult {
  double value = 0.0;
  Certification certified = Certification::heuristic;
  Mat witness;              // optimizing input state (density matrix on the input space)
  double dual_value = 0.0;  // matching certificate value when exact
  bool ok = true;           // false when an SDP did not certify
};

double state_fidelity(const Mat& rho, const Mat& sigma);
double purified_distance_states(const Mat& rho, const Mat& sigma);
double trace_distance(const Mat& rho, const Mat& sigma);

// Fidelity of the normalized Choi states.
double choi_fidelity(const KrausMap& a, const KrausMap& b);
double choi_purified_distance(const KrausMap& a, const KrausMap& b);

// d(0, numerical range of M) = max_phi max(0, lambda_min((e^{-i phi} M + e^{i phi} M^dag)/2))
double numerical_range_distance(const Mat& M);

// Worst-case purified distance. Exact when both channels are isometric (numerical range)
// or one is isometric (SDP); otherwise multi-start local search, labeled heuristic.
DistanceResult worst_case_purified_distance(const KrausMap& a, const KrausMap& b, std::uint64_t seed = 0);
// min over inputs of sum_i |Tr(V^dag K_i rho)|^2 by SDP; returns P = sqrt(1 - min).
DistanceResult isometric_comparator_distance(const std::vector<Mat>& kraus, const Mat& V);

// (1/2)||a - b||_diamond by the Watrous program; exact when certified.
DistanceResult diamond_distance(const KrausMap& a, const KrausMap& b);

double pure_state_qfi(const Vec& psi, const Vec& dpsi);

struct QfiResult {
  double value = 0.0;
  bool certified = true;
  Mat h;  // optimal Kraus-gauge generator (in the compressed Kraus basis)
};

// 4 min_h ||(dK - i h K)^dag (dK - i h K)|| for a Kraus family at the base point.
QfiResult channel_qfi_at_zero(const std::vector<Mat>& K, const std::vector<Mat>& dK);

// Golden-section maximization of f on [a, b].
double golden_max(const std::function<double(double)>& f, double a, double b, double tol, double* arg = nullptr);

}  // namespace covqec
