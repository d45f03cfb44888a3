#pragma once

#include <utility>
#include <vector>

#include "covqec/symmetry.hpp"

namespace covqec {

struct ThermoParams {
  int n = 0;
  int m = 2;
  double q = 0.0;
  void validate() const;
};

// Dicke state on n qubits with total Z equal to -m (weight (n+m)/2); site 0 is the most significant bit
Vec dicke_state(int n, int m);

U1Code thermo_code(const ThermoParams& p);

struct ClosedFormRecord {
  double epsilon_tilde = 0;    // upper value of the worst-case inaccuracy (analytic recovery)
  double epsilon_leading = 0;  // leading-order value
  double epsilon_lower = 0;    // complementary-channel lower bound
  double delta_group = 0;
  double delta_point = 0;
  double delta_charge = 0;
  double chi = 0;
  double frak_b = 0;
  double dual_HS_coeff = 0;  // E^dag(H_S) = coeff * Z_L
  double diamond_upper = 0;  // diamond distance of the analytically corrected channel
  double range_HL = 0, range_HS = 0;
};

ClosedFormRecord thermo_closed_forms(const ThermoParams& p);

// Recovery for the single-erasure mixture built from the four vectors per erased site.
Recovery thermo_optimal_recovery(const ThermoParams& p);

struct RmParams {
  int t = 3;
  int n() const { return (1 << t) - 1; }
  void validate() const;
};

// rows are codewords of length 2^t, monomials ordered by degree then lexicographically
std::vector<std::vector<int>> rm_generator(int r, int t);
// all codewords of the shortened code: first coordinate zero, then deleted
std::vector<std::vector<int>> rm_shortened_codewords(int r, int t);

U1Code rm_code(const RmParams& p);
ClosedFormRecord rm_closed_forms(const RmParams& p);
double rm_profile(const RmParams& p, double theta);  // P(theta) closed form

// X-type stabilizers (as bit masks) from the shortened R(1,t), Z-type from the shortened R(t-2,t)
std::pair<std::vector<long>, std::vector<long>> rm_stabilizers(const RmParams& p);

// Repetition encoding C -> L (x) A and its recovery, in the logical basis given by the columns of `basis`
// (column 0 is 0_L, column 1 is 1_L). Identity basis when empty.
std::pair<Channel, Channel> repetition_code(int d_L, const Mat& basis = Mat());

}  // namespace covqec
