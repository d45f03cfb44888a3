#pragma once

#include <complex>
#include <string>
#include <vector>

#include "covqec/bound.hpp"
#include "covqec/symmetry.hpp"

namespace covqec {

// Kraus operators (d_L x d_L) of R o N o E for a sector recovery.
std::vector<Mat> corrected_kraus(const U1Code& code, const NoiseModel& noise, const Recovery& rec);
// Kraus operators of R o N o U_{S,theta} o E
std::vector<Mat> corrected_kraus_theta(const U1Code& code, const NoiseModel& noise, const Recovery& rec, double theta);

// Choi fidelity of R o N o E with the identity, squared
double choi_fidelity_sq(const U1Code& code, const NoiseModel& noise, const Recovery& rec);
// 1 - choi_fidelity_sq without cancellation near exact recovery
double choi_infidelity_sq(const U1Code& code, const NoiseModel& noise, const Recovery& rec);

struct EpsilonChoiResult {
  double value = 1.0;            // best candidate, exact evaluation at its recovery
  double certified_lower = 0.0;  // from a feasible dual point of the SDP
  Recovery recovery;             // recovery achieving `value`
  bool ok = false;               // every block SDP certified
  std::string method;            // which candidate won
  std::vector<Recovery> candidates;
};
EpsilonChoiResult epsilon_choi(const U1Code& code, const NoiseModel& noise);

struct EpsilonBracket {
  double lower = 0.0;
  double upper = 1.0;
  double epsilon_choi = NAN;
  Recovery recovery_witness;
  std::string lower_method, upper_method;
  Certification upper_cert = Certification::heuristic;
  double witness_lower = 0.0;  // certified lower end of the witness recovery's own distance
};

// Worst-case purified distance of R o N o E from the identity, with a certified lower side
DistanceResult recovery_distance(const U1Code& code, const NoiseModel& noise, const Recovery& rec);

EpsilonBracket epsilon_bracket(const U1Code& code, const NoiseModel& noise);
EpsilonBracket epsilon_diamond_bracket(const U1Code& code, const NoiseModel& noise);
// same, reusing an already computed worst-case bracket
EpsilonBracket epsilon_diamond_bracket(const U1Code& code, const NoiseModel& noise, const EpsilonBracket& eps);

struct KlDeviation {
  Mat lambda;        // r x r
  RMat B_norms;      // ||Pi B_ij Pi||
  double max_violation = 0.0;
  double residual = 0.0;
};
KlDeviation kl_deviation(const U1Code& code, const NoiseModel& noise);

// Transpose (Petz) recovery with respect to the uniform code state.
Recovery transpose_recovery(const U1Code& code, const NoiseModel& noise);

struct TwirlResult {
  Channel recovery;
  double covariance_residual = 0.0;  // max over theta samples of the Choi mismatch
};
// Riemann average of U_L^dag o R o U_S over `resolution` points of [0, tau)
TwirlResult twirl_recovery(const Channel& recovery, const U1Rep& logical, const U1Rep& physical, double tau,
                           int resolution);

struct TwoLevelProtocol {
  double range_HL = 0.0;
  std::vector<double> theta;
  std::vector<std::complex<double>> xi;
  std::vector<DephasingParams> params;
  std::complex<double> xi0 = 0.0;
  std::complex<double> dxi0 = 0.0;
  double dxi_error = 0.0;   // Richardson error estimate
  double qfi_at_zero = 0.0; // channel QFI of the protocol channel family at theta = 0
};

// Protocol channel (2 x 2 Kraus) at theta.
std::vector<Mat> protocol_kraus(const U1Code& code, const NoiseModel& noise, const Recovery& rec, double theta);
TwoLevelProtocol two_level_protocol(const U1Code& code, const NoiseModel& noise, const Recovery& rec,
                                    const std::vector<double>& thetas = {0.0});

// max over theta of P(R o N o U_S o E, U_L) at one recovery
ScanResult gate_error_at(const U1Code& code, const NoiseModel& noise, const Recovery& rec, int grid = 64);

struct GateErrorBracket {
  double lower = 0.0, upper = 1.0;
  bool hks = true;
  bool lower_saturated = false;
  std::string upper_method;
};
// frak_f: upper bound or exact value of the noise QFI quantity
GateErrorBracket gate_error_bracket(const U1Code& code, const NoiseModel& noise, const EpsilonBracket& eps,
                                    double delta_group, double frak_f);

}  // namespace covqec
