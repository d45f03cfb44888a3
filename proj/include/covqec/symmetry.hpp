#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "covqec/metric.hpp"
#include "covqec/recovery.hpp"

namespace covqec {

struct U1Code {
  std::string name;
  Channel encoder;
  Mat W;  // isometry when the encoder has one Kraus operator, else empty
  U1Rep logical;
  U1Rep physical;
  double tau = 2 * kPi;

  // optional code-specific knowledge
  std::function<double(const NoiseModel&)> epsilon_lower;                      // returns 0 when unknown
  std::function<std::optional<Recovery>(const NoiseModel&)> analytic_recovery;

  bool isometric() const { return W.size() > 0; }
  int dim_logical() const { return encoder.dim_in(); }
  int dim_physical() const { return encoder.dim_out(); }
};

U1Code make_code(std::string name, const Channel& encoder, const U1Rep& logical, const U1Rep& physical);

struct ScanResult {
  double value = 0.0;
  double theta = 0.0;
  Certification certified = Certification::exact;
  bool ok = true;
  int failed_points = 0;
};

// E^dag(H_S) in logical coordinates
Mat dual_charge(const U1Code& code);

ScanResult delta_group(const U1Code& code, std::uint64_t seed = 0);
ScanResult delta_group_choi(const U1Code& code);
ScanResult delta_group_diamond(const U1Code& code, int grid = 128);
double delta_point(const U1Code& code);
double delta_charge(const U1Code& code);

struct ChiResult {
  double value = 0.0;
  Vec zero_L;  // eigenvector of the largest H_L eigenvalue
  Vec one_L;   // eigenvector of the smallest
};
ChiResult charge_fluctuation(const U1Code& code);

struct FrakBResult {
  double value = 0.0;
  Certification certified = Certification::exact;
  double cap = 0.0;  // sqrt(2) * range(H_S)
};
FrakBResult frak_b(const U1Code& code);

// Channel QFI at 0 of R o N o U_S o E o U_L^dag for a supplied recovery.
double delta_point_star(const U1Code& code, const NoiseModel& noise, const Recovery& rec);

struct SymmetryReport {
  ScanResult delta_group, delta_group_choi, delta_group_diamond;
  double delta_point = 0, delta_charge = 0, chi = 0, frak_b = 0;
  Certification frak_b_cert = Certification::exact;
};
SymmetryReport symmetry_report(const U1Code& code, bool with_diamond = true);

// max over [0, tau) of f: uniform grid then golden refinement around the top maxima
ScanResult theta_scan(const std::function<double(double)>& f, double tau, int grid = 1024, int refine = 3);

}  // namespace covqec
