#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcp/constants.hpp"
#include "dcp/geometry.hpp"

namespace dcp {

// TE011 standing wave of a closed cylinder, normalized so that the on-axis
// integral of H0z over the height is 1. The electric field is stored in
// reduced form E/(mu0 c), so that H0 = (1/k) curl E0 holds with k the
// resonant wavenumber of the given (R, d).
struct StandingWave {
  double R = 0.0;
  double d = 0.0;
  double k = 0.0;
  double k1 = 0.0;
  double gamma1 = 0.0;

  double e_phi(double rho, double z) const;
  double h_rho(double rho, double z) const;
  double h_z(double rho, double z) const;

  struct Grid {
    std::vector<double> rho, z;              // axes
    std::vector<double> e_phi, h_rho, h_z;   // row-major, z fastest
  };
  Grid sample(int n_rho = 512, int n_z = 512) const;
};

StandingWave standing_wave(const CavityGeometry& g);

// Unloaded Q of the closed-cylinder TE011 mode with walls of skin depth delta.
double te011_q0(double R, double d, double delta);

// Near-axis phase of H_z for a closed cavity with a single weak midplane feed
// at phi = 0:
//   Phi = Phi0 - (delta/d) k1 z tan(k1 z)
//         + sum_{m, p in {1,3}} Phi_mp (rho/r_a)^(m + 2[m=0]) cos(p k1 z)/cos(k1 z) cos(m phi)
struct PhaseExpansion {
  double R = 0.026;
  double d = 0.0;
  double r_a = 0.005;
  double delta_over_d = 0.0;
  double phi0 = 0.0;
  std::array<std::array<double, 2>, 5> phi{};  // [m][0] is p=1, [m][1] is p=3 (rad)

  double k1() const;
};

// Coefficients for R = 26 mm, r_a = 5 mm; delta/d follows from the constants.
PhaseExpansion table1_dataset(const PhysicalConstants& pc = {});

// JSON form {R, r_a, delta_over_d, phi: [[m, p, microrad], ...]}.
PhaseExpansion phase_dataset_from_json(const nlohmann::json& j, const PhysicalConstants& pc = {});
nlohmann::json phase_dataset_to_json(const PhaseExpansion& pe);
// "table1" or a path to a dataset file.
PhaseExpansion load_phase_dataset(const std::string& name_or_path, const PhysicalConstants& pc = {});

double phase_field(const PhaseExpansion& pe, double rho, double phi, double z);

// The m-th azimuthal term of the phase (cos(m phi) factored out). For m = 0
// this includes Phi0 and the longitudinal term.
double phase_term(const PhaseExpansion& pe, int m, double rho, double z);

// z component of the m-th loss field. m >= 1: -Phi_m(rho, z) H0z. m = 0: the
// longitudinal form (delta/d)(k1^2/2) z sin(k1 z) minus the Phi0 and radial
// terms times H0z.
std::function<double(double, double)> loss_field_from_phase(const PhaseExpansion& pe,
                                                            const StandingWave& sw, int m);

}  // namespace dcp
