#pragma once

#include <cmath>
#include <numbers>

namespace dcp {

inline constexpr double pi = std::numbers::pi;
inline constexpr double mu0 = 1.25663706212e-6;   // H/m
inline constexpr double k_boltzmann = 1.380649e-23;  // J/K

// Physical inputs. Everything derived (k, omega, skin depth) is computed on
// demand so that changing f_atom or sigma_cu cannot leave stale values.
struct PhysicalConstants {
  double c = 299792458.0;
  double f_atom = 9.192631770e9;
  double sigma_cu = 5.8e7;
  double mass = 2.20695e-25;
  double g_grav = 9.80665;

  double omega() const { return 2.0 * pi * f_atom; }
  double k() const { return omega() / c; }
  double skin_depth() const { return std::sqrt(2.0 / (mu0 * omega() * sigma_cu)); }
};

}  // namespace dcp
