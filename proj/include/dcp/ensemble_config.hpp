#pragma once

#include <string>
#include <vector>

#include "dcp/constants.hpp"

namespace dcp {

enum class LaunchMode { AlongAxis, CenterOnDown };

// Detection weight W = (1 - a (x-x0)^2/r_a^2)(1 - b (y-y0)^2/r_a^2).
struct DetectionModel {
  double a = 0.0;
  double b = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
};

struct ExtraAperture {
  double t = 0.0;  // s
  double r = 0.0;  // m
};

struct EnsembleConfig {
  double r00 = 0.5e-3;          // 1/e cloud radius at the reference time (m)
  double rho_off = 0.0;         // cloud offset (m)
  double phi_off = 0.0;         // offset azimuth (rad)
  double temperature = 1e-6;    // K
  double v0x = 0.0, v0y = 0.0;  // mean transverse velocity (m/s); ignored for CenterOnDown
  double alpha_tilt = 0.0;      // rad
  double tilt_azimuth = 0.0;    // rad
  LaunchMode launch_mode = LaunchMode::AlongAxis;
  double t1 = 0.13, t2 = 0.63, t_detect = 0.7, dt_a = 0.035;  // s
  double r_a = 5e-3;            // m
  DetectionModel detection;
  std::vector<ExtraAperture> extra_apertures;
  // When set, the cloud distribution (r00, offset) is specified at t1 instead
  // of at launch. r00 = 0 with this flag gives a point source on the way up.
  bool cloud_at_t1 = false;
  double delta_nu = 0.0;        // Hz; 0 selects 1/(2(t2 - t1))

  double ramsey_width() const { return delta_nu > 0 ? delta_nu : 0.5 / (t2 - t1); }
  double reference_time() const { return cloud_at_t1 ? t1 : 0.0; }
  // Most probable transverse speed sqrt(2 k_B T / m).
  double thermal_speed(const PhysicalConstants& pc) const;
};

// Named distributions: "I", "II0", "II1", "II2", "III", "IV0", "IV1", "IV2",
// "delta0", "delta1", "delta2". Throws Error(Config) on other names.
EnsembleConfig ensemble_preset(const std::string& name);
std::vector<std::string> ensemble_preset_names();

struct Violation;
void validate_ensemble(const EnsembleConfig& e, std::vector<Violation>& out);

}  // namespace dcp
