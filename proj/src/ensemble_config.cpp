#include "dcp/ensemble_config.hpp"

#include <cmath>

#include "dcp/errors.hpp"
#include "dcp/geometry.hpp"

namespace dcp {

double EnsembleConfig::thermal_speed(const PhysicalConstants& pc) const {
  return std::sqrt(2.0 * k_boltzmann * temperature / pc.mass);
}

std::vector<std::string> ensemble_preset_names() {
  return {"I", "II0", "II1", "II2", "III", "IV0", "IV1", "IV2", "delta0", "delta1", "delta2"};
}

EnsembleConfig ensemble_preset(const std::string& name) {
  EnsembleConfig e;
  auto family = [&](double r00, char idx) {
    e.r00 = r00;
    e.rho_off = 0.0;
    e.launch_mode = LaunchMode::AlongAxis;
    if (idx == '1') e.alpha_tilt = 1e-3;
    if (idx == '2') e.detection.a = 0.5;
  };
  if (name == "I") {
    e.r00 = 0.5e-3;
    e.rho_off = 2e-3;
    e.launch_mode = LaunchMode::CenterOnDown;
  } else if (name == "III") {
    e.r00 = 3e-3;
    e.rho_off = 2e-3;
    e.launch_mode = LaunchMode::CenterOnDown;
  } else if (name.size() == 3 && name.rfind("II", 0) == 0 && name[2] >= '0' && name[2] <= '2') {
    family(0.5e-3, name[2]);
  } else if (name.size() == 3 && name.rfind("IV", 0) == 0 && name[2] >= '0' && name[2] <= '2') {
    family(3e-3, name[2]);
  } else if (name == "delta0" || name == "delta1" || name == "delta2") {
    e.r00 = 0.0;
    e.cloud_at_t1 = true;
    e.rho_off = name == "delta0" ? 0.0 : 2e-3;
  } else {
    throw Error(ErrorCode::Config, "unknown ensemble preset '" + name + "'");
  }
  return e;
}

void validate_ensemble(const EnsembleConfig& e, std::vector<Violation>& out) {
  if (!(e.t1 < e.t1 + e.dt_a && e.t1 + e.dt_a <= e.t2 - e.dt_a && e.t2 - e.dt_a < e.t2 &&
        e.t2 < e.t_detect))
    out.push_back({"ensemble.times", "times must satisfy t1 < t1+dt_a <= t2-dt_a < t2 < t_detect"});
  if (e.t1 < 0) out.push_back({"ensemble.t1", "t1 must be non-negative"});
  if (!(e.r00 > 0) && !(e.cloud_at_t1 && e.r00 == 0.0))
    out.push_back({"ensemble.r00", "r00 must be positive"});
  if (!(e.temperature > 0)) out.push_back({"ensemble.temperature", "temperature must be positive"});
  if (!(e.r_a > 0)) out.push_back({"ensemble.r_a", "aperture radius must be positive"});
  if (e.rho_off < 0) out.push_back({"ensemble.rho_off", "rho_off must be non-negative"});
  if (e.delta_nu < 0) out.push_back({"ensemble.delta_nu", "delta_nu must be non-negative"});
  for (const auto& a : e.extra_apertures)
    if (!(a.r > 0)) out.push_back({"ensemble.extra_apertures", "aperture radius must be positive"});
}

}  // namespace dcp
