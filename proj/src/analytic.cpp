#include "dcp/analytic.hpp"

#include <cmath>
#include <fstream>

#include "dcp/bessel.hpp"
#include "dcp/errors.hpp"
#include "dcp/units.hpp"

namespace dcp {

double te011_q0(double R, double d, double delta) {
  const double x = bessel_j1_zero1();
  const double a = pi * R / d;
  const double k = std::hypot(x / R, pi / d);
  const double num = std::pow(x * x + a * a, 1.5);
  const double den = 2.0 * pi * (x * x + 2.0 * (R / d) * a * a);
  return (2.0 * pi / k) / delta * num / den;
}

StandingWave standing_wave(const CavityGeometry& g) {
  if (!(g.body_radius > 0) || !(g.body_height > 0))
    throw Error(ErrorCode::DegenerateGeometry, "standing wave needs positive R and d");
  StandingWave s;
  s.R = g.body_radius;
  s.d = g.body_height;
  s.k1 = pi / s.d;
  s.gamma1 = bessel_j1_zero1() / s.R;
  s.k = std::hypot(s.k1, s.gamma1);
  return s;
}

double StandingWave::e_phi(double rho, double z) const {
  return 0.5 * k * (k1 / gamma1) * bessel_j1(gamma1 * rho) * std::cos(k1 * z);
}

double StandingWave::h_rho(double rho, double z) const {
  return 0.5 * k1 * (k1 / gamma1) * bessel_j1(gamma1 * rho) * std::sin(k1 * z);
}

double StandingWave::h_z(double rho, double z) const {
  return 0.5 * k1 * bessel_j0(gamma1 * rho) * std::cos(k1 * z);
}

StandingWave::Grid StandingWave::sample(int n_rho, int n_z) const {
  Grid g;
  g.rho.resize(n_rho);
  g.z.resize(n_z);
  for (int i = 0; i < n_rho; ++i) g.rho[i] = R * i / double(n_rho - 1);
  for (int j = 0; j < n_z; ++j) g.z[j] = -0.5 * d + d * j / double(n_z - 1);
  const size_t n = size_t(n_rho) * n_z;
  g.e_phi.resize(n);
  g.h_rho.resize(n);
  g.h_z.resize(n);
  for (int i = 0; i < n_rho; ++i) {
    const double j0 = bessel_j0(gamma1 * g.rho[i]);
    const double j1 = bessel_j1(gamma1 * g.rho[i]);
    for (int j = 0; j < n_z; ++j) {
      const double c = std::cos(k1 * g.z[j]), s = std::sin(k1 * g.z[j]);
      const size_t idx = size_t(i) * n_z + j;
      g.e_phi[idx] = 0.5 * k * (k1 / gamma1) * j1 * c;
      g.h_rho[idx] = 0.5 * k1 * (k1 / gamma1) * j1 * s;
      g.h_z[idx] = 0.5 * k1 * j0 * c;
    }
  }
  return g;
}

double PhaseExpansion::k1() const { return pi / d; }

PhaseExpansion table1_dataset(const PhysicalConstants& pc) {
  PhaseExpansion pe;
  pe.R = 0.026;
  pe.r_a = 0.005;
  pe.d = te011_resonant_height(pe.R, pc.f_atom, pc);
  pe.delta_over_d = pc.skin_depth() / pe.d;
  const double ur = 1e-6;
  pe.phi = {{{5.2 * ur, 0.16 * ur},
             {92.0 * ur, 0.35 * ur},
             {32.0 * ur, 0.16 * ur},
             {-11.0 * ur, 0.06 * ur},
             {-0.5 * ur, 0.017 * ur}}};
  return pe;
}

PhaseExpansion phase_dataset_from_json(const nlohmann::json& j, const PhysicalConstants& pc) {
  PhaseExpansion pe;
  try {
    auto len = [&](const char* key) {
      const auto& v = j.at(key);
      return v.is_string() ? parse_quantity(v.get<std::string>(), Dim::Length) : v.get<double>();
    };
    pe.R = len("R");
    pe.r_a = len("r_a");
    pe.d = j.contains("d") ? len("d") : te011_resonant_height(pe.R, pc.f_atom, pc);
    pe.delta_over_d = j.contains("delta_over_d") ? j.at("delta_over_d").get<double>()
                                                 : pc.skin_depth() / pe.d;
    pe.phi0 = j.value("phi0", 0.0);
    for (const auto& row : j.at("phi")) {
      const int m = row.at(0).get<int>();
      const int p = row.at(1).get<int>();
      if (m < 0 || m > 4 || (p != 1 && p != 3))
        throw Error(ErrorCode::Format, "phase dataset entry outside m in 0..4, p in {1,3}");
      pe.phi[m][p == 1 ? 0 : 1] = row.at(2).get<double>() * 1e-6;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("phase dataset: ") + e.what());
  }
  return pe;
}

nlohmann::json phase_dataset_to_json(const PhaseExpansion& pe) {
  nlohmann::json j;
  j["R"] = pe.R;
  j["r_a"] = pe.r_a;
  j["d"] = pe.d;
  j["delta_over_d"] = pe.delta_over_d;
  j["phi0"] = pe.phi0;
  auto rows = nlohmann::json::array();
  for (int m = 0; m < 5; ++m)
    for (int p = 0; p < 2; ++p) rows.push_back({m, p == 0 ? 1 : 3, pe.phi[m][p] * 1e6});
  j["phi"] = rows;
  return j;
}

PhaseExpansion load_phase_dataset(const std::string& name, const PhysicalConstants& pc) {
  if (name == "table1") return table1_dataset(pc);
  std::ifstream in(name);
  if (!in) throw Error(ErrorCode::Config, "cannot open phase dataset '" + name + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("phase dataset: ") + e.what());
  }
  return phase_dataset_from_json(j, pc);
}

double phase_term(const PhaseExpansion& pe, int m, double rho, double z) {
  const double k1 = pe.k1();
  const double c1 = std::cos(k1 * z);
  const double x = rho / pe.r_a;
  const double radial = std::pow(x, m == 0 ? 2 : m);
  double v = radial * (pe.phi[m][0] + pe.phi[m][1] * std::cos(3 * k1 * z) / c1);
  if (m == 0) v += pe.phi0 - pe.delta_over_d * k1 * z * std::tan(k1 * z);
  return v;
}

double phase_field(const PhaseExpansion& pe, double rho, double phi, double z) {
  double v = 0.0;
  for (int m = 0; m < 5; ++m) v += phase_term(pe, m, rho, z) * std::cos(m * phi);
  return v;
}

std::function<double(double, double)> loss_field_from_phase(const PhaseExpansion& pe,
                                                            const StandingWave& sw, int m) {
  if (m < 0 || m > 4) throw Error(ErrorCode::Config, "loss field index must be 0..4");
  const double k1 = pe.k1();
  const double a = pe.phi[m][0], c = pe.phi[m][1];
  const double ra = pe.r_a, phi0 = pe.phi0, dd = pe.delta_over_d;
  return [=](double rho, double z) {
    const double x = rho / ra;
    const double radial = std::pow(x, m == 0 ? 2 : m);
    // H0z cos(3 k1 z)/cos(k1 z) written without the division.
    const double h = sw.h_z(rho, z);
    const double h3 = 0.5 * sw.k1 * bessel_j0(sw.gamma1 * rho) * std::cos(3 * k1 * z);
    double g = -radial * (a * h + c * h3);
    if (m == 0) g += 0.5 * dd * k1 * k1 * z * std::sin(k1 * z) - phi0 * h;
    return g;
  };
}

}  // namespace dcp
