#include "dcp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dcp/errors.hpp"
#include "dcp/hash.hpp"
#include "dcp/units.hpp"

namespace dcp {

using nlohmann::json;

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::BelowCutoff: return "BelowCutoff";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::NoModeNearTarget: return "NoModeNearTarget";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::Format: return "FormatError";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::MissingBaseSolution: return "MissingBaseSolution";
    case ErrorCode::BracketFailed: return "BracketFailed";
    case ErrorCode::SolveFailed: return "SolveFailed";
  }
  return "Error";
}

namespace {

double qty(const json& j, Dim d, const std::string& key) {
  try {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_quantity(j.get<std::string>(), d);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, key + ": " + e.what());
  }
  throw Error(ErrorCode::Config, key + ": expected a number or a quantity string");
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string(key) + ": " + e.what());
  }
}

void read_q(const json& obj, const char* key, Dim d, double& out, const std::string& prefix) {
  if (obj.contains(key)) out = qty(obj.at(key), d, prefix + key);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::Config, where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw Error(ErrorCode::Config, "unknown key '" + where + "." + it.key() + "'");
}

PhysicalConstants parse_constants(const json& j) {
  PhysicalConstants pc;
  check_keys(j, {"c", "f_atom", "sigma_cu", "mass", "g_grav"}, "constants");
  read_q(j, "c", Dim::Velocity, pc.c, "constants.");
  read_q(j, "f_atom", Dim::Frequency, pc.f_atom, "constants.");
  read_q(j, "sigma_cu", Dim::Conductivity, pc.sigma_cu, "constants.");
  read_q(j, "mass", Dim::Mass, pc.mass, "constants.");
  read_q(j, "g_grav", Dim::Acceleration, pc.g_grav, "constants.");
  return pc;
}

CavityGeometry parse_geometry(const json& j, const PhysicalConstants& pc) {
  check_keys(j,
             {"body_radius", "body_height", "cutoff_sections", "aperture_radius", "aperture_offset",
              "corner_radius", "mode_filter", "feed_sites"},
             "geometry");
  CavityGeometry g;
  const std::string p = "geometry.";
  read_q(j, "body_radius", Dim::Length, g.body_radius, p);
  read_q(j, "aperture_radius", Dim::Length, g.aperture_radius, p);
  read_q(j, "aperture_offset", Dim::Length, g.aperture_offset, p);
  read_q(j, "corner_radius", Dim::Length, g.corner_radius, p);
  if (!j.contains("body_height") || j.at("body_height") == "auto") {
    g.body_height = te011_resonant_height(g.body_radius, pc.f_atom, pc);
  } else {
    g.body_height = qty(j.at("body_height"), Dim::Length, p + "body_height");
  }
  if (j.contains("cutoff_sections")) {
    for (const auto& s : j.at("cutoff_sections")) {
      check_keys(s, {"radius", "length"}, "geometry.cutoff_sections[]");
      CutoffSection c;
      read_q(s, "radius", Dim::Length, c.radius, p + "cutoff_sections.");
      read_q(s, "length", Dim::Length, c.length, p + "cutoff_sections.");
      g.cutoff_sections.push_back(c);
    }
  }
  if (j.contains("mode_filter") && !j.at("mode_filter").is_null()) {
    const auto& m = j.at("mode_filter");
    check_keys(m, {"radial_width", "length", "coupling_gap", "coupling_length"}, "geometry.mode_filter");
    ModeFilter mf;
    read_q(m, "radial_width", Dim::Length, mf.radial_width, p + "mode_filter.");
    read_q(m, "length", Dim::Length, mf.length, p + "mode_filter.");
    read_q(m, "coupling_gap", Dim::Length, mf.coupling_gap, p + "mode_filter.");
    read_q(m, "coupling_length", Dim::Length, mf.coupling_length, p + "mode_filter.");
    g.mode_filter = mf;
  }
  if (j.contains("feed_sites")) {
    for (const auto& s : j.at("feed_sites")) {
      check_keys(s, {"z", "phi"}, "geometry.feed_sites[]");
      FeedSite f;
      read_q(s, "z", Dim::Length, f.z, p + "feed_sites.");
      read_q(s, "phi", Dim::Angle, f.phi, p + "feed_sites.");
      g.feed_sites.push_back(f);
    }
  }
  return g;
}

FeedNetwork parse_feeds(const json& j, const CavityGeometry& g, std::string& preset, bool& q0_auto) {
  check_keys(j, {"preset", "planes", "list", "Q0", "delta_omega", "width_z", "width_phi", "Q"},
             "feeds");
  FeedNetwork net;
  if (j.contains("list")) {
    for (const auto& f : j.at("list")) {
      check_keys(f, {"phi_deg", "z_mm", "xi", "psi_deg", "Q"}, "feeds.list[]");
      Feed fd;
      double v = 0;
      read(f, "phi_deg", v);
      fd.phi = v * pi / 180.0;
      v = 0;
      read(f, "z_mm", v);
      fd.z = v * 1e-3;
      read(f, "xi", fd.xi);
      v = 0;
      read(f, "psi_deg", v);
      fd.psi = v * pi / 180.0;
      if (f.contains("Q") && !f.at("Q").is_null()) {
        if (f.at("Q").is_string() && f.at("Q") == "inf")
          fd.Q = std::numeric_limits<double>::infinity();
        else
          read(f, "Q", fd.Q);
      }
      net.feeds.push_back(fd);
    }
    preset = "custom";
  } else {
    preset = j.value("preset", std::string("single_weak"));
    std::vector<double> planes;
    if (j.contains("planes")) {
      for (const auto& z : j.at("planes")) planes.push_back(qty(z, Dim::Length, "feeds.planes"));
    } else if (!g.feed_sites.empty()) {
      std::set<double> zs;
      for (const auto& s : g.feed_sites) zs.insert(s.z);
      planes.assign(zs.begin(), zs.end());
    } else {
      planes = {0.0};
    }
    net = preset_network(preset, planes);
    if (j.contains("Q")) {
      double q = 0;
      read(j, "Q", q);
      for (auto& f : net.feeds) f.Q = q * double(net.feeds.size());
    }
  }
  if (j.contains("Q0")) {
    read(j, "Q0", net.Q0);
    q0_auto = false;
  }
  read_q(j, "delta_omega", Dim::AngularFrequency, net.delta_omega, "feeds.");
  read_q(j, "width_z", Dim::Length, net.width_z, "feeds.");
  read_q(j, "width_phi", Dim::Angle, net.width_phi, "feeds.");
  return net;
}

EnsembleConfig parse_ensemble(const json& j, std::vector<std::string>& presets) {
  check_keys(j,
             {"preset", "presets", "r00", "rho_off", "phi_off", "temperature", "v0", "alpha_tilt",
              "tilt_azimuth", "launch_mode", "t1", "t2", "t_detect", "dt_a", "r_a", "detection",
              "extra_apertures", "cloud_at_t1", "delta_nu"},
             "ensemble");
  EnsembleConfig e = ensemble_preset(j.value("preset", std::string("II0")));
  if (j.contains("presets")) presets = j.at("presets").get<std::vector<std::string>>();
  const std::string p = "ensemble.";
  read_q(j, "r00", Dim::Length, e.r00, p);
  read_q(j, "rho_off", Dim::Length, e.rho_off, p);
  read_q(j, "phi_off", Dim::Angle, e.phi_off, p);
  read_q(j, "temperature", Dim::Temperature, e.temperature, p);
  if (j.contains("v0")) {
    const auto& v = j.at("v0");
    if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::Config, "ensemble.v0 must be [vx, vy]");
    e.v0x = qty(v[0], Dim::Velocity, p + "v0");
    e.v0y = qty(v[1], Dim::Velocity, p + "v0");
  }
  read_q(j, "alpha_tilt", Dim::Angle, e.alpha_tilt, p);
  read_q(j, "tilt_azimuth", Dim::Angle, e.tilt_azimuth, p);
  if (j.contains("launch_mode")) {
    const auto m = j.at("launch_mode").get<std::string>();
    if (m == "center-on-down") e.launch_mode = LaunchMode::CenterOnDown;
    else if (m == "along-axis") e.launch_mode = LaunchMode::AlongAxis;
    else throw Error(ErrorCode::Config, "ensemble.launch_mode must be center-on-down or along-axis");
  }
  read_q(j, "t1", Dim::Time, e.t1, p);
  read_q(j, "t2", Dim::Time, e.t2, p);
  read_q(j, "t_detect", Dim::Time, e.t_detect, p);
  read_q(j, "dt_a", Dim::Time, e.dt_a, p);
  read_q(j, "r_a", Dim::Length, e.r_a, p);
  if (j.contains("detection")) {
    const auto& d = j.at("detection");
    check_keys(d, {"a", "b", "x0", "y0"}, "ensemble.detection");
    read(d, "a", e.detection.a);
    read(d, "b", e.detection.b);
    read_q(d, "x0", Dim::Length, e.detection.x0, p + "detection.");
    read_q(d, "y0", Dim::Length, e.detection.y0, p + "detection.");
  }
  if (j.contains("extra_apertures")) {
    e.extra_apertures.clear();
    for (const auto& a : j.at("extra_apertures")) {
      check_keys(a, {"t", "r"}, "ensemble.extra_apertures[]");
      ExtraAperture x;
      read_q(a, "t", Dim::Time, x.t, p + "extra_apertures.");
      read_q(a, "r", Dim::Length, x.r, p + "extra_apertures.");
      e.extra_apertures.push_back(x);
    }
  }
  read(j, "cloud_at_t1", e.cloud_at_t1);
  read_q(j, "delta_nu", Dim::Frequency, e.delta_nu, p);
  return e;
}

SolverConfig parse_solver(const json& j) {
  check_keys(j, {"mesh_h", "fem_order", "linear_tol", "grading", "exterior_db", "field_model",
                 "coefficients", "deflate_window", "tune_height", "tune_tol"},
             "solver");
  SolverConfig s;
  read_q(j, "mesh_h", Dim::Length, s.mesh_h, "solver.");
  read(j, "fem_order", s.fem_order);
  read(j, "linear_tol", s.linear_tol);
  read(j, "grading", s.grading);
  read(j, "exterior_db", s.exterior_db);
  read(j, "deflate_window", s.deflate_window);
  read(j, "tune_height", s.tune_height);
  read(j, "tune_tol", s.tune_tol);
  if (j.contains("field_model")) {
    const auto m = j.at("field_model").get<std::string>();
    if (m == "analytic") s.field_model = FieldModelKind::Analytic;
    else if (m == "fem") s.field_model = FieldModelKind::Fem;
    else throw Error(ErrorCode::Config, "solver.field_model must be analytic or fem");
  }
  read(j, "coefficients", s.coefficients);
  return s;
}

OptimizerConfig parse_optimizer(const json& j) {
  check_keys(j, {"b_max_weight", "b_grid", "cloud_offsets", "m1_weight", "parameters", "lower",
                 "upper", "samples", "gradient_iters", "top_k", "null_m2", "null_m1", "tol_f",
                 "tol_p"},
             "optimizer");
  OptimizerConfig o;
  read(j, "b_max_weight", o.b_max_weight);
  if (j.contains("b_grid")) o.b_grid = parse_grid(j.at("b_grid"));
  if (j.contains("cloud_offsets")) {
    o.cloud_offsets.clear();
    for (const auto& v : j.at("cloud_offsets"))
      o.cloud_offsets.push_back(qty(v, Dim::Length, "optimizer.cloud_offsets"));
  }
  read(j, "m1_weight", o.m1_weight);
  read(j, "parameters", o.parameters);
  if (j.contains("lower"))
    for (const auto& v : j.at("lower")) o.lower.push_back(qty(v, Dim::Length, "optimizer.lower"));
  if (j.contains("upper"))
    for (const auto& v : j.at("upper")) o.upper.push_back(qty(v, Dim::Length, "optimizer.upper"));
  read(j, "samples", o.samples);
  read(j, "gradient_iters", o.gradient_iters);
  read(j, "top_k", o.top_k);
  read(j, "null_m2", o.null_m2);
  read(j, "null_m1", o.null_m1);
  read(j, "tol_f", o.tol_f);
  read(j, "tol_p", o.tol_p);
  return o;
}

json parse_scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

}  // namespace

std::vector<double> parse_grid(const json& j) {
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
  }
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_string()) throw Error(ErrorCode::Config, "grid must be a list or 'a:step:b'");
  const std::string s = j.get<std::string>();
  std::stringstream ss(s);
  std::vector<double> parts;
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, "bad grid '" + s + "'");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[1] > 0) || parts[2] < parts[0])
    throw Error(ErrorCode::Config, "bad grid '" + s + "', expected start:step:stop");
  std::vector<double> v;
  const long n = std::lround(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
  for (long i = 0; i <= n; ++i) v.push_back(parts[0] + double(i) * parts[1]);
  return v;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorCode::Config, "override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw Error(ErrorCode::Config, "override path '" + key + "' crosses a value");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  (*node)[parts.back()] = parse_scalar(assignment.substr(eq + 1));
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, {"constants", "geometry", "feeds", "ensemble", "solver", "run", "optimizer"}, "config");
  RunConfig cfg;
  cfg.source = doc;
  if (doc.contains("constants")) cfg.constants = parse_constants(doc.at("constants"));
  if (!doc.contains("geometry")) throw Error(ErrorCode::Config, "missing section 'geometry'");
  cfg.geometry = parse_geometry(doc.at("geometry"), cfg.constants);
  cfg.feeds = parse_feeds(doc.value("feeds", json::object()), cfg.geometry, cfg.feed_preset, cfg.q0_auto);
  cfg.ensemble = parse_ensemble(doc.value("ensemble", json::object()), cfg.ensemble_presets);
  cfg.solver = parse_solver(doc.value("solver", json::object()));
  if (doc.contains("optimizer")) cfg.optimizer = parse_optimizer(doc.at("optimizer"));
  const json run = doc.value("run", json::object());
  check_keys(run, {"amplitude_grid", "fourier_indices", "seed", "trajectories"}, "run");
  cfg.amplitude_grid = run.contains("amplitude_grid") ? parse_grid(run.at("amplitude_grid"))
                                                      : parse_grid(json("0.25:0.25:12"));
  read(run, "fourier_indices", cfg.fourier_indices);
  read(run, "seed", cfg.seed);
  if (run.contains("trajectories")) cfg.trajectories = std::size_t(run.at("trajectories").get<double>());
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "config '" + path + "' is not valid JSON: " + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

std::vector<Violation> validate_config(const RunConfig& cfg) {
  std::vector<Violation> out = validate_geometry(cfg.geometry);
  validate_ensemble(cfg.ensemble, out);
  for (double b : cfg.amplitude_grid)
    if (!(b > 0)) {
      out.push_back({"run.amplitude_grid", "amplitude values must be positive"});
      break;
    }
  if (cfg.amplitude_grid.empty()) out.push_back({"run.amplitude_grid", "amplitude grid is empty"});
  for (int m : cfg.fourier_indices)
    if (m < 0 || m > 4) {
      out.push_back({"run.fourier_indices", "fourier indices must lie in 0..4"});
      break;
    }
  if (cfg.solver.fem_order < 1 || cfg.solver.fem_order > 3)
    out.push_back({"solver.fem_order", "fem_order must be 1, 2 or 3"});
  if (!(cfg.solver.mesh_h > 0)) out.push_back({"solver.mesh_h", "mesh_h must be positive"});
  if (!(cfg.solver.linear_tol > 0)) out.push_back({"solver.linear_tol", "linear_tol must be positive"});
  if (cfg.trajectories == 0) out.push_back({"run.trajectories", "trajectories must be positive"});
  double xi = 0.0;
  for (const auto& f : cfg.feeds.feeds) {
    xi += f.xi;
    if (!(f.Q > 0)) out.push_back({"feeds.Q", "coupling Q must be positive"});
  }
  if (cfg.feeds.feeds.empty()) out.push_back({"feeds", "at least one feed is required"});
  else if (std::abs(xi - 1.0) > 1e-9) out.push_back({"feeds.xi", "feed amplitudes must sum to 1"});
  if (!(cfg.feeds.Q0 > 0)) out.push_back({"feeds.Q0", "Q0 must be positive"});
  if (!(cfg.feeds.width_z > 0)) out.push_back({"feeds.width_z", "feed height must be positive"});
  return out;
}

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(cfg.source.dump())); }

std::string format_violations(const std::vector<Violation>& v) {
  std::string s;
  for (const auto& x : v) s += x.field + ": " + x.rule + "\n";
  return s;
}

}  // namespace dcp
