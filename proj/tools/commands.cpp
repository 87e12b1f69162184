#include "commands.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "dcp/analytic.hpp"
#include "dcp/config.hpp"
#include "dcp/errors.hpp"
#include "dcp/feeds.hpp"
#include "dcp/field_io.hpp"
#include "dcp/optimizer.hpp"
#include "dcp/output.hpp"
#include "dcp/pipeline.hpp"

#ifndef DCP_VERSION
#define DCP_VERSION "0.0.0"
#endif

namespace dcp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Session {
  const Command& cmd;
  fs::path out;
  std::vector<std::string> files;
  Logger log;

  void write(const std::string& name, const std::string& text) {
    write_text((out / name).string(), text);
    files.push_back(name);
  }
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::Config:
    case ErrorCode::Format: return 2;
    case ErrorCode::EmptyEnsemble: return 4;
    default: return 3;
  }
}

RunConfig load(const Command& cmd) {
  if (cmd.config.empty()) throw Error(ErrorCode::Config, "--config is required");
  RunConfig cfg = load_config(cmd.config, cmd.overrides);
  const auto v = validate_config(cfg);
  if (!v.empty()) throw Error(ErrorCode::Config, "invalid configuration:\n" + format_violations(v));
  return cfg;
}

std::vector<double> grid_arg(const std::string& s, const std::vector<double>& fallback) {
  if (s.empty()) return fallback;
  return parse_grid(json(s));
}

std::vector<int> int_list(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, "expected a comma separated integer list, got '" + s + "'");
    }
  }
  return v;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(std::max(n, 2));
  for (size_t i = 0; i < v.size(); ++i) v[i] = a + (b - a) * double(i) / double(v.size() - 1);
  return v;
}

PhaseMap phase_from_map(const FieldMap& map, int m, double floor = 1e-4) {
  PhaseMap p;
  p.m = m;
  p.rho = map.rho;
  p.z = map.z;
  p.h0z = map.h0z;
  const MapComponent* c = map.find(m);
  p.gz = c ? c->arrays.at("g_z") : std::vector<double>(map.size(), 0.0);
  double hmax = 0.0;
  for (double h : map.h0z)
    if (std::isfinite(h)) hmax = std::max(hmax, std::abs(h));
  p.phase.assign(map.size(), std::numeric_limits<double>::quiet_NaN());
  for (size_t k = 0; k < map.size(); ++k)
    if (std::isfinite(p.h0z[k]) && std::abs(p.h0z[k]) > floor * hmax) p.phase[k] = std::atan(-p.gz[k] / p.h0z[k]);
  return p;
}

std::vector<std::string> presets_for(const Command& cmd, const RunConfig& cfg) {
  if (!cmd.presets.empty()) return cmd.presets;
  if (!cfg.ensemble_presets.empty()) return cfg.ensemble_presets;
  return {"config"};
}

std::string curve_csv(const DcpCurve& c) {
  std::ostringstream os;
  write_curve_csv(os, c);
  return os.str();
}

int cmd_fields(Session& s, const RunConfig& cfg) {
  const auto& ms = cfg.fourier_indices;
  const BuiltField f = build_field(cfg, ms, s.cmd.threads, s.log);
  const FeedNetwork net = effective_network(cfg, f);
  const auto composed = compose(net, *f.base, cfg.constants.omega());
  const double ztop = f.eig ? f.eig->mesh->z_top : f.geometry.half_height();
  const double rmax = f.geometry.body_radius;
  FieldMap map = sample_field_map(*composed, ms, linspace(0.0, rmax, s.cmd.grid_rho),
                                  linspace(-ztop, ztop, s.cmd.grid_z));
  map.source = f.eig ? "fem" : "analytic";
  map.q0 = f.q0;
  map.geometry_hash = geometry_hash(f.geometry);
  s.write("fields.json", field_map_to_json(map).dump() + "\n");
  for (int m : ms) {
    std::ostringstream os;
    write_phase_csv(os, phase_from_map(map, m));
    s.write("phase_m" + std::to_string(m) + ".csv", os.str());
  }

  json summary;
  summary["field_model"] = map.source;
  summary["eigen_k"] = f.eigen_k;
  summary["k_target"] = cfg.constants.k();
  summary["q0"] = f.q0;
  summary["body_height"] = f.geometry.body_height;
  summary["geometry_hash"] = map.geometry_hash;
  if (f.eig) {
    summary["triangles"] = f.eig->mesh->tris.size();
    summary["lagrange_dofs"] = f.eig->dofs.n_lagrange;
    // Near-axis fit for the single weak feed, in microradians.
    const double r_a = cfg.ensemble.r_a;
    const double d = f.geometry.body_height;
    const auto rho = linspace(0.0, r_a, 11);
    const auto z = linspace(0.0, 0.4 * d, 21);
    json fit = json::object();
    for (size_t i = 0; i < ms.size(); ++i) {
      const auto pm = extract_phase_map(*f.sols[i], f.base->weights(ms[i]), rho, z);
      const auto c = fit_phase_coefficients(pm, r_a, pi / d, 0.4 * d);
      fit[std::to_string(ms[i])] = {c[0] * 1e6, c[1] * 1e6};
      if (!f.sols[i]->deflated.empty()) summary["deflated_m" + std::to_string(ms[i])] = f.sols[i]->deflated;
    }
    summary["phase_coefficients_urad"] = fit;
  }
  s.write("summary.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_template(Session& s) {
  const auto ps = int_list(s.cmd.p_list);
  for (int p : ps)
    if (p < 1 || p % 2 == 0) throw Error(ErrorCode::Config, "template orders p must be odd and positive");
  const auto b = grid_arg(s.cmd.b_grid, parse_grid(json("0:0.05:6")));
  std::ostringstream os;
  write_template_csv(os, template_rows(ps, b));
  s.write("template.csv", os.str());
  return 0;
}

std::vector<DcpCurve> curves(Session& s, const RunConfig& cfg, const Analysis& a, const std::vector<int>& ms) {
  const auto b = grid_arg(s.cmd.b_grid, cfg.amplitude_grid);
  const std::size_t n = s.cmd.n >= 0 ? std::size_t(s.cmd.n) : cfg.trajectories;
  const CurveMethod method = parse_method(s.cmd.method);
  std::vector<DcpCurve> out;
  for (const auto& p : presets_for(s.cmd, cfg)) {
    if (s.log) s.log("curve " + p + " (" + method_name(method) + ")");
    out.push_back(run_curve(cfg, a, p, method, b, ms, n, s.cmd.threads));
  }
  return out;
}

int cmd_curve(Session& s, const RunConfig& cfg) {
  const auto& ms = cfg.fourier_indices;
  const BuiltField f = build_field(cfg, ms, s.cmd.threads, s.log);
  const Analysis a = prepare_analysis(cfg, f, effective_network(cfg, f));
  json all = json::array();
  for (const auto& c : curves(s, cfg, a, ms)) {
    s.write("curve_" + c.label + ".csv", curve_csv(c));
    json j = curve_json(c);
    j["method"] = s.cmd.method;
    j["eta"] = a.ctx.eta;
    j["phi0"] = a.ctx.phi0;
    j["delta_nu"] = a.ctx.delta_nu;
    j["q0"] = a.network.Q0;
    all.push_back(j);
  }
  s.write("curves.json", all.dump(2) + "\n");
  return 0;
}

int cmd_sweep(Session& s) {
  if (s.cmd.param.empty() || s.cmd.values.empty())
    throw Error(ErrorCode::Config, "sweep needs --param and --values");
  std::ostringstream os;
  os << "value,preset," << kCurveHeader << '\n';
  json all = json::array();
  for (const auto& v : s.cmd.values) {
    Command c = s.cmd;
    c.overrides.push_back(s.cmd.param + "=" + v);
    const RunConfig cfg = load(c);
    const auto& ms = cfg.fourier_indices;
    const BuiltField f = build_field(cfg, ms, s.cmd.threads, s.log);
    const Analysis a = prepare_analysis(cfg, f, effective_network(cfg, f));
    for (const auto& curve : curves(s, cfg, a, ms)) {
      std::istringstream lines(curve_csv(curve));
      std::string line;
      std::getline(lines, line);
      while (std::getline(lines, line)) os << v << ',' << curve.label << ',' << line << '\n';
      json j = curve_json(curve);
      j["value"] = v;
      all.push_back(j);
    }
  }
  s.write("sweep.csv", os.str());
  s.write("sweep.json", all.dump(2) + "\n");
  return 0;
}

int cmd_feed_cases(Session& s, const RunConfig& cfg) {
  const double q0 = cfg.feeds.Q0;
  const double ql = q0 / s.cmd.q_ratio;
  const double eps = s.cmd.eps;
  struct Case {
    const char* name;
    FeedNetwork net;
  };
  const std::vector<Case> cases = {
      {"single_overcoupled", case_single_overcoupled(q0, ql)},
      {"single_feed_two_losses", case_single_feed_two_losses(q0, 2 * ql, 2 * ql)},
      {"unequal_feeds_equal_losses", case_unequal_feeds_equal_losses(q0, eps, ql)},
      {"equal_feeds_unequal_losses", case_equal_feeds_unequal_losses(q0, eps, ql)},
      {"matched_unequal", case_matched_unequal(q0, eps, ql)},
      {"phase_imbalance", case_phase_imbalance(q0, eps, ql)},
  };
  std::ostringstream os;
  os << "case,m,factor_re,factor_im,q0_over_q\n";
  json all = json::array();
  for (const auto& c : cases) {
    for (int m = 0; m <= 4; ++m) {
      const auto f = network_factor(c.net, m);
      const double r = q0 / c.net.q_loaded();
      os << c.name << ',' << m << ',' << format_number(f.real()) << ',' << format_number(f.imag()) << ','
         << format_number(r) << '\n';
      all.push_back({{"case", c.name}, {"m", m}, {"factor_re", f.real()}, {"factor_im", f.imag()}, {"q0_over_q", r}});
    }
  }
  s.write("feed_cases.csv", os.str());
  s.write("feed_cases.json", all.dump(2) + "\n");
  return 0;
}

int cmd_optimize(Session& s, const RunConfig& cfg) {
  const auto& o = cfg.optimizer;
  ParamSpace space{o.parameters, o.lower, o.upper};
  if (space.size() == 0) throw Error(ErrorCode::Config, "optimizer.parameters is empty");
  CavityObjective obj(cfg, space, s.cmd.threads, s.log);
  // Samples run concurrently; the search itself stays sequential.
  Budget budget{o.samples, o.gradient_iters, o.top_k, s.cmd.threads > 0 ? s.cmd.threads : default_threads()};
  const auto res = optimize([&](const std::vector<double>& x) { return obj.evaluate(x); }, space, cfg.seed, budget);
  std::ostringstream lines;
  for (const auto& e : res.evaluations) lines << evaluation_json(e, space).dump() << '\n';
  s.write("optimize.jsonl", lines.str());
  json report;
  Evaluation best;
  best.x = res.best;
  best.chi2 = res.best_chi2;
  report["best"] = evaluation_json(best, space);
  report["evaluations"] = res.evaluations.size();
  report["trace"] = res.trace;
  report["b_max_weight"] = o.b_max_weight;
  s.write("optimize_report.json", report.dump(2) + "\n");
  return 0;
}

int cmd_validate(Session& s) {
  const RunConfig cfg = load_config(s.cmd.config, s.cmd.overrides);
  const auto v = validate_config(cfg);
  json j = json::array();
  for (const auto& x : v) j.push_back({{"field", x.field}, {"rule", x.rule}});
  s.write("violations.json", j.dump(2) + "\n");
  if (v.empty()) {
    std::cout << "configuration is valid\n";
    return 0;
  }
  std::cout << format_violations(v);
  return 2;
}

void write_manifest(Session& s, const std::string& hash, std::uint64_t seed, int status) {
  json m;
  m["tool"] = "dcp";
  m["version"] = DCP_VERSION;
  m["command"] = s.cmd.name;
  m["config_hash"] = hash;
  m["seed"] = seed;
  m["status"] = status;
  m["outputs"] = s.files;
  m["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                  "." + std::to_string(EIGEN_MINOR_VERSION)},
                    {"boost", BOOST_LIB_VERSION}};
  write_text((s.out / "manifest.json").string(), m.dump(2) + "\n");
}

}  // namespace

int run(const Command& cmd) {
  Session s{cmd, fs::path(cmd.out), {}, nullptr};
  if (!cmd.quiet) s.log = [](const std::string& msg) { std::cerr << "[dcp] " << msg << '\n'; };
  std::string hash;
  std::uint64_t seed = 0;
  int status = 0;
  try {
    fs::create_directories(s.out);
    fs::remove(s.out / "error.json");
    if (cmd.name == "template") {
      status = cmd_template(s);
    } else if (cmd.name == "validate") {
      status = cmd_validate(s);
    } else if (cmd.name == "sweep") {
      const RunConfig cfg = load(cmd);
      hash = config_hash(cfg);
      seed = cfg.seed;
      status = cmd_sweep(s);
    } else {
      const RunConfig cfg = load(cmd);
      hash = config_hash(cfg);
      seed = cfg.seed;
      if (cmd.name == "fields") status = cmd_fields(s, cfg);
      else if (cmd.name == "dcp-curve") status = cmd_curve(s, cfg);
      else if (cmd.name == "feed-cases") status = cmd_feed_cases(s, cfg);
      else if (cmd.name == "optimize") status = cmd_optimize(s, cfg);
      else throw Error(ErrorCode::Config, "unknown command '" + cmd.name + "'");
    }
  } catch (const Error& e) {
    status = exit_code(e.code());
    const json j = {{"error", error_name(e.code())}, {"message", e.what()}, {"exit_code", status}};
    std::cerr << j.dump() << '\n';
    std::error_code ec;
    if (fs::is_directory(s.out, ec)) {
      write_text((s.out / "error.json").string(), j.dump(2) + "\n");
      s.files.push_back("error.json");
    }
  } catch (const std::exception& e) {
    status = 3;
    const json j = {{"error", "InternalError"}, {"message", e.what()}, {"exit_code", status}};
    std::cerr << j.dump() << '\n';
  }
  std::error_code ec;
  if (fs::is_directory(s.out, ec)) write_manifest(s, hash, seed, status);
  return status;
}

}  // namespace dcp::cli
