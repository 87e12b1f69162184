#include "dcp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>

#include "dcp/analytic.hpp"
#include "dcp/errors.hpp"

namespace dcp {

std::vector<double> feed_planes(const FeedNetwork& net) {
  std::vector<double> p;
  for (const auto& f : net.feeds) {
    const double z = std::abs(f.z);
    bool seen = false;
    for (double q : p) seen = seen || std::abs(q - z) < 1e-9;
    if (!seen) p.push_back(z);
  }
  std::sort(p.begin(), p.end());
  return p;
}

MeshOptions mesh_options(const RunConfig& cfg, const std::vector<double>& planes) {
  MeshOptions o;
  o.h = cfg.solver.mesh_h;
  o.grading = cfg.solver.grading;
  o.exterior_db = cfg.solver.exterior_db;
  o.element_order = cfg.solver.fem_order;
  o.feed_planes = planes;
  o.feed_width = cfg.feeds.width_z;
  return o;
}

FemOptions fem_options(const RunConfig& cfg) {
  FemOptions f;
  f.order = cfg.solver.fem_order;
  f.linear_tol = cfg.solver.linear_tol;
  f.deflate_window = cfg.solver.deflate_window;
  f.skin_depth = cfg.constants.skin_depth();
  f.seed = cfg.seed;
  return f;
}

std::shared_ptr<const EigenMode> tune_height(CavityGeometry& g, const MeshOptions& mo, const FemOptions& fo,
                                             double k, double tol, int max_iter, const Logger& log) {
  auto note = [&](double d, double r) {
    if (!log) return;
    char buf[96];
    std::snprintf(buf, sizeof buf, "height %.6f mm: k/k0 - 1 = %.3e", d * 1e3, r);
    log(buf);
  };
  // One triangulation, stretched in z for each trial height: remeshing would
  // make k(d) jump at the 1e-8 level and stall the secant.
  const Mesh base = generate_mesh(g, mo, k);
  const double h0 = g.half_height();
  auto solve = [&](double d) {
    auto mesh = std::make_shared<Mesh>(base);
    const double h1 = 0.5 * d;
    for (auto& n : mesh->nodes) n[1] = n[1] <= h0 ? n[1] * (h1 / h0) : n[1] + (h1 - h0);
    mesh->z_top += h1 - h0;
    return std::make_shared<const EigenMode>(solve_eigenmode(mesh, k, fo));
  };
  double d0 = g.body_height;
  auto e0 = solve(d0);
  note(d0, e0->eigen_k / k - 1);
  if (std::abs(e0->eigen_k / k - 1.0) < tol) return e0;
  // First step from the closed-cylinder dispersion with the transverse part
  // held fixed, then secant.
  const double trans = e0->eigen_k * e0->eigen_k - std::pow(pi / d0, 2);
  if (!(k * k > trans)) throw Error(ErrorCode::BracketFailed, "height tuning: mode is above the target");
  double d1 = pi / std::sqrt(k * k - trans);
  for (int it = 0; it < max_iter; ++it) {
    auto e1 = solve(d1);
    const double r1 = e1->eigen_k / k - 1.0;
    note(d1, r1);
    if (std::abs(r1) < tol) {
      g.body_height = d1;
      return e1;
    }
    const double r0 = e0->eigen_k / k - 1.0;
    if (r1 == r0) break;
    const double d2 = d1 - r1 * (d1 - d0) / (r1 - r0);
    if (!(d2 > 0)) break;
    d0 = d1;
    e0 = e1;
    d1 = d2;
  }
  throw Error(ErrorCode::BracketFailed, "height tuning did not reach resonance");
}

BuiltField build_field(const RunConfig& cfg, const std::vector<int>& ms, int threads, const Logger& log) {
  BuiltField out;
  out.geometry = cfg.geometry;
  out.planes = feed_planes(cfg.feeds);
  out.ms = ms;
  const auto& pc = cfg.constants;
  if (cfg.solver.field_model == FieldModelKind::Analytic) {
    if (!cfg.geometry.closed() && log) log("warning: the analytic model ignores the cutoff sections");
    const StandingWave sw = standing_wave(out.geometry);
    const PhaseExpansion pe = load_phase_dataset(cfg.solver.coefficients, pc);
    out.base = std::make_shared<AnalyticFieldModel>(sw, pe);
    out.eigen_k = sw.k;
    out.q0 = te011_q0(sw.R, sw.d, pc.skin_depth());
    return out;
  }

  const MeshOptions mo = mesh_options(cfg, out.planes);
  const FemOptions fo = fem_options(cfg);
  if (cfg.solver.tune_height) {
    out.eig = tune_height(out.geometry, mo, fo, pc.k(), cfg.solver.tune_tol, 12, log);
  } else {
    auto mesh = std::make_shared<const Mesh>(generate_mesh(out.geometry, mo, pc.k()));
    out.eig = std::make_shared<const EigenMode>(solve_eigenmode(mesh, pc.k(), fo));
  }
  out.eigen_k = out.eig->eigen_k;
  out.q0 = out.eig->q0;
  if (log)
    log("eigenmode: " + std::to_string(out.eig->mesh->tris.size()) + " triangles, k/k0 - 1 = " +
        std::to_string(out.eigen_k / pc.k() - 1) + ", Q0 = " + std::to_string(out.q0));

  // Each Fourier index is an independent solve.
  const int nt = std::max(1, threads > 0 ? threads : default_threads());
  std::vector<std::shared_ptr<const FieldSolution>> sols(ms.size());
  for (size_t start = 0; start < ms.size(); start += size_t(nt)) {
    std::vector<std::future<FieldSolution>> jobs;
    const size_t stop = std::min(ms.size(), start + size_t(nt));
    for (size_t i = start; i < stop; ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] { return solve_loss_field(out.eig, ms[i], out.planes); }));
    for (size_t i = start; i < stop; ++i) {
      sols[i] = std::make_shared<const FieldSolution>(jobs[i - start].get());
      if (log) log("loss field m=" + std::to_string(ms[i]) + " solved");
    }
  }
  out.sols = sols;
  out.base = std::make_shared<FemFieldModel>(out.eig, sols);
  return out;
}

FeedNetwork effective_network(const RunConfig& cfg, const BuiltField& f) {
  FeedNetwork net = cfg.feeds;
  if (cfg.q0_auto) net.Q0 = f.q0;
  return net;
}

Analysis prepare_analysis(const RunConfig& cfg, const BuiltField& f, const FeedNetwork& net, int n_rho) {
  Analysis a;
  a.network = net;
  a.field = compose(net, *f.base, cfg.constants.omega());
  const double r_a = cfg.ensemble.r_a;
  if (r_a > a.field->rho_limit() + 1e-12)
    throw Error(ErrorCode::Config, "ensemble.r_a exceeds the radius of the field region on axis");
  a.ctx.field = a.field;
  a.ctx.eta = normalize_amplitude(r_a, cfg.constants.k());
  a.ctx.r_a = r_a;
  a.ctx.delta_nu = cfg.ensemble.ramsey_width();
  a.cache = build_profiles(*a.field, f.ms, r_a, n_rho);
  if (std::find(f.ms.begin(), f.ms.end(), 0) != f.ms.end()) a.ctx.phi0 = calibrate_phi0(a.ctx, a.cache);
  return a;
}

CurveMethod parse_method(const std::string& s) {
  if (s == "mc" || s == "monte-carlo") return CurveMethod::MonteCarlo;
  if (s == "delta") return CurveMethod::DeltaFunction;
  if (s == "uncorrelated") return CurveMethod::Uncorrelated;
  throw Error(ErrorCode::Config, "method must be mc, delta or uncorrelated");
}

const char* method_name(CurveMethod m) {
  switch (m) {
    case CurveMethod::MonteCarlo: return "mc";
    case CurveMethod::DeltaFunction: return "delta";
    case CurveMethod::Uncorrelated: return "uncorrelated";
  }
  return "mc";
}

EnsembleConfig resolve_ensemble(const RunConfig& cfg, const std::string& preset) {
  if (preset.empty() || preset == "config") return cfg.ensemble;
  EnsembleConfig e = ensemble_preset(preset);
  // Timing and aperture belong to the fountain, not to the cloud.
  e.t1 = cfg.ensemble.t1;
  e.t2 = cfg.ensemble.t2;
  e.t_detect = cfg.ensemble.t_detect;
  e.dt_a = cfg.ensemble.dt_a;
  e.r_a = cfg.ensemble.r_a;
  e.delta_nu = cfg.ensemble.delta_nu;
  return e;
}

DcpCurve run_curve(const RunConfig& cfg, const Analysis& a, const std::string& preset, CurveMethod method,
                   const std::vector<double>& b, const std::vector<int>& ms, std::size_t n, int threads) {
  CurveRequest req;
  req.method = method;
  req.ms = ms;
  req.b = b;
  req.seed = cfg.seed;
  req.n = n;
  req.threads = threads;
  req.f_atom = cfg.constants.f_atom;
  const EnsembleConfig e = resolve_ensemble(cfg, preset);
  DcpCurve c = dcp_curve(e, cfg.constants, a.ctx, a.cache, req);
  c.label = preset.empty() ? "config" : preset;
  c.config_hash = config_hash(cfg);
  return c;
}

}  // namespace dcp
