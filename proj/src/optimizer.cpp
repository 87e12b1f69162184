#include "dcp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <boost/random/uniform_01.hpp>

#include "dcp/analytic.hpp"
#include "dcp/errors.hpp"
#include "dcp/geometry.hpp"

namespace dcp {

double chi_weight(double b, double b_max) {
  if (!(b_max > 0)) return 0.0;
  return std::clamp(1.0 - b / b_max, 0.0, 1.0);
}

ObjectiveSpec objective_spec(const OptimizerConfig& o) {
  ObjectiveSpec s;
  s.b_max_weight = o.b_max_weight;
  s.b = o.b_grid;
  if (s.b.empty())
    for (double b = 0.25; b <= o.b_max_weight + 1e-12; b += 0.25) s.b.push_back(b);
  s.offsets = o.cloud_offsets;
  s.m1_weight = o.m1_weight;
  return s;
}

double chi_square(const ObjectiveTerms& t, const ObjectiveSpec& spec) {
  double chi = 0.0;
  for (const auto& row : t.dp0)
    for (size_t i = 0; i < t.b.size() && i < row.size(); ++i)
      chi += chi_weight(t.b[i], spec.b_max_weight) * row[i] * row[i];
  if (spec.m1_weight > 0)
    for (double v : t.dp1_b1) chi += spec.m1_weight * v * v;
  return chi;
}

// ------------------------------------------------------------- search

namespace {

struct Search {
  const Evaluator& eval;
  const ParamSpace& space;
  int threads;
  std::map<std::vector<double>, double> memo;
  OptimizeResult* out;

  std::vector<double> to_x(const std::vector<double>& u) const {
    std::vector<double> x(u.size());
    for (size_t i = 0; i < u.size(); ++i)
      x[i] = space.lower[i] + std::clamp(u[i], 0.0, 1.0) * (space.upper[i] - space.lower[i]);
    return x;
  }

  // Evaluates a batch (possibly concurrently) and records new points in order.
  std::vector<double> batch(const std::vector<std::vector<double>>& us) {
    std::vector<std::vector<double>> xs;
    for (const auto& u : us) xs.push_back(to_x(u));
    std::vector<double> f(xs.size(), 0.0);
    std::vector<size_t> todo;
    for (size_t i = 0; i < xs.size(); ++i) {
      auto it = memo.find(xs[i]);
      if (it != memo.end()) f[i] = it->second;
      else if (std::find_if(todo.begin(), todo.end(), [&](size_t j) { return xs[j] == xs[i]; }) == todo.end())
        todo.push_back(i);
    }
    std::vector<Evaluation> res(todo.size());
    auto run = [&](size_t k) {
      Evaluation e;
      try {
        e = eval(xs[todo[k]]);
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
      e.x = xs[todo[k]];
      if (!e.error.empty() || !std::isfinite(e.chi2)) e.chi2 = std::numeric_limits<double>::infinity();
      return e;
    };
    const size_t nt = size_t(std::max(1, threads));
    for (size_t s = 0; s < todo.size(); s += nt) {
      std::vector<std::future<Evaluation>> jobs;
      for (size_t k = s; k < std::min(todo.size(), s + nt); ++k)
        jobs.push_back(std::async(nt > 1 ? std::launch::async : std::launch::deferred, run, k));
      for (size_t k = s; k < std::min(todo.size(), s + nt); ++k) res[k] = jobs[k - s].get();
    }
    for (size_t k = 0; k < todo.size(); ++k) {
      memo[res[k].x] = res[k].chi2;
      out->evaluations.push_back(res[k]);
    }
    for (size_t i = 0; i < xs.size(); ++i) f[i] = memo.at(xs[i]);
    return f;
  }

  double value(const std::vector<double>& u) { return batch({u})[0]; }

  // Central differences in the unit box; one-sided at the bounds.
  std::vector<double> gradient(const std::vector<double>& u, double fu) {
    const double h = 1e-3;
    std::vector<std::vector<double>> pts;
    for (size_t i = 0; i < u.size(); ++i) {
      auto a = u, b = u;
      a[i] = std::min(1.0, u[i] + h);
      b[i] = std::max(0.0, u[i] - h);
      pts.push_back(a);
      pts.push_back(b);
    }
    const auto f = batch(pts);
    std::vector<double> g(u.size());
    for (size_t i = 0; i < u.size(); ++i) {
      const double ua = pts[2 * i][i], ub = pts[2 * i + 1][i];
      double fa = f[2 * i], fb = f[2 * i + 1];
      if (ua == u[i]) fa = fu;
      if (ub == u[i]) fb = fu;
      g[i] = (ua > ub) ? (fa - fb) / (ua - ub) : 0.0;
    }
    return g;
  }

  double best() const {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& e : out->evaluations) b = std::min(b, e.chi2);
    return b;
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

OptimizeResult optimize(const Evaluator& eval, const ParamSpace& space, std::uint64_t seed, const Budget& budget) {
  const size_t n = space.size();
  if (space.lower.size() != n || space.upper.size() != n)
    throw Error(ErrorCode::Config, "optimizer: bounds do not match the parameter names");
  for (size_t i = 0; i < n; ++i)
    if (!(space.upper[i] > space.lower[i]))
      throw Error(ErrorCode::Config, "optimizer: empty range for " + space.names[i]);
  OptimizeResult res;
  Search s{eval, space, budget.threads, {}, &res};

  std::mt19937_64 rng(seed);
  boost::random::uniform_01<double> uni;
  std::vector<std::vector<double>> samples(size_t(std::max(1, budget.samples)));
  for (auto& u : samples) {
    u.resize(n);
    for (auto& v : u) v = uni(rng);
  }
  const auto fs = s.batch(samples);
  res.trace.push_back(s.best());

  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fs[a] < fs[b]; });
  const size_t starts = std::min(order.size(), size_t(std::max(0, budget.top_k)));
  for (size_t st = 0; st < starts; ++st) {
    std::vector<double> u = samples[order[st]];
    double fu = fs[order[st]];
    if (!std::isfinite(fu)) continue;
    std::vector<double> g = s.gradient(u, fu);
    const double gn = std::sqrt(dot(g, g));
    if (!(gn > 0)) continue;
    // Inverse Hessian estimate, scaled so the first step moves 0.1 of the box.
    std::vector<double> H(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) H[i * n + i] = 0.1 / gn;
    for (int it = 0; it < budget.gradient_iters; ++it) {
      std::vector<double> p(n, 0.0);
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) p[i] -= H[i * n + j] * g[j];
      double t = 1.0;
      bool accepted = false;
      std::vector<double> un(n);
      double fn = fu;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        for (size_t i = 0; i < n; ++i) un[i] = std::clamp(u[i] + t * p[i], 0.0, 1.0);
        std::vector<double> step(n);
        for (size_t i = 0; i < n; ++i) step[i] = un[i] - u[i];
        if (dot(step, step) == 0.0) break;
        fn = s.value(un);
        if (fn <= fu + 1e-4 * dot(g, step) && fn < fu) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      const std::vector<double> gnew = s.gradient(un, fn);
      std::vector<double> sv(n), yv(n);
      for (size_t i = 0; i < n; ++i) {
        sv[i] = un[i] - u[i];
        yv[i] = gnew[i] - g[i];
      }
      const double sy = dot(sv, yv);
      if (sy > 1e-300) {
        std::vector<double> Hy(n, 0.0);
        for (size_t i = 0; i < n; ++i)
          for (size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * yv[j];
        const double yHy = dot(yv, Hy);
        for (size_t i = 0; i < n; ++i)
          for (size_t j = 0; j < n; ++j)
            H[i * n + j] += (sy + yHy) * sv[i] * sv[j] / (sy * sy) - (Hy[i] * sv[j] + sv[i] * Hy[j]) / sy;
      }
      u = un;
      fu = fn;
      g = gnew;
      res.trace.push_back(s.best());
      if (fu == 0.0) break;
    }
  }

  res.best_chi2 = std::numeric_limits<double>::infinity();
  for (const auto& e : res.evaluations)
    if (e.chi2 < res.best_chi2) {
      res.best_chi2 = e.chi2;
      res.best = e.x;
    }
  return res;
}

double null_1d(const std::string& step, const std::function<double(double)>& f, double x0, double lo,
               double hi, double tol) {
  const double f0 = f(x0);
  if (std::abs(f0) < tol) return x0;
  const double flo = f(lo), fhi = f(hi);
  if (std::abs(flo) < tol) return lo;
  if (std::abs(fhi) < tol) return hi;
  if ((flo > 0) == (fhi > 0))
    throw Error(ErrorCode::BracketFailed, step + ": residual has the same sign at both ends of [" +
                                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
  double last = std::abs(f0), best_x = x0;
  auto g = [&](double x) {
    const double v = f(x);
    if (std::abs(v) < last) {
      last = std::abs(v);
      best_x = x;
    }
    return v;
  };
  auto done = [&](double a, double b) { return last < tol || std::abs(b - a) < 1e-12 * (hi - lo); };
  boost::uintmax_t iters = 60;
  boost::math::tools::toms748_solve(g, lo, hi, flo, fhi, done, iters);
  if (last >= tol) throw Error(ErrorCode::BracketFailed, step + ": residual did not reach tolerance");
  return best_x;
}

// ------------------------------------------------------------- parameters

namespace {

size_t section_index(const std::string& name, const std::string& stem) {
  if (name == stem) return 0;
  return std::stoul(name.substr(stem.size() + 1));
}

bool has_stem(const std::string& name, const std::string& stem) {
  return name == stem || name.rfind(stem + ".", 0) == 0;
}

CutoffSection& section(CavityGeometry& g, const std::string& name, const std::string& stem) {
  const size_t i = section_index(name, stem);
  if (i >= g.cutoff_sections.size())
    throw Error(ErrorCode::Config, "parameter " + name + ": no such cutoff section");
  return g.cutoff_sections[i];
}

}  // namespace

void apply_parameter(RunConfig& cfg, const std::string& name, double v) {
  CavityGeometry& g = cfg.geometry;
  if (name == "body_radius") g.body_radius = v;
  else if (name == "body_height") g.body_height = v;
  else if (name == "aperture_radius") g.aperture_radius = v;
  else if (has_stem(name, "cutoff_radius")) section(g, name, "cutoff_radius").radius = v;
  else if (has_stem(name, "cutoff_length")) section(g, name, "cutoff_length").length = v;
  else if (name == "feed_height") {
    for (auto& f : cfg.feeds.feeds) f.z = f.z < 0 ? -v : v;
    for (auto& f : g.feed_sites) f.z = f.z < 0 ? -v : v;
  } else if (name == "extension_height") {
    if (!g.mode_filter) throw Error(ErrorCode::Config, "extension_height needs a mode filter");
    g.mode_filter->length = v;
  } else {
    throw Error(ErrorCode::Config, "unknown optimizer parameter '" + name + "'");
  }
}

double read_parameter(const RunConfig& cfg, const std::string& name) {
  RunConfig c = cfg;
  const CavityGeometry& g = cfg.geometry;
  if (name == "body_radius") return g.body_radius;
  if (name == "body_height") return g.body_height;
  if (name == "aperture_radius") return g.aperture_radius;
  if (has_stem(name, "cutoff_radius")) return section(c.geometry, name, "cutoff_radius").radius;
  if (has_stem(name, "cutoff_length")) return section(c.geometry, name, "cutoff_length").length;
  if (name == "feed_height") {
    double h = 0.0;
    for (const auto& f : cfg.feeds.feeds) h = std::max(h, std::abs(f.z));
    return h;
  }
  if (name == "extension_height") {
    if (!g.mode_filter) throw Error(ErrorCode::Config, "extension_height needs a mode filter");
    return g.mode_filter->length;
  }
  throw Error(ErrorCode::Config, "unknown optimizer parameter '" + name + "'");
}

// ------------------------------------------------------------- cavity objective

CavityObjective::CavityObjective(RunConfig base, ParamSpace space, int threads, Logger log)
    : base_(std::move(base)), space_(std::move(space)), threads_(threads), log_(std::move(log)) {
  spec_ = objective_spec(base_.optimizer);
  for (const auto& n : space_.names) (void)read_parameter(base_, n);
}

RunConfig CavityObjective::configure(const std::vector<double>& x) const {
  if (x.size() != space_.size()) throw Error(ErrorCode::Config, "parameter vector has the wrong length");
  RunConfig cfg = base_;
  for (size_t i = 0; i < x.size(); ++i) apply_parameter(cfg, space_.names[i], x[i]);
  return cfg;
}

double CavityObjective::null_residual(const RunConfig& cfg, int m) const {
  const BuiltField f = build_field(cfg, {m}, 1);
  const Analysis a = prepare_analysis(cfg, f, effective_network(cfg, f), 65);
  const auto table = build_table(a.ctx, a.cache, 1.0);
  double off = 0.0;
  for (double o : spec_.offsets) off = std::max(off, o);
  return delta_function_average(off, 0.0, table, m);
}

RunConfig CavityObjective::null_sequence(const RunConfig& in, std::vector<double>* residuals) const {
  RunConfig cfg = in;
  const auto& pc = cfg.constants;
  const auto& o = cfg.optimizer;
  double detune = 0.0;
  // 1. Resonance.
  if (cfg.solver.field_model == FieldModelKind::Analytic) {
    cfg.geometry.body_height = te011_resonant_height(cfg.geometry.body_radius, pc.f_atom, pc);
    detune = standing_wave(cfg.geometry).k / pc.k() - 1.0;
  } else {
    const auto eig = tune_height(cfg.geometry, mesh_options(cfg, feed_planes(cfg.feeds)), fem_options(cfg),
                                 pc.k(), cfg.solver.tune_tol);
    detune = eig->eigen_k / pc.k() - 1.0;
    cfg.solver.tune_height = false;
  }
  double r2 = 0.0, r1 = 0.0;
  // 2. dP2(b=1) with the top-wall extension.
  if (o.null_m2) {
    const double x0 = read_parameter(cfg, "extension_height");
    auto f = [&](double v) {
      RunConfig c = cfg;
      apply_parameter(c, "extension_height", v);
      return null_residual(c, 2);
    };
    const double x = null_1d("null dP2(b=1)", f, x0, 0.5 * x0, 1.5 * x0, o.tol_p);
    apply_parameter(cfg, "extension_height", x);
    r2 = null_residual(cfg, 2);
  }
  // 3. dP1(b=1) with the first cutoff length.
  if (o.null_m1 && !cfg.geometry.closed()) {
    const double x0 = read_parameter(cfg, "cutoff_length");
    auto f = [&](double v) {
      RunConfig c = cfg;
      apply_parameter(c, "cutoff_length", v);
      return null_residual(c, 1);
    };
    const double x = null_1d("null dP1(b=1)", f, x0, 0.5 * x0, 1.5 * x0, o.tol_p);
    apply_parameter(cfg, "cutoff_length", x);
    r1 = null_residual(cfg, 1);
  }
  if (residuals) *residuals = {detune, r2, r1};
  return cfg;
}

ObjectiveTerms CavityObjective::terms(const RunConfig& cfg) const {
  std::vector<int> ms = {0};
  if (spec_.m1_weight > 0) ms.push_back(1);
  const BuiltField f = build_field(cfg, ms, threads_);
  const Analysis a = prepare_analysis(cfg, f, effective_network(cfg, f));
  ObjectiveTerms t;
  t.b = spec_.b;
  t.dp0.assign(spec_.offsets.size(), std::vector<double>(t.b.size(), 0.0));
  for (size_t i = 0; i < t.b.size(); ++i) {
    const auto table = build_table(a.ctx, a.cache, t.b[i]);
    for (size_t k = 0; k < spec_.offsets.size(); ++k)
      t.dp0[k][i] = delta_function_average(spec_.offsets[k], 0.0, table, 0);
  }
  if (spec_.m1_weight > 0) {
    const auto table = build_table(a.ctx, a.cache, 1.0);
    for (double off : spec_.offsets) t.dp1_b1.push_back(delta_function_average(off, 0.0, table, 1));
  }
  return t;
}

Evaluation CavityObjective::evaluate(const std::vector<double>& x) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(x);
    if (it != memo_.end()) return it->second;
  }
  Evaluation e;
  e.x = x;
  try {
    const RunConfig cfg = null_sequence(configure(x), &e.null_residuals);
    e.chi2 = chi_square(terms(cfg), spec_);
  } catch (const Error& err) {
    std::ostringstream os;
    os << err.what() << " at";
    for (size_t i = 0; i < x.size(); ++i) os << ' ' << space_.names[i] << '=' << x[i];
    throw Error(ErrorCode::SolveFailed, os.str());
  }
  if (log_) {
    std::ostringstream os;
    os << "chi2 " << e.chi2 << " at";
    for (size_t i = 0; i < x.size(); ++i) os << ' ' << space_.names[i] << '=' << x[i];
    log_(os.str());
  }
  std::lock_guard<std::mutex> lock(mu_);
  memo_[x] = e;
  return e;
}

}  // namespace dcp
