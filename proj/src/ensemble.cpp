#include "dcp/ensemble.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "dcp/errors.hpp"

namespace dcp {

namespace {

constexpr std::size_t kBlock = 8192;

// SplitMix64 keyed on (seed, index); satisfies UniformRandomBitGenerator.
class KeyedSplitMix {
 public:
  using result_type = std::uint64_t;
  KeyedSplitMix(std::uint64_t seed, std::uint64_t index)
      : state_(mix(seed ^ mix(index + 0x632be59bd9b4e019ull))) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

template <class F>
void run_blocks(std::size_t n_blocks, int threads, F&& f) {
  if (threads <= 0) threads = default_threads();
  threads = int(std::min<std::size_t>(std::size_t(std::max(threads, 1)), std::max<std::size_t>(n_blocks, 1)));
  if (threads == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) f(b);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t b = std::size_t(t); b < n_blocks; b += std::size_t(threads)) f(b);
    });
  for (auto& th : pool) th.join();
}

struct Kinematics {
  double t_ref, ax, ay, vx0, vy0, xoff, yoff;
  double pos_x(double x_ref, double vx, double t) const {
    return x_ref + vx * (t - t_ref) + 0.5 * ax * (t * t - t_ref * t_ref);
  }
  double pos_y(double y_ref, double vy, double t) const {
    return y_ref + vy * (t - t_ref) + 0.5 * ay * (t * t - t_ref * t_ref);
  }
};

Kinematics kinematics(const EnsembleConfig& c, const PhysicalConstants& pc) {
  Kinematics k;
  k.t_ref = c.reference_time();
  k.ax = -pc.g_grav * c.alpha_tilt * std::cos(c.tilt_azimuth);
  k.ay = -pc.g_grav * c.alpha_tilt * std::sin(c.tilt_azimuth);
  k.xoff = c.rho_off * std::cos(c.phi_off);
  k.yoff = c.rho_off * std::sin(c.phi_off);
  launch_velocity(c, pc, k.vx0, k.vy0);
  return k;
}

}  // namespace

int default_threads() {
  if (const char* s = std::getenv("DCP_THREADS")) {
    const int n = std::atoi(s);
    if (n > 0) return n;
  }
  const unsigned h = std::thread::hardware_concurrency();
  return h ? int(h) : 1;
}

void launch_velocity(const EnsembleConfig& c, const PhysicalConstants& pc, double& vx, double& vy) {
  if (c.launch_mode == LaunchMode::AlongAxis) {
    vx = c.v0x;
    vy = c.v0y;
    return;
  }
  const double tr = c.reference_time();
  const double ax = -pc.g_grav * c.alpha_tilt * std::cos(c.tilt_azimuth);
  const double ay = -pc.g_grav * c.alpha_tilt * std::sin(c.tilt_azimuth);
  const double dt = c.t2 - tr;
  const double q = 0.5 * (c.t2 * c.t2 - tr * tr);
  vx = -(c.rho_off * std::cos(c.phi_off) + ax * q) / dt;
  vy = -(c.rho_off * std::sin(c.phi_off) + ay * q) / dt;
}

TrajectorySet sample_trajectories(const EnsembleConfig& c, const PhysicalConstants& pc,
                                  std::uint64_t seed, std::size_t n, int threads) {
  const Kinematics k = kinematics(c, pc);
  const double sr = c.r00 / std::sqrt(2.0);
  const double sv = c.thermal_speed(pc) / std::sqrt(2.0);
  const double ra2 = c.r_a * c.r_a;
  std::vector<double> times = {c.t1 - c.dt_a, c.t1 + c.dt_a, c.t2 - c.dt_a, c.t2 + c.dt_a};
  std::vector<double> radii2(4, ra2);
  for (const auto& a : c.extra_apertures) {
    times.push_back(a.t);
    radii2.push_back(a.r * a.r);
  }
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<Trajectory>> blocks(nb);
  run_blocks(nb, threads, [&](std::size_t b) {
    auto& out = blocks[b];
    const std::size_t i0 = b * kBlock, i1 = std::min(n, i0 + kBlock);
    boost::random::normal_distribution<double> N01(0.0, 1.0);
    for (std::size_t i = i0; i < i1; ++i) {
      KeyedSplitMix g(seed, i);
      const double xr = k.xoff + sr * N01(g);
      const double yr = k.yoff + sr * N01(g);
      const double vx = k.vx0 + sv * N01(g);
      const double vy = k.vy0 + sv * N01(g);
      bool ok = true;
      for (size_t a = 0; a < times.size() && ok; ++a) {
        const double x = k.pos_x(xr, vx, times[a]), y = k.pos_y(yr, vy, times[a]);
        ok = x * x + y * y < radii2[a];
      }
      if (!ok) continue;
      Trajectory t;
      t.x1 = k.pos_x(xr, vx, c.t1);
      t.y1 = k.pos_y(yr, vy, c.t1);
      t.x2 = k.pos_x(xr, vx, c.t2);
      t.y2 = k.pos_y(yr, vy, c.t2);
      t.xd = k.pos_x(xr, vx, c.t_detect);
      t.yd = k.pos_y(yr, vy, c.t_detect);
      const double dx = t.xd - c.detection.x0, dy = t.yd - c.detection.y0;
      t.w = (1.0 - c.detection.a * dx * dx / ra2) * (1.0 - c.detection.b * dy * dy / ra2);
      out.push_back(t);
    }
  });
  TrajectorySet set;
  set.sampled = n;
  for (auto& b : blocks) set.items.insert(set.items.end(), b.begin(), b.end());
  if (n == 0 || double(set.items.size()) < 1e-6 * double(n) || set.items.empty())
    throw Error(ErrorCode::EmptyEnsemble, "fewer than 1e-6 of the sampled atoms survive the apertures");
  return set;
}

Average average_delta_p(const TrajectorySet& set, const ResponseTable& table, int m, double delta_nu,
                        int threads) {
  const int slot = table.slot(m);
  if (slot < 0) throw Error(ErrorCode::MissingBaseSolution, "response table lacks m=" + std::to_string(m));
  const std::size_t n = set.items.size();
  if (n == 0) throw Error(ErrorCode::EmptyEnsemble, "no trajectories");
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  struct Sums {
    double w = 0, w2 = 0, wd = 0, w2d = 0, w2dd = 0, ws = 0, w2s = 0, w2ss = 0;
  };
  std::vector<Sums> part(nb);
  run_blocks(nb, threads, [&](std::size_t b) {
    Sums s;
    const std::size_t i0 = b * kBlock, i1 = std::min(n, i0 + kBlock);
    for (std::size_t i = i0; i < i1; ++i) {
      const auto& t = set.items[i];
      const double r1 = std::hypot(t.x1, t.y1), r2 = std::hypot(t.x2, t.y2);
      const double th1 = table.theta_at(r1), th2 = table.theta_at(r2);
      const double p1 = m ? std::atan2(t.y1, t.x1) : 0.0, p2 = m ? std::atan2(t.y2, t.x2) : 0.0;
      const double dp =
          delta_p_pair_values(m, th1, th2, table.dphi_at(slot, r1), table.dphi_at(slot, r2), p1, p2);
      const double sl = ramsey_slope_values(delta_nu, th1, th2);
      const double w = t.w;
      s.w += w;
      s.w2 += w * w;
      s.wd += w * dp;
      s.w2d += w * w * dp;
      s.w2dd += w * w * dp * dp;
      s.ws += w * sl;
      s.w2s += w * w * sl;
      s.w2ss += w * w * sl * sl;
    }
    part[b] = s;
  });
  Sums t;
  for (const auto& s : part) {
    t.w += s.w;
    t.w2 += s.w2;
    t.wd += s.wd;
    t.w2d += s.w2d;
    t.w2dd += s.w2dd;
    t.ws += s.ws;
    t.w2s += s.w2s;
    t.w2ss += s.w2ss;
  }
  Average a;
  a.n = n;
  if (!(t.w > 0)) throw Error(ErrorCode::EmptyEnsemble, "detection weights sum to zero");
  a.mean = t.wd / t.w;
  a.slope = t.ws / t.w;
  const double vd = t.w2dd - 2 * a.mean * t.w2d + a.mean * a.mean * t.w2;
  const double vs = t.w2ss - 2 * a.slope * t.w2s + a.slope * a.slope * t.w2;
  a.stderr_ = std::sqrt(std::max(vd, 0.0)) / t.w;
  a.slope_stderr = std::sqrt(std::max(vs, 0.0)) / t.w;
  return a;
}

Density uniform_density() {
  return [](double, double) { return 1.0; };
}

Density quadratic_density(double alpha, double x_off, double y_off, double r_a) {
  return [=](double x, double y) {
    const double dx = x - x_off, dy = y - y_off;
    return 1.0 + alpha * ((dx * dx + dy * dy) / (r_a * r_a) - 0.5);
  };
}

namespace {

// Polar quadrature on the disk: nodes (x, y) with area weights.
struct DiskRule {
  std::vector<double> x, y, r, phi, w;
};

DiskRule disk_rule(double R, int n_rho, int n_phi) {
  DiskRule d;
  using G = boost::math::quadrature::gauss<double, 32>;
  const auto& a = G::abscissa();
  const auto& wt = G::weights();
  std::vector<double> gx, gw;
  for (size_t i = 0; i < a.size(); ++i) {
    gx.push_back(a[i]);
    gw.push_back(wt[i]);
    if (a[i] != 0.0) {
      gx.push_back(-a[i]);
      gw.push_back(wt[i]);
    }
  }
  const int panels = std::max(1, n_rho / int(gx.size()));
  const double h = R / panels;
  for (int p = 0; p < panels; ++p)
    for (size_t i = 0; i < gx.size(); ++i) {
      const double r = p * h + 0.5 * h * (1.0 + gx[i]);
      const double wr = 0.5 * h * gw[i] * r;
      for (int j = 0; j < n_phi; ++j) {
        const double ph = 2.0 * pi * (j + 0.5) / n_phi;
        d.x.push_back(r * std::cos(ph));
        d.y.push_back(r * std::sin(ph));
        d.r.push_back(r);
        d.phi.push_back(ph);
        d.w.push_back(wr * 2.0 * pi / n_phi);
      }
    }
  return d;
}

}  // namespace

double uncorrelated_average(const Density& n1, const Density& n2, const ResponseTable& table, int m,
                            int n_rho, int n_phi) {
  const int slot = table.slot(m);
  if (slot < 0) throw Error(ErrorCode::MissingBaseSolution, "response table lacks m=" + std::to_string(m));
  const auto d = disk_rule(table.rho_max, n_rho, n_phi);
  double N1 = 0, N2 = 0, S1 = 0, S2 = 0, D1 = 0, D2 = 0;
  for (size_t i = 0; i < d.w.size(); ++i) {
    const double a = n1(d.x[i], d.y[i]) * d.w[i], b = n2(d.x[i], d.y[i]) * d.w[i];
    const double st = std::sin(table.theta_at(d.r[i]));
    const double dp = table.dphi_at(slot, d.r[i]) * std::cos(m * d.phi[i]);
    N1 += a;
    N2 += b;
    S1 += a * st;
    S2 += b * st;
    D1 += a * dp;
    D2 += b * dp;
  }
  return 0.5 * (S2 / N2) * (D1 / N1) - 0.5 * (S1 / N1) * (D2 / N2);
}

double uncorrelated_from_samples(const TrajectorySet& set, const ResponseTable& table, int m) {
  const int slot = table.slot(m);
  if (slot < 0) throw Error(ErrorCode::MissingBaseSolution, "response table lacks m=" + std::to_string(m));
  double W = 0, S1 = 0, S2 = 0, D1 = 0, D2 = 0;
  for (const auto& t : set.items) {
    const double r1 = std::hypot(t.x1, t.y1), r2 = std::hypot(t.x2, t.y2);
    const double c1 = m ? std::cos(m * std::atan2(t.y1, t.x1)) : 1.0;
    const double c2 = m ? std::cos(m * std::atan2(t.y2, t.x2)) : 1.0;
    W += t.w;
    S1 += t.w * std::sin(table.theta_at(r1));
    S2 += t.w * std::sin(table.theta_at(r2));
    D1 += t.w * table.dphi_at(slot, r1) * c1;
    D2 += t.w * table.dphi_at(slot, r2) * c2;
  }
  return 0.5 * (S2 / W) * (D1 / W) - 0.5 * (S1 / W) * (D2 / W);
}

double uncorrelated_quadratic(double alpha1, double alpha2, double x_off, double y_off,
                              const ResponseTable& table, int m, int n_rho, int n_phi) {
  const int slot = table.slot(m);
  if (slot < 0) throw Error(ErrorCode::MissingBaseSolution, "response table lacks m=" + std::to_string(m));
  const auto d = disk_rule(table.rho_max, n_rho, n_phi);
  const double ra2 = table.rho_max * table.rho_max;
  double A = 0, S = 0, D = 0, QD = 0, QS = 0;
  for (size_t i = 0; i < d.w.size(); ++i) {
    const double st = std::sin(table.theta_at(d.r[i]));
    const double dp = table.dphi_at(slot, d.r[i]) * std::cos(m * d.phi[i]);
    const double dx = d.x[i] - x_off, dy = d.y[i] - y_off;
    const double q = (dx * dx + dy * dy) / ra2;
    A += d.w[i];
    S += d.w[i] * st;
    D += d.w[i] * dp;
    QD += d.w[i] * q * dp;
    QS += d.w[i] * q * st;
  }
  return 0.5 * (alpha1 - alpha2) * ((S / A) * (QD / A) - (D / A) * (QS / A));
}

double delta_function_average(double rho_off, double phi_off, const ResponseTable& table, int m) {
  const int slot = table.slot(m);
  if (slot < 0) throw Error(ErrorCode::MissingBaseSolution, "response table lacks m=" + std::to_string(m));
  const double first = 0.5 * table.disk_mean_sin_theta() * table.dphi_at(slot, rho_off) * std::cos(m * phi_off);
  const double second = m == 0 ? 0.5 * std::sin(table.theta_at(rho_off)) * table.disk_mean_dphi(slot) : 0.0;
  return first - second;
}

double delta_function_slope(double rho_off, const ResponseTable& table, double delta_nu) {
  return -(0.5 * pi / delta_nu) * std::sin(table.theta_at(rho_off)) * table.disk_mean_sin_theta();
}

DcpCurve dcp_curve(const EnsembleConfig& cfg, const PhysicalConstants& pc, const ResponseContext& ctx,
                   const ProfileCache& cache, const CurveRequest& req) {
  DcpCurve c;
  c.seed = req.seed;
  TrajectorySet set;
  if (req.method != CurveMethod::DeltaFunction) {
    set = sample_trajectories(cfg, pc, req.seed, req.n, req.threads);
    c.n_mc = set.items.size();
    c.survival = set.survival();
  }
  const double dnu = ctx.delta_nu;
  const double floor = req.slope_floor_rel * 0.5 * pi / dnu;
  for (double b : req.b) {
    const auto table = build_table(ctx, cache, b);
    c.pulse_area = std::max(c.pulse_area, table.pulse_area);
    for (int m : req.ms) {
      CurvePoint p;
      p.b = b;
      p.m = m;
      switch (req.method) {
        case CurveMethod::MonteCarlo: {
          const auto a = average_delta_p(set, table, m, dnu, req.threads);
          p.dp = a.mean;
          p.dp_stderr = a.stderr_;
          p.slope = a.slope;
          break;
        }
        case CurveMethod::DeltaFunction:
          p.dp = delta_function_average(cfg.rho_off, cfg.phi_off, table, m);
          p.slope = delta_function_slope(cfg.rho_off, table, dnu);
          break;
        case CurveMethod::Uncorrelated: {
          p.dp = uncorrelated_from_samples(set, table, m);
          p.slope = average_delta_p(set, table, m, dnu, req.threads).slope;
          break;
        }
      }
      const auto fs = frequency_shift(p.dp, p.slope, req.f_atom, floor);
      p.singular = fs.singular;
      p.dnu = fs.dnu;
      p.dnu_fractional = fs.fractional;
      c.points.push_back(p);
    }
  }
  return c;
}

}  // namespace dcp
