#include "dcp/response.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "dcp/bessel.hpp"
#include "dcp/errors.hpp"

namespace dcp {

namespace {

constexpr int kPanel = kPanelNodes;

struct PanelRule {
  std::array<double, kPanel> x{}, w{};  // on [0, 1]
  // s[i][j] = int_0^{x_i} l_j(t) dt for the Lagrange basis on x.
  std::array<std::array<double, kPanel>, kPanel> s{};

  PanelRule() {
    using G = boost::math::quadrature::gauss<double, kPanel>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    int n = 0;
    for (int i = int(a.size()) - 1; i >= 0; --i) {
      x[n] = 0.5 * (1.0 - a[i]);
      w[n++] = 0.5 * wt[i];
    }
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) continue;
      x[n] = 0.5 * (1.0 + a[i]);
      w[n++] = 0.5 * wt[i];
    }
    for (int i = 0; i < kPanel; ++i) s[i] = partial(x[i]);
  }

  double lagrange(int j, double t) const {
    double v = 1.0;
    for (int k = 0; k < kPanel; ++k)
      if (k != j) v *= (t - x[k]) / (x[j] - x[k]);
    return v;
  }

  std::array<double, kPanel> partial(double t) const {
    std::array<double, kPanel> out{};
    for (int j = 0; j < kPanel; ++j) {
      double acc = 0.0;
      for (int q = 0; q < kPanel; ++q) acc += w[q] * lagrange(j, t * x[q]);
      out[j] = acc * t;
    }
    return out;
  }
};

const PanelRule& rule() {
  static const PanelRule r;
  return r;
}

// Running theta at every node and the total.
double running_theta(const AxialProfile& p, double scale, std::vector<double>* out) {
  const auto& r = rule();
  const size_t np = p.len.size();
  double acc = 0.0;
  if (out) out->resize(p.z.size());
  for (size_t k = 0; k < np; ++k) {
    const double* h = &p.h0z[k * kPanel];
    if (out) {
      for (int i = 0; i < kPanel; ++i) {
        double s = 0.0;
        for (int j = 0; j < kPanel; ++j) s += r.s[i][j] * h[j];
        (*out)[k * kPanel + i] = acc + scale * p.len[k] * s;
      }
    }
    double tot = 0.0;
    for (int j = 0; j < kPanel; ++j) tot += r.w[j] * h[j];
    acc += scale * p.len[k] * tot;
  }
  return acc;
}

double lagrange4(const std::vector<double>& xs, const std::vector<double>& ys, double r) {
  const size_t n = xs.size();
  if (n == 1) return ys[0];
  const double h = xs[1] - xs[0];
  r = std::clamp(r, xs.front(), xs.back());
  long i = long(std::floor((r - xs[0]) / h)) - 1;
  i = std::clamp<long>(i, 0, long(n) - 4);
  double v = 0.0;
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b)
      if (a != b) l *= (r - xs[i + b]) / (xs[i + a] - xs[i + b]);
    v += l * ys[i + a];
  }
  return v;
}

double disk_mean(const std::vector<double>& rho, const std::vector<double>& f) {
  // Simpson on f(rho) rho over a uniform grid with an even number of intervals.
  const size_t n = rho.size();
  const double h = rho[1] - rho[0];
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double c = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += c * f[i] * rho[i];
  }
  s *= h / 3.0;
  const double R = rho.back();
  return 2.0 * s / (R * R);
}

}  // namespace

void append_panel(double z0, double len, std::vector<double>& z, std::vector<double>& w) {
  const auto& r = rule();
  for (int i = 0; i < kPanel; ++i) {
    z.push_back(z0 + len * r.x[i]);
    w.push_back(len * r.w[i]);
  }
}

// ---------------------------------------------------------------- FieldModel

void FieldModel::init_weights() {
  for (int m = 0; m < 5; ++m) weights_[m].assign(component_count(m), 0.0);
  for (int m = 0; m < 5; ++m)
    if (!weights_[m].empty()) weights_[m][0] = 1.0;
}

const std::vector<double>& FieldModel::weights(int m) const { return weights_.at(m); }

void FieldModel::set_weights(int m, std::vector<double> w) {
  if (int(w.size()) != component_count(m))
    throw Error(ErrorCode::MissingBaseSolution, "weight count does not match the components for m=" +
                                                    std::to_string(m));
  weights_.at(m) = std::move(w);
}

AxialProfile FieldModel::profile(double rho, const std::vector<int>& ms) const {
  AxialLine l;
  line(rho, ms, l);
  AxialProfile p;
  p.per_panel = l.per_panel;
  p.z0 = std::move(l.z0);
  p.len = std::move(l.len);
  p.z = std::move(l.z);
  p.w = std::move(l.w);
  p.h0z = std::move(l.h0z);
  p.g.resize(ms.size());
  for (size_t s = 0; s < ms.size(); ++s) {
    const auto& w = weights_.at(ms[s]);
    p.g[s].assign(p.z.size(), 0.0);
    for (size_t c = 0; c < w.size() && c < l.comp[s].size(); ++c) {
      if (w[c] == 0.0) continue;
      for (size_t i = 0; i < p.z.size(); ++i) p.g[s][i] += w[c] * l.comp[s][c][i];
    }
  }
  return p;
}

AnalyticFieldModel::AnalyticFieldModel(StandingWave sw, PhaseExpansion pe, int panels)
    : sw_(sw), pe_(pe), panels_(panels) {
  init_weights();
}

std::shared_ptr<FieldModel> AnalyticFieldModel::clone() const {
  return std::make_shared<AnalyticFieldModel>(*this);
}

void AnalyticFieldModel::line(double rho, const std::vector<int>& ms, AxialLine& out) const {
  const auto& r = rule();
  out.per_panel = kPanel;
  const double L = sw_.d / panels_;
  out.z0.resize(panels_);
  out.len.assign(panels_, L);
  out.z.resize(size_t(panels_) * kPanel);
  out.w.resize(out.z.size());
  out.h0z.resize(out.z.size());
  for (int k = 0; k < panels_; ++k) {
    out.z0[k] = -0.5 * sw_.d + k * L;
    for (int i = 0; i < kPanel; ++i) {
      const size_t n = size_t(k) * kPanel + i;
      out.z[n] = out.z0[k] + L * r.x[i];
      out.w[n] = L * r.w[i];
      out.h0z[n] = sw_.h_z(rho, out.z[n]);
    }
  }
  out.comp.assign(ms.size(), {});
  for (size_t s = 0; s < ms.size(); ++s) {
    auto g = loss_field_from_phase(pe_, sw_, ms[s]);
    std::vector<double> v(out.z.size());
    for (size_t n = 0; n < v.size(); ++n) v[n] = g(rho, out.z[n]);
    out.comp[s] = {std::move(v)};
  }
}

bool AnalyticFieldModel::point(double rho, double z, const std::vector<int>& ms, FieldPoint& out) const {
  if (rho < 0 || rho > sw_.R || std::abs(z) > 0.5 * sw_.d) return false;
  out.e0phi = sw_.e_phi(rho, z);
  out.h0rho = sw_.h_rho(rho, z);
  out.h0z = sw_.h_z(rho, z);
  out.full = false;
  out.f.assign(ms.size(), {0.0, 0.0, 0.0});
  out.g.assign(ms.size(), {0.0, 0.0, 0.0});
  for (size_t s = 0; s < ms.size(); ++s)
    out.g[s][2] = weights(ms[s])[0] * loss_field_from_phase(pe_, sw_, ms[s])(rho, z);
  return true;
}

// ---------------------------------------------------------------- compose

double composed_scale(const FeedNetwork& net, int m, double omega) {
  const auto c = feed_weights(net);
  const double a = alpha(net.delta_omega, net.gamma(omega));
  const double wf = azimuthal_width_factor(m, net.width_phi);
  double s = 0.0;
  for (size_t j = 0; j < c.size(); ++j) s += observable_scale(c[j], a) * std::cos(m * net.feeds[j].phi);
  return s * (m == 0 ? 1.0 : wf);
}

std::shared_ptr<FieldModel> compose(const FeedNetwork& net, const FieldModel& base, double omega) {
  auto out = base.clone();
  const auto c = feed_weights(net);
  const double a = alpha(net.delta_omega, net.gamma(omega));
  for (int m = 0; m < 5; ++m) {
    const int nc = base.component_count(m);
    if (nc == 0) continue;
    std::vector<double> w(nc, 0.0);
    const double wf = m == 0 ? 1.0 : azimuthal_width_factor(m, net.width_phi);
    for (size_t j = 0; j < c.size(); ++j) {
      const double obs = observable_scale(c[j], a) * std::cos(m * net.feeds[j].phi) * wf;
      const double zj = net.feeds[j].z;
      bool matched = false;
      for (int k = 0; k < nc; ++k) {
        const auto info = base.component_info(m, k);
        if (info.any_plane) {
          w[k] += obs;
          matched = true;
          break;
        }
        if (std::abs(std::abs(zj) - info.plane) > 1e-9) continue;
        if (info.parity > 0) {
          w[k] += obs;
          matched = true;
        } else if (zj != 0.0) {
          w[k] += (zj > 0 ? obs : -obs);
        }
      }
      if (!matched)
        throw Error(ErrorCode::MissingBaseSolution,
                    "no base solution for a feed at z = " + std::to_string(zj) + " m, m = " +
                        std::to_string(m));
    }
    out->set_weights(m, std::move(w));
  }
  return out;
}

// ---------------------------------------------------------------- response

double normalize_amplitude(double r_a, double k) {
  if (!(r_a > 0) || k * r_a >= bessel_j0_zero1())
    throw Error(ErrorCode::NoRoot, "aperture outside the first zero of J0(k rho)");
  using G = boost::math::quadrature::gauss<double, 30>;
  auto deriv = [&](double eta) {
    return G::integrate(
        [&](double rho) {
          const double j = bessel_j0(k * rho);
          return j * std::cos(eta * 0.5 * pi * j) * rho;
        },
        0.0, r_a);
  };
  double lo = 1.0, flo = deriv(lo);
  if (!(flo > 0)) throw Error(ErrorCode::NoRoot, "amplitude normalization: no bracket at eta = 1");
  double hi = lo;
  for (int i = 0; i < 400; ++i) {
    hi = lo + 0.01;
    const double fhi = deriv(hi);
    if (fhi <= 0) {
      boost::uintmax_t it = 100;
      auto r = boost::math::tools::toms748_solve(
          deriv, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), it);
      return 0.5 * (r.first + r.second);
    }
    lo = hi;
    flo = fhi;
  }
  throw Error(ErrorCode::NoRoot, "amplitude normalization: no sign change for eta in [1, 5]");
}

double tipping_angle(const ResponseContext& ctx, double b, double rho, double z) {
  const auto p = ctx.field->profile(rho, {});
  const double scale = ctx.eta * b * 0.5 * pi;
  const auto& r = rule();
  double acc = 0.0;
  for (size_t k = 0; k < p.len.size(); ++k) {
    const double* h = &p.h0z[k * kPanel];
    const double z0 = p.z0[k];
    if (z <= z0) return acc;
    if (z < z0 + p.len[k]) {
      const auto s = r.partial((z - z0) / p.len[k]);
      double v = 0.0;
      for (int j = 0; j < kPanel; ++j) v += s[j] * h[j];
      return acc + scale * p.len[k] * v;
    }
    double tot = 0.0;
    for (int j = 0; j < kPanel; ++j) tot += r.w[j] * h[j];
    acc += scale * p.len[k] * tot;
  }
  return acc;
}

double total_tipping(const ResponseContext& ctx, double b, double rho) {
  const auto p = ctx.field->profile(rho, {});
  return running_theta(p, ctx.eta * b * 0.5 * pi, nullptr);
}

namespace {

double dphi_from_profile(const AxialProfile& p, int slot, double scale, double phi0, bool m0,
                         double* theta_total) {
  std::vector<double> th;
  const double tt = running_theta(p, scale, &th);
  double s = 0.0;
  for (size_t i = 0; i < p.z.size(); ++i) s += p.w[i] * std::cos(th[i]) * p.g[slot][i];
  if (theta_total) *theta_total = tt;
  double v = -scale * s;
  if (m0) v += phi0 * std::sin(tt);
  return v;
}

}  // namespace

double effective_phase(const ResponseContext& ctx, int m, double b, double rho) {
  const auto p = ctx.field->profile(rho, {m});
  return dphi_from_profile(p, 0, ctx.eta * b * 0.5 * pi, ctx.phi0, m == 0, nullptr);
}

double delta_p_pair(const ResponseContext& ctx, int m, double b, double x1, double y1, double x2,
                    double y2) {
  const double r1 = std::hypot(x1, y1), r2 = std::hypot(x2, y2);
  const auto p1 = ctx.field->profile(r1, {m});
  const auto p2 = ctx.field->profile(r2, {m});
  const double sc = ctx.eta * b * 0.5 * pi;
  double t1 = 0, t2 = 0;
  const double d1 = dphi_from_profile(p1, 0, sc, ctx.phi0, m == 0, &t1);
  const double d2 = dphi_from_profile(p2, 0, sc, ctx.phi0, m == 0, &t2);
  return delta_p_pair_values(m, t1, t2, d1, d2, std::atan2(y1, x1), std::atan2(y2, x2));
}

Template longitudinal_template(double b, int p) {
  const double a = b * 0.25 * pi;
  auto f = [&](double u) { return std::cos(a * (1.0 + std::sin(u))) * std::cos(p * u); };
  double err = 0.0;
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, -0.5 * pi, 0.5 * pi, 15, 1e-14, &err);
  Template t;
  t.dphi_long = a * I;
  t.dp = 0.5 * std::sin(0.5 * b * pi) * t.dphi_long;
  return t;
}

double ramsey_slope_pair(const ResponseContext& ctx, double b, double rho1, double rho2) {
  return ramsey_slope_values(ctx.delta_nu, total_tipping(ctx, b, rho1), total_tipping(ctx, b, rho2));
}

FrequencyShift frequency_shift(double dp, double slope, double f_atom, double slope_floor) {
  FrequencyShift f;
  if (!(std::abs(slope) > slope_floor)) {
    f.singular = true;
    f.dnu = std::numeric_limits<double>::quiet_NaN();
    f.fractional = f.dnu;
    return f;
  }
  f.dnu = -dp / slope;
  f.fractional = f.dnu / f_atom;
  return f;
}

// ---------------------------------------------------------------- tables

double ResponseTable::theta_at(double r) const { return lagrange4(rho, theta, r); }
double ResponseTable::dphi_at(int s, double r) const { return lagrange4(rho, dphi[s], r); }

int ResponseTable::slot(int m) const {
  for (size_t i = 0; i < ms.size(); ++i)
    if (ms[i] == m) return int(i);
  return -1;
}

double ResponseTable::disk_mean_sin_theta() const {
  std::vector<double> s(theta.size());
  for (size_t i = 0; i < s.size(); ++i) s[i] = std::sin(theta[i]);
  return disk_mean(rho, s);
}

double ResponseTable::disk_mean_dphi(int s) const { return disk_mean(rho, dphi[s]); }

ProfileCache build_profiles(const FieldModel& field, const std::vector<int>& ms, double rho_max,
                            int n_rho) {
  if (n_rho < 5) n_rho = 5;
  if (n_rho % 2 == 0) ++n_rho;
  ProfileCache c;
  c.ms = ms;
  c.rho.resize(n_rho);
  c.lines.resize(n_rho);
  for (int i = 0; i < n_rho; ++i) {
    c.rho[i] = rho_max * i / double(n_rho - 1);
    c.lines[i] = field.profile(c.rho[i], ms);
  }
  return c;
}

ResponseTable build_table(const ResponseContext& ctx, const ProfileCache& cache, double b) {
  ResponseTable t;
  t.b = b;
  t.ms = cache.ms;
  t.rho = cache.rho;
  t.rho_max = cache.rho.back();
  t.theta.resize(t.rho.size());
  t.dphi.assign(t.ms.size(), std::vector<double>(t.rho.size()));
  const double sc = ctx.eta * b * 0.5 * pi;
  std::vector<double> th;
  for (size_t i = 0; i < t.rho.size(); ++i) {
    const auto& p = cache.lines[i];
    const double tt = running_theta(p, sc, &th);
    t.theta[i] = tt;
    double area = 0.0;
    for (size_t s = 0; s < t.ms.size(); ++s) {
      double acc = 0.0, abs_acc = 0.0;
      for (size_t n = 0; n < p.z.size(); ++n) {
        acc += p.w[n] * std::cos(th[n]) * p.g[s][n];
        abs_acc += p.w[n] * std::abs(p.g[s][n]);
      }
      double v = -sc * acc;
      if (t.ms[s] == 0) v += ctx.phi0 * std::sin(tt);
      t.dphi[s][i] = v;
      area += sc * abs_acc;
    }
    t.pulse_area = std::max(t.pulse_area, area);
  }
  return t;
}

double calibrate_phi0(const ResponseContext& ctx, const ProfileCache& cache) {
  ResponseContext c = ctx;
  c.phi0 = 0.0;
  const auto t = build_table(c, cache, 1.0);
  const int s = t.slot(0);
  if (s < 0) return 0.0;
  return -t.disk_mean_dphi(s) / t.disk_mean_sin_theta();
}

}  // namespace dcp
