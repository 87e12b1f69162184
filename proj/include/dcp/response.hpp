#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "dcp/analytic.hpp"
#include "dcp/feeds.hpp"

namespace dcp {

// Quadrature along a vertical line. Nodes are grouped in panels of
// `per_panel` Gauss-Legendre points ordered by increasing z.
struct AxialLine {
  int per_panel = 8;
  std::vector<double> z0, len;  // panel start and length
  std::vector<double> z, w;     // nodes and weights
  std::vector<double> h0z;
  // comp[slot][c][node]: loss-field components for the slot-th requested m.
  std::vector<std::vector<std::vector<double>>> comp;
};

// Appends the nodes and weights of one panel [z0, z0 + len] to z and w.
void append_panel(double z0, double len, std::vector<double>& z, std::vector<double>& w);
inline constexpr int kPanelNodes = 8;

// Combined profile: H0z and one loss field per requested m.
struct AxialProfile {
  int per_panel = 8;
  std::vector<double> z0, len;
  std::vector<double> z, w, h0z;
  std::vector<std::vector<double>> g;  // [slot][node]
};

// Where a stored loss-field component is driven from.
struct ComponentInfo {
  bool any_plane = true;  // analytic model: valid for any feed height
  double plane = 0.0;     // |z| of the feed plane (m)
  int parity = 1;         // +1 symmetric pair, -1 antisymmetric pair
};

// Field values at one point; f and g hold the weighted loss fields of each
// requested m as (rho, phi, z) components.
struct FieldPoint {
  double e0phi = 0.0, h0rho = 0.0, h0z = 0.0;
  std::vector<std::array<double, 3>> f, g;
  bool full = true;  // false: only g_z is available
};

// Standing wave plus per-m loss fields along vertical lines. Each m holds
// one or more components for a single weak feed at phi = 0; the weights set
// by compose() combine them for a feed network.
class FieldModel {
 public:
  virtual ~FieldModel() = default;
  virtual std::shared_ptr<FieldModel> clone() const = 0;
  virtual int component_count(int m) const = 0;
  virtual ComponentInfo component_info(int m, int c) const = 0;
  virtual void line(double rho, const std::vector<int>& ms, AxialLine& out) const = 0;
  // Wavenumber of the radial tipping law (k for real cavities).
  virtual double wavenumber() const = 0;
  virtual double rho_limit() const = 0;
  // False when (rho, z) lies outside the model's domain.
  virtual bool point(double rho, double z, const std::vector<int>& ms, FieldPoint& out) const = 0;

  AxialProfile profile(double rho, const std::vector<int>& ms) const;
  const std::vector<double>& weights(int m) const;
  void set_weights(int m, std::vector<double> w);

 protected:
  void init_weights();
  std::array<std::vector<double>, 5> weights_;
};

// Closed cavity from a phase expansion.
class AnalyticFieldModel : public FieldModel {
 public:
  AnalyticFieldModel(StandingWave sw, PhaseExpansion pe, int panels = 48);
  std::shared_ptr<FieldModel> clone() const override;
  int component_count(int) const override { return 1; }
  ComponentInfo component_info(int, int) const override { return {}; }
  void line(double rho, const std::vector<int>& ms, AxialLine& out) const override;
  double wavenumber() const override { return sw_.gamma1; }
  double rho_limit() const override { return sw_.R; }
  bool point(double rho, double z, const std::vector<int>& ms, FieldPoint& out) const override;
  const StandingWave& standing() const { return sw_; }
  const PhaseExpansion& expansion() const { return pe_; }

 private:
  StandingWave sw_;
  PhaseExpansion pe_;
  int panels_;
};

// Applies the feed-network factors to the single-weak-feed components.
// Throws Error(MissingBaseSolution) when a feed plane has no component.
std::shared_ptr<FieldModel> compose(const FeedNetwork& net, const FieldModel& base, double omega);

// Per-m scale from compose for the analytic model (for reports).
double composed_scale(const FeedNetwork& net, int m, double omega);

struct ResponseContext {
  std::shared_ptr<const FieldModel> field;
  double eta = 1.0;
  double r_a = 5e-3;
  double delta_nu = 1.0;
  double phi0 = 0.0;  // added to the m = 0 phase (uniform offset)
};

// Smallest eta > 0 with d/deta int_0^{r_a} sin(eta pi/2 J0(k rho)) rho drho = 0.
// Throws Error(NoRoot) if no bracket is found.
double normalize_amplitude(double r_a, double k);

double tipping_angle(const ResponseContext& ctx, double b, double rho, double z);
double total_tipping(const ResponseContext& ctx, double b, double rho);
double effective_phase(const ResponseContext& ctx, int m, double b, double rho);

// Transition-probability change of one trajectory from its two traversals.
inline double delta_p_pair_values(int m, double theta1, double theta2, double dphi1, double dphi2,
                                  double phi1, double phi2) {
  return 0.5 * std::sin(theta2) * dphi1 * std::cos(m * phi1) -
         0.5 * std::sin(theta1) * dphi2 * std::cos(m * phi2);
}
// Positions as (x, y) in metres.
double delta_p_pair(const ResponseContext& ctx, int m, double b, double x1, double y1, double x2,
                    double y2);

struct Template {
  double dphi_long = 0.0;
  double dp = 0.0;
};
Template longitudinal_template(double b, int p);

inline double ramsey_slope_values(double delta_nu, double theta1, double theta2) {
  return -(1.5707963267948966 / delta_nu) * std::sin(theta1) * std::sin(theta2);
}
double ramsey_slope_pair(const ResponseContext& ctx, double b, double rho1, double rho2);

struct FrequencyShift {
  bool singular = false;
  double dnu = 0.0;         // Hz
  double fractional = 0.0;  // dnu / f_atom
};
FrequencyShift frequency_shift(double dp, double slope, double f_atom, double slope_floor = 1e-9);

// Radial tables of theta(rho) and dPhi_m(b, rho) at one amplitude.
struct ResponseTable {
  double b = 1.0;
  double rho_max = 0.0;
  std::vector<int> ms;
  std::vector<double> rho;
  std::vector<double> theta;
  std::vector<std::vector<double>> dphi;  // [slot][radius]
  double pulse_area = 0.0;                // max over rho of b eta pi/2 int |g| dz

  double theta_at(double r) const;
  double dphi_at(int slot, double r) const;
  int slot(int m) const;
  // Average over the uniform disk rho <= rho_max.
  double disk_mean_sin_theta() const;
  double disk_mean_dphi(int slot) const;
};

// Lines through the field model on a radial grid; reused for every b.
struct ProfileCache {
  std::vector<int> ms;
  std::vector<double> rho;
  std::vector<AxialProfile> lines;
};

ProfileCache build_profiles(const FieldModel& field, const std::vector<int>& ms, double rho_max,
                            int n_rho = 129);
ResponseTable build_table(const ResponseContext& ctx, const ProfileCache& cache, double b);

// Phi0 such that the uniform-disk mean of dPhi_0(b=1) vanishes.
double calibrate_phi0(const ResponseContext& ctx, const ProfileCache& cache);

}  // namespace dcp
