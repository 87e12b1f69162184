#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcp/constants.hpp"
#include "dcp/ensemble_config.hpp"
#include "dcp/response.hpp"

namespace dcp {

// Positions at the two cavity traversals and at detection, plus the
// detection weight. Only surviving trajectories are stored.
struct Trajectory {
  double x1, y1, x2, y2, xd, yd, w;
};

struct TrajectorySet {
  std::vector<Trajectory> items;
  std::size_t sampled = 0;
  double survival() const { return sampled ? double(items.size()) / double(sampled) : 0.0; }
};

// Worker count: DCP_THREADS if set, else hardware concurrency.
int default_threads();

// Counter-based sampling: trajectory i depends only on (seed, i), so the set
// is identical for any thread count. Throws Error(EmptyEnsemble) when fewer
// than 1e-6 of the draws survive the apertures.
TrajectorySet sample_trajectories(const EnsembleConfig& cfg, const PhysicalConstants& pc,
                                  std::uint64_t seed, std::size_t n, int threads = 0);

// Mean launch velocity used for the configuration (solved for CenterOnDown).
void launch_velocity(const EnsembleConfig& cfg, const PhysicalConstants& pc, double& vx, double& vy);

struct Average {
  double mean = 0.0;
  double stderr_ = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  std::size_t n = 0;
};

// Detection-weighted means of dP_m and of the Ramsey slope.
Average average_delta_p(const TrajectorySet& set, const ResponseTable& table, int m,
                        double delta_nu, int threads = 0);

// Densities for the uncorrelated model, as functions of (x, y).
using Density = std::function<double(double, double)>;
Density uniform_density();
// n (1 + alpha ((r - r_off)^2 / r_a^2 - 1/2))
Density quadratic_density(double alpha, double x_off, double y_off, double r_a);

// Product-of-averages model over the aperture disk of radius table.rho_max.
double uncorrelated_average(const Density& n1, const Density& n2, const ResponseTable& table, int m,
                            int n_rho = 64, int n_phi = 64);

// Same model with the passage densities taken from a sampled ensemble: the
// correlation between the two traversals of each atom is dropped.
double uncorrelated_from_samples(const TrajectorySet& set, const ResponseTable& table, int m);

// Closed form for two quadratic densities with curvatures alpha1, alpha2 and
// a common offset, to first order in the curvatures.
double uncorrelated_quadratic(double alpha1, double alpha2, double x_off, double y_off,
                              const ResponseTable& table, int m, int n_rho = 64, int n_phi = 64);

// Point source at (rho_off, phi_off) on the way up, uniform disk on the way down.
double delta_function_average(double rho_off, double phi_off, const ResponseTable& table, int m);
double delta_function_slope(double rho_off, const ResponseTable& table, double delta_nu);

struct CurvePoint {
  double b = 0.0;
  int m = 0;
  double dp = 0.0;
  double dp_stderr = 0.0;
  double slope = 0.0;
  double dnu = 0.0;
  double dnu_fractional = 0.0;
  bool singular = false;
};

struct DcpCurve {
  std::string label;
  std::vector<CurvePoint> points;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t n_mc = 0;
  double survival = 0.0;
  double pulse_area = 0.0;
};

enum class CurveMethod { MonteCarlo, DeltaFunction, Uncorrelated };

struct CurveRequest {
  CurveMethod method = CurveMethod::MonteCarlo;
  std::vector<int> ms = {0, 1, 2};
  std::vector<double> b;
  std::uint64_t seed = 1;
  std::size_t n = 100000;
  int threads = 0;
  double f_atom = 9.192631770e9;
  double slope_floor_rel = 1e-3;  // singular when |slope| < floor * pi/(2 dnu)
};

// Field lines cached once; one response table per b.
DcpCurve dcp_curve(const EnsembleConfig& cfg, const PhysicalConstants& pc, const ResponseContext& ctx,
                   const ProfileCache& cache, const CurveRequest& req);

}  // namespace dcp
