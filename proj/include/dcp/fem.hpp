#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "dcp/elements.hpp"
#include "dcp/mesh.hpp"
#include "dcp/response.hpp"

namespace dcp {

struct FemOptions {
  int order = 3;
  double linear_tol = 1e-10;
  // Resonances of the m >= 1 operator within this relative distance of the
  // TE011 wavenumber are projected out of the driven solution. Keep it below
  // the cavity halfwidth 1/(2 Q0): modes further away are driven physically.
  double deflate_window = 1e-5;
  double skin_depth = 0.0;  // m
  std::uint64_t seed = 1;
};

// TE011 standing wave on a mesh. Lengths inside are scaled by `length`;
// E0phi = rho~ w(rho~, z~) / length with w in the Lagrange space.
struct EigenMode {
  std::shared_ptr<const Mesh> mesh;
  FemOptions opt;
  double length = 1.0;
  double k_target = 0.0;  // 1/m
  double eigen_k = 0.0;   // 1/m
  double q0 = 0.0;
  DofMap dofs;
  std::vector<double> w;
  // Wall normal derivative of w on Dirichlet boundary DOFs (scaled units).
  std::vector<double> wall_flux;
  // (K - k^2 M) w on Dirichlet DOFs; feeds are matched against it.
  std::vector<double> boundary_residual;
  std::vector<char> dirichlet;  // per Lagrange DOF: Wall, feed or far exterior
};

// One loss-field solve for a single weak feed at phi = 0 on the plane
// |z| = info.plane, split into the mirror-symmetric (parity +1) and
// antisymmetric (parity -1) halves.
struct LossComponent {
  ComponentInfo info;
  double feed_amplitude = 0.0;  // f_phi scale at the feed (scaled units)
  std::vector<double> lag;      // m = 0: f_phi = rho~ u; m >= 1: G_phi
  std::vector<double> ned;      // m >= 1: (G_rho, G_z)
};

struct FieldSolution {
  int m = 0;
  std::shared_ptr<const EigenMode> eig;
  DofMap dofs;
  std::vector<LossComponent> comps;
  // Relative distance of each projected resonance from the TE011 wavenumber.
  std::vector<double> deflated;

  double eigen_k() const { return eig->eigen_k; }
  double q0() const { return eig->q0; }
};

// Throws Error(NoModeNearTarget) when no eigenvalue lies within 10% of
// k_target.
EigenMode solve_eigenmode(std::shared_ptr<const Mesh> mesh, double k_target, const FemOptions& opt);

// Feed planes are the |z| values the mesh carries feed strips for (tag
// FeedBase + index). Throws Error(SolverDiverged) on a bad linear solve.
FieldSolution solve_loss_field(std::shared_ptr<const EigenMode> eig, int m,
                               const std::vector<double>& feed_planes);

// Uniform bucket grid over the triangles of a mesh.
class Locator {
 public:
  explicit Locator(const Mesh& mesh, int target_per_cell = 4);
  // Triangle containing (rho, z) and its reference coordinates, or -1.
  int find(double rho, double z, const DofMap& d, double& xi, double& eta) const;

 private:
  const Mesh* mesh_;
  double x0_, y0_, hx_, hy_;
  int nx_, ny_;
  std::vector<std::vector<int>> cells_;
};

// Physical field values at one point (1/m units as H0; f and g are the
// cos/sin(m phi) Fourier amplitudes of the selected component).
struct PointFields {
  double e0phi = 0.0, h0rho = 0.0, h0z = 0.0;
  std::array<double, 3> f{}, g{};
};

// Evaluates at a point inside triangle t (reference coordinates xi, eta).
PointFields eval_in_triangle(const EigenMode& eig, const FieldSolution* sol, int comp, int t, double xi,
                             double eta);

// Returns false when the point lies outside the mesh.
bool eval_point(const EigenMode& eig, const Locator& loc, const FieldSolution* sol, int comp,
                double rho, double z, PointFields& out);

// Vertical-line sampling of the mesh solution, mirrored to z < 0.
class FemFieldModel : public FieldModel {
 public:
  FemFieldModel(std::shared_ptr<const EigenMode> eig, std::vector<std::shared_ptr<const FieldSolution>> sols);
  std::shared_ptr<FieldModel> clone() const override;
  int component_count(int m) const override;
  ComponentInfo component_info(int m, int c) const override;
  void line(double rho, const std::vector<int>& ms, AxialLine& out) const override;
  double wavenumber() const override { return eig_->eigen_k; }
  double rho_limit() const override { return rho_limit_; }
  bool point(double rho, double z, const std::vector<int>& ms, FieldPoint& out) const override;
  const EigenMode& eigen() const { return *eig_; }
  std::shared_ptr<const FieldSolution> solution(int m) const;

 private:
  std::shared_ptr<const EigenMode> eig_;
  std::array<std::shared_ptr<const FieldSolution>, 5> sols_;
  std::shared_ptr<const Locator> loc_;
  double rho_limit_ = 0.0;
};

// Pointwise phase atan(-g_mz / H0z) on a grid; NaN where |H0z| is below
// floor * max|H0z| on the grid.
struct PhaseMap {
  int m = 0;
  std::vector<double> rho, z;      // axes (m)
  std::vector<double> h0z, gz, phase;  // row-major, z fastest
};

PhaseMap extract_phase_map(const FieldSolution& sol, const std::vector<double>& weights,
                           const std::vector<double>& rho, const std::vector<double>& z,
                           double floor = 1e-4);

// Least-squares fit of the near-axis expansion to a phase map restricted to
// rho <= r_a and |z| <= z_max. Returns [Phi_m1, Phi_m3] (rad).
std::array<double, 2> fit_phase_coefficients(const PhaseMap& map, double r_a, double k1, double z_max);

// RMS deviation from pi/4 of atan(|f_phi| / |E0phi|) evaluated a skin
// depth inside the walls (half a skin depth from the surface) at m = 0.
double wall_phase_deviation(const FieldSolution& m0, int comp, int samples_per_edge = 2);

// Weak divergence residual max_q |M(g, grad-type q)| / (||g||_M ||q||_M) over
// interior Lagrange test functions (m >= 1).
double divergence_residual(const FieldSolution& sol, int comp);

}  // namespace dcp
