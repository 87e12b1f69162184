#pragma once

#include <array>
#include <vector>

#include "dcp/mesh.hpp"

namespace dcp {

// Quadrature on the reference triangle (0,0), (1,0), (0,1); weights sum to 1/2.
struct TriangleRule {
  std::vector<std::array<double, 2>> x;
  std::vector<double> w;
};

// Collapsed Gauss-Legendre rule, exact for polynomials of total degree `degree`.
const TriangleRule& triangle_rule(int degree);

// Gauss-Legendre on [0, 1].
void gauss_unit(int n, std::vector<double>& x, std::vector<double>& w);

// Polynomial in (x, y) as a dense coefficient table c[a][b] x^a y^b.
struct Poly {
  int deg = 0;
  std::vector<double> c;  // (deg+1)^2, index a*(deg+1)+b
  explicit Poly(int d = 0) : deg(d), c(size_t(d + 1) * (d + 1), 0.0) {}
  double& at(int a, int b) { return c[size_t(a) * (deg + 1) + b]; }
  double at(int a, int b) const { return c[size_t(a) * (deg + 1) + b]; }
  double operator()(double x, double y) const;
  Poly dx() const;
  Poly dy() const;
};

// Lagrange P_k on the reference triangle. Local DOFs: vertices, then k-1 per
// edge for edges (v0 v1), (v0 v2), (v1 v2) ordered from the lower vertex,
// then interior.
class LagrangeElement {
 public:
  explicit LagrangeElement(int k);
  int order() const { return k_; }
  int ndof() const { return int(basis_.size()); }
  const std::array<double, 2>& node(int i) const { return nodes_[i]; }
  void eval(double x, double y, double* v, double* gx, double* gy) const;

 private:
  int k_;
  std::vector<std::array<double, 2>> nodes_;
  std::vector<Poly> basis_, dx_, dy_;
};

// Nedelec first kind of degree k (k(k+2) DOFs): k tangential moments per
// edge with the tangent running from the lower to the higher vertex, then
// k(k-1) interior moments.
class NedelecElement {
 public:
  explicit NedelecElement(int k);
  int order() const { return k_; }
  int ndof() const { return int(bx_.size()); }
  // Values (vx, vy) and scalar curl d(vy)/dx - d(vx)/dy.
  void eval(double x, double y, double* vx, double* vy, double* curl) const;

 private:
  int k_;
  std::vector<Poly> bx_, by_, curl_;
};

// Global numbering for a mesh.
struct DofMap {
  int order = 1;
  int n_lagrange = 0;
  int n_nedelec = 0;
  std::vector<std::vector<int>> lag;  // per triangle, local -> global
  std::vector<std::vector<int>> ned;
  // Per triangle the vertex indices sorted ascending (reference order).
  std::vector<std::array<int, 3>> sorted;
};

DofMap build_dofmap(const Mesh& mesh, int order, bool nedelec);

// Global DOFs carried by an edge (Lagrange: both vertices and edge nodes).
std::vector<int> lagrange_edge_dofs(const Mesh& mesh, const DofMap& d, int edge);
std::vector<int> nedelec_edge_dofs(const DofMap& d, int edge);

// Affine map of a triangle in reference order.
struct Affine {
  double x0, y0;
  double j[2][2];     // d(x,y)/d(xi,eta)
  double inv_t[2][2];  // J^{-T}
  double det;
  void map(double xi, double eta, double& x, double& y) const {
    x = x0 + j[0][0] * xi + j[0][1] * eta;
    y = y0 + j[1][0] * xi + j[1][1] * eta;
  }
};
Affine affine(const Mesh& mesh, const std::array<int, 3>& sorted);

}  // namespace dcp
