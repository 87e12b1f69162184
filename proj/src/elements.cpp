#include "dcp/elements.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace dcp {

// ---------------------------------------------------------------- quadrature

namespace {

template <int N>
void gauss_fill(std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& b = G::weights();
  // Boost stores the nonnegative half; rebuild the full rule on [0, 1].
  x.clear();
  w.clear();
  for (int i = int(a.size()) - 1; i >= 0; --i) {
    if (a[i] == 0.0) continue;
    x.push_back(0.5 * (1.0 - a[i]));
    w.push_back(0.5 * b[i]);
  }
  for (size_t i = 0; i < a.size(); ++i) {
    x.push_back(0.5 * (1.0 + a[i]));
    w.push_back(0.5 * b[i]);
  }
}

}  // namespace

void gauss_unit(int n, std::vector<double>& x, std::vector<double>& w) {
  switch (n) {
    case 2: return gauss_fill<2>(x, w);
    case 3: return gauss_fill<3>(x, w);
    case 4: return gauss_fill<4>(x, w);
    case 5: return gauss_fill<5>(x, w);
    case 6: return gauss_fill<6>(x, w);
    case 7: return gauss_fill<7>(x, w);
    case 8: return gauss_fill<8>(x, w);
    case 9: return gauss_fill<9>(x, w);
    case 10: return gauss_fill<10>(x, w);
    case 12: return gauss_fill<12>(x, w);
    default: throw std::invalid_argument("unsupported Gauss rule size");
  }
}

const TriangleRule& triangle_rule(int degree) {
  static std::mutex mu;
  static std::map<int, TriangleRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  // Duffy collapse: xi = u, eta = v (1 - u), Jacobian (1 - u).
  const int n = degree / 2 + 2;
  std::vector<double> gx, gw;
  gauss_unit(n, gx, gw);
  TriangleRule r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = gx[i], v = gx[j];
      r.x.push_back({u, v * (1.0 - u)});
      r.w.push_back(gw[i] * gw[j] * (1.0 - u));
    }
  return cache.emplace(degree, std::move(r)).first->second;
}

// ---------------------------------------------------------------- polynomials

double Poly::operator()(double x, double y) const {
  double s = 0.0, xa = 1.0;
  for (int a = 0; a <= deg; ++a) {
    double yb = 1.0;
    for (int b = 0; a + b <= deg; ++b) {
      s += at(a, b) * xa * yb;
      yb *= y;
    }
    xa *= x;
  }
  return s;
}

Poly Poly::dx() const {
  Poly p(deg);
  for (int a = 1; a <= deg; ++a)
    for (int b = 0; a + b <= deg; ++b) p.at(a - 1, b) = a * at(a, b);
  return p;
}

Poly Poly::dy() const {
  Poly p(deg);
  for (int a = 0; a <= deg; ++a)
    for (int b = 1; a + b <= deg; ++b) p.at(a, b - 1) = b * at(a, b);
  return p;
}

namespace {

Poly monomial(int deg, int a, int b) {
  Poly p(deg);
  p.at(a, b) = 1.0;
  return p;
}

Poly combine(const std::vector<Poly>& ps, const Eigen::VectorXd& c, int deg) {
  Poly out(deg);
  for (size_t i = 0; i < ps.size(); ++i)
    for (size_t q = 0; q < out.c.size(); ++q) out.c[q] += c[i] * ps[i].c[q];
  return out;
}

const std::array<std::array<int, 2>, 3> kEdges{{{0, 1}, {0, 2}, {1, 2}}};
const std::array<std::array<double, 2>, 3> kVerts{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};

}  // namespace

// ---------------------------------------------------------------- Lagrange

LagrangeElement::LagrangeElement(int k) : k_(k) {
  if (k < 1 || k > 3) throw std::invalid_argument("Lagrange order must be 1..3");
  for (const auto& v : kVerts) nodes_.push_back(v);
  for (const auto& e : kEdges)
    for (int j = 1; j < k; ++j) {
      const double t = double(j) / k;
      const auto& a = kVerts[e[0]];
      const auto& b = kVerts[e[1]];
      nodes_.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
    }
  for (int i = 1; i < k; ++i)
    for (int j = 1; i + j < k; ++j) nodes_.push_back({double(i) / k, double(j) / k});

  std::vector<Poly> mons;
  for (int a = 0; a <= k; ++a)
    for (int b = 0; a + b <= k; ++b) mons.push_back(monomial(k, a, b));
  const int n = int(mons.size());
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) V(i, j) = mons[j](nodes_[i][0], nodes_[i][1]);
  const Eigen::MatrixXd C = V.inverse();
  for (int i = 0; i < n; ++i) {
    basis_.push_back(combine(mons, C.col(i), k));
    dx_.push_back(basis_.back().dx());
    dy_.push_back(basis_.back().dy());
  }
}

void LagrangeElement::eval(double x, double y, double* v, double* gx, double* gy) const {
  for (int i = 0; i < ndof(); ++i) {
    if (v) v[i] = basis_[i](x, y);
    if (gx) gx[i] = dx_[i](x, y);
    if (gy) gy[i] = dy_[i](x, y);
  }
}

// ---------------------------------------------------------------- Nedelec

NedelecElement::NedelecElement(int k) : k_(k) {
  if (k < 1 || k > 3) throw std::invalid_argument("Nedelec order must be 1..3");
  // Spanning set: P_{k-1}^2 plus (-y, x) times homogeneous degree k-1.
  std::vector<Poly> px, py;
  for (int a = 0; a <= k - 1; ++a)
    for (int b = 0; a + b <= k - 1; ++b) {
      px.push_back(monomial(k, a, b));
      py.push_back(Poly(k));
      px.push_back(Poly(k));
      py.push_back(monomial(k, a, b));
    }
  for (int a = 0; a <= k - 1; ++a) {
    const int b = k - 1 - a;
    Poly sx(k), sy(k);
    sx.at(a, b + 1) = -1.0;
    sy.at(a + 1, b) = 1.0;
    px.push_back(sx);
    py.push_back(sy);
  }
  const int n = int(px.size());
  if (n != k * (k + 2)) throw std::logic_error("Nedelec space dimension");

  // Moments.
  std::vector<double> gx, gw;
  gauss_unit(k + 2, gx, gw);
  const auto& tr = triangle_rule(2 * k + 2);
  Eigen::MatrixXd D(n, n);
  int row = 0;
  for (const auto& e : kEdges) {
    const auto& A = kVerts[e[0]];
    const auto& B = kVerts[e[1]];
    const double tx = B[0] - A[0], ty = B[1] - A[1];
    for (int j = 0; j < k; ++j) {
      for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (size_t q = 0; q < gx.size(); ++q) {
          const double x = A[0] + gx[q] * tx, y = A[1] + gx[q] * ty;
          const double lj = boost::math::legendre_p(j, 2.0 * gx[q] - 1.0);
          s += gw[q] * lj * (px[a](x, y) * tx + py[a](x, y) * ty);
        }
        D(row, a) = s;
      }
      ++row;
    }
  }
  for (int a = 0; a <= k - 2; ++a)
    for (int b = 0; a + b <= k - 2; ++b)
      for (int comp = 0; comp < 2; ++comp) {
        for (int c = 0; c < n; ++c) {
          double s = 0.0;
          for (size_t q = 0; q < tr.w.size(); ++q) {
            const double x = tr.x[q][0], y = tr.x[q][1];
            const double m = std::pow(x, a) * std::pow(y, b);
            s += tr.w[q] * m * (comp == 0 ? px[c](x, y) : py[c](x, y));
          }
          D(row, c) = s;
        }
        ++row;
      }
  const Eigen::MatrixXd C = D.inverse();
  for (int i = 0; i < n; ++i) {
    bx_.push_back(combine(px, C.col(i), k));
    by_.push_back(combine(py, C.col(i), k));
    Poly cu = by_.back().dx();
    const Poly d = bx_.back().dy();
    for (size_t q = 0; q < cu.c.size(); ++q) cu.c[q] -= d.c[q];
    curl_.push_back(cu);
  }
}

void NedelecElement::eval(double x, double y, double* vx, double* vy, double* curl) const {
  for (int i = 0; i < ndof(); ++i) {
    if (vx) vx[i] = bx_[i](x, y);
    if (vy) vy[i] = by_[i](x, y);
    if (curl) curl[i] = curl_[i](x, y);
  }
}

// ---------------------------------------------------------------- DOF maps

DofMap build_dofmap(const Mesh& mesh, int order, bool nedelec) {
  DofMap d;
  d.order = order;
  const int nv = int(mesh.nodes.size()), ne = int(mesh.edges.size()), nt = int(mesh.tris.size());
  const int le = order - 1, li = (order - 1) * (order - 2) / 2;
  d.n_lagrange = nv + ne * le + nt * li;
  d.sorted.resize(nt);
  d.lag.resize(nt);
  for (int t = 0; t < nt; ++t) {
    auto v = mesh.tris[t];
    std::sort(v.begin(), v.end());
    d.sorted[t] = v;
    auto& L = d.lag[t];
    L = {v[0], v[1], v[2]};
    for (int e = 0; e < 3; ++e)
      for (int j = 0; j < le; ++j) L.push_back(nv + mesh.tri_edges[t][e] * le + j);
    for (int j = 0; j < li; ++j) L.push_back(nv + ne * le + t * li + j);
  }
  if (nedelec) {
    const int ie = order, ii = order * (order - 1);
    d.n_nedelec = ne * ie + nt * ii;
    d.ned.resize(nt);
    for (int t = 0; t < nt; ++t) {
      auto& N = d.ned[t];
      for (int e = 0; e < 3; ++e)
        for (int j = 0; j < ie; ++j) N.push_back(mesh.tri_edges[t][e] * ie + j);
      for (int j = 0; j < ii; ++j) N.push_back(ne * ie + t * ii + j);
    }
  }
  return d;
}

std::vector<int> lagrange_edge_dofs(const Mesh& mesh, const DofMap& d, int edge) {
  std::vector<int> out{mesh.edges[edge][0], mesh.edges[edge][1]};
  const int le = d.order - 1;
  for (int j = 0; j < le; ++j) out.push_back(int(mesh.nodes.size()) + edge * le + j);
  return out;
}

std::vector<int> nedelec_edge_dofs(const DofMap& d, int edge) {
  std::vector<int> out;
  for (int j = 0; j < d.order; ++j) out.push_back(edge * d.order + j);
  return out;
}

Affine affine(const Mesh& mesh, const std::array<int, 3>& s) {
  Affine a;
  const auto& p0 = mesh.nodes[s[0]];
  const auto& p1 = mesh.nodes[s[1]];
  const auto& p2 = mesh.nodes[s[2]];
  a.x0 = p0[0];
  a.y0 = p0[1];
  a.j[0][0] = p1[0] - p0[0];
  a.j[0][1] = p2[0] - p0[0];
  a.j[1][0] = p1[1] - p0[1];
  a.j[1][1] = p2[1] - p0[1];
  a.det = a.j[0][0] * a.j[1][1] - a.j[0][1] * a.j[1][0];
  // J^{-T} = (1/det) [[j11, -j10], [-j01, j00]]
  a.inv_t[0][0] = a.j[1][1] / a.det;
  a.inv_t[0][1] = -a.j[1][0] / a.det;
  a.inv_t[1][0] = -a.j[0][1] / a.det;
  a.inv_t[1][1] = a.j[0][0] / a.det;
  return a;
}

}  // namespace dcp
