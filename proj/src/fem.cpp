#include "dcp/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <cstdio>
#include <random>
#include <string>

#include "dcp/errors.hpp"

namespace dcp {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Trip = Eigen::Triplet<double>;

const std::array<std::array<double, 2>, 3> kRefVerts{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
const std::array<std::array<int, 2>, 3> kRefEdges{{{0, 1}, {0, 2}, {1, 2}}};

std::string fmt_sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

bool is_dirichlet_tag(int tag) { return tag == Wall || tag == FarExterior || tag >= FeedBase; }
bool is_lossy_tag(int tag) { return tag == Wall || tag >= FeedBase; }

// Mesh copy in scaled coordinates.
struct Scaled {
  Mesh mesh;
  double L = 1.0;
};

Scaled scale_mesh(const Mesh& m) {
  Scaled s;
  s.mesh = m;
  double L = 0.0;
  for (const auto& p : m.nodes) L = std::max(L, p[0]);
  if (!(L > 0)) throw Error(ErrorCode::DegenerateGeometry, "mesh has no extent in rho");
  s.L = L;
  for (auto& p : s.mesh.nodes) {
    p[0] /= L;
    p[1] /= L;
  }
  s.mesh.z_top /= L;
  return s;
}

// Triangle and local edge index adjacent to each edge.
struct EdgeOwner {
  int tri = -1;
  int local = -1;
};

std::vector<EdgeOwner> edge_owners(const Mesh& m) {
  std::vector<EdgeOwner> o(m.edges.size());
  for (size_t t = 0; t < m.tris.size(); ++t)
    for (int e = 0; e < 3; ++e) {
      auto& x = o[m.tri_edges[t][e]];
      if (x.tri < 0) x = {int(t), e};
    }
  return o;
}

// Local Lagrange DOFs lying on local edge e.
std::vector<int> local_edge_lagrange(int k, int e) {
  std::vector<int> out{kRefEdges[e][0], kRefEdges[e][1]};
  for (int j = 0; j < k - 1; ++j) out.push_back(3 + e * (k - 1) + j);
  return out;
}

std::vector<std::array<double, 2>> lagrange_dof_coords(const Mesh& m, const DofMap& d,
                                                       const LagrangeElement& el) {
  std::vector<std::array<double, 2>> xy(d.n_lagrange);
  for (size_t t = 0; t < m.tris.size(); ++t) {
    const Affine a = affine(m, d.sorted[t]);
    for (int i = 0; i < el.ndof(); ++i) {
      double x, y;
      a.map(el.node(i)[0], el.node(i)[1], x, y);
      xy[d.lag[t][i]] = {x, y};
    }
  }
  return xy;
}

// Quadrature along local edge e of triangle t: reference points, weights
// times physical length.
struct EdgeQuad {
  std::vector<std::array<double, 2>> ref;
  std::vector<double> w;
  std::vector<std::array<double, 2>> phys;
};

EdgeQuad edge_quad(const Mesh& m, const DofMap& d, int t, int e, int n) {
  std::vector<double> gx, gw;
  gauss_unit(n, gx, gw);
  const Affine a = affine(m, d.sorted[t]);
  const auto& A = kRefVerts[kRefEdges[e][0]];
  const auto& B = kRefVerts[kRefEdges[e][1]];
  const auto& pa = m.nodes[d.sorted[t][kRefEdges[e][0]]];
  const auto& pb = m.nodes[d.sorted[t][kRefEdges[e][1]]];
  const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
  EdgeQuad q;
  for (int i = 0; i < n; ++i) {
    const double xi = A[0] + gx[i] * (B[0] - A[0]), eta = A[1] + gx[i] * (B[1] - A[1]);
    double x, y;
    a.map(xi, eta, x, y);
    q.ref.push_back({xi, eta});
    q.phys.push_back({x, y});
    q.w.push_back(gw[i] * len);
  }
  return q;
}

// Feed profile of unit peak, width w, centred at zc.
double feed_profile(double z, double zc, double w) {
  const double u = (z - zc) / w;
  if (std::abs(u) >= 0.5) return 0.0;
  const double c = std::cos(pi * u);
  return c * c;
}

std::vector<int> index_map(const std::vector<char>& fixed, int& nfree) {
  std::vector<int> map(fixed.size(), -1);
  nfree = 0;
  for (size_t i = 0; i < fixed.size(); ++i)
    if (!fixed[i]) map[i] = nfree++;
  return map;
}

// A restricted to free rows; columns split into free and fixed parts.
void split(const SpMat& A, const std::vector<int>& map, int nfree, SpMat& Aff, SpMat& Afd) {
  std::vector<Trip> ff, fd;
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      const int r = map[it.row()];
      if (r < 0) continue;
      if (map[it.col()] >= 0)
        ff.emplace_back(r, map[it.col()], it.value());
      else
        fd.emplace_back(r, int(it.col()), it.value());
    }
  Aff.resize(nfree, nfree);
  Aff.setFromTriplets(ff.begin(), ff.end());
  Afd.resize(nfree, A.cols());
  Afd.setFromTriplets(fd.begin(), fd.end());
}

// LU of (K - sigma M) on the free DOFs with a residual-checked solve.
class ShiftedSolver {
 public:
  ShiftedSolver(const SpMat& K, const SpMat& M, double sigma, const std::vector<char>& fixed, double tol)
      : sigma_(sigma), tol_(tol) {
    map_ = index_map(fixed, nfree_);
    SpMat A = K - sigma * M;
    split(A, map_, nfree_, Aff_, Afd_);
    SpMat Md;
    split(M, map_, nfree_, Mff_, Md);
    SpMat Kd;
    split(K, map_, nfree_, Kff_, Kd);
    // Symmetric diagonal equilibration; residuals are judged on the scaled system.
    scale_ = Vec::Ones(nfree_);
    for (int i = 0; i < nfree_; ++i) {
      const double a = std::max(std::abs(Kff_.coeff(i, i)), std::abs(sigma) * std::abs(Mff_.coeff(i, i)));
      if (a > 0) scale_[i] = 1.0 / std::sqrt(a);
    }
    As_ = scale_.asDiagonal() * Aff_ * scale_.asDiagonal();
    As_.makeCompressed();
    lu_.analyzePattern(As_);
    lu_.factorize(As_);
    if (lu_.info() != Eigen::Success)
      throw Error(ErrorCode::SolverDiverged, "sparse factorization failed");
  }

  int nfree() const { return nfree_; }
  const std::vector<int>& map() const { return map_; }
  const SpMat& Kff() const { return Kff_; }
  const SpMat& Mff() const { return Mff_; }
  double sigma() const { return sigma_; }

  Vec solve(const Vec& b) const {
    const Vec bs = scale_.cwiseProduct(b);
    const double nb = bs.norm();
    if (nb == 0.0) return Vec::Zero(b.size());
    Vec y = lu_.solve(bs);
    Vec r = bs - As_ * y;
    for (int it = 0; it < 4 && r.norm() > tol_ * nb; ++it) {
      y += lu_.solve(r);
      r = bs - As_ * y;
    }
    if (!(r.norm() <= tol_ * nb))
      throw Error(ErrorCode::SolverDiverged,
                  "linear solve residual " + fmt_sci(r.norm() / nb) + " exceeds tolerance");
    return scale_.cwiseProduct(y);
  }

  // (K - sigma M)^{-1} b without the residual check.
  Vec apply_inverse(const Vec& b) const { return scale_.cwiseProduct(lu_.solve(scale_.cwiseProduct(b))); }

  // Right-hand side for prescribed values on the fixed DOFs.
  Vec lift(const Vec& full_values) const { return -(Afd_ * full_values); }

  Vec scatter(const Vec& xf, const Vec& fixed_values) const {
    Vec x = fixed_values;
    for (size_t i = 0; i < map_.size(); ++i)
      if (map_[i] >= 0) x[i] = xf[map_[i]];
    return x;
  }
  Vec gather(const Vec& full) const {
    Vec x(nfree_);
    for (size_t i = 0; i < map_.size(); ++i)
      if (map_[i] >= 0) x[map_[i]] = full[i];
    return x;
  }

  // Ritz pairs of K x = lambda M x nearest sigma (shift-invert subspace
  // iteration). Vectors are M-orthonormal, on free DOFs.
  void nearest_modes(int p, std::uint64_t seed, int max_iter, double rtol, std::vector<double>& lam,
                     std::vector<Vec>& vec) const {
    p = std::min(p, nfree_);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd X(nfree_, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < nfree_; ++i) X(i, j) = u(rng);
    Eigen::VectorXd theta;
    for (int it = 0; it < max_iter; ++it) {
      Eigen::MatrixXd Y(nfree_, p);
      for (int j = 0; j < p; ++j) Y.col(j) = apply_inverse(Mff_ * X.col(j));
      const Eigen::MatrixXd KY = Kff_ * Y, MY = Mff_ * Y;
      Eigen::MatrixXd Kr = Y.transpose() * KY, Mr = Y.transpose() * MY;
      Kr = 0.5 * (Kr + Kr.transpose()).eval();
      Mr = 0.5 * (Mr + Mr.transpose()).eval();
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kr, Mr);
      theta = es.eigenvalues();
      X = Y * es.eigenvectors();
      // Converged when the pair nearest sigma has a small residual.
      int best = 0;
      for (int j = 1; j < p; ++j)
        if (std::abs(theta[j] - sigma_) < std::abs(theta[best] - sigma_)) best = j;
      const Vec x = X.col(best);
      const Vec Mx = Mff_ * x;
      const double res = (Kff_ * x - theta[best] * Mx).norm() / (std::abs(theta[best]) * Mx.norm());
      if (res < rtol && it >= 2) break;
    }
    std::vector<int> order(p);
    for (int j = 0; j < p; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(theta[a] - sigma_) < std::abs(theta[b] - sigma_);
    });
    lam.clear();
    vec.clear();
    for (int j : order) {
      const Vec x = X.col(j);
      const Vec Mx = Mff_ * x;
      const double res = (Kff_ * x - theta[j] * Mx).norm() / (std::abs(theta[j]) * Mx.norm());
      if (res > 1e-6) continue;
      lam.push_back(theta[j]);
      vec.push_back(x / std::sqrt(x.dot(Mx)));
    }
  }

 private:
  double sigma_, tol_;
  std::vector<int> map_;
  int nfree_ = 0;
  SpMat Aff_, Afd_, Mff_, Kff_, As_;
  Vec scale_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

// ------------------------------------------------------------- m = 0 forms

void assemble_m0(const Mesh& m, const DofMap& d, const LagrangeElement& el, SpMat& K, SpMat& M) {
  const int k = el.order();
  const auto& rule = triangle_rule(2 * k + 3);
  const int nd = el.ndof();
  std::vector<Trip> tk, tm;
  std::vector<double> v(nd), gx(nd), gy(nd), dr(nd), dz(nd);
  Eigen::MatrixXd Ke(nd, nd), Me(nd, nd);
  for (size_t t = 0; t < m.tris.size(); ++t) {
    const Affine a = affine(m, d.sorted[t]);
    Ke.setZero();
    Me.setZero();
    for (size_t q = 0; q < rule.w.size(); ++q) {
      double rho, z;
      a.map(rule.x[q][0], rule.x[q][1], rho, z);
      el.eval(rule.x[q][0], rule.x[q][1], v.data(), gx.data(), gy.data());
      const double wq = rule.w[q] * std::abs(a.det) * rho;
      for (int i = 0; i < nd; ++i) {
        dr[i] = a.inv_t[0][0] * gx[i] + a.inv_t[0][1] * gy[i];
        dz[i] = a.inv_t[1][0] * gx[i] + a.inv_t[1][1] * gy[i];
      }
      for (int i = 0; i < nd; ++i) {
        const double ci = 2.0 * v[i] + rho * dr[i];
        for (int j = 0; j < nd; ++j) {
          const double cj = 2.0 * v[j] + rho * dr[j];
          Ke(i, j) += wq * (rho * rho * dz[i] * dz[j] + ci * cj);
          Me(i, j) += wq * rho * rho * v[i] * v[j];
        }
      }
    }
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) {
        tk.emplace_back(d.lag[t][i], d.lag[t][j], Ke(i, j));
        tm.emplace_back(d.lag[t][i], d.lag[t][j], Me(i, j));
      }
  }
  K.resize(d.n_lagrange, d.n_lagrange);
  M.resize(d.n_lagrange, d.n_lagrange);
  K.setFromTriplets(tk.begin(), tk.end());
  M.setFromTriplets(tm.begin(), tm.end());
}

// Boundary mass int rho^3 v_i v_j dl over edges accepted by `pick`.
template <class Pick>
SpMat boundary_mass(const Mesh& m, const DofMap& d, const LagrangeElement& el,
                    const std::vector<EdgeOwner>& own, Pick pick) {
  const int k = el.order();
  std::vector<Trip> tr;
  std::vector<double> v(el.ndof());
  for (size_t e = 0; e < m.edges.size(); ++e) {
    if (!pick(m.edge_tag[e])) continue;
    const auto [t, le] = own[e];
    const auto loc = local_edge_lagrange(k, le);
    const EdgeQuad q = edge_quad(m, d, t, le, k + 3);
    for (size_t i = 0; i < q.w.size(); ++i) {
      el.eval(q.ref[i][0], q.ref[i][1], v.data(), nullptr, nullptr);
      const double r = q.phys[i][0];
      const double w = q.w[i] * r * r * r;
      for (int a : loc)
        for (int b : loc) tr.emplace_back(d.lag[t][a], d.lag[t][b], w * v[a] * v[b]);
    }
  }
  SpMat B(d.n_lagrange, d.n_lagrange);
  B.setFromTriplets(tr.begin(), tr.end());
  return B;
}

std::vector<char> tagged_lagrange(const Mesh& m, const DofMap& d, const std::vector<EdgeOwner>& own,
                                  int k, bool (*pick)(int)) {
  std::vector<char> f(d.n_lagrange, 0);
  for (size_t e = 0; e < m.edges.size(); ++e) {
    if (!pick(m.edge_tag[e])) continue;
    const auto [t, le] = own[e];
    for (int a : local_edge_lagrange(k, le)) f[d.lag[t][a]] = 1;
  }
  return f;
}

bool tag_midplane(int t) { return t == Midplane; }
bool tag_wall(int t) { return t == Wall; }

// ------------------------------------------------------------- m >= 1 forms

struct Features {
  double C[3];
  double g[3];
};

void assemble_mixed(const Mesh& m, const DofMap& d, const LagrangeElement& le, const NedelecElement& ne,
                    int mm, SpMat& K, SpMat& M) {
  const int k = le.order();
  const auto& rule = triangle_rule(2 * mm + 2 * k + 1);
  const int nl = le.ndof(), nn = ne.ndof(), nt = nl + nn;
  const int off = d.n_nedelec;
  std::vector<double> v(nl), gx(nl), gy(nl), nx(nn), ny(nn), cu(nn);
  std::vector<Features> F(nt);
  std::vector<int> gid(nt);
  Eigen::MatrixXd Ke(nt, nt), Me(nt, nt);
  std::vector<Trip> tk, tm;
  for (size_t t = 0; t < m.tris.size(); ++t) {
    const Affine a = affine(m, d.sorted[t]);
    for (int i = 0; i < nn; ++i) gid[i] = d.ned[t][i];
    for (int i = 0; i < nl; ++i) gid[nn + i] = off + d.lag[t][i];
    Ke.setZero();
    Me.setZero();
    for (size_t q = 0; q < rule.w.size(); ++q) {
      double s, z;
      a.map(rule.x[q][0], rule.x[q][1], s, z);
      const double wq = rule.w[q] * std::abs(a.det) * s;
      const double sm = std::pow(s, mm), sm1 = std::pow(s, mm - 1);
      ne.eval(rule.x[q][0], rule.x[q][1], nx.data(), ny.data(), cu.data());
      le.eval(rule.x[q][0], rule.x[q][1], v.data(), gx.data(), gy.data());
      for (int i = 0; i < nn; ++i) {
        const double Nr = a.inv_t[0][0] * nx[i] + a.inv_t[0][1] * ny[i];
        const double Nz = a.inv_t[1][0] * nx[i] + a.inv_t[1][1] * ny[i];
        const double c = cu[i] / a.det;
        F[i] = {{-sm1 * mm * Nz, -sm * c - sm1 * mm * Nz, sm1 * mm * Nr}, {sm * Nr, 0.0, sm * Nz}};
      }
      for (int i = 0; i < nl; ++i) {
        const double pr = a.inv_t[0][0] * gx[i] + a.inv_t[0][1] * gy[i];
        const double pz = a.inv_t[1][0] * gx[i] + a.inv_t[1][1] * gy[i];
        F[nn + i] = {{-sm1 * pz, -sm1 * pz, sm1 * pr}, {-sm1 * v[i], sm1 * v[i], 0.0}};
      }
      for (int i = 0; i < nt; ++i)
        for (int j = i; j < nt; ++j) {
          const double kk = F[i].C[0] * F[j].C[0] + F[i].C[1] * F[j].C[1] + F[i].C[2] * F[j].C[2];
          const double mmv = F[i].g[0] * F[j].g[0] + F[i].g[1] * F[j].g[1] + F[i].g[2] * F[j].g[2];
          Ke(i, j) += wq * kk;
          Me(i, j) += wq * mmv;
        }
    }
    for (int i = 0; i < nt; ++i)
      for (int j = i; j < nt; ++j) {
        tk.emplace_back(gid[i], gid[j], Ke(i, j));
        tm.emplace_back(gid[i], gid[j], Me(i, j));
        if (j != i) {
          tk.emplace_back(gid[j], gid[i], Ke(i, j));
          tm.emplace_back(gid[j], gid[i], Me(i, j));
        }
      }
  }
  const int n = d.n_nedelec + d.n_lagrange;
  K.resize(n, n);
  M.resize(n, n);
  K.setFromTriplets(tk.begin(), tk.end());
  M.setFromTriplets(tm.begin(), tm.end());
}

// Load -k int s^m N_z f_phi s dz over feed edges of plane index `plane`.
Vec feed_load_mixed(const Mesh& m, const DofMap& d, const NedelecElement& ne,
                    const std::vector<EdgeOwner>& own, int mm, double kk, int plane,
                    const std::function<double(double)>& fphi) {
  Vec F = Vec::Zero(d.n_nedelec + d.n_lagrange);
  const int nn = ne.ndof();
  std::vector<double> nx(nn), ny(nn);
  for (size_t e = 0; e < m.edges.size(); ++e) {
    if (m.edge_tag[e] != FeedBase + plane) continue;
    const auto [t, le] = own[e];
    const Affine a = affine(m, d.sorted[t]);
    const EdgeQuad q = edge_quad(m, d, t, le, d.order + 6);
    for (size_t i = 0; i < q.w.size(); ++i) {
      ne.eval(q.ref[i][0], q.ref[i][1], nx.data(), ny.data(), nullptr);
      const double s = q.phys[i][0], z = q.phys[i][1];
      const double fv = fphi(z);
      if (fv == 0.0) continue;
      const double w = -kk * q.w[i] * std::pow(s, mm) * s * fv;
      for (int j = 0; j < nn; ++j) {
        const double Nz = a.inv_t[1][0] * nx[j] + a.inv_t[1][1] * ny[j];
        F[d.ned[t][j]] += w * Nz;
      }
    }
  }
  return F;
}

double quadratic(const SpMat& A, const Vec& x) { return x.dot(A * x); }

}  // namespace

// ------------------------------------------------------------- eigenmode

EigenMode solve_eigenmode(std::shared_ptr<const Mesh> mesh, double k_target, const FemOptions& opt) {
  const Scaled sc = scale_mesh(*mesh);
  const Mesh& m = sc.mesh;
  EigenMode eig;
  eig.mesh = mesh;
  eig.opt = opt;
  eig.length = sc.L;
  eig.k_target = k_target;
  const LagrangeElement el(opt.order);
  eig.dofs = build_dofmap(m, opt.order, false);
  const auto own = edge_owners(m);
  SpMat K, M;
  assemble_m0(m, eig.dofs, el, K, M);
  eig.dirichlet = tagged_lagrange(m, eig.dofs, own, opt.order, is_dirichlet_tag);

  const double kt = k_target * sc.L;
  ShiftedSolver sol(K, M, kt * kt, eig.dirichlet, opt.linear_tol);
  std::vector<double> lam;
  std::vector<Vec> vec;
  sol.nearest_modes(3, opt.seed, 300, 1e-11, lam, vec);
  if (lam.empty() || !(lam[0] > 0))
    throw Error(ErrorCode::NoModeNearTarget, "eigen iteration did not converge");
  const double kh = std::sqrt(lam[0]);
  if (std::abs(kh / kt - 1.0) > 0.1)
    throw Error(ErrorCode::NoModeNearTarget,
                "nearest eigenvalue k = " + std::to_string(kh / sc.L) + " 1/m is more than 10% from target");
  eig.eigen_k = kh / sc.L;
  Vec w = sol.scatter(vec[0], Vec::Zero(eig.dofs.n_lagrange));

  // Normalize: int H0z(0, z) dz = 2 int_0^top (2/k) w(0, z) dz = 1.
  double integral = 0.0;
  {
    std::vector<double> v(el.ndof());
    for (size_t e = 0; e < m.edges.size(); ++e) {
      if (m.edge_tag[e] != Axis) continue;
      const auto [t, le] = own[e];
      const EdgeQuad q = edge_quad(m, eig.dofs, t, le, opt.order + 3);
      for (size_t i = 0; i < q.w.size(); ++i) {
        el.eval(q.ref[i][0], q.ref[i][1], v.data(), nullptr, nullptr);
        double s = 0.0;
        for (int a = 0; a < el.ndof(); ++a) s += v[a] * w[eig.dofs.lag[t][a]];
        integral += 2.0 * q.w[i] * 2.0 / kh * s;
      }
    }
  }
  if (!(std::abs(integral) > 0))
    throw Error(ErrorCode::NoModeNearTarget, "selected mode has no on-axis H0z");
  w /= integral;
  eig.w.assign(w.data(), w.data() + w.size());

  // Consistent wall flux: (K - k^2 M) w on Dirichlet rows equals
  // int rho^3 v dw/dn over the wall.
  const Vec r = K * w - kh * kh * (M * w);
  eig.boundary_residual.assign(eig.dofs.n_lagrange, 0.0);
  std::vector<int> bmap(eig.dofs.n_lagrange, -1);
  int nb = 0;
  for (int i = 0; i < eig.dofs.n_lagrange; ++i)
    if (eig.dirichlet[i]) {
      bmap[i] = nb++;
      eig.boundary_residual[i] = r[i];
    }
  const SpMat Mb = boundary_mass(m, eig.dofs, el, own, is_dirichlet_tag);
  std::vector<Trip> bt;
  for (int c = 0; c < Mb.outerSize(); ++c)
    for (SpMat::InnerIterator it(Mb, c); it; ++it)
      if (bmap[it.row()] >= 0 && bmap[it.col()] >= 0) bt.emplace_back(bmap[it.row()], bmap[it.col()], it.value());
  SpMat Mbb(nb, nb);
  Mbb.setFromTriplets(bt.begin(), bt.end());
  Eigen::SimplicialLDLT<SpMat> ldlt(Mbb);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SolverDiverged, "boundary mass factorization failed");
  Vec rb(nb);
  for (int i = 0; i < eig.dofs.n_lagrange; ++i)
    if (bmap[i] >= 0) rb[bmap[i]] = r[i];
  const Vec qb = ldlt.solve(rb);
  Vec q = Vec::Zero(eig.dofs.n_lagrange);
  for (int i = 0; i < eig.dofs.n_lagrange; ++i)
    if (bmap[i] >= 0) q[i] = qb[bmap[i]];
  eig.wall_flux.assign(q.data(), q.data() + q.size());

  // Q0 = (2/delta) k^2 int E^2 dV / oint (dE/dn)^2 dS over lossy walls.
  const SpMat Ml = boundary_mass(m, eig.dofs, el, own, is_lossy_tag);
  const double delta = opt.skin_depth / sc.L;
  eig.q0 = delta > 0 ? 2.0 / delta * kh * kh * quadratic(M, w) / quadratic(Ml, q)
                     : std::numeric_limits<double>::infinity();
  return eig;
}

// ------------------------------------------------------------- loss fields

FieldSolution solve_loss_field(std::shared_ptr<const EigenMode> eigp, int mm,
                               const std::vector<double>& planes) {
  const EigenMode& eig = *eigp;
  if (mm < 0 || mm > 4) throw Error(ErrorCode::Config, "Fourier index must be 0..4");
  const Scaled sc = scale_mesh(*eig.mesh);
  const Mesh& m = sc.mesh;
  const int k = eig.opt.order;
  const LagrangeElement el(k);
  const auto own = edge_owners(m);
  const double kh = eig.eigen_k * sc.L;
  const double delta = eig.opt.skin_depth / sc.L;
  const double width = [&] {
    // Feed strip width from the mesh: the longest feed-tagged run.
    double w = 0.0;
    for (size_t p = 0; p < planes.size(); ++p) {
      double lo = 1e300, hi = -1e300;
      for (size_t e = 0; e < m.edges.size(); ++e)
        if (m.edge_tag[e] == FeedBase + int(p))
          for (int v : m.edges[e]) {
            lo = std::min(lo, m.nodes[v][1]);
            hi = std::max(hi, m.nodes[v][1]);
          }
      const double h = std::abs(planes[p]) / sc.L;
      if (!(hi > lo) || h < lo - 1e-12 || h > hi + 1e-12)
        throw Error(ErrorCode::Config, "mesh has no feed strip at |z| = " + std::to_string(std::abs(planes[p])) + " m");
      // Strip is [h - w/2, h + w/2] clipped at the midplane.
      w = std::max(w, std::max(2.0 * (hi - h), 2.0 * (h - lo)));
    }
    return w;
  }();

  FieldSolution out;
  out.m = mm;
  out.eig = eigp;
  const Vec w0 = Eigen::Map<const Vec>(eig.w.data(), eig.w.size());
  const Vec r = Eigen::Map<const Vec>(eig.boundary_residual.data(), eig.boundary_residual.size());

  // Feed amplitude per plane from the m = 0 solvability condition.
  const auto xy = lagrange_dof_coords(m, eig.dofs, el);
  std::vector<char> on_wall = tagged_lagrange(m, eig.dofs, own, k, tag_wall);
  Vec u_wall = Vec::Zero(eig.dofs.n_lagrange);
  for (int i = 0; i < eig.dofs.n_lagrange; ++i)
    if (on_wall[i]) u_wall[i] = -0.5 * delta * eig.wall_flux[i];
  auto feed_values = [&](int p, int parity) {
    Vec u = Vec::Zero(eig.dofs.n_lagrange);
    const double h = std::abs(planes[p]) / sc.L;
    for (size_t e = 0; e < m.edges.size(); ++e) {
      if (m.edge_tag[e] != FeedBase + p) continue;
      const auto [t, le] = own[e];
      for (int a : local_edge_lagrange(k, le)) {
        const int g = eig.dofs.lag[t][a];
        const double z = xy[g][1], rho = xy[g][0];
        const double chi = 0.5 * (feed_profile(z, h, width) + parity * feed_profile(z, -h, width));
        u[g] = chi / rho;
      }
    }
    return u;
  };
  std::vector<double> amp(planes.size());
  for (size_t p = 0; p < planes.size(); ++p) {
    const double num = r.dot(u_wall);
    const double den = r.dot(feed_values(int(p), +1));
    if (!(std::abs(den) > 0))
      throw Error(ErrorCode::SolverDiverged, "feed at plane " + std::to_string(planes[p]) +
                                                 " m does not couple to the standing wave");
    amp[p] = -num / den;
  }

  if (mm == 0) {
    out.dofs = eig.dofs;
    SpMat K, M;
    assemble_m0(m, eig.dofs, el, K, M);
    const double sig = kh * kh * (1.0 + 1e-10);
    const ShiftedSolver sym(K, M, sig, eig.dirichlet, eig.opt.linear_tol);
    std::vector<char> fixed_a = eig.dirichlet;
    const auto mid = tagged_lagrange(m, eig.dofs, own, k, tag_midplane);
    for (size_t i = 0; i < fixed_a.size(); ++i) fixed_a[i] |= mid[i];
    std::unique_ptr<ShiftedSolver> anti;
    const double w0n = quadratic(M, w0);
    for (size_t p = 0; p < planes.size(); ++p) {
      for (int parity : {+1, -1}) {
        if (parity < 0 && planes[p] == 0.0) continue;
        Vec ud = amp[p] * feed_values(int(p), parity);
        LossComponent c;
        c.info = {false, std::abs(planes[p]), parity};
        c.feed_amplitude = amp[p];
        Vec u;
        if (parity > 0) {
          ud += u_wall;
          u = sym.scatter(sym.solve(sym.lift(ud)), ud);
          u -= (w0.dot(M * u) / w0n) * w0;
        } else {
          if (!anti) anti = std::make_unique<ShiftedSolver>(K, M, kh * kh, fixed_a, eig.opt.linear_tol);
          u = anti->scatter(anti->solve(anti->lift(ud)), ud);
        }
        c.lag.assign(u.data(), u.data() + u.size());
        out.comps.push_back(std::move(c));
      }
    }
    return out;
  }

  // m >= 1: mixed Nedelec / Lagrange unknowns, Nedelec first.
  out.dofs = build_dofmap(m, k, true);
  const DofMap& d = out.dofs;
  const NedelecElement ne(k);
  SpMat K, M;
  assemble_mixed(m, d, el, ne, mm, K, M);
  const int n = d.n_nedelec + d.n_lagrange;
  std::vector<char> fixed_s(n, 0), fixed_a(n, 0);
  for (size_t e = 0; e < m.edges.size(); ++e) {
    if (m.edge_tag[e] != Midplane) continue;
    for (int g : nedelec_edge_dofs(d, int(e))) fixed_s[g] = 1;
    for (int g : lagrange_edge_dofs(m, d, int(e))) fixed_s[d.n_nedelec + g] = 1;
  }
  const double sig = kh * kh;
  std::unique_ptr<ShiftedSolver> solvers[2];
  std::vector<std::vector<Vec>> modes(2);
  for (size_t p = 0; p < planes.size(); ++p) {
    for (int parity : {+1, -1}) {
      if (parity < 0 && planes[p] == 0.0) continue;
      const int s = parity > 0 ? 0 : 1;
      if (!solvers[s]) {
        solvers[s] = std::make_unique<ShiftedSolver>(K, M, sig, s == 0 ? fixed_s : fixed_a, eig.opt.linear_tol);
        std::vector<double> lam;
        std::vector<Vec> vec;
        solvers[s]->nearest_modes(4, eig.opt.seed + 17 * mm + s, 40, 1e-8, lam, vec);
        for (size_t j = 0; j < lam.size(); ++j) {
          if (!(lam[j] > 0)) continue;
          const double rel = std::abs(std::sqrt(lam[j]) / kh - 1.0);
          if (rel < eig.opt.deflate_window) {
            modes[s].push_back(vec[j]);
            out.deflated.push_back(rel);
          }
        }
      }
      const ShiftedSolver& S = *solvers[s];
      const double h = std::abs(planes[p]) / sc.L;
      const double A2 = 2.0 * amp[p];
      const Vec F = feed_load_mixed(m, d, ne, own, mm, kh, int(p), [&](double z) {
        return A2 * 0.5 * (feed_profile(z, h, width) + parity * feed_profile(z, -h, width));
      });
      Vec x = S.solve(S.gather(F));
      for (const Vec& phi : modes[s]) x -= phi.dot(S.Mff() * x) * phi;
      const Vec full = S.scatter(x, Vec::Zero(n));
      LossComponent c;
      c.info = {false, std::abs(planes[p]), parity};
      c.feed_amplitude = amp[p];
      c.ned.assign(full.data(), full.data() + d.n_nedelec);
      c.lag.assign(full.data() + d.n_nedelec, full.data() + n);
      out.comps.push_back(std::move(c));
    }
  }
  return out;
}

// ------------------------------------------------------------- evaluation

Locator::Locator(const Mesh& mesh, int target_per_cell) : mesh_(&mesh) {
  double x1 = -1e300, y1 = -1e300;
  x0_ = y0_ = 1e300;
  for (const auto& p : mesh.nodes) {
    x0_ = std::min(x0_, p[0]);
    y0_ = std::min(y0_, p[1]);
    x1 = std::max(x1, p[0]);
    y1 = std::max(y1, p[1]);
  }
  const double area = std::max((x1 - x0_) * (y1 - y0_), 1e-300);
  const double cells = std::max(1.0, double(mesh.tris.size()) / target_per_cell);
  const double h = std::sqrt(area / cells);
  nx_ = std::max(1, int(std::ceil((x1 - x0_) / h)));
  ny_ = std::max(1, int(std::ceil((y1 - y0_) / h)));
  hx_ = (x1 - x0_) / nx_ * (1 + 1e-12);
  hy_ = (y1 - y0_) / ny_ * (1 + 1e-12);
  if (!(hx_ > 0)) hx_ = 1;
  if (!(hy_ > 0)) hy_ = 1;
  cells_.resize(size_t(nx_) * ny_);
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    double a0 = 1e300, a1 = -1e300, b0 = 1e300, b1 = -1e300;
    for (int v : mesh.tris[t]) {
      a0 = std::min(a0, mesh.nodes[v][0]);
      a1 = std::max(a1, mesh.nodes[v][0]);
      b0 = std::min(b0, mesh.nodes[v][1]);
      b1 = std::max(b1, mesh.nodes[v][1]);
    }
    const int i0 = std::clamp(int((a0 - x0_) / hx_), 0, nx_ - 1), i1 = std::clamp(int((a1 - x0_) / hx_), 0, nx_ - 1);
    const int j0 = std::clamp(int((b0 - y0_) / hy_), 0, ny_ - 1), j1 = std::clamp(int((b1 - y0_) / hy_), 0, ny_ - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) cells_[size_t(i) * ny_ + j].push_back(int(t));
  }
}

int Locator::find(double rho, double z, const DofMap& d, double& xi, double& eta) const {
  const int i = int(std::floor((rho - x0_) / hx_)), j = int(std::floor((z - y0_) / hy_));
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  const double eps = 1e-10;
  for (int t : cells_[size_t(i) * ny_ + j]) {
    const Affine a = affine(*mesh_, d.sorted[t]);
    const double dx = rho - a.x0, dy = z - a.y0;
    // J^{-1} = (J^{-T})^T
    const double u = a.inv_t[0][0] * dx + a.inv_t[1][0] * dy;
    const double v = a.inv_t[0][1] * dx + a.inv_t[1][1] * dy;
    if (u >= -eps && v >= -eps && u + v <= 1 + eps) {
      xi = std::clamp(u, 0.0, 1.0);
      eta = std::clamp(v, 0.0, 1.0 - xi);
      return t;
    }
  }
  return -1;
}

namespace {

const LagrangeElement& lagrange_of(int k) {
  static const LagrangeElement e1(1), e2(2), e3(3);
  return k == 1 ? e1 : k == 2 ? e2 : e3;
}
const NedelecElement& nedelec_of(int k) {
  static const NedelecElement e1(1), e2(2), e3(3);
  return k == 1 ? e1 : k == 2 ? e2 : e3;
}

}  // namespace

PointFields eval_in_triangle(const EigenMode& eig, const FieldSolution* sol, int comp, int t, double xi,
                             double eta) {
  const Mesh& pm = *eig.mesh;
  const double L = eig.length;
  const int k = eig.opt.order;
  const LagrangeElement& el = lagrange_of(k);
  const DofMap& d = eig.dofs;
  // Scaled affine map from the physical one.
  Affine a = affine(pm, d.sorted[t]);
  const double s = (a.x0 + a.j[0][0] * xi + a.j[0][1] * eta) / L;
  for (auto& row : a.inv_t)
    for (double& v : row) v *= L;
  a.det /= L * L;
  const double kh = eig.eigen_k * L;
  double v[10], gx[10], gy[10];
  el.eval(xi, eta, v, gx, gy);
  auto interp = [&](const std::vector<double>& c, const std::vector<int>& ids, double& val, double& dr,
                    double& dz) {
    val = dr = dz = 0.0;
    for (int i = 0; i < el.ndof(); ++i) {
      const double ci = c[ids[i]];
      val += ci * v[i];
      dr += ci * (a.inv_t[0][0] * gx[i] + a.inv_t[0][1] * gy[i]);
      dz += ci * (a.inv_t[1][0] * gx[i] + a.inv_t[1][1] * gy[i]);
    }
  };
  PointFields out;
  double w, wr, wz;
  interp(eig.w, d.lag[t], w, wr, wz);
  out.e0phi = s * w / L;
  out.h0rho = -s * wz / kh / L;
  out.h0z = (2.0 * w + s * wr) / kh / L;
  if (!sol) return out;
  const LossComponent& c = sol->comps.at(comp);
  if (sol->m == 0) {
    double u, ur, uz;
    interp(c.lag, d.lag[t], u, ur, uz);
    out.f = {0.0, s * u / L, 0.0};
    out.g = {-s * uz / kh / L, 0.0, (2.0 * u + s * ur) / kh / L};
    return out;
  }
  const int mm = sol->m;
  const DofMap& dm = sol->dofs;
  double Gp, Gpr, Gpz;
  interp(c.lag, dm.lag[t], Gp, Gpr, Gpz);
  const NedelecElement& ne = nedelec_of(k);
  double nx[15], ny[15], cu[15];
  ne.eval(xi, eta, nx, ny, cu);
  double Gr = 0, Gz = 0, curl = 0;
  for (int i = 0; i < ne.ndof(); ++i) {
    const double ci = c.ned[dm.ned[t][i]];
    Gr += ci * (a.inv_t[0][0] * nx[i] + a.inv_t[0][1] * ny[i]);
    Gz += ci * (a.inv_t[1][0] * nx[i] + a.inv_t[1][1] * ny[i]);
    curl += ci * cu[i] / a.det;
  }
  const double sm = std::pow(s, mm), sm1 = std::pow(s, mm - 1);
  const double Wr = Gpr + mm * Gr, Wz = Gpz + mm * Gz;
  out.g = {(sm * Gr - sm1 * Gp) / L, sm1 * Gp / L, sm * Gz / L};
  out.f = {-sm1 * Wz / kh / L, (-sm * curl - sm1 * Wz) / kh / L, sm1 * Wr / kh / L};
  return out;
}

bool eval_point(const EigenMode& eig, const Locator& loc, const FieldSolution* sol, int comp, double rho,
                double z, PointFields& out) {
  double xi, eta;
  const int t = loc.find(rho, z, eig.dofs, xi, eta);
  if (t < 0) return false;
  out = eval_in_triangle(eig, sol, comp, t, xi, eta);
  return true;
}

// ------------------------------------------------------------- field model

FemFieldModel::FemFieldModel(std::shared_ptr<const EigenMode> eig,
                             std::vector<std::shared_ptr<const FieldSolution>> sols)
    : eig_(std::move(eig)) {
  for (auto& s : sols) sols_.at(s->m) = s;
  const Mesh& m = *eig_->mesh;
  rho_limit_ = std::numeric_limits<double>::infinity();
  for (size_t e = 0; e < m.edges.size(); ++e) {
    if (!is_dirichlet_tag(m.edge_tag[e])) continue;
    const auto& a = m.nodes[m.edges[e][0]];
    const auto& b = m.nodes[m.edges[e][1]];
    if (a[0] == b[0]) rho_limit_ = std::min(rho_limit_, a[0]);
  }
  loc_ = std::make_shared<Locator>(m);
  init_weights();
  // Default: a single weak feed at +h on the first plane.
  for (int mm = 0; mm < 5; ++mm) {
    if (!sols_[mm]) continue;
    std::vector<double> w(sols_[mm]->comps.size(), 0.0);
    for (size_t c = 0; c < w.size(); ++c)
      if (sols_[mm]->comps[c].info.plane == sols_[mm]->comps[0].info.plane) w[c] = 1.0;
    set_weights(mm, w);
  }
}

std::shared_ptr<FieldModel> FemFieldModel::clone() const { return std::make_shared<FemFieldModel>(*this); }

int FemFieldModel::component_count(int m) const {
  return sols_.at(m) ? int(sols_[m]->comps.size()) : 0;
}

ComponentInfo FemFieldModel::component_info(int m, int c) const { return sols_.at(m)->comps.at(c).info; }

std::shared_ptr<const FieldSolution> FemFieldModel::solution(int m) const { return sols_.at(m); }

void FemFieldModel::line(double rho, const std::vector<int>& ms, AxialLine& out) const {
  const Mesh& m = *eig_->mesh;
  const DofMap& d = eig_->dofs;
  struct Piece {
    double z0, z1;
    int t;
  };
  std::vector<Piece> pieces;
  for (size_t t = 0; t < m.tris.size(); ++t) {
    const auto& tri = m.tris[t];
    double lo = 1e300, hi = -1e300;
    bool any = false;
    for (int e = 0; e < 3; ++e) {
      const auto& p = m.nodes[tri[e]];
      const auto& q = m.nodes[tri[(e + 1) % 3]];
      const double a0 = std::min(p[0], q[0]), a1 = std::max(p[0], q[0]);
      if (rho < a0 || rho > a1) continue;
      if (a1 == a0) {
        lo = std::min({lo, p[1], q[1]});
        hi = std::max({hi, p[1], q[1]});
      } else {
        const double z = p[1] + (q[1] - p[1]) * (rho - p[0]) / (q[0] - p[0]);
        lo = std::min(lo, z);
        hi = std::max(hi, z);
      }
      any = true;
    }
    if (any && hi - lo > 1e-14) pieces.push_back({lo, hi, int(t)});
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    return a.z0 < b.z0 || (a.z0 == b.z0 && a.t < b.t);
  });
  std::vector<Piece> kept;
  double cursor = 0.0;
  for (const auto& p : pieces) {
    const double z0 = std::max(p.z0, cursor);
    if (p.z1 - z0 <= 1e-14) continue;
    kept.push_back({z0, p.z1, p.t});
    cursor = p.z1;
  }

  // Upper half samples.
  std::vector<double> zu, wu, h0;
  std::vector<double> pz0, plen;
  std::vector<int> tri_of;
  for (const auto& p : kept) {
    pz0.push_back(p.z0);
    plen.push_back(p.z1 - p.z0);
    append_panel(p.z0, p.z1 - p.z0, zu, wu);
    for (int i = 0; i < kPanelNodes; ++i) tri_of.push_back(p.t);
  }
  const size_t nu = zu.size();
  auto locate = [&](size_t i, double& xi, double& eta) {
    const Affine a = affine(m, d.sorted[tri_of[i]]);
    const double dx = rho - a.x0, dy = zu[i] - a.y0;
    xi = a.inv_t[0][0] * dx + a.inv_t[1][0] * dy;
    eta = a.inv_t[0][1] * dx + a.inv_t[1][1] * dy;
    xi = std::clamp(xi, 0.0, 1.0);
    eta = std::clamp(eta, 0.0, 1.0 - xi);
  };
  std::vector<double> xis(nu), etas(nu);
  for (size_t i = 0; i < nu; ++i) locate(i, xis[i], etas[i]);

  // Mirror to z < 0: lower half is the reversed upper half.
  const size_t np = kept.size();
  out.per_panel = kPanelNodes;
  out.z0.resize(2 * np);
  out.len.resize(2 * np);
  for (size_t k = 0; k < np; ++k) {
    out.z0[k] = -(pz0[np - 1 - k] + plen[np - 1 - k]);
    out.len[k] = plen[np - 1 - k];
    out.z0[np + k] = pz0[k];
    out.len[np + k] = plen[k];
  }
  out.z.resize(2 * nu);
  out.w.resize(2 * nu);
  out.h0z.resize(2 * nu);
  for (size_t i = 0; i < nu; ++i) {
    const PointFields pf = eval_in_triangle(*eig_, nullptr, 0, tri_of[i], xis[i], etas[i]);
    out.z[nu + i] = zu[i];
    out.w[nu + i] = wu[i];
    out.h0z[nu + i] = pf.h0z;
    out.z[nu - 1 - i] = -zu[i];
    out.w[nu - 1 - i] = wu[i];
    out.h0z[nu - 1 - i] = pf.h0z;
  }
  out.comp.assign(ms.size(), {});
  for (size_t sl = 0; sl < ms.size(); ++sl) {
    const auto& sol = sols_.at(ms[sl]);
    if (!sol) throw Error(ErrorCode::MissingBaseSolution, "no loss field for m=" + std::to_string(ms[sl]));
    const auto& wts = weights(ms[sl]);
    out.comp[sl].assign(sol->comps.size(), {});
    for (size_t c = 0; c < sol->comps.size(); ++c) {
      auto& v = out.comp[sl][c];
      v.assign(2 * nu, 0.0);
      if (c < wts.size() && wts[c] == 0.0) continue;
      const int parity = sol->comps[c].info.parity;
      for (size_t i = 0; i < nu; ++i) {
        const PointFields pf = eval_in_triangle(*eig_, sol.get(), int(c), tri_of[i], xis[i], etas[i]);
        v[nu + i] = pf.g[2];
        v[nu - 1 - i] = parity * pf.g[2];
      }
    }
  }
}

bool FemFieldModel::point(double rho, double z, const std::vector<int>& ms, FieldPoint& out) const {
  const double za = std::abs(z);
  double xi = 0, eta = 0;
  const int t = loc_->find(rho, za, eig_->dofs, xi, eta);
  if (t < 0) return false;
  const PointFields base = eval_in_triangle(*eig_, nullptr, 0, t, xi, eta);
  // Mirror images: E0phi and H0z are even in z, H0rho is odd.
  const double s = z < 0 ? -1.0 : 1.0;
  out.e0phi = base.e0phi;
  out.h0rho = s * base.h0rho;
  out.h0z = base.h0z;
  out.full = true;
  out.f.assign(ms.size(), {0.0, 0.0, 0.0});
  out.g.assign(ms.size(), {0.0, 0.0, 0.0});
  for (size_t sl = 0; sl < ms.size(); ++sl) {
    const auto& sol = sols_.at(ms[sl]);
    if (!sol) throw Error(ErrorCode::MissingBaseSolution, "no loss field for m=" + std::to_string(ms[sl]));
    const auto& wts = weights(ms[sl]);
    for (size_t c = 0; c < sol->comps.size(); ++c) {
      if (wts[c] == 0.0) continue;
      const PointFields pf = eval_in_triangle(*eig_, sol.get(), int(c), t, xi, eta);
      const double p = z < 0 ? double(sol->comps[c].info.parity) : 1.0;
      // Symmetric half: f_rho, f_phi, g_z even; f_z, g_rho, g_phi odd.
      out.f[sl][0] += wts[c] * p * pf.f[0];
      out.f[sl][1] += wts[c] * p * pf.f[1];
      out.f[sl][2] += wts[c] * p * s * pf.f[2];
      out.g[sl][0] += wts[c] * p * s * pf.g[0];
      out.g[sl][1] += wts[c] * p * s * pf.g[1];
      out.g[sl][2] += wts[c] * p * pf.g[2];
    }
  }
  return true;
}

// ------------------------------------------------------------- phase maps

PhaseMap extract_phase_map(const FieldSolution& sol, const std::vector<double>& weights,
                           const std::vector<double>& rho, const std::vector<double>& z, double floor) {
  const EigenMode& eig = *sol.eig;
  const Locator loc(*eig.mesh);
  PhaseMap pm;
  pm.m = sol.m;
  pm.rho = rho;
  pm.z = z;
  const size_t n = rho.size() * z.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  pm.h0z.assign(n, nan);
  pm.gz.assign(n, nan);
  pm.phase.assign(n, nan);
  double hmax = 0.0;
  for (size_t i = 0; i < rho.size(); ++i)
    for (size_t j = 0; j < z.size(); ++j) {
      double xi, eta;
      const int t = loc.find(rho[i], std::abs(z[j]), eig.dofs, xi, eta);
      if (t < 0) continue;
      const size_t id = i * z.size() + j;
      double g = 0.0, h = 0.0;
      for (size_t c = 0; c < sol.comps.size(); ++c) {
        const double wc = c < weights.size() ? weights[c] : 0.0;
        const PointFields pf = eval_in_triangle(eig, &sol, int(c), t, xi, eta);
        h = pf.h0z;
        if (wc == 0.0) continue;
        const int par = z[j] < 0 ? sol.comps[c].info.parity : 1;
        g += wc * par * pf.g[2];
      }
      if (sol.comps.empty()) h = eval_in_triangle(eig, nullptr, 0, t, xi, eta).h0z;
      pm.h0z[id] = h;
      pm.gz[id] = g;
      hmax = std::max(hmax, std::abs(h));
    }
  for (size_t id = 0; id < n; ++id) {
    if (std::isnan(pm.h0z[id])) continue;
    if (std::abs(pm.h0z[id]) > floor * hmax) pm.phase[id] = std::atan(-pm.gz[id] / pm.h0z[id]);
  }
  return pm;
}

std::array<double, 2> fit_phase_coefficients(const PhaseMap& map, double r_a, double k1, double z_max) {
  const int m = map.m;
  const int e = m == 0 ? 2 : m;
  std::vector<std::array<double, 6>> rows;
  std::vector<double> rhs;
  for (size_t i = 0; i < map.rho.size(); ++i)
    for (size_t j = 0; j < map.z.size(); ++j) {
      const double r = map.rho[i], z = map.z[j];
      const double ph = map.phase[i * map.z.size() + j];
      if (r > r_a || std::abs(z) > z_max || std::isnan(ph)) continue;
      const double x = r / r_a, c1 = 1.0, c3 = std::cos(3 * k1 * z) / std::cos(k1 * z);
      const double xe = std::pow(x, e), xe2 = xe * x * x;
      if (m == 0)
        rows.push_back({xe * c1, xe * c3, xe2 * c1, xe2 * c3, 1.0, k1 * z * std::tan(k1 * z)});
      else
        rows.push_back({xe * c1, xe * c3, xe2 * c1, xe2 * c3, 0.0, 0.0});
      rhs.push_back(ph);
    }
  const int nc = m == 0 ? 6 : 4;
  if (rows.size() < size_t(nc)) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  Eigen::MatrixXd A(rows.size(), nc);
  Eigen::VectorXd b(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < nc; ++c) A(r, c) = rows[r][c];
    b[r] = rhs[r];
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  return {x[0], x[1]};
}

// ------------------------------------------------------------- checks

double wall_phase_deviation(const FieldSolution& sol, int comp, int samples) {
  if (sol.m != 0) throw Error(ErrorCode::Config, "wall phase check applies to m = 0");
  const EigenMode& eig = *sol.eig;
  const Mesh& m = *eig.mesh;
  const auto own = edge_owners(m);
  const double half = 0.5 * eig.opt.skin_depth;
  // Typical |dE0/dn| on the walls sets the threshold for meaningful samples.
  double sum2 = 0.0;
  int count = 0;
  double gmax = 0.0;
  struct Sample {
    double e_in, f;
  };
  std::vector<Sample> ss;
  for (size_t e = 0; e < m.edges.size(); ++e) {
    if (m.edge_tag[e] != Wall) continue;
    const auto [t, le] = own[e];
    const auto& pa = m.nodes[m.edges[e][0]];
    const auto& pb = m.nodes[m.edges[e][1]];
    const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
    // Outward normal: away from the triangle's third vertex.
    int third = -1;
    for (int v : m.tris[t])
      if (v != m.edges[e][0] && v != m.edges[e][1]) third = v;
    double nx = (pb[1] - pa[1]) / len, ny = -(pb[0] - pa[0]) / len;
    const auto& pc = m.nodes[third];
    if ((pc[0] - pa[0]) * nx + (pc[1] - pa[1]) * ny > 0) {
      nx = -nx;
      ny = -ny;
    }
    for (int i = 1; i <= samples; ++i) {
      const double s = double(i) / (samples + 1);
      const double x = pa[0] + s * (pb[0] - pa[0]), y = pa[1] + s * (pb[1] - pa[1]);
      const Affine a = affine(m, eig.dofs.sorted[t]);
      const double dx = x - a.x0, dy = y - a.y0;
      double xi = a.inv_t[0][0] * dx + a.inv_t[1][0] * dy;
      double eta = a.inv_t[0][1] * dx + a.inv_t[1][1] * dy;
      xi = std::clamp(xi, 0.0, 1.0);
      eta = std::clamp(eta, 0.0, 1.0 - xi);
      const PointFields pf = eval_in_triangle(eig, &sol, comp, t, xi, eta);
      // E0 continued half a skin depth into the wall; E0 = 0 on the surface.
      const double h = 1e-3 * len;
      double xi2 = a.inv_t[0][0] * (dx - h * nx) + a.inv_t[1][0] * (dy - h * ny);
      double eta2 = a.inv_t[0][1] * (dx - h * nx) + a.inv_t[1][1] * (dy - h * ny);
      const PointFields pin = eval_in_triangle(eig, nullptr, 0, t, xi2, eta2);
      const double dEdn = (pf.e0phi - pin.e0phi) / h;
      ss.push_back({dEdn * half, pf.f[1]});
      gmax = std::max(gmax, std::abs(dEdn * half));
    }
  }
  for (const auto& s : ss) {
    if (std::abs(s.e_in) < 0.1 * gmax) continue;
    const double dev = std::atan(std::abs(s.f) / std::abs(s.e_in)) - 0.25 * pi;
    sum2 += dev * dev;
    ++count;
  }
  return count ? std::sqrt(sum2 / count) : std::numeric_limits<double>::quiet_NaN();
}

double divergence_residual(const FieldSolution& sol, int comp) {
  if (sol.m == 0) return 0.0;
  const EigenMode& eig = *sol.eig;
  const Scaled sc = scale_mesh(*eig.mesh);
  const Mesh& m = sc.mesh;
  const int k = eig.opt.order, mm = sol.m;
  const LagrangeElement& el = lagrange_of(k);
  const NedelecElement& ne = nedelec_of(k);
  const DofMap& d = sol.dofs;
  const LossComponent& c = sol.comps.at(comp);
  std::vector<char> boundary(d.n_lagrange, 0);
  for (size_t e = 0; e < m.edges.size(); ++e)
    if (m.edge_tag[e] != Interior)
      for (int g : lagrange_edge_dofs(m, d, int(e))) boundary[g] = 1;
  const auto& rule = triangle_rule(2 * mm + 2 * k + 1);
  Vec D = Vec::Zero(d.n_lagrange), Q = Vec::Zero(d.n_lagrange);
  double gnorm = 0.0;
  std::vector<double> v(el.ndof()), gx(el.ndof()), gy(el.ndof());
  std::vector<double> nx(ne.ndof()), ny(ne.ndof()), cu(ne.ndof());
  for (size_t t = 0; t < m.tris.size(); ++t) {
    const Affine a = affine(m, d.sorted[t]);
    for (size_t q = 0; q < rule.w.size(); ++q) {
      double s, z;
      a.map(rule.x[q][0], rule.x[q][1], s, z);
      const double wq = rule.w[q] * std::abs(a.det) * s;
      const double sm = std::pow(s, mm), sm1 = std::pow(s, mm - 1);
      el.eval(rule.x[q][0], rule.x[q][1], v.data(), gx.data(), gy.data());
      ne.eval(rule.x[q][0], rule.x[q][1], nx.data(), ny.data(), cu.data());
      double Gp = 0, Gr = 0, Gz = 0;
      for (int i = 0; i < el.ndof(); ++i) Gp += c.lag[d.lag[t][i]] * v[i];
      for (int i = 0; i < ne.ndof(); ++i) {
        const double ci = c.ned[d.ned[t][i]];
        Gr += ci * (a.inv_t[0][0] * nx[i] + a.inv_t[0][1] * ny[i]);
        Gz += ci * (a.inv_t[1][0] * nx[i] + a.inv_t[1][1] * ny[i]);
      }
      const double g[3] = {sm * Gr - sm1 * Gp, sm1 * Gp, sm * Gz};
      gnorm += wq * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
      for (int i = 0; i < el.ndof(); ++i) {
        const int gi = d.lag[t][i];
        if (boundary[gi]) continue;
        const double pr = a.inv_t[0][0] * gx[i] + a.inv_t[0][1] * gy[i];
        const double pz = a.inv_t[1][0] * gx[i] + a.inv_t[1][1] * gy[i];
        // Curl-free test field: G_t = -grad(psi)/m, G_phi = psi.
        const double h[3] = {-sm * pr / mm - sm1 * v[i], sm1 * v[i], -sm * pz / mm};
        D[gi] += wq * (g[0] * h[0] + g[1] * h[1] + g[2] * h[2]);
        Q[gi] += wq * (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]);
      }
    }
  }
  double worst = 0.0;
  const double gn = std::sqrt(gnorm);
  if (gn == 0.0) return 0.0;
  for (int i = 0; i < d.n_lagrange; ++i)
    if (!boundary[i] && Q[i] > 0) worst = std::max(worst, std::abs(D[i]) / (gn * std::sqrt(Q[i])));
  return worst;
}

}  // namespace dcp
