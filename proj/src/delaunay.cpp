#include "dcp/delaunay.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace dcp {

using i128 = __int128;

std::int64_t orient2d(const IPoint& a, const IPoint& b, const IPoint& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

int incircle(const IPoint& a, const IPoint& b, const IPoint& c, const IPoint& d) {
  const i128 adx = a.x - d.x, ady = a.y - d.y;
  const i128 bdx = b.x - d.x, bdy = b.y - d.y;
  const i128 cdx = c.x - d.x, cdy = c.y - d.y;
  const i128 al = adx * adx + ady * ady;
  const i128 bl = bdx * bdx + bdy * bdy;
  const i128 cl = cdx * cdx + cdy * cdy;
  const i128 det = al * (bdx * cdy - bdy * cdx) - bl * (adx * cdy - ady * cdx) +
                   cl * (adx * bdy - ady * bdx);
  return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

}  // namespace

Delaunay::Delaunay(std::int64_t xmin, std::int64_t ymin, std::int64_t xmax, std::int64_t ymax) {
  const std::int64_t w = std::max(xmax - xmin, ymax - ymin) + 16;
  const std::int64_t cx = (xmin + xmax) / 2, cy = (ymin + ymax) / 2;
  if (w > (std::int64_t(1) << 26)) throw std::invalid_argument("triangulation extent too large");
  pts_.push_back({cx - 4 * w, cy - 4 * w});
  pts_.push_back({cx + 4 * w, cy - 4 * w});
  pts_.push_back({cx, cy + 4 * w});
  tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
  vert_tri_ = {0, 0, 0};
}

int Delaunay::locate(const IPoint& p) {
  int t = last_;
  if (!tris_[t].alive) {
    for (t = int(tris_.size()) - 1; t >= 0 && !tris_[t].alive; --t) {
    }
  }
  for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
    const Tri& T = tris_[t];
    walk_state_ = walk_state_ * 6364136223846793005ull + 1442695040888963407ull;
    const int s = int((walk_state_ >> 33) % 3);
    int next = -1;
    for (int k = 0; k < 3; ++k) {
      const int i = (s + k) % 3;
      const IPoint& a = pts_[T.v[(i + 1) % 3]];
      const IPoint& b = pts_[T.v[(i + 2) % 3]];
      if (orient2d(a, b, p) < 0) {
        next = T.n[i];
        break;
      }
    }
    if (next < 0) return t;
    t = next;
  }
  throw std::runtime_error("point location failed");
}

int Delaunay::insert(const IPoint& p) {
  // Exact duplicate check through the containing triangle's vertices.
  const int t0 = locate(p);
  for (int i = 0; i < 3; ++i)
    if (pts_[tris_[t0].v[i]] == p) return tris_[t0].v[i] - 3;

  const int pi = int(pts_.size());
  pts_.push_back(p);
  vert_tri_.push_back(-1);

  // Cavity of triangles whose circumcircle contains p.
  std::vector<int> cavity{t0};
  std::vector<char> in_cavity(tris_.size(), 0);
  in_cavity[t0] = 1;
  for (std::size_t q = 0; q < cavity.size(); ++q) {
    const Tri& T = tris_[cavity[q]];
    for (int i = 0; i < 3; ++i) {
      const int nb = T.n[i];
      if (nb < 0 || in_cavity[nb]) continue;
      const Tri& N = tris_[nb];
      if (incircle(pts_[N.v[0]], pts_[N.v[1]], pts_[N.v[2]], p) > 0) {
        in_cavity[nb] = 1;
        cavity.push_back(nb);
      }
    }
  }

  // Boundary edges of the cavity, each becoming a new triangle with p.
  struct BEdge {
    int a, b, outer;
  };
  std::vector<BEdge> border;
  for (const int c : cavity) {
    const Tri& T = tris_[c];
    for (int i = 0; i < 3; ++i) {
      const int nb = T.n[i];
      if (nb >= 0 && in_cavity[nb]) continue;
      border.push_back({T.v[(i + 1) % 3], T.v[(i + 2) % 3], nb});
    }
  }
  for (const int c : cavity) tris_[c].alive = false;

  std::unordered_map<int, int> by_start;  // new triangle keyed by its edge start a
  std::vector<int> created;
  created.reserve(border.size());
  for (const auto& e : border) {
    // Reuse dead slots from the cavity when possible.
    int id;
    if (created.size() < cavity.size()) {
      id = cavity[created.size()];
    } else {
      id = int(tris_.size());
      tris_.push_back({});
    }
    // n[0] across (b, p), n[1] across (p, a), n[2] across (a, b).
    tris_[id] = {{e.a, e.b, pi}, {-1, -1, e.outer}, true};
    if (e.outer >= 0) {
      Tri& O = tris_[e.outer];
      for (int i = 0; i < 3; ++i) {
        const int oa = O.v[(i + 1) % 3], ob = O.v[(i + 2) % 3];
        if (oa == e.b && ob == e.a) O.n[i] = id;
      }
    }
    by_start[e.a] = id;
    created.push_back(id);
  }
  // Link new triangles around p: triangle (a, b, p) meets the one starting at b.
  for (const int id : created) {
    Tri& T = tris_[id];
    const int b = T.v[1];
    const int nb = by_start.at(b);
    T.n[0] = nb;                 // across (b, p)
    tris_[nb].n[1] = id;         // across (p, a') with a' = b
  }
  for (const int id : created) {
    for (int i = 0; i < 3; ++i) vert_tri_[tris_[id].v[i]] = id;
  }
  last_ = created.front();
  return pi - 3;
}

bool Delaunay::has_edge(int a, int b) const {
  a += 3;
  b += 3;
  // Search the fan around a starting from a known triangle.
  int start = vert_tri_[a];
  if (start < 0 || !tris_[start].alive) return false;
  // Walk both directions around the vertex.
  for (int dir = 0; dir < 2; ++dir) {
    int t = start;
    for (std::size_t guard = 0; guard < tris_.size(); ++guard) {
      const Tri& T = tris_[t];
      int i = 0;
      while (T.v[i] != a) ++i;
      if (T.v[(i + 1) % 3] == b || T.v[(i + 2) % 3] == b) return true;
      // dir 0: rotate across edge (a, v[i+1]) i.e. opposite v[i+2].
      const int next = dir == 0 ? T.n[(i + 2) % 3] : T.n[(i + 1) % 3];
      if (next < 0 || next == start) break;
      t = next;
    }
  }
  return false;
}

std::vector<std::array<int, 3>> Delaunay::triangles() const {
  std::vector<std::array<int, 3>> out;
  for (const auto& T : tris_) {
    if (!T.alive || T.v[0] < 3 || T.v[1] < 3 || T.v[2] < 3) continue;
    out.push_back({T.v[0] - 3, T.v[1] - 3, T.v[2] - 3});
  }
  return out;
}

std::vector<std::array<int, 3>> Delaunay::triangles_inside(
    const std::vector<std::array<int, 2>>& constraints) const {
  std::unordered_set<std::uint64_t> cons;
  for (const auto& c : constraints) cons.insert(edge_key(c[0] + 3, c[1] + 3));
  std::vector<char> outside(tris_.size(), 0);
  std::vector<int> stack;
  for (int t = 0; t < int(tris_.size()); ++t) {
    const Tri& T = tris_[t];
    if (!T.alive) continue;
    if (T.v[0] < 3 || T.v[1] < 3 || T.v[2] < 3) {
      outside[t] = 1;
      stack.push_back(t);
    }
  }
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    const Tri& T = tris_[t];
    for (int i = 0; i < 3; ++i) {
      const int nb = T.n[i];
      if (nb < 0 || outside[nb]) continue;
      if (cons.count(edge_key(T.v[(i + 1) % 3], T.v[(i + 2) % 3]))) continue;
      outside[nb] = 1;
      stack.push_back(nb);
    }
  }
  std::vector<std::array<int, 3>> out;
  for (int t = 0; t < int(tris_.size()); ++t) {
    const Tri& T = tris_[t];
    if (!T.alive || outside[t]) continue;
    out.push_back({T.v[0] - 3, T.v[1] - 3, T.v[2] - 3});
  }
  return out;
}

}  // namespace dcp
