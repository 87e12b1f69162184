#include "dcp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "dcp/bessel.hpp"
#include "dcp/delaunay.hpp"
#include "dcp/errors.hpp"

namespace dcp {

namespace {

constexpr double kUnit = 1e-8;  // lattice spacing of the mesher (m)

using P2 = std::array<double, 2>;

P2 sub(P2 a, P2 b) { return {a[0] - b[0], a[1] - b[1]}; }
P2 add(P2 a, P2 b) { return {a[0] + b[0], a[1] + b[1]}; }
P2 mul(P2 a, double s) { return {a[0] * s, a[1] * s}; }
double dot(P2 a, P2 b) { return a[0] * b[0] + a[1] * b[1]; }
double cross(P2 a, P2 b) { return a[0] * b[1] - a[1] * b[0]; }
double norm(P2 a) { return std::hypot(a[0], a[1]); }

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

[[noreturn]] void degenerate(const std::string& what) {
  throw Error(ErrorCode::DegenerateGeometry, what);
}

// Closed outline as corner points with a tag per segment i -> i+1.
struct Outline {
  std::vector<P2> v;
  std::vector<int> tag;

  void push(P2 p, int t) {
    if (!v.empty() && norm(sub(p, v.back())) < 1e-12) {
      tag.back() = t;
      return;
    }
    v.push_back(p);
    tag.push_back(t);
  }
};

Outline build_outline(const CavityGeometry& g, double z_top_extension) {
  Outline o;
  const double R = g.body_radius, h2 = g.half_height();
  o.push({0.0, 0.0}, Midplane);
  o.push({R, 0.0}, Wall);
  if (g.mode_filter) {
    const auto& f = *g.mode_filter;
    const double zc = h2 + f.coupling_length;
    o.push({R, zc + f.length}, Wall);
    o.push({R - f.radial_width, zc + f.length}, Wall);
    o.push({R - f.radial_width, zc}, Wall);
    o.push({R - f.coupling_gap, zc}, Wall);
    o.push({R - f.coupling_gap, h2}, Wall);
  } else {
    o.push({R, h2}, Wall);
  }
  if (g.cutoff_sections.empty()) {
    o.push({0.0, h2}, Axis);
    return o;
  }
  double z = h2;
  const auto& cs = g.cutoff_sections;
  for (size_t i = 0; i < cs.size(); ++i) {
    double len = cs[i].length;
    if (i + 1 == cs.size()) len = std::max(len, z_top_extension);
    o.push({cs[i].radius, z}, Wall);
    z += len;
    const bool last = i + 1 == cs.size();
    o.push({cs[i].radius, z}, last ? FarExterior : Wall);
  }
  o.push({0.0, z}, Axis);
  return o;
}

// Splits the outermost vertical wall segment at each feed plane.
void insert_feeds(Outline& o, const std::vector<double>& planes, double width) {
  for (size_t k = 0; k < planes.size(); ++k) {
    const double h = std::abs(planes[k]);
    const int n = int(o.v.size());
    int best = -1;
    for (int i = 0; i < n; ++i) {
      const P2 a = o.v[i], b = o.v[(i + 1) % n];
      if (o.tag[i] != Wall || a[0] != b[0] || !(b[1] > a[1])) continue;
      if (h < a[1] || h > b[1]) continue;
      if (best < 0 || a[0] > o.v[best][0]) best = i;
    }
    if (best < 0) degenerate("feed plane " + std::to_string(h) + " m is not on a vertical wall");
    const P2 a = o.v[best], b = o.v[(best + 1) % n];
    const double y0 = std::max(a[1], h - 0.5 * width), y1 = std::min(b[1], h + 0.5 * width);
    if (!(y1 > y0)) degenerate("feed strip has zero length");
    std::vector<P2> nv;
    std::vector<int> nt;
    for (int i = 0; i < n; ++i) {
      nv.push_back(o.v[i]);
      if (i != best) {
        nt.push_back(o.tag[i]);
        continue;
      }
      if (y0 > a[1]) {
        nt.push_back(Wall);
        nv.push_back({a[0], y0});
      }
      nt.push_back(FeedBase + int(k));
      if (y1 < b[1]) {
        nv.push_back({a[0], y1});
        nt.push_back(Wall);
      }
    }
    o.v = nv;
    o.tag = nt;
  }
}

struct Piece {
  bool arc = false;
  P2 a, b;        // line endpoints
  P2 c;           // arc centre
  double r = 0, th0 = 0, th1 = 0;
  int n = 0;      // arc edges
  int tag = Wall;
};

struct Source {
  P2 c;
  double r;   // distance from c at which the source size applies
  double h;
};

struct SizeField {
  double h_max, grading;
  std::vector<Source> src;
  double operator()(P2 p) const {
    double h = h_max;
    for (const auto& s : src) {
      const double d = std::max(0.0, norm(sub(p, s.c)) - s.r);
      h = std::min(h, s.h + grading * d);
    }
    return h;
  }
};

std::vector<Piece> round_corners(const Outline& o, double rc, SizeField& size) {
  const int n = int(o.v.size());
  std::vector<char> reflex(n, 0);
  for (int i = 0; i < n; ++i) {
    const P2 din = sub(o.v[i], o.v[(i + n - 1) % n]);
    const P2 dout = sub(o.v[(i + 1) % n], o.v[i]);
    reflex[i] = cross(din, dout) < -1e-20;
  }
  std::vector<Piece> pieces;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const P2 a = o.v[i], b = o.v[j];
    const double len = norm(sub(b, a));
    const P2 d = mul(sub(b, a), 1.0 / len);
    const double cut = rc * (reflex[i] + reflex[j]);
    if (cut >= len - 1e-12) degenerate("corner arc of radius " + std::to_string(rc) + " m does not fit");
    Piece line;
    line.a = reflex[i] ? add(a, mul(d, rc)) : a;
    line.b = reflex[j] ? sub(b, mul(d, rc)) : b;
    line.tag = o.tag[i];
    pieces.push_back(line);
    if (reflex[j]) {
      const P2 dout = mul(sub(o.v[(j + 1) % n], b), 1.0 / norm(sub(o.v[(j + 1) % n], b)));
      Piece arc;
      arc.arc = true;
      arc.c = add(line.b, mul({d[1], -d[0]}, rc));  // centre to the right of travel
      arc.r = rc;
      const P2 t2 = add(b, mul(dout, rc));
      arc.th0 = std::atan2(line.b[1] - arc.c[1], line.b[0] - arc.c[0]);
      arc.th1 = std::atan2(t2[1] - arc.c[1], t2[0] - arc.c[0]);
      // Clockwise sweep.
      while (arc.th1 > arc.th0) arc.th1 -= 2 * pi;
      while (arc.th0 - arc.th1 > 2 * pi) arc.th1 += 2 * pi;
      const double sweep = arc.th0 - arc.th1;
      arc.n = std::max(8, int(std::ceil(4.0 * sweep)));
      arc.a = line.b;
      arc.b = t2;
      arc.tag = Wall;
      pieces.push_back(arc);
      const double chord = 2.0 * rc * std::sin(0.5 * sweep / arc.n);
      size.src.push_back({arc.c, rc, std::min(size.h_max, chord)});
    }
  }
  return pieces;
}

// Boundary points (closed loop) and per-segment tags.
void sample_boundary(const std::vector<Piece>& pieces, const SizeField& size, std::vector<P2>& pts,
                     std::vector<int>& tags) {
  for (const auto& pc : pieces) {
    if (pc.arc) {
      for (int i = 0; i < pc.n; ++i) {
        const double th = pc.th0 + (pc.th1 - pc.th0) * i / pc.n;
        pts.push_back(i == 0 ? pc.a : P2{pc.c[0] + pc.r * std::cos(th), pc.c[1] + pc.r * std::sin(th)});
        tags.push_back(pc.tag);
      }
      continue;
    }
    const double len = norm(sub(pc.b, pc.a));
    const P2 d = mul(sub(pc.b, pc.a), 1.0 / len);
    // Cumulative integral of 1/h along the line.
    std::vector<double> s{0.0}, cum{0.0};
    while (s.back() < len) {
      const double hs = size(add(pc.a, mul(d, s.back())));
      const double step = std::min(0.125 * hs, len - s.back());
      const double sm = s.back() + 0.5 * step;
      cum.push_back(cum.back() + step / size(add(pc.a, mul(d, sm))));
      s.push_back(s.back() + step);
      if (len - s.back() < 1e-15) s.back() = len;
    }
    const int nseg = std::max(1, int(std::lround(cum.back())));
    pts.push_back(pc.a);
    tags.push_back(pc.tag);
    size_t idx = 1;
    for (int k = 1; k < nseg; ++k) {
      const double target = cum.back() * k / nseg;
      while (idx + 1 < cum.size() && cum[idx] < target) ++idx;
      const double t = (target - cum[idx - 1]) / (cum[idx] - cum[idx - 1]);
      const double sv = s[idx - 1] + t * (s[idx] - s[idx - 1]);
      pts.push_back(add(pc.a, mul(d, sv)));
      tags.push_back(pc.tag);
    }
  }
}

struct Polygon {
  std::vector<P2> v;
  bool inside(P2 p) const {
    bool in = false;
    const size_t n = v.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
      if ((v[i][1] > p[1]) != (v[j][1] > p[1])) {
        const double x = (v[j][0] - v[i][0]) * (p[1] - v[i][1]) / (v[j][1] - v[i][1]) + v[i][0];
        if (p[0] < x) in = !in;
      }
    }
    return in;
  }
  double distance(P2 p) const {
    double best = 1e300;
    const size_t n = v.size();
    for (size_t i = 0; i < n; ++i) {
      const P2 a = v[i], b = v[(i + 1) % n];
      const P2 ab = sub(b, a);
      const double t = std::clamp(dot(sub(p, a), ab) / dot(ab, ab), 0.0, 1.0);
      best = std::min(best, norm(sub(p, add(a, mul(ab, t)))));
    }
    return best;
  }
};

void quadtree(const Polygon& poly, const SizeField& size, P2 lo, double side, std::vector<P2>& out) {
  const P2 c{lo[0] + 0.5 * side, lo[1] + 0.5 * side};
  const bool in = poly.inside(c);
  const double dist = poly.distance(c);
  if (!in && dist > 0.7072 * side) return;
  const double h = size(c);
  if (side > h) {
    const double s = 0.5 * side;
    quadtree(poly, size, lo, s, out);
    quadtree(poly, size, {lo[0] + s, lo[1]}, s, out);
    quadtree(poly, size, {lo[0], lo[1] + s}, s, out);
    quadtree(poly, size, {lo[0] + s, lo[1] + s}, s, out);
    return;
  }
  if (in && dist >= 0.5 * h) out.push_back(c);
}

IPoint to_lattice(P2 p) { return {std::llround(p[0] / kUnit), std::llround(p[1] / kUnit)}; }

std::uint64_t morton(std::int64_t x, std::int64_t y) {
  std::uint64_t r = 0;
  for (int b = 0; b < 31; ++b) {
    r |= ((std::uint64_t(x) >> b) & 1u) << (2 * b);
    r |= ((std::uint64_t(y) >> b) & 1u) << (2 * b + 1);
  }
  return r;
}

// Strictly inside the diametral circle of (a, b).
bool encroaches(const IPoint& a, const IPoint& b, const IPoint& p) {
  const __int128 d = __int128(a.x - p.x) * (b.x - p.x) + __int128(a.y - p.y) * (b.y - p.y);
  return d < 0;
}

}  // namespace

std::string tag_name(int tag) {
  switch (tag) {
    case Interior: return "interior";
    case Wall: return "wall";
    case Axis: return "axis";
    case Midplane: return "midplane";
    case FarExterior: return "far_exterior";
    default: return "feed_" + std::to_string(tag - FeedBase);
  }
}

int Mesh::boundary_edge_count() const {
  return int(std::count_if(edge_tag.begin(), edge_tag.end(), [](int t) { return t != Interior; }));
}

int Mesh::euler_characteristic() const {
  return int(nodes.size()) - int(edges.size()) + int(tris.size());
}

double Mesh::area() const {
  double a = 0.0;
  for (const auto& t : tris) {
    const P2 p0 = nodes[t[0]], p1 = nodes[t[1]], p2 = nodes[t[2]];
    a += 0.5 * cross(sub(p1, p0), sub(p2, p0));
  }
  return a;
}

double truncation_length(const CavityGeometry& g, double k, double db) {
  if (g.cutoff_sections.empty()) return 0.0;
  const double a = g.cutoff_sections.back().radius;
  const double kc = bessel_j1_prime_zero1() / a;  // TE11, the slowest decaying mode
  if (!(kc > k)) degenerate("final cutoff section propagates the TE11 mode");
  const double alpha = std::sqrt((kc - k) * (kc + k));
  return db * std::log(10.0) / 20.0 / alpha;
}

void build_edges(Mesh& m, const std::vector<std::array<int, 3>>& tagged_segments) {
  std::unordered_map<std::uint64_t, int> tag_of;
  for (const auto& s : tagged_segments) tag_of[edge_key(s[0], s[1])] = s[2];
  std::unordered_map<std::uint64_t, int> id;
  std::vector<int> count;
  m.edges.clear();
  m.edge_tag.clear();
  m.tri_edges.assign(m.tris.size(), {0, 0, 0});
  for (size_t t = 0; t < m.tris.size(); ++t) {
    std::array<int, 3> v = m.tris[t];
    std::sort(v.begin(), v.end());
    const std::array<std::array<int, 2>, 3> loc{{{v[0], v[1]}, {v[0], v[2]}, {v[1], v[2]}}};
    for (int e = 0; e < 3; ++e) {
      const auto k = edge_key(loc[e][0], loc[e][1]);
      auto it = id.find(k);
      if (it == id.end()) {
        it = id.emplace(k, int(m.edges.size())).first;
        m.edges.push_back(loc[e]);
        auto tg = tag_of.find(k);
        m.edge_tag.push_back(tg == tag_of.end() ? Interior : tg->second);
        count.push_back(0);
      }
      ++count[it->second];
      m.tri_edges[t][e] = it->second;
    }
  }
  for (size_t e = 0; e < m.edges.size(); ++e) {
    if (count[e] > 2) degenerate("non-manifold edge in mesh");
    if (count[e] == 1 && m.edge_tag[e] == Interior) degenerate("untagged boundary edge in mesh");
    if (count[e] == 2 && m.edge_tag[e] != Interior) degenerate("tagged edge inside the mesh");
  }
}

Mesh generate_mesh(const CavityGeometry& g, const MeshOptions& opt, double k) {
  if (!(opt.h > 0)) degenerate("mesh size must be positive");
  for (const auto& v : validate_geometry(g)) degenerate(v.field + ": " + v.rule);
  for (const auto& s : g.cutoff_sections)
    if (s.radius >= g.body_radius) degenerate("cutoff radius exceeds body radius");
  if (g.mode_filter && !g.cutoff_sections.empty() &&
      g.body_radius - g.mode_filter->coupling_gap <= g.cutoff_sections.front().radius)
    degenerate("mode filter slot overlaps the first cutoff section");

  const double ext = truncation_length(g, k, opt.exterior_db);
  Outline o = build_outline(g, ext);
  insert_feeds(o, opt.feed_planes, opt.feed_width);

  SizeField size{opt.h, opt.grading, {}};
  const auto pieces = round_corners(o, g.corner_radius, size);
  // Feed strip ends.
  for (size_t i = 0; i < o.v.size(); ++i) {
    const int tprev = o.tag[(i + o.v.size() - 1) % o.v.size()];
    if (o.tag[i] >= FeedBase || tprev >= FeedBase)
      size.src.push_back({o.v[i], 0.0, std::min(opt.h, 0.25 * opt.feed_width)});
  }

  std::vector<P2> bpts;
  std::vector<int> btag;
  sample_boundary(pieces, size, bpts, btag);
  Polygon poly{bpts};

  double xmax = 0, ymax = 0;
  for (const auto& p : bpts) {
    xmax = std::max(xmax, p[0]);
    ymax = std::max(ymax, p[1]);
  }
  std::vector<P2> inner;
  quadtree(poly, size, {0.0, 0.0}, std::max(xmax, ymax) * (1 + 1e-9), inner);

  // Lattice points; boundary first.
  std::vector<IPoint> pts;
  std::vector<char> is_boundary;
  for (const auto& p : bpts) {
    pts.push_back(to_lattice(p));
    is_boundary.push_back(1);
  }
  struct Seg {
    int a, b, tag;
  };
  std::vector<Seg> segs;
  for (size_t i = 0; i < bpts.size(); ++i) segs.push_back({int(i), int((i + 1) % bpts.size()), btag[i]});
  for (size_t i = 0; i < segs.size(); ++i)
    if (pts[segs[i].a] == pts[segs[i].b]) degenerate("boundary edge shorter than the lattice spacing");
  for (const auto& p : inner) {
    pts.push_back(to_lattice(p));
    is_boundary.push_back(0);
  }

  // Remove interior points inside diametral circles; split segments
  // encroached by boundary points.
  std::vector<char> removed(pts.size(), 0);
  for (int pass = 0; pass < 64; ++pass) {
    bool changed = false;
    std::vector<Seg> next;
    for (const auto& s : segs) {
      const IPoint A = pts[s.a], B = pts[s.b];
      const std::int64_t cx = (A.x + B.x) / 2, cy = (A.y + B.y) / 2;
      const double r = 0.5 * std::hypot(double(A.x - B.x), double(A.y - B.y)) + 1;
      bool split = false;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (removed[i] || int(i) == s.a || int(i) == s.b) continue;
        if (std::abs(pts[i].x - cx) > r || std::abs(pts[i].y - cy) > r) continue;
        if (!encroaches(A, B, pts[i])) continue;
        if (is_boundary[i]) {
          split = true;
        } else {
          removed[i] = 1;
          changed = true;
        }
      }
      if (split) {
        const IPoint M{(A.x + B.x) / 2, (A.y + B.y) / 2};
        if (M == A || M == B) degenerate("cannot resolve boundary encroachment");
        const int mi = int(pts.size());
        pts.push_back(M);
        is_boundary.push_back(1);
        removed.push_back(0);
        next.push_back({s.a, mi, s.tag});
        next.push_back({mi, s.b, s.tag});
        changed = true;
      } else {
        next.push_back(s);
      }
    }
    segs.swap(next);
    if (!changed) break;
    if (pass == 63) degenerate("boundary refinement did not converge");
  }

  std::vector<int> order;
  std::int64_t lx = 0, ly = 0, hx = 0, hy = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (removed[i]) continue;
    order.push_back(int(i));
    lx = std::min(lx, pts[i].x);
    ly = std::min(ly, pts[i].y);
    hx = std::max(hx, pts[i].x);
    hy = std::max(hy, pts[i].y);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return morton(pts[a].x - lx, pts[a].y - ly) < morton(pts[b].x - lx, pts[b].y - ly);
  });
  Delaunay dt(lx, ly, hx, hy);
  std::vector<int> dt_index(pts.size(), -1);
  for (const int i : order) dt_index[i] = dt.insert(pts[i]);

  // Recover any boundary segment that is not a Delaunay edge.
  for (int pass = 0;; ++pass) {
    if (pass > 64) degenerate("boundary recovery did not converge");
    std::vector<Seg> next;
    bool changed = false;
    for (const auto& s : segs) {
      if (dt.has_edge(dt_index[s.a], dt_index[s.b])) {
        next.push_back(s);
        continue;
      }
      const IPoint A = pts[s.a], B = pts[s.b];
      const IPoint M{(A.x + B.x) / 2, (A.y + B.y) / 2};
      if (M == A || M == B) degenerate("cannot recover boundary edge");
      const int mi = int(pts.size());
      pts.push_back(M);
      dt_index.push_back(dt.insert(M));
      next.push_back({s.a, mi, s.tag});
      next.push_back({mi, s.b, s.tag});
      changed = true;
    }
    segs.swap(next);
    if (!changed) break;
  }

  std::vector<std::array<int, 2>> cons;
  for (const auto& s : segs) cons.push_back({dt_index[s.a], dt_index[s.b]});
  const auto tris = dt.triangles_inside(cons);

  Mesh mesh;
  mesh.element_order = opt.element_order;
  std::vector<int> remap(dt.point_count(), -1);
  for (const auto& t : tris) {
    std::array<int, 3> nt;
    for (int i = 0; i < 3; ++i) {
      int& r = remap[t[i]];
      if (r < 0) {
        r = int(mesh.nodes.size());
        const IPoint& q = dt.point(t[i]);
        mesh.nodes.push_back({double(q.x) * kUnit, double(q.y) * kUnit});
      }
      nt[i] = r;
    }
    mesh.tris.push_back(nt);
  }
  std::vector<std::array<int, 3>> tagged;
  for (const auto& s : segs) {
    const int a = remap[dt_index[s.a]], b = remap[dt_index[s.b]];
    if (a < 0 || b < 0) degenerate("boundary point lost during triangulation");
    tagged.push_back({a, b, s.tag});
  }
  build_edges(mesh, tagged);
  mesh.z_top = 0.0;
  for (const auto& p : mesh.nodes) mesh.z_top = std::max(mesh.z_top, p[1]);
  return mesh;
}

void write_mesh(std::ostream& os, const Mesh& m) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "dcp-mesh 1\n";
  ss << "order " << m.element_order << "\n";
  ss << "z_top " << m.z_top << "\n";
  ss << "nodes " << m.nodes.size() << "\n";
  for (const auto& p : m.nodes) ss << p[0] << ' ' << p[1] << '\n';
  ss << "triangles " << m.tris.size() << "\n";
  for (const auto& t : m.tris) ss << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  ss << "boundary " << m.boundary_edge_count() << "\n";
  for (size_t e = 0; e < m.edges.size(); ++e)
    if (m.edge_tag[e] != Interior)
      ss << m.edges[e][0] << ' ' << m.edges[e][1] << ' ' << tag_name(m.edge_tag[e]) << '\n';
  os << ss.str();
}

Mesh read_mesh(std::istream& is) {
  auto fail = [](const std::string& w) { throw Error(ErrorCode::Format, "mesh file: " + w); };
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "dcp-mesh" || version != 1) fail("bad header");
  Mesh m;
  size_t n = 0;
  if (!(is >> word >> m.element_order) || word != "order") fail("missing order");
  if (!(is >> word >> m.z_top) || word != "z_top") fail("missing z_top");
  if (!(is >> word >> n) || word != "nodes") fail("missing nodes");
  m.nodes.resize(n);
  for (auto& p : m.nodes)
    if (!(is >> p[0] >> p[1])) fail("truncated nodes");
  if (!(is >> word >> n) || word != "triangles") fail("missing triangles");
  m.tris.resize(n);
  for (auto& t : m.tris) {
    if (!(is >> t[0] >> t[1] >> t[2])) fail("truncated triangles");
    for (int v : t)
      if (v < 0 || size_t(v) >= m.nodes.size()) fail("node index out of range");
  }
  if (!(is >> word >> n) || word != "boundary") fail("missing boundary");
  std::vector<std::array<int, 3>> tagged(n);
  for (auto& s : tagged) {
    std::string name;
    if (!(is >> s[0] >> s[1] >> name)) fail("truncated boundary");
    if (name == "wall") s[2] = Wall;
    else if (name == "axis") s[2] = Axis;
    else if (name == "midplane") s[2] = Midplane;
    else if (name == "far_exterior") s[2] = FarExterior;
    else if (name.rfind("feed_", 0) == 0) s[2] = FeedBase + std::stoi(name.substr(5));
    else fail("unknown tag '" + name + "'");
  }
  try {
    build_edges(m, tagged);
  } catch (const Error& e) {
    fail(e.what());
  }
  return m;
}

}  // namespace dcp
