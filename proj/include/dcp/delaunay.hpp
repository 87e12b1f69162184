#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace dcp {

// Integer lattice point. Predicates are exact for |x|, |y| < 2^30.
struct IPoint {
  std::int64_t x = 0, y = 0;
  bool operator==(const IPoint&) const = default;
};

// > 0 when c lies left of a->b.
std::int64_t orient2d(const IPoint& a, const IPoint& b, const IPoint& c);
// > 0 when d lies inside the circumcircle of the counter-clockwise triangle abc.
int incircle(const IPoint& a, const IPoint& b, const IPoint& c, const IPoint& d);

// Incremental Bowyer-Watson triangulation on an integer lattice.
class Delaunay {
 public:
  Delaunay(std::int64_t xmin, std::int64_t ymin, std::int64_t xmax, std::int64_t ymax);

  // Returns the point index. Inserting an existing location returns the
  // index of the earlier point.
  int insert(const IPoint& p);

  bool has_edge(int a, int b) const;
  std::size_t point_count() const { return pts_.size() - 3; }
  const IPoint& point(int i) const { return pts_[i + 3]; }

  // Triangles not touching the bounding triangle, counter-clockwise, with
  // point indices as returned by insert().
  std::vector<std::array<int, 3>> triangles() const;

  // Triangles enclosed by the constraint edges: everything a flood fill from
  // the bounding triangle cannot reach without crossing a constraint.
  std::vector<std::array<int, 3>> triangles_inside(
      const std::vector<std::array<int, 2>>& constraints) const;

 private:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> n;  // neighbour across the edge opposite v[i]
    bool alive;
  };
  int locate(const IPoint& p);
  std::vector<IPoint> pts_;
  std::vector<Tri> tris_;
  std::vector<int> vert_tri_;  // one live triangle per point
  int last_ = 0;
  std::uint64_t walk_state_ = 0x9E3779B97F4A7C15ull;
};

}  // namespace dcp
