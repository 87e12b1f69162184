#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "dcp/geometry.hpp"

namespace dcp {

// Boundary labels. Feed k is stored as FeedBase + k.
enum BoundaryTag : int {
  Interior = 0,
  Wall = 1,
  Axis = 2,
  Midplane = 3,
  FarExterior = 4,
  FeedBase = 10,
};

std::string tag_name(int tag);

// Triangulation of the upper half (z >= 0) of the (rho, z) cross-section.
struct Mesh {
  std::vector<std::array<double, 2>> nodes;  // (rho, z) in m
  std::vector<std::array<int, 3>> tris;      // counter-clockwise
  std::vector<std::array<int, 2>> edges;     // a < b
  std::vector<int> edge_tag;
  // Edge ids of (v0 v1, v0 v2, v1 v2) with the triangle's vertices sorted by index.
  std::vector<std::array<int, 3>> tri_edges;
  int element_order = 3;
  double z_top = 0.0;  // truncation plane

  int boundary_edge_count() const;
  int euler_characteristic() const;  // V - E + F
  double area() const;
};

struct MeshOptions {
  double h = 1.5e-3;
  double grading = 0.25;     // size growth per unit distance from a corner
  double exterior_db = 60.0;
  int element_order = 3;
  // Feed strips on the body sidewall, |z| centred at these heights.
  std::vector<double> feed_planes;
  double feed_width = 1e-3;
};

// Length the last cutoff section must have so that the slowest evanescent
// mode (TE11) decays by `db`.
double truncation_length(const CavityGeometry& g, double k, double db);

// Throws Error(DegenerateGeometry) when the cross-section is inconsistent or a
// corner arc does not fit.
Mesh generate_mesh(const CavityGeometry& g, const MeshOptions& opt, double k);

// Rebuilds edges/tri_edges from tris and a boundary tag lookup.
void build_edges(Mesh& m, const std::vector<std::array<int, 3>>& tagged_segments);

// Plain text format, see docs/mesh_format.md.
void write_mesh(std::ostream& os, const Mesh& m);
Mesh read_mesh(std::istream& is);

}  // namespace dcp
