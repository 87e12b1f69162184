#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcp/constants.hpp"

namespace dcp {

struct CutoffSection {
  double radius = 0.0;
  double length = 0.0;
};

// Annular extension of each endcap at the outer radius: an annulus of
// radial width `radial_width` (spanning [R - radial_width, R]) and height
// `length`, joined to the body through a slot of radial width
// `coupling_gap` and height `coupling_length`.
struct ModeFilter {
  double radial_width = 0.0;
  double length = 0.0;
  double coupling_gap = 0.0;
  double coupling_length = 0.0;
};

struct FeedSite {
  double z = 0.0;
  double phi = 0.0;
};

// Axisymmetric cavity, mirror symmetric about z = 0. Sections are listed from
// the endcap outward and repeated on both sides.
struct CavityGeometry {
  double body_radius = 0.026;
  double body_height = 0.0;
  std::vector<CutoffSection> cutoff_sections;
  double aperture_radius = 0.005;
  double aperture_offset = 0.0;
  double corner_radius = 20e-6;
  std::optional<ModeFilter> mode_filter;
  std::vector<FeedSite> feed_sites;

  bool closed() const { return cutoff_sections.empty(); }
  double half_height() const { return 0.5 * body_height; }
  // z of the far end of the cutoff stack (or d/2 for a closed cavity).
  double stack_top() const;
};

struct Violation {
  std::string field;
  std::string rule;
};

std::vector<Violation> validate_geometry(const CavityGeometry& g);

// Height d at which a closed cylinder of radius R resonates in TE011 at f.
// Throws Error(BelowCutoff) when x'11/R >= k.
double te011_resonant_height(double R, double f, const PhysicalConstants& pc = {});

// Closed cylinder geometry with resonant height for the given radius.
CavityGeometry closed_cylinder(double R, const PhysicalConstants& pc = {});

// Stable text hash of the geometry (hex), used in manifests and field maps.
std::string geometry_hash(const CavityGeometry& g);

}  // namespace dcp
