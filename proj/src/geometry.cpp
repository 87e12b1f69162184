#include "dcp/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dcp/bessel.hpp"
#include "dcp/errors.hpp"
#include "dcp/hash.hpp"

namespace dcp {

double CavityGeometry::stack_top() const {
  double z = half_height();
  for (const auto& s : cutoff_sections) z += s.length;
  return z;
}

std::vector<Violation> validate_geometry(const CavityGeometry& g) {
  std::vector<Violation> out;
  auto add = [&](const char* f, const char* r) { out.push_back({f, r}); };
  if (!(g.body_radius > 0)) add("geometry.body_radius", "body_radius must be positive");
  if (!(g.body_height > 0)) add("geometry.body_height", "body_height must be positive");
  if (!(g.aperture_radius > 0)) add("geometry.aperture_radius", "aperture_radius must be positive");
  if (g.aperture_radius >= g.body_radius)
    add("geometry.aperture_radius", "aperture_radius exceeds body_radius");
  if (!(g.corner_radius > 0)) add("geometry.corner_radius", "corner_radius must be positive");
  if (g.aperture_offset < 0) add("geometry.aperture_offset", "aperture_offset must be non-negative");
  double stack = 0.0;
  for (size_t i = 0; i < g.cutoff_sections.size(); ++i) {
    const auto& s = g.cutoff_sections[i];
    if (!(s.radius > 0)) add("geometry.cutoff_sections.radius", "cutoff radius must be positive");
    if (s.radius >= g.body_radius)
      add("geometry.cutoff_sections.radius", "cutoff radius must be smaller than body_radius");
    if (!(s.length > 0)) add("geometry.cutoff_sections.length", "cutoff length must be positive");
    stack += s.length;
  }
  if (!g.cutoff_sections.empty()) {
    if (g.aperture_offset > stack)
      add("geometry.aperture_offset", "aperture_offset lies beyond the cutoff stack");
    double rmin = g.cutoff_sections.front().radius;
    for (const auto& s : g.cutoff_sections) rmin = std::min(rmin, s.radius);
    if (g.aperture_radius > rmin + 1e-12)
      add("geometry.aperture_radius", "aperture_radius exceeds the narrowest cutoff radius");
  }
  if (g.mode_filter) {
    const auto& m = *g.mode_filter;
    if (!(m.radial_width > 0) || !(m.length > 0) || !(m.coupling_gap > 0) || m.coupling_length < 0)
      add("geometry.mode_filter", "mode_filter dimensions must be positive");
    if (m.radial_width > g.body_radius)
      add("geometry.mode_filter.radial_width", "mode_filter wider than body radius");
    if (m.coupling_gap > m.radial_width)
      add("geometry.mode_filter.coupling_gap", "coupling_gap exceeds radial_width");
    if (!g.cutoff_sections.empty() &&
        g.body_radius - m.radial_width <= g.cutoff_sections.front().radius)
      add("geometry.mode_filter.radial_width", "mode_filter overlaps the first cutoff section");
  }
  for (const auto& f : g.feed_sites) {
    if (std::abs(f.z) > g.stack_top())
      add("geometry.feed_sites.z", "feed site lies outside the cavity");
  }
  return out;
}

double te011_resonant_height(double R, double f, const PhysicalConstants& pc) {
  const double k = 2.0 * pi * f / pc.c;
  const double gamma1 = bessel_j1_zero1() / R;
  if (!(gamma1 < k)) {
    throw Error(ErrorCode::BelowCutoff,
                "radius below TE01 cutoff: x'11/R >= k (R = " + std::to_string(R) + " m)");
  }
  const double k1 = std::sqrt((k - gamma1) * (k + gamma1));
  return pi / k1;
}

CavityGeometry closed_cylinder(double R, const PhysicalConstants& pc) {
  CavityGeometry g;
  g.body_radius = R;
  g.body_height = te011_resonant_height(R, pc.f_atom, pc);
  g.aperture_radius = std::min(0.005, 0.5 * R);
  return g;
}

std::string geometry_hash(const CavityGeometry& g) {
  std::ostringstream s;
  s.precision(17);
  s << g.body_radius << ' ' << g.body_height << ' ' << g.aperture_radius << ' '
    << g.aperture_offset << ' ' << g.corner_radius;
  for (const auto& c : g.cutoff_sections) s << " c" << c.radius << ',' << c.length;
  if (g.mode_filter)
    s << " mf" << g.mode_filter->radial_width << ',' << g.mode_filter->length << ','
      << g.mode_filter->coupling_gap << ',' << g.mode_filter->coupling_length;
  for (const auto& f : g.feed_sites) s << " f" << f.z << ',' << f.phi;
  return hex64(fnv1a64(s.str()));
}

}  // namespace dcp
