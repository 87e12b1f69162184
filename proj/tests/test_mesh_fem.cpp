#include "doctest.h"

#include <sstream>

#include "dcp/analytic.hpp"
#include "dcp/errors.hpp"
#include "dcp/fem.hpp"
#include "dcp/mesh.hpp"

using namespace dcp;

TEST_CASE("closed cylinder mesh is a disk-like region of the right area") {
  const PhysicalConstants pc;
  const auto g = closed_cylinder(0.026, pc);
  MeshOptions o;
  o.h = 3e-3;
  const Mesh m = generate_mesh(g, o, pc.k());
  CHECK(m.euler_characteristic() == 1);
  CHECK(m.area() == doctest::Approx(g.body_radius * g.half_height()).epsilon(1e-9));
  CHECK(m.z_top == doctest::Approx(g.half_height()));

  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss);
  CHECK(r.nodes.size() == m.nodes.size());
  CHECK(r.tris.size() == m.tris.size());
  CHECK(r.area() == doctest::Approx(m.area()));
}

TEST_CASE("cutoff stack is truncated where TE11 has decayed") {
  const PhysicalConstants pc;
  auto g = closed_cylinder(0.026, pc);
  g.cutoff_sections = {{5e-3, 30e-3}};
  MeshOptions o;
  o.h = 3e-3;
  const Mesh m = generate_mesh(g, o, pc.k());
  CHECK(m.euler_characteristic() == 1);
  CHECK(m.z_top <= g.stack_top() + 1e-12);
  CHECK(m.z_top > g.half_height());
  CHECK(truncation_length(g, pc.k(), 60.0) > 0.0);
}

TEST_CASE("inconsistent geometry is rejected") {
  const PhysicalConstants pc;
  auto g = closed_cylinder(0.026, pc);
  g.cutoff_sections = {{30e-3, 10e-3}};
  g.aperture_radius = 30e-3;
  CHECK_FALSE(validate_geometry(g).empty());
}

TEST_CASE("coarse TE011 eigenmode and Q0") {
  const PhysicalConstants pc;
  const auto g = closed_cylinder(0.026, pc);
  MeshOptions o;
  o.h = 3e-3;
  o.feed_planes = {0.0};
  auto mesh = std::make_shared<const Mesh>(generate_mesh(g, o, pc.k()));
  FemOptions fo;
  fo.skin_depth = pc.skin_depth();
  auto eig = std::make_shared<const EigenMode>(solve_eigenmode(mesh, pc.k(), fo));
  CHECK(std::abs(eig->eigen_k / pc.k() - 1.0) < 1e-5);
  CHECK(eig->q0 == doctest::Approx(te011_q0(g.body_radius, g.body_height, pc.skin_depth())).epsilon(0.01));

  const auto sol = solve_loss_field(eig, 1, {0.0});
  CHECK(divergence_residual(sol, 0) < 1e-6);
  CHECK_THROWS_AS(solve_loss_field(eig, 1, {0.01}), Error);
}
