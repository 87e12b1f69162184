#include "doctest.h"

#include <memory>

#include "dcp/ensemble.hpp"
#include "dcp/errors.hpp"

using namespace dcp;

namespace {

struct Fixture {
  PhysicalConstants pc;
  ResponseContext ctx;
  ProfileCache cache;
  Fixture() {
    const auto g = closed_cylinder(0.026, pc);
    ctx.field = std::make_shared<AnalyticFieldModel>(standing_wave(g), table1_dataset(pc));
    ctx.r_a = 5e-3;
    ctx.eta = normalize_amplitude(ctx.r_a, pc.k());
    ctx.delta_nu = 1.0;
    cache = build_profiles(*ctx.field, {0, 1, 2}, ctx.r_a, 65);
    ctx.phi0 = calibrate_phi0(ctx, cache);
  }
};

}  // namespace

TEST_CASE("trajectory sets do not depend on the thread count") {
  const PhysicalConstants pc;
  const auto cfg = ensemble_preset("II1");
  const auto a = sample_trajectories(cfg, pc, 11, 20000, 1);
  const auto b = sample_trajectories(cfg, pc, 11, 20000, 5);
  REQUIRE(a.items.size() == b.items.size());
  CHECK(a.sampled == b.sampled);
  bool same = true;
  for (size_t i = 0; i < a.items.size(); ++i)
    same = same && a.items[i].x1 == b.items[i].x1 && a.items[i].yd == b.items[i].yd && a.items[i].w == b.items[i].w;
  CHECK(same);
  CHECK(a.survival() > 0.0);
  CHECK(a.survival() <= 1.0);
  const auto c = sample_trajectories(cfg, pc, 12, 20000, 1);
  CHECK(c.items.front().x1 != a.items.front().x1);
}

TEST_CASE("a hot cloud through a pinhole is empty") {
  const PhysicalConstants pc;
  auto cfg = ensemble_preset("II0");
  cfg.temperature = 10.0;
  cfg.r_a = 1e-4;
  CHECK_THROWS_AS(sample_trajectories(cfg, pc, 1, 2000, 1), Error);
}

TEST_CASE("presets") {
  CHECK(ensemble_preset_names().size() == 11);
  CHECK(ensemble_preset("I").launch_mode == LaunchMode::CenterOnDown);
  CHECK_THROWS_AS(ensemble_preset("V"), Error);
}

TEST_CASE("centered delta ensemble has no m >= 1 response") {
  Fixture f;
  const auto t = build_table(f.ctx, f.cache, 1.0);
  CHECK(std::abs(delta_function_average(0.0, 0.0, t, 1)) < 1e-15);
  CHECK(std::abs(delta_function_average(0.0, 0.0, t, 2)) < 1e-15);
  // The m = 1 response is odd in the offset direction.
  CHECK(delta_function_average(2e-3, pi, t, 1) == doctest::Approx(-delta_function_average(2e-3, 0.0, t, 1)));
}

TEST_CASE("uniform densities cancel") {
  Fixture f;
  const auto t = build_table(f.ctx, f.cache, 2.0);
  for (int m : {0, 1, 2})
    CHECK(std::abs(uncorrelated_average(uniform_density(), uniform_density(), t, m)) < 1e-14);
}
