#include "doctest.h"

#include <cmath>
#include <memory>

#include "dcp/bessel.hpp"
#include "dcp/errors.hpp"
#include "dcp/response.hpp"

using namespace dcp;

namespace {

ResponseContext closed_context(const PhaseExpansion& pe) {
  const PhysicalConstants pc;
  const auto g = closed_cylinder(0.026, pc);
  ResponseContext ctx;
  ctx.field = std::make_shared<AnalyticFieldModel>(standing_wave(g), pe);
  ctx.r_a = 5e-3;
  ctx.eta = normalize_amplitude(ctx.r_a, pc.k());
  ctx.delta_nu = 1.0;
  return ctx;
}

}  // namespace

TEST_CASE("p = 1 template is a pure sine") {
  for (double b : {0.0, 0.3, 1.0, 2.7, 7.5}) {
    const auto t = longitudinal_template(b, 1);
    CHECK(t.dphi_long == doctest::Approx(std::sin(b * pi / 2)).epsilon(1e-12));
    CHECK(t.dp == doctest::Approx(0.5 * std::pow(std::sin(b * pi / 2), 2)).epsilon(1e-12));
  }
}

TEST_CASE("tipping angle on axis follows the normalization") {
  const auto ctx = closed_context(table1_dataset());
  CHECK(total_tipping(ctx, 1.0, 0.0) == doctest::Approx(ctx.eta * pi / 2).epsilon(1e-9));
  const double k = ctx.field->wavenumber();
  CHECK(total_tipping(ctx, 2.0, 3e-3) ==
        doctest::Approx(2.0 * ctx.eta * pi / 2 * bessel_j0(k * 3e-3)).epsilon(1e-9));
}

TEST_CASE("zero coefficients give no effective phase for m >= 1") {
  PhaseExpansion pe = table1_dataset();
  for (auto& row : pe.phi) row = {0.0, 0.0};
  const auto ctx = closed_context(pe);
  for (int m = 1; m <= 2; ++m) CHECK(std::abs(effective_phase(ctx, m, 1.0, 3e-3)) < 1e-15);
}

TEST_CASE("pair response") {
  CHECK(delta_p_pair_values(0, 1.0, 1.0, 0.1, 0.1, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(delta_p_pair_values(1, pi / 2, pi / 2, 1e-4, 0.0, 0.0, 0.0) == doctest::Approx(0.5e-4));
  CHECK(ramsey_slope_values(1.0, pi / 2, pi / 2) == doctest::Approx(-pi / 2));
}

TEST_CASE("frequency shift flags a flat fringe") {
  const auto f = frequency_shift(1e-6, -pi / 2, 9.19e9);
  CHECK_FALSE(f.singular);
  CHECK(f.dnu == doctest::Approx(1e-6 / (pi / 2)));
  const auto s = frequency_shift(1e-6, 0.0, 9.19e9);
  CHECK(s.singular);
  CHECK(std::isnan(s.dnu));
}

TEST_CASE("amplitude normalization needs a bracket") {
  CHECK(normalize_amplitude(5e-3, 192.66) == doctest::Approx(1.120).epsilon(0.002));
  CHECK_THROWS_AS(normalize_amplitude(0.0, 192.66), Error);
}
