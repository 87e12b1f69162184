#include "doctest.h"

#include <complex>

#include "dcp/constants.hpp"
#include "dcp/errors.hpp"
#include "dcp/feeds.hpp"

using namespace dcp;

TEST_CASE("feed weights sum to one") {
  for (const char* name : {"single_weak", "alternate_left", "alternate_right", "two_balanced", "ring_waveguide"}) {
    const FeedNetwork n = preset_network(name, {0.01, -0.01});
    std::complex<double> s = 0.0;
    for (auto c : feed_weights(n)) s += c;
    CHECK(std::abs(s - 1.0) < 1e-14);
  }
  FeedNetwork n = case_unequal_feeds_equal_losses(30000, 0.2, 7500);
  std::complex<double> s = 0.0;
  for (auto c : feed_weights(n)) s += c;
  CHECK(std::abs(s - 1.0) < 1e-14);
}

TEST_CASE("network factor of two opposed feeds") {
  const double q0 = 30000, q1 = 9000, q2 = 13000, xi1 = 0.7;
  FeedNetwork n;
  n.Q0 = q0;
  n.feeds = {{0.0, 0.0, xi1, 0.0, q1}, {pi, 0.0, 1 - xi1, 0.0, q2}};
  const double qq = q0 / n.q_loaded();
  for (int m = 0; m <= 4; ++m) {
    const double sign = m % 2 ? -1.0 : 1.0;
    const double expect = xi1 * qq - q0 / q1 + sign * ((1 - xi1) * qq - q0 / q2);
    CHECK(network_factor(n, m).real() == doctest::Approx(expect).epsilon(1e-13));
    CHECK(std::abs(network_factor(n, m).imag()) < 1e-13);
  }
}

TEST_CASE("presets") {
  CHECK(preset_network("ring_waveguide").feeds.size() == 4);
  CHECK(preset_network("two_balanced", {0.01, -0.01}).feeds.size() == 4);
  CHECK(network_factor(preset_network("alternate_right"), 1).real() == doctest::Approx(-1.0));
  CHECK(std::abs(network_factor(preset_network("two_balanced"), 1)) < 1e-15);
  CHECK_THROWS_AS(preset_network("three_ring"), Error);
}

TEST_CASE("azimuthal width factor") {
  CHECK(azimuthal_width_factor(0, 0.3) == doctest::Approx(1.0));
  CHECK(azimuthal_width_factor(2, 0.0) == doctest::Approx(1.0));
  CHECK(azimuthal_width_factor(2, 0.3) == doctest::Approx(std::sin(0.3) / 0.3));
}

TEST_CASE("observable scale") {
  const std::complex<double> c(0.3, -2.0);
  CHECK(observable_scale(c, 0.0) == doctest::Approx(0.3));
  CHECK(observable_scale(c, 0.5) == doctest::Approx(0.3 - 1.0));
  CHECK(alpha(2.0, 4.0) == doctest::Approx(0.5));
}
