#include "doctest.h"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>

#include "dcp/bessel.hpp"

using namespace dcp;

TEST_CASE("J0 and J1 against boost") {
  double err = 0.0;
  for (double x = -60.0; x <= 60.0; x += 0.0137) {
    err = std::max(err, std::abs(bessel_j0(x) - boost::math::cyl_bessel_j(0, x)));
    err = std::max(err, std::abs(bessel_j1(x) - boost::math::cyl_bessel_j(1, x)));
  }
  CHECK(err < 1e-13);
  CHECK(bessel_j1_prime(0.0) == doctest::Approx(0.5));
  CHECK(bessel_j1_prime(2.3) == doctest::Approx(boost::math::cyl_bessel_j_prime(1, 2.3)).epsilon(1e-12));
}

TEST_CASE("zeros") {
  CHECK(bessel_j0_zero1() == doctest::Approx(2.404825557695773).epsilon(1e-14));
  CHECK(bessel_j1_zero1() == doctest::Approx(3.831705970207512).epsilon(1e-14));
  CHECK(bessel_j1_prime_zero1() == doctest::Approx(1.841183781340659).epsilon(1e-14));
  CHECK(std::abs(bessel_j1(bessel_j1_zero1())) < 1e-14);
  CHECK(std::abs(bessel_j1_prime(bessel_j1_prime_zero1())) < 1e-14);
}
