#include "doctest.h"

#include <charconv>
#include <cmath>
#include <sstream>

#include "dcp/output.hpp"

using namespace dcp;

TEST_CASE("golden headers") {
  CHECK(std::string(kCurveHeader) == "b,m,dp_mean,dp_stderr,slope,dnu_hz,dnu_fractional,singular_flag");
  CHECK(std::string(kTemplateHeader) == "b,p,dphi_long,dp_template");
  std::ostringstream os;
  PhaseMap pm;
  write_phase_csv(os, pm);
  CHECK(os.str() == "rho,z,m,h0z,gz,phase\n");
}

TEST_CASE("numbers round trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23}) {
    const std::string s = format_number(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("curve output") {
  DcpCurve c;
  c.label = "II0";
  c.points.push_back({1.0, 0, 1e-6, 1e-8, -1.5, 6.6e-7, 7e-17, false});
  c.points.push_back({2.0, 0, 1e-6, 1e-8, 0.0, NAN, NAN, true});
  std::ostringstream os;
  write_curve_csv(os, c);
  CHECK(os.str() ==
        "b,m,dp_mean,dp_stderr,slope,dnu_hz,dnu_fractional,singular_flag\n"
        "1,0,1e-06,1e-08,-1.5,6.6e-07,7e-17,0\n"
        "2,0,1e-06,1e-08,0,nan,nan,1\n");
  const auto j = curve_json(c);
  CHECK(j["points"][1]["dnu_hz"].is_null());
  CHECK(j["points"][0]["dnu_hz"] == 6.6e-7);
}

TEST_CASE("template rows") {
  const auto rows = template_rows({1, 3}, {0.5, 1.0});
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].p == 1);
  CHECK(rows[1].dp == doctest::Approx(0.5));
  CHECK(rows[2].p == 3);
}
