#include "doctest.h"

#include "dcp/config.hpp"
#include "dcp/errors.hpp"
#include "dcp/units.hpp"

using namespace dcp;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({"geometry": {"body_radius": "26 mm"}})");
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::SolveFailed;
}

}  // namespace

TEST_CASE("quantities parse into SI") {
  CHECK(parse_quantity("26 mm", Dim::Length) == doctest::Approx(0.026));
  CHECK(parse_quantity("20 um", Dim::Length) == doctest::Approx(20e-6));
  CHECK(parse_quantity("9.1926 GHz", Dim::Frequency) == doctest::Approx(9.1926e9));
  CHECK(parse_quantity("1 mrad", Dim::Angle) == doctest::Approx(1e-3));
  CHECK(parse_quantity("0.13", Dim::Time) == doctest::Approx(0.13));
  CHECK(code_of([] { parse_quantity("3 GHz", Dim::Length); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_quantity("3 furlongs", Dim::Length); }) == ErrorCode::Config);
}

TEST_CASE("grids") {
  const auto g = parse_grid(json("0:0.5:2"));
  REQUIRE(g.size() == 5);
  CHECK(g.back() == doctest::Approx(2.0));
  CHECK(parse_grid(json::array({1, 3})).size() == 2);
  CHECK(parse_grid(json(4.0)) == std::vector<double>{4.0});
  CHECK(code_of([] { parse_grid(json("2:0.5:1")); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_grid(json("a:b:c")); }) == ErrorCode::Config);
}

TEST_CASE("dotted overrides") {
  json doc = minimal();
  apply_override(doc, "ensemble.alpha_tilt=\"1 mrad\"");
  apply_override(doc, "run.seed=42");
  apply_override(doc, "solver.field_model=fem");
  CHECK(doc["ensemble"]["alpha_tilt"] == "1 mrad");
  CHECK(doc["run"]["seed"] == 42);
  CHECK(doc["solver"]["field_model"] == "fem");
  CHECK(code_of([&] { apply_override(doc, "noequals"); }) == ErrorCode::Config);

  const RunConfig cfg = parse_config(doc);
  CHECK(cfg.ensemble.alpha_tilt == doctest::Approx(1e-3));
  CHECK(cfg.seed == 42);
  CHECK(cfg.solver.field_model == FieldModelKind::Fem);
}

TEST_CASE("config parsing and validation") {
  const RunConfig cfg = parse_config(minimal());
  CHECK(cfg.geometry.body_height == doctest::Approx(te011_resonant_height(0.026, cfg.constants.f_atom)));
  CHECK(validate_config(cfg).empty());
  CHECK(cfg.amplitude_grid.front() == doctest::Approx(0.25));

  json bad = minimal();
  bad["geometry"]["colour"] = "red";
  CHECK(code_of([&] { parse_config(bad); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_config(json::object()); }) == ErrorCode::Config);

  json neg = minimal();
  neg["geometry"]["body_radius"] = "-1 mm";
  neg["run"]["fourier_indices"] = {0, 9};
  const auto v = validate_config(parse_config(neg));
  CHECK(v.size() >= 2);
  CHECK(format_violations(v).find("run.fourier_indices") != std::string::npos);
}

TEST_CASE("config hash follows the overridden document") {
  json a = minimal(), b = minimal();
  CHECK(config_hash(parse_config(a)) == config_hash(parse_config(b)));
  apply_override(b, "run.seed=2");
  CHECK(config_hash(parse_config(a)) != config_hash(parse_config(b)));
}

TEST_CASE("TE011 height below cutoff") {
  CHECK(code_of([] { te011_resonant_height(0.015, 9.192631770e9); }) == ErrorCode::BelowCutoff);
}
