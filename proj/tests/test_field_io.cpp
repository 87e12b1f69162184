#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <memory>

#include "dcp/errors.hpp"
#include "dcp/field_io.hpp"

using namespace dcp;

namespace {

FieldMap analytic_map() {
  const PhysicalConstants pc;
  const auto g = closed_cylinder(0.026, pc);
  AnalyticFieldModel model(standing_wave(g), table1_dataset(pc));
  std::vector<double> rho, z;
  for (int i = 0; i < 6; ++i) rho.push_back(1e-3 * i);
  for (int j = -4; j <= 4; ++j) z.push_back(2e-3 * j);
  FieldMap m = sample_field_map(model, {0, 1}, rho, z);
  m.source = "analytic";
  return m;
}

}  // namespace

TEST_CASE("field map round trip") {
  const FieldMap a = analytic_map();
  REQUIRE(a.size() == 54);
  REQUIRE(a.find(1) != nullptr);
  CHECK(a.find(1)->arrays.count("g_z") == 1);
  CHECK(a.find(1)->arrays.count("f_phi") == 0);

  const auto path = (std::filesystem::temp_directory_path() / "dcp_field_map_test.json").string();
  export_field_map(a, path);
  std::vector<std::string> warnings;
  const FieldMap b = import_field_map(path, &warnings);
  std::filesystem::remove(path);
  CHECK(warnings.empty());
  CHECK(b.source == a.source);
  CHECK(b.h0z == a.h0z);
  CHECK(b.find(1)->arrays.at("g_z") == a.find(1)->arrays.at("g_z"));
}

TEST_CASE("foreign normalization is rescaled with a warning") {
  FieldMap a = analytic_map();
  auto j = field_map_to_json(a);
  j["normalization"] = 2.0;
  std::vector<std::string> warnings;
  const FieldMap b = field_map_from_json(j, &warnings);
  CHECK(warnings.size() == 1);
  CHECK(b.h0z[10] == doctest::Approx(0.5 * a.h0z[10]));
}

TEST_CASE("schema errors") {
  auto j = field_map_to_json(analytic_map());
  auto bad = j;
  bad["format"] = "something-else";
  CHECK_THROWS_AS(field_map_from_json(bad), Error);
  bad = j;
  bad.erase("normalization");
  CHECK_THROWS_AS(field_map_from_json(bad), Error);
}
