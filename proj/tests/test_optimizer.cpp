#include "doctest.h"

#include <cmath>

#include "dcp/errors.hpp"
#include "dcp/optimizer.hpp"

using namespace dcp;

namespace {

Evaluation bowl(const std::vector<double>& x) {
  Evaluation e;
  e.x = x;
  e.chi2 = std::pow(x[0] - 0.3, 2) + 4 * std::pow(x[1] + 0.2, 2) + 0.5 * (x[0] - 0.3) * (x[1] + 0.2);
  return e;
}

}  // namespace

TEST_CASE("chi weight falls linearly to zero") {
  CHECK(chi_weight(0.0, 6.0) == doctest::Approx(1.0));
  CHECK(chi_weight(3.0, 6.0) == doctest::Approx(0.5));
  CHECK(chi_weight(6.0, 6.0) == doctest::Approx(0.0));
  CHECK(chi_weight(9.0, 6.0) == doctest::Approx(0.0));
}

TEST_CASE("chi square sums weighted squares") {
  ObjectiveSpec spec;
  spec.b_max_weight = 4.0;
  spec.m1_weight = 2.0;
  ObjectiveTerms t;
  t.b = {1.0, 2.0};
  t.dp0 = {{1.0, 2.0}, {0.5, 0.0}};
  t.dp1_b1 = {0.1, 0.2};
  CHECK(chi_square(t, spec) == doctest::Approx(0.75 * 1 + 0.5 * 4 + 0.75 * 0.25 + 2 * (0.01 + 0.04)));
  OptimizerConfig o;
  CHECK(objective_spec(o).b.size() == 24);
}

TEST_CASE("search finds the bottom of a bowl and is repeatable") {
  ParamSpace space{{"a", "b"}, {-1.0, -1.0}, {1.0, 1.0}};
  Budget budget;
  budget.samples = 6;
  budget.gradient_iters = 20;
  const auto r1 = optimize(bowl, space, 3, budget);
  CHECK(r1.best[0] == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(r1.best[1] == doctest::Approx(-0.2).epsilon(1e-3));
  CHECK(r1.best_chi2 < 1e-8);
  budget.threads = 3;
  const auto r2 = optimize(bowl, space, 3, budget);
  CHECK(r2.best == r1.best);
  CHECK(r2.evaluations.size() == r1.evaluations.size());
}

TEST_CASE("box constraints hold") {
  ParamSpace space{{"a", "b"}, {0.5, -1.0}, {1.0, 1.0}};
  Budget budget;
  budget.samples = 4;
  const auto r = optimize(bowl, space, 9, budget);
  CHECK(r.best[0] == doctest::Approx(0.5));
  for (const auto& e : r.evaluations) CHECK(e.x[0] >= 0.5);
}

TEST_CASE("failed evaluations are skipped") {
  ParamSpace space{{"a"}, {-1.0}, {1.0}};
  auto eval = [](const std::vector<double>& x) {
    Evaluation e;
    e.x = x;
    if (x[0] < 0) {
      e.chi2 = INFINITY;
      e.error = "SolveFailed";
    } else {
      e.chi2 = (x[0] - 0.5) * (x[0] - 0.5);
    }
    return e;
  };
  Budget budget;
  budget.samples = 8;
  const auto r = optimize(eval, space, 1, budget);
  CHECK(r.best[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("one-dimensional nulling") {
  const double r = null_1d("test", [](double x) { return x * x - 2.0; }, 1.0, 0.0, 3.0, 1e-12);
  CHECK(r == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(null_1d("test", [](double x) { return x * x + 1.0; }, 1.0, 0.0, 3.0, 1e-12), Error);
}

TEST_CASE("named parameters") {
  RunConfig cfg = parse_config(nlohmann::json::parse(R"({
    "geometry": {"body_radius": "21.28 mm", "body_height": "44.59 mm",
                 "cutoff_sections": [{"radius": "10.5 mm", "length": "51.7 mm"}, {"radius": "8.4 mm", "length": "20 mm"}]},
    "feeds": {"preset": "two_balanced", "planes": ["13.22 mm", "-13.22 mm"]}})"));
  CHECK(read_parameter(cfg, "feed_height") == doctest::Approx(13.22e-3));
  apply_parameter(cfg, "feed_height", 10e-3);
  int up = 0, down = 0;
  for (const auto& f : cfg.feeds.feeds) (f.z > 0 ? up : down)++;
  CHECK(up == 2);
  CHECK(down == 2);
  CHECK(read_parameter(cfg, "feed_height") == doctest::Approx(10e-3));
  apply_parameter(cfg, "cutoff_length.1", 25e-3);
  CHECK(cfg.geometry.cutoff_sections[1].length == doctest::Approx(25e-3));
  CHECK_THROWS_AS(apply_parameter(cfg, "extension_height", 1e-3), Error);
  CHECK_THROWS_AS(apply_parameter(cfg, "paint_colour", 1.0), Error);
}
