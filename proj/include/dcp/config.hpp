#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcp/constants.hpp"
#include "dcp/ensemble_config.hpp"
#include "dcp/feeds.hpp"
#include "dcp/geometry.hpp"

namespace dcp {

enum class FieldModelKind { Analytic, Fem };

struct SolverConfig {
  double mesh_h = 1.5e-3;     // m, bulk element size
  int fem_order = 3;
  double linear_tol = 1e-10;
  double grading = 0.25;      // growth of element size away from corners
  double exterior_db = 60.0;  // field attenuation required at the truncation
  double deflate_window = 1e-5;  // relative; m >= 1 resonances this close are projected out
  bool tune_height = true;     // FEM: adjust body_height to resonance
  double tune_tol = 1e-8;      // relative wavenumber tolerance of the tuning
  FieldModelKind field_model = FieldModelKind::Analytic;
  std::string coefficients = "table1";  // analytic phase dataset (name or path)
};

struct OptimizerConfig {
  double b_max_weight = 6.0;
  std::vector<double> b_grid;           // empty: 0.25 steps up to b_max_weight
  std::vector<double> cloud_offsets = {0.0, 3e-3};
  double m1_weight = 0.0;               // weight of dP1(b=1)^2
  std::vector<std::string> parameters;  // names of varied parameters
  std::vector<double> lower, upper;
  int samples = 8;
  int gradient_iters = 10;
  int top_k = 2;
  bool null_m2 = false;
  bool null_m1 = false;
  double tol_f = 1e-6;
  double tol_p = 1e-8;
};

struct RunConfig {
  PhysicalConstants constants;
  CavityGeometry geometry;
  FeedNetwork feeds;
  std::string feed_preset;        // informational; feeds already expanded
  bool q0_auto = true;            // take Q0 from the field solution
  EnsembleConfig ensemble;
  std::vector<std::string> ensemble_presets;  // for dcp-curve / sweep
  std::vector<double> amplitude_grid;
  std::vector<int> fourier_indices = {0, 1, 2};
  SolverConfig solver;
  std::uint64_t seed = 1;
  std::size_t trajectories = 1000000;
  OptimizerConfig optimizer;
  nlohmann::json source;          // the document after overrides
};

// Expands "a:step:b" or a JSON list into values.
std::vector<double> parse_grid(const nlohmann::json& j);

// Applies "dotted.key=value" to a JSON document. The value is parsed as JSON
// when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Builds a RunConfig. Throws Error(Config) on malformed input.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

std::vector<Violation> validate_config(const RunConfig& cfg);

// Hash of the canonical (overridden) document.
std::string config_hash(const RunConfig& cfg);

std::string format_violations(const std::vector<Violation>& v);

}  // namespace dcp
