#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcp/response.hpp"

namespace dcp {

// Loss field of one Fourier index on the map grid. Arrays are keyed by
// component name ("f_rho", "f_phi", "f_z", "g_rho", "g_phi", "g_z"); a
// missing key means the source model does not provide that component.
struct MapComponent {
  int m = 0;
  std::map<std::string, std::vector<double>> arrays;
};

// Fields sampled on a rectangular (rho, z) grid, row-major with z fastest.
// NaN marks points outside the computational domain.
struct FieldMap {
  std::string source;  // "fem", "analytic" or external
  std::vector<double> rho, z;
  std::vector<double> e0phi, h0rho, h0z;
  std::vector<MapComponent> comps;
  double eigen_k = 0.0;
  double q0 = 0.0;
  double normalization = 1.0;  // on-axis integral of H0z the arrays carry
  std::string geometry_hash;

  std::size_t size() const { return rho.size() * z.size(); }
  const MapComponent* find(int m) const;
};

// Samples a field model (weights as currently set) on the given axes.
FieldMap sample_field_map(const FieldModel& model, const std::vector<int>& ms,
                          const std::vector<double>& rho, const std::vector<double>& z);

nlohmann::json field_map_to_json(const FieldMap& map);

// Throws Error(Format) on a schema mismatch. A map whose normalization is not
// 1 is rescaled to 1 and a message is appended to `warnings`.
FieldMap field_map_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);

void export_field_map(const FieldMap& map, const std::string& path);
FieldMap import_field_map(const std::string& path, std::vector<std::string>* warnings = nullptr);

}  // namespace dcp
