#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dcp/config.hpp"
#include "dcp/ensemble.hpp"
#include "dcp/fem.hpp"
#include "dcp/mesh.hpp"
#include "dcp/response.hpp"

namespace dcp {

using Logger = std::function<void(const std::string&)>;

// Distinct |z| of the feeds, ascending.
std::vector<double> feed_planes(const FeedNetwork& net);

MeshOptions mesh_options(const RunConfig& cfg, const std::vector<double>& planes);
FemOptions fem_options(const RunConfig& cfg);

// Adjusts g.body_height until the TE011 eigenmode sits at k (relative
// tolerance tol). Returns the eigenmode on the final mesh.
// Throws Error(BracketFailed) if the iteration does not settle.
std::shared_ptr<const EigenMode> tune_height(CavityGeometry& g, const MeshOptions& mo, const FemOptions& fo,
                                             double k, double tol, int max_iter = 12,
                                             const Logger& log = nullptr);

// Single-weak-feed field model for the configured geometry and feeds.
struct BuiltField {
  std::shared_ptr<const FieldModel> base;
  CavityGeometry geometry;  // body height after tuning
  std::vector<double> planes;
  std::vector<int> ms;
  double eigen_k = 0.0;
  double q0 = 0.0;
  std::shared_ptr<const EigenMode> eig;  // FEM only
  std::vector<std::shared_ptr<const FieldSolution>> sols;
};

BuiltField build_field(const RunConfig& cfg, const std::vector<int>& ms, int threads = 0,
                       const Logger& log = nullptr);

// Feed network with Q0 taken from the field when the config asks for it.
FeedNetwork effective_network(const RunConfig& cfg, const BuiltField& f);

// Composed field, response context and cached lines out to the aperture.
struct Analysis {
  std::shared_ptr<const FieldModel> field;
  ResponseContext ctx;
  ProfileCache cache;
  FeedNetwork network;
};

Analysis prepare_analysis(const RunConfig& cfg, const BuiltField& f, const FeedNetwork& net,
                          int n_rho = 129);

CurveMethod parse_method(const std::string& s);
const char* method_name(CurveMethod m);

// Ensemble for a preset name, or the configured ensemble for "config".
EnsembleConfig resolve_ensemble(const RunConfig& cfg, const std::string& preset);

DcpCurve run_curve(const RunConfig& cfg, const Analysis& a, const std::string& preset, CurveMethod method,
                   const std::vector<double>& b, const std::vector<int>& ms, std::size_t n, int threads);

}  // namespace dcp
