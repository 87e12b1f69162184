#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dcp/config.hpp"
#include "dcp/pipeline.hpp"

namespace dcp {

struct ParamSpace {
  std::vector<std::string> names;
  std::vector<double> lower, upper;
  std::size_t size() const { return names.size(); }
};

// Linear weight falling from 1 at b = 0 to 0 at b_max.
double chi_weight(double b, double b_max);

struct ObjectiveSpec {
  double b_max_weight = 6.0;
  std::vector<double> b;                     // amplitudes of the m = 0 sum
  std::vector<double> offsets = {0.0, 3e-3};  // delta-up cloud positions (m)
  double m1_weight = 0.0;                    // weight of dP1(b=1)^2
};

ObjectiveSpec objective_spec(const OptimizerConfig& o);

// dP0 per (offset, b) and dP1(b=1) per offset for the delta-up/uniform-down model.
struct ObjectiveTerms {
  std::vector<double> b;
  std::vector<std::vector<double>> dp0;
  std::vector<double> dp1_b1;
};

double chi_square(const ObjectiveTerms& t, const ObjectiveSpec& spec);

struct Evaluation {
  std::vector<double> x;
  double chi2 = 0.0;
  std::vector<double> null_residuals;  // detuning, dP2(b=1), dP1(b=1)
  std::string error;                   // set when the evaluation failed
};

using Evaluator = std::function<Evaluation(const std::vector<double>&)>;

struct Budget {
  int samples = 8;
  int gradient_iters = 10;
  int top_k = 2;
  int threads = 1;  // concurrent sample evaluations
};

struct OptimizeResult {
  std::vector<double> best;
  double best_chi2 = 0.0;
  std::vector<Evaluation> evaluations;  // every distinct point, in evaluation order
  std::vector<double> trace;            // best chi2 after each accepted step
};

// Seeded uniform sampling in the box, then box-projected BFGS with central
// differences and a backtracking line search from the best top_k samples.
// Failed evaluations count as +inf. Deterministic for a fixed seed.
OptimizeResult optimize(const Evaluator& eval, const ParamSpace& space, std::uint64_t seed, const Budget& budget);

// Root of f in [lo, hi] to |f| < tol, starting from x0. Returns x0 when it
// already satisfies the tolerance. Throws Error(BracketFailed) naming `step`.
double null_1d(const std::string& step, const std::function<double(double)>& f, double x0, double lo,
               double hi, double tol);

// Geometry and feed knobs by name: body_radius, body_height, aperture_radius,
// cutoff_radius[.i], cutoff_length[.i], feed_height, extension_height.
void apply_parameter(RunConfig& cfg, const std::string& name, double value);
double read_parameter(const RunConfig& cfg, const std::string& name);

// Cavity objective: parameters applied to a base config, the null sequence
// run, then chi_square on the delta-function ensemble. Memoized by the exact
// parameter values.
class CavityObjective {
 public:
  CavityObjective(RunConfig base, ParamSpace space, int threads = 1, Logger log = nullptr);

  RunConfig configure(const std::vector<double>& x) const;

  // Height tuning, then the enabled dP2 and dP1 nulls. Residuals are written
  // to `residuals` when given.
  RunConfig null_sequence(const RunConfig& cfg, std::vector<double>* residuals = nullptr) const;

  ObjectiveTerms terms(const RunConfig& cfg) const;
  Evaluation evaluate(const std::vector<double>& x) const;

  const ObjectiveSpec& spec() const { return spec_; }
  const ParamSpace& space() const { return space_; }

 private:
  double null_residual(const RunConfig& cfg, int m) const;
  RunConfig base_;
  ParamSpace space_;
  ObjectiveSpec spec_;
  int threads_;
  Logger log_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<double>, Evaluation> memo_;
};

}  // namespace dcp
