#pragma once

#include <stdexcept>
#include <string>

namespace dcp {

enum class ErrorCode {
  Config,
  BelowCutoff,
  DegenerateGeometry,
  NoModeNearTarget,
  SolverDiverged,
  Format,
  NoRoot,
  EmptyEnsemble,
  MissingBaseSolution,
  BracketFailed,
  SolveFailed,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dcp
