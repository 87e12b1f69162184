#pragma once

#include <string>
#include <vector>

namespace dcp::cli {

struct Command {
  std::string name;
  std::string config;
  std::string out = "out";
  std::vector<std::string> overrides;
  int threads = 0;
  bool quiet = false;

  // template
  std::string p_list = "1,3,5";
  std::string b_grid;
  // dcp-curve, sweep
  std::vector<std::string> presets;
  std::string method = "mc";
  long long n = -1;
  // sweep
  std::string param;
  std::vector<std::string> values;
  // fields
  int grid_rho = 65;
  int grid_z = 129;
  // feed-cases
  double eps = 0.1;
  double q_ratio = 4.0;
};

// Returns the process exit code: 0 ok, 2 config error, 3 solver error,
// 4 empty ensemble.
int run(const Command& cmd);

}  // namespace dcp::cli
