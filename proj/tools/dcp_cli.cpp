#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed cavity phase errors of atomic fountain clocks"};
  app.require_subcommand(1);
  dcp::cli::Command cmd;
  std::string seed, mesh_h;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", cmd.config, "JSON run configuration");
    if (needs_config) c->required();
    sub->add_option("--out", cmd.out, "output directory")->capture_default_str();
    sub->add_option("--set", cmd.overrides, "override a config entry, dotted.key=value")->take_all();
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_option("--threads", cmd.threads, "worker threads (default: DCP_THREADS or all cores)");
    sub->add_option("--mesh-h", mesh_h, "override solver.mesh_h, e.g. \"1.5 mm\"");
    sub->add_flag("--quiet", cmd.quiet, "no progress messages");
  };

  auto* fields = app.add_subcommand("fields", "solve the cavity fields and write field and phase maps");
  common(fields, true);
  fields->add_option("--grid-rho", cmd.grid_rho, "radial samples of the field map")->capture_default_str();
  fields->add_option("--grid-z", cmd.grid_z, "axial samples of the field map")->capture_default_str();

  auto* tmpl = app.add_subcommand("template", "longitudinal power-dependence templates");
  common(tmpl, false);
  tmpl->add_option("--p", cmd.p_list, "odd longitudinal orders, comma separated")->capture_default_str();
  tmpl->add_option("--b", cmd.b_grid, "amplitude grid start:step:stop (default 0:0.05:6)");

  auto* curve = app.add_subcommand("dcp-curve", "ensemble averaged DCP errors versus amplitude");
  common(curve, true);
  curve->add_option("--preset", cmd.presets, "ensemble presets (I, II0, ..., delta2, config)")->take_all();
  curve->add_option("--method", cmd.method, "mc, delta or uncorrelated")->capture_default_str();
  curve->add_option("--n", cmd.n, "Monte Carlo trajectories (default run.trajectories)");
  curve->add_option("--b", cmd.b_grid, "amplitude grid (default run.amplitude_grid)");

  auto* sweep = app.add_subcommand("sweep", "DCP curves over a family of config values");
  common(sweep, true);
  sweep->add_option("--param", cmd.param, "dotted config key")->required();
  sweep->add_option("--values", cmd.values, "values for the key")->required()->take_all();
  sweep->add_option("--preset", cmd.presets, "ensemble presets")->take_all();
  sweep->add_option("--method", cmd.method, "mc, delta or uncorrelated")->capture_default_str();
  sweep->add_option("--n", cmd.n, "Monte Carlo trajectories");
  sweep->add_option("--b", cmd.b_grid, "amplitude grid");

  auto* cases = app.add_subcommand("feed-cases", "feed imbalance factors for the canonical two-port cases");
  common(cases, true);
  cases->add_option("--eps", cmd.eps, "imbalance (or relative phase in rad)")->capture_default_str();
  cases->add_option("--q-ratio", cmd.q_ratio, "Q0 over the loaded Q of the feeds")->capture_default_str();

  auto* opt = app.add_subcommand("optimize", "chi-square search over cavity geometry and feed placement");
  common(opt, true);

  auto* val = app.add_subcommand("validate", "check a configuration");
  common(val, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  cmd.name = app.get_subcommands().front()->get_name();
  if (!seed.empty()) cmd.overrides.push_back("run.seed=" + seed);
  if (!mesh_h.empty()) cmd.overrides.push_back("solver.mesh_h=\"" + mesh_h + "\"");
  return dcp::cli::run(cmd);
}
