#include <CLI11.hpp>
#include <iostream>

#include "msde/cli/commands.hpp"

// Frame-bundle SDE simulator on model manifolds.
// Subcommands: geometry-report, simulate, verify <suite>; every run is fully
// determined by the config file and the seed.

int main(int argc, char** argv) {
  CLI::App app{"msde - stochastic differential equations on model manifolds"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", suite = "all";
  bool have_seed_override = false;
  uint64_t seed_override = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { have_seed_override = true; });
  };

  auto* geo = app.add_subcommand("geometry-report", "atlas and curvature validation");
  add_common(geo);
  auto* sim = app.add_subcommand("simulate", "run trajectories and write CSVs");
  add_common(sim);
  auto* ver = app.add_subcommand("verify", "statistical verification suites");
  add_common(ver);
  ver->add_option("suite", suite, "invariants|generator|flow|exit|laplacian|transition|all");

  CLI11_PARSE(app, argc, argv);

  try {
    msde::cli::RunConfig cfg = msde::cli::parse_config_file(config_path);
    if (have_seed_override) cfg.seed = seed_override;
    if (geo->parsed()) return msde::cli::cmd_geometry_report(cfg, out_dir);
    if (sim->parsed()) return msde::cli::cmd_simulate(cfg, out_dir);
    return msde::cli::cmd_verify(cfg, suite, out_dir);
  } catch (const msde::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return msde::cli::kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return msde::cli::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return msde::cli::kIoError;
  }
}
