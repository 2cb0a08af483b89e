// Command-line driver: solve, sweep, adapt, export-matrices.
#include "fracms/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
  CLI::App app{"Multiscale Darcy solver for fractured media"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int m_off = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("-s,--seed", seed, "Override offline and generator seeds");
    sub->add_option("-o,--out", out_dir, "Output directory (default: output.dir of the config)");
  };
  auto* solve = app.add_subcommand("solve", "Single multiscale solve");
  add_common(solve);
  solve->add_option("-m,--m-off", m_off, "Basis functions per coarse node (default: first schedule entry)")
      ->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("sweep", "Error table over the m_off schedule");
  add_common(sweep);
  auto* adapt = app.add_subcommand("adapt", "Adaptive enrichment loop");
  add_common(adapt);
  auto* exp = app.add_subcommand("export-matrices", "Write fine and coarse operators in Matrix Market format");
  add_common(exp);

  CLI11_PARSE(app, argc, argv);

  try {
    fracms::RunConfig cfg = fracms::load_config(config_path);
    if (seed) {
      cfg.offline.seed = *seed;
      if (cfg.generator) cfg.generator->seed = *seed;
    }
    if (out_dir.empty()) out_dir = cfg.output.dir;
    if (solve->parsed()) return fracms::cmd_solve(cfg, out_dir, m_off);
    if (sweep->parsed()) return fracms::cmd_sweep(cfg, out_dir);
    if (adapt->parsed()) return fracms::cmd_adapt(cfg, out_dir);
    return fracms::cmd_export_matrices(cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
