#include <iostream>

#include <CLI11.hpp>

#include "q2amg/q2amg.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monolithic AMG for Q2-Q1 Stokes and Navier-Stokes: experiment runner"};
  std::string config_path, mode_name = "stokes";
  q2amg::RunOptions opt;
  app.add_option("--config", config_path, "INI experiment file (defaults apply when omitted)");
  app.add_option("--out", opt.out_dir, "output directory for reports")->capture_default_str();
  app.add_flag("--dump-matrices", opt.dump_matrices, "export A.mtx, B.mtx, f.vec, coords.txt and masses");
  app.add_flag("--dump-splitting", opt.dump_splitting, "write per-level coarse point sets as CSV");
  app.add_option("--mode", mode_name, "experiment")
      ->check(CLI::IsMember({"stokes", "navier-stokes", "tau1-sweep", "infsup", "mac1d"}))
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const q2amg::ExperimentConfig cfg = config_path.empty() ? q2amg::ExperimentConfig{} : q2amg::load_config(config_path);
    const q2amg::RunMode mode = q2amg::parse_mode(mode_name);
    const q2amg::ModeReport rep = q2amg::run_experiment(cfg, mode, opt);
    std::cout << rep.table;
    for (const auto& r : rep.records)
      for (const auto& w : r.warnings)
        std::cerr << "warning [m=" << r.refinement << " " << r.smoother << " tau1=" << r.tau1 << "]: " << w << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
