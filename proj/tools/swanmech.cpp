#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "swanmech/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Federated-learning market model: welfare optimization, SWAN "
               "mechanism quotes and client-game simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string mechanism = "swan";
  std::uint64_t seed = 1;
  bool trace = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario config file (JSON)")->required();
    cmd->add_option("--out", out_path, "output path (default: stdout)");
  };

  CLI::App* solve = app.add_subcommand("solve", "optimal social states under eps_req");
  add_common(solve);

  CLI::App* equilibrium =
      app.add_subcommand("equilibrium", "best-response dynamics from the all-abstain start");
  add_common(equilibrium);
  equilibrium->add_option("--mechanism", mechanism, "swan | modified_fl | zero");
  equilibrium->add_option("--seed", seed, "update-order seed");
  equilibrium->add_flag("--trace", trace, "write per-step trace CSV next to the output");

  CLI::App* sweep = app.add_subcommand("sweep", "grid sweep to CSV (config needs a sweep section)");
  add_common(sweep);

  CLI::App* regions = app.add_subcommand("regions", "network-effect region report per type");
  add_common(regions);

  CLI::App* oracle = app.add_subcommand("oracle", "raw enumeration dump of all states");
  add_common(oracle);

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed())
    return swanmech::run_solve(config_path, out_path, std::cout, std::cerr);
  if (equilibrium->parsed())
    return swanmech::run_equilibrium(config_path, mechanism, seed, trace, out_path,
                                     std::cout, std::cerr);
  if (sweep->parsed())
    return swanmech::run_sweep(config_path, out_path, std::cout, std::cerr);
  if (regions->parsed())
    return swanmech::run_regions(config_path, out_path, std::cout, std::cerr);
  return swanmech::run_oracle(config_path, out_path, std::cout, std::cerr);
}
