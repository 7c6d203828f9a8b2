// parabctl: certify, simulate, sweep and invert boundary-controlled
// parabolic scenarios.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "parabctl/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Boundary feedback certificates and simulations for 1D quasilinear parabolic PDEs"};
  app.require_subcommand(1, 1);

  std::string scenario;
  std::string out_dir = "./out";
  std::optional<std::size_t> nodes;
  std::optional<long> seed;  // reserved

  for (const char* name : {"certify", "simulate", "sweep", "invert"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario, "Scenario file")->required();
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--nodes", nodes, "Override the grid node count (odd)");
    sub->add_option("--seed", seed, "Reserved");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : parabctl::exit_code::config_error;
  }

  parabctl::CommandOptions opt;
  opt.out_dir = out_dir;
  opt.nodes = nodes;
  const std::string command = app.get_subcommands().front()->get_name();
  return parabctl::run_command(command, scenario, opt, std::cout, std::cerr);
}
