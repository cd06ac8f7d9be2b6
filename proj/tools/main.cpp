#include <iostream>

#include <CLI11.hpp>

#include "beamnet/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"beamnet: simulation and boundary-control synthesis for beam networks"};
  app.require_subcommand(1);

  beamnet::CliArgs args;
  for (const char* name : {"simulate", "control", "reconstruct", "plan", "check"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "run configuration (json)")->required();
    sub->add_option("--out-dir", args.out_dir, "output directory override");
    sub->add_option("--nx", args.nx, "cells per beam override");
    sub->add_option("--cfl", args.cfl, "time-step safety factor override");
    sub->add_option("--tol", args.tol, "compatibility tolerance override");
    if (std::string(name) == "reconstruct")
      sub->add_option("--trajectory", args.trajectory_path, "input trajectory csv")
          ->required();
  }

  CLI11_PARSE(app, argc, argv);
  args.subcommand = app.get_subcommands().front()->get_name();
  return beamnet::run_command(args, std::cout, std::cerr);
}
