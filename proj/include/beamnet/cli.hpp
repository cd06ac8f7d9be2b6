#pragma once

#include <string>
#include <vector>

#include "beamnet/config.hpp"

namespace beamnet {

struct CliArgs {
  std::string subcommand;  // simulate | control | reconstruct | plan | check
  std::string config_path;
  std::string out_dir;          // optional override
  std::string trajectory_path;  // reconstruct input
  int nx = 0;                   // optional override
  double cfl = 0.0;             // optional override
  double tol = 0.0;             // optional compatibility tolerance override
};

/// Runs one subcommand; returns the process exit code (0 ok, 2 parse,
/// 3 validation, 4 runtime). Output files land in the resolved out dir.
int run_command(const CliArgs& args, std::ostream& out, std::ostream& err);

}  // namespace beamnet
