#pragma once

#include <optional>
#include <string>
#include <vector>

#include "beamnet/network.hpp"
#include "beamnet/sampling.hpp"

namespace beamnet {

struct SimulationConfig {
  int nx = 100;
  double cfl = 0.9;
  double horizon = 1.0;
};

struct ControlConfig {
  double t_star = 0.0;
  double t_final = 0.0;
  std::vector<std::string> profile_files;  // one per charged-node beam
};

struct PlanConfig {
  std::vector<int> charged;     // 0-based after loading
  std::vector<int> controlled;
  std::vector<int> path_edges;
};

struct ReconstructConfig {
  // Per beam: anchor position (rotation defaults to the undeformed field at
  // the anchor). The anchor sits at the beam's lowest-index node.
  std::vector<Vec3> anchor_positions;
};

struct RunConfig {
  NetworkSpec network;
  std::vector<XField12> initial;  // per beam
  SimulationConfig simulation;
  std::optional<ControlConfig> control;
  std::optional<PlanConfig> plan;
  std::optional<ReconstructConfig> reconstruct;
  std::string out_dir = "out";
  int precision = 17;  // significant digits in CSV output
  std::string config_dir;  // directory of the config file, for relative paths
};

/// Parses and fully validates a run configuration. ParseError for malformed
/// input, ValidationError (with the embedded report) for an inconsistent
/// network.
RunConfig load_config(const std::string& path);

}  // namespace beamnet
