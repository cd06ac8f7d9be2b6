#pragma once

#include <array>
#include <string>
#include <vector>

#include "beamnet/network.hpp"

namespace beamnet {

/// Topology view plus the control layout: charged nodes carry prescribed
/// profiles, controlled nodes carry the unknown controls, path edges connect
/// them.
struct PlanInput {
  int n_nodes = 0;
  std::vector<std::array<int, 2>> edge_nodes;  // {start node, end node} per edge
  std::vector<int> charged;
  std::vector<int> controlled;
  std::vector<int> path_edges;

  int degree(int node) const;
  std::vector<int> incident_edges(int node) const;

  static PlanInput from_network(const NetworkSpec& spec, std::vector<int> charged,
                                std::vector<int> controlled, std::vector<int> path_edges);
};

struct ConditionReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Checks the three layout conditions: controlled-node count equals the sum
/// of charged-node degrees; each charged node reaches its own set of
/// distinct controlled nodes through node-disjoint paths meeting only at the
/// charged node; paths of different charged nodes share no node.
ConditionReport check_sufficient_conditions(const PlanInput& input);

struct SidewiseSolve {
  int edge = 0;
  int anchor_node = 0;
};

struct ForwardSolve {
  std::vector<int> nodes;
  std::vector<int> edges;
};

/// One scheduling step; holds either forward sub-network solves or sidewise
/// edge solves. Solves within a phase touch disjoint edges.
struct Phase {
  int step = 0;
  std::vector<ForwardSolve> forward;
  std::vector<SidewiseSolve> sidewise;
};

struct Plan {
  std::vector<Phase> phases;
  std::string to_string() const;  // one phase per line, 1-based ids
};

/// Schedules the solves: forward sub-network solves over marked nodes away
/// from the control paths, sidewise solves of path edges once a node has all
/// but one incident edge accounted for. Deterministic (ascending-index tie
/// breaking). Throws PlanStalled when an iteration makes no progress.
Plan build_plan(const PlanInput& input);

}  // namespace beamnet
