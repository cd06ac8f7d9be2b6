#pragma once

#include <span>
#include <string>
#include <vector>

#include "beamnet/beam.hpp"
#include "beamnet/sampling.hpp"

namespace beamnet {

enum class NodeKind { MultipleKirchhoff, SimpleNeumann, SimpleDirichlet };

/// One beam endpoint attached to a node. `at_end` selects the x = length
/// endpoint; tau is the outward normal sign (-1 at x = 0, +1 at x = length).
struct NodeIncidence {
  int beam = 0;
  bool at_end = false;
  int tau = -1;
};

struct NodeRecord {
  int id = 0;
  NodeKind kind = NodeKind::MultipleKirchhoff;
  std::vector<NodeIncidence> incident;  // ascending beam index
  Series6 data = Series6::constant(Vec6::Zero());
  int ending_count = 0;  // beams attached at their x = length endpoint
};

struct NetworkSpec {
  std::vector<BeamSpec> beams;
  std::vector<NodeRecord> nodes;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate(const NetworkSpec& spec);

/// Incidences in the stacking order used for node vectors: beams attached at
/// their far endpoint first (ascending), then beams attached at x = 0
/// (ascending).
std::vector<NodeIncidence> node_block_order(const NodeRecord& node);

/// Velocity-rotation and compliance weights of each incident beam at a node.
struct NodeMatrices {
  std::vector<Mat6> gamma;  // per incidence, block order
  std::vector<Mat6> sigma;
};

NodeMatrices node_matrices(const NetworkSpec& spec, std::span<const DiagonalizedBeam> dbs,
                           int node);

/// Outgoing-from-incoming map at a node: r_out = B r_in + Q q_pad, where
/// q_pad is the nodal data padded with zeros for a multiple node.
struct NodeCoupling {
  int node = 0;
  std::vector<Mat6> gamma;
  std::vector<Mat6> sigma;
  Eigen::MatrixXd B;  // 6k x 6k
  Eigen::MatrixXd Q;  // 6k x 6k for multiple nodes, 6x6 for simple (only the
                      // first 6 columns multiply data)
};

NodeCoupling assemble_coupling(const NetworkSpec& spec, std::span<const DiagonalizedBeam> dbs,
                               int node);

/// Splits the stacked endpoint Riemann states of the incident beams into the
/// information entering the beams (out) and the information arriving from
/// their interiors (in). `endpoint_r` is indexed in block order.
void split_out_in(const NodeRecord& node, const std::vector<Vec12>& endpoint_r,
                  Eigen::VectorXd* r_out, Eigen::VectorXd* r_in);

Eigen::VectorXd apply_node(const NodeCoupling& coupling, const Eigen::VectorXd& r_in,
                           const Vec6& q);

}  // namespace beamnet
