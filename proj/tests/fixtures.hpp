#pragma once

#include <cmath>
#include <vector>

#include "beamnet/kinematics.hpp"
#include "beamnet/network.hpp"

namespace beamnet::testing {

inline NodeRecord make_node(int id, NodeKind kind,
                            std::vector<std::pair<int, bool>> incidences) {
  NodeRecord n;
  n.id = id;
  n.kind = kind;
  for (auto [beam, at_end] : incidences) {
    n.incident.push_back({beam, at_end, at_end ? +1 : -1});
    n.ending_count += at_end ? 1 : 0;
  }
  return n;
}

/// Five unit beams with identity coefficients in the A-shaped layout:
/// beams 1,2 leave node 1; beam 3 runs between nodes 2 and 3; beams 4,5
/// hang from nodes 2 and 3 down to the simple nodes 4 and 5.
inline NetworkSpec unit_a_network() {
  NetworkSpec net;
  for (int i = 0; i < 5; ++i) {
    BeamSpec b;
    b.id = i;
    net.beams.push_back(b);
  }
  net.nodes = {
      make_node(0, NodeKind::MultipleKirchhoff, {{0, false}, {1, false}}),
      make_node(1, NodeKind::MultipleKirchhoff, {{0, true}, {2, false}, {3, false}}),
      make_node(2, NodeKind::MultipleKirchhoff, {{1, true}, {2, true}, {4, false}}),
      make_node(3, NodeKind::SimpleNeumann, {{3, true}}),
      make_node(4, NodeKind::SimpleNeumann, {{4, true}}),
  };
  return net;
}

/// Same graph with the beams actually laid out as a planar letter A:
/// per-beam constant rotations turn the common axis direction into the
/// drawn one, so centerline positions meet at the joints.
struct GeometricA {
  NetworkSpec net;
  std::vector<Vec3> node_positions;  // per node
  std::vector<Vec3> beam_start;      // centerline start per beam
};

inline GeometricA geometric_a_network() {
  GeometricA g;
  g.net = unit_a_network();
  const double s3 = std::sqrt(3.0) / 2.0;
  g.node_positions = {
      Vec3(0, 0, 0),  Vec3(-0.5, -s3, 0), Vec3(0.5, -s3, 0),
      Vec3(-1, -2 * s3, 0), Vec3(1, -2 * s3, 0),
  };
  const int starts[5] = {0, 0, 1, 1, 2};
  const int ends[5] = {1, 2, 2, 3, 4};
  for (int i = 0; i < 5; ++i) {
    const Vec3 dir =
        (g.node_positions[std::size_t(ends[i])] - g.node_positions[std::size_t(starts[i])])
            .normalized();
    const double angle = std::atan2(dir.y(), dir.x());
    g.net.beams[std::size_t(i)].undeformed_rotation = XFieldMat3::constant(
        quat_to_rot(UnitQuaternion::from_rotation_vector(Vec3(0, 0, angle))));
    g.beam_start.push_back(g.node_positions[std::size_t(starts[i])]);
  }
  return g;
}

/// Single beam with simple nodes at both ends.
inline NetworkSpec single_beam_network(NodeKind start_kind = NodeKind::SimpleNeumann,
                                       NodeKind end_kind = NodeKind::SimpleNeumann,
                                       double length = 1.0) {
  NetworkSpec net;
  BeamSpec b;
  b.id = 0;
  b.length = length;
  net.beams.push_back(b);
  net.nodes = {
      make_node(0, start_kind, {{0, false}}),
      make_node(1, end_kind, {{0, true}}),
  };
  return net;
}

}  // namespace beamnet::testing
