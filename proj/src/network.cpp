#include "beamnet/network.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <sstream>

namespace beamnet {

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v << "\n";
  return os.str();
}

ValidationReport validate(const NetworkSpec& spec) {
  ValidationReport rep;
  auto add = [&](const std::string& s) { rep.violations.push_back(s); };

  for (const BeamSpec& b : spec.beams) {
    try {
      b.validate();
    } catch (const Error& e) {
      add(e.what());
    }
  }

  // Each beam endpoint must belong to exactly one node.
  std::vector<int> start_owner(spec.beams.size(), -1), end_owner(spec.beams.size(), -1);
  for (const NodeRecord& n : spec.nodes) {
    for (const NodeIncidence& inc : n.incident) {
      if (inc.beam < 0 || inc.beam >= int(spec.beams.size())) {
        add("node " + std::to_string(n.id) + ": incidence references unknown beam " +
            std::to_string(inc.beam));
        continue;
      }
      auto& owner = inc.at_end ? end_owner[std::size_t(inc.beam)]
                               : start_owner[std::size_t(inc.beam)];
      if (owner >= 0)
        add("beam " + std::to_string(inc.beam) + (inc.at_end ? " end" : " start") +
            " endpoint assigned to nodes " + std::to_string(owner) + " and " +
            std::to_string(n.id));
      owner = n.id;
      const int expected_tau = inc.at_end ? +1 : -1;
      if (inc.tau != expected_tau)
        add("node " + std::to_string(n.id) + ", beam " + std::to_string(inc.beam) +
            ": tau " + std::to_string(inc.tau) + " inconsistent with endpoint");
    }
  }
  for (std::size_t i = 0; i < spec.beams.size(); ++i) {
    if (start_owner[i] < 0) add("beam " + std::to_string(int(i)) + ": start endpoint unassigned");
    if (end_owner[i] < 0) add("beam " + std::to_string(int(i)) + ": end endpoint unassigned");
    if (start_owner[i] >= 0 && start_owner[i] == end_owner[i])
      add("beam " + std::to_string(int(i)) + ": both endpoints at node " +
          std::to_string(start_owner[i]) + " (self-loop)");
  }

  for (const NodeRecord& n : spec.nodes) {
    if (n.incident.empty()) {
      add("node " + std::to_string(n.id) + ": no incident beams");
      continue;
    }
    if (!std::is_sorted(n.incident.begin(), n.incident.end(),
                        [](const NodeIncidence& a, const NodeIncidence& b) {
                          return a.beam < b.beam;
                        }))
      add("node " + std::to_string(n.id) + ": incidences not sorted by beam index");
    const int ending = int(std::count_if(n.incident.begin(), n.incident.end(),
                                         [](const NodeIncidence& i) { return i.at_end; }));
    if (ending != n.ending_count)
      add("node " + std::to_string(n.id) + ": ending_count " + std::to_string(n.ending_count) +
          " does not match incidences (" + std::to_string(ending) + ")");
    if (n.kind != NodeKind::MultipleKirchhoff && n.incident.size() != 1)
      add("node " + std::to_string(n.id) + ": simple node with degree " +
          std::to_string(n.incident.size()));
    if (n.kind == NodeKind::MultipleKirchhoff && n.incident.size() < 2)
      add("node " + std::to_string(n.id) + ": multiple node with degree < 2");
  }
  return rep;
}

std::vector<NodeIncidence> node_block_order(const NodeRecord& node) {
  std::vector<NodeIncidence> order;
  order.reserve(node.incident.size());
  for (const NodeIncidence& i : node.incident)
    if (i.at_end) order.push_back(i);
  for (const NodeIncidence& i : node.incident)
    if (!i.at_end) order.push_back(i);
  return order;
}

namespace {

int endpoint_sample(const DiagonalizedBeam& db, bool at_end) {
  return at_end ? db.n_samples() - 1 : 0;
}

}  // namespace

NodeMatrices node_matrices(const NetworkSpec& spec, std::span<const DiagonalizedBeam> dbs,
                           int node) {
  const NodeRecord& n = spec.nodes[std::size_t(node)];
  NodeMatrices nm;
  for (const NodeIncidence& inc : node_block_order(n)) {
    const DiagonalizedBeam& db = dbs[std::size_t(inc.beam)];
    const int k = endpoint_sample(db, inc.at_end);
    const std::size_t ks = std::size_t(k);
    const Mat6 rr = spec.beams[std::size_t(inc.beam)].rotation6_at(db.x[ks]);
    const Mat6 ut = db.U[ks].transpose();
    const Mat6 dinv = db.speeds[ks].cwiseInverse().asDiagonal();
    const Mat6 gamma = rr * db.c_half[ks] * ut;
    const Mat6 sigma = rr * db.c_half_inv[ks] * ut * dinv * db.U[ks] * db.c_half_inv[ks] *
                       rr.transpose();
    if ((sigma - sigma.transpose()).norm() > 1e-10 * (1.0 + sigma.norm()))
      throw NotSPD("sigma not symmetric at node " + std::to_string(n.id));
    Eigen::LLT<Mat6> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw NotSPD("sigma not positive definite at node " + std::to_string(n.id));
    const double res = (sigma * gamma - rr * db.c_half_inv[ks] * ut * dinv).norm();
    if (res > 1e-9)
      throw NotSPD("sigma*gamma identity residual " + std::to_string(res) + " at node " +
                   std::to_string(n.id));
    nm.gamma.push_back(gamma);
    nm.sigma.push_back(sigma);
  }
  return nm;
}

NodeCoupling assemble_coupling(const NetworkSpec& spec, std::span<const DiagonalizedBeam> dbs,
                               int node) {
  const NodeRecord& n = spec.nodes[std::size_t(node)];
  NodeCoupling nc;
  nc.node = node;

  if (n.kind != NodeKind::MultipleKirchhoff) {
    const NodeIncidence& inc = n.incident.front();
    const DiagonalizedBeam& db = dbs[std::size_t(inc.beam)];
    const std::size_t k = std::size_t(endpoint_sample(db, inc.at_end));
    if (n.kind == NodeKind::SimpleNeumann) {
      // The outward sign enters the data relation twice and cancels, so the
      // injection weight carries no sign.
      nc.B = Mat6::Identity();
      nc.Q = 2.0 * Mat6(db.speeds[k].asDiagonal()) * db.U[k] * db.c_half[k];
    } else {
      nc.B = -Mat6::Identity();
      nc.Q = 2.0 * db.U[k] * db.c_half_inv[k];
    }
    return nc;
  }

  NodeMatrices nm = node_matrices(spec, dbs, node);
  nc.gamma = nm.gamma;
  nc.sigma = nm.sigma;
  const int k = int(n.incident.size());
  const int dim = 6 * k;

  Eigen::MatrixXd big_a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd big_b = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
  for (int a = 0; a < k; ++a) {
    big_a.block<6, 6>(0, 6 * a) = nm.sigma[std::size_t(a)];
    big_b.block<6, 6>(0, 6 * a) = nm.sigma[std::size_t(a)];
    g.block<6, 6>(6 * a, 6 * a) = nm.gamma[std::size_t(a)];
  }
  for (int a = 1; a < k; ++a) {
    big_a.block<6, 6>(6 * a, 0) = -Mat6::Identity();
    big_a.block<6, 6>(6 * a, 6 * a) = Mat6::Identity();
    big_b.block<6, 6>(6 * a, 0) = Mat6::Identity();
    big_b.block<6, 6>(6 * a, 6 * a) = -Mat6::Identity();
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu_a(big_a);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_g(g);
  const Eigen::MatrixXd ainv_b = lu_a.solve(big_b);
  const Eigen::MatrixXd ainv = lu_a.solve(Eigen::MatrixXd::Identity(dim, dim));
  if ((big_a * ainv_b - big_b).norm() > 1e-8 * (1.0 + big_b.norm()))
    throw SingularNodeMatrix("node balance solve residual out of tolerance at node " +
                             std::to_string(n.id));
  const Eigen::MatrixXd ginv = lu_g.solve(Eigen::MatrixXd::Identity(dim, dim));
  if ((g * ginv - Eigen::MatrixXd::Identity(dim, dim)).norm() > 1e-8)
    throw SingularNodeMatrix("gamma block solve residual out of tolerance at node " +
                             std::to_string(n.id));
  nc.B = ginv * ainv_b * g;
  nc.Q = 2.0 * ginv * ainv;
  return nc;
}

void split_out_in(const NodeRecord& node, const std::vector<Vec12>& endpoint_r,
                  Eigen::VectorXd* r_out, Eigen::VectorXd* r_in) {
  const auto order = node_block_order(node);
  if (endpoint_r.size() != order.size())
    throw TraceDimensionMismatch("split_out_in: state count does not match node degree");
  const int dim = 6 * int(order.size());
  r_out->resize(dim);
  r_in->resize(dim);
  for (std::size_t a = 0; a < order.size(); ++a) {
    const Vec12& r = endpoint_r[a];
    const Vec6 minus = r.head<6>();
    const Vec6 plus = r.tail<6>();
    if (order[a].at_end) {
      r_out->segment<6>(6 * Eigen::Index(a)) = minus;
      r_in->segment<6>(6 * Eigen::Index(a)) = plus;
    } else {
      r_out->segment<6>(6 * Eigen::Index(a)) = plus;
      r_in->segment<6>(6 * Eigen::Index(a)) = minus;
    }
  }
}

Eigen::VectorXd apply_node(const NodeCoupling& coupling, const Eigen::VectorXd& r_in,
                           const Vec6& q) {
  if (r_in.size() != coupling.B.rows())
    throw TraceDimensionMismatch("apply_node: incoming vector has wrong dimension");
  return coupling.B * r_in + coupling.Q.leftCols(6) * q;
}

}  // namespace beamnet
