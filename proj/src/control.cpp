#include "beamnet/control.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace beamnet {

double transmission_time(const DiagonalizedBeam& db) {
  double t = 0.0;
  for (int k = 0; k + 1 < db.n_samples(); ++k)
    t += 0.5 * db.dx() * (db.slowness(k) + db.slowness(k + 1));
  return t;
}

double controllability_time(std::span<const double> beam_times) {
  if (beam_times.size() != 5)
    throw ValidationError("controllability_time: expected five beam times");
  return std::max(beam_times[0], beam_times[1]) + std::max(beam_times[3], beam_times[4]);
}

void require_a_network(const NetworkSpec& spec) {
  auto fail = [](const std::string& w) {
    throw ValidationError("not an A-shaped network: " + w);
  };
  if (spec.beams.size() != 5 || spec.nodes.size() != 5) fail("needs 5 beams and 5 nodes");
  struct Want {
    NodeKind kind;
    std::vector<std::pair<int, bool>> inc;  // beam, at_end
  };
  const std::vector<Want> want = {
      {NodeKind::MultipleKirchhoff, {{0, false}, {1, false}}},
      {NodeKind::MultipleKirchhoff, {{0, true}, {2, false}, {3, false}}},
      {NodeKind::MultipleKirchhoff, {{1, true}, {2, true}, {4, false}}},
      {NodeKind::SimpleNeumann, {{3, true}}},
      {NodeKind::SimpleNeumann, {{4, true}}},
  };
  for (std::size_t n = 0; n < want.size(); ++n) {
    const NodeRecord& rec = spec.nodes[n];
    if (rec.kind != want[n].kind) fail("node " + std::to_string(n + 1) + " kind");
    if (rec.incident.size() != want[n].inc.size())
      fail("node " + std::to_string(n + 1) + " degree");
    for (std::size_t a = 0; a < rec.incident.size(); ++a)
      if (rec.incident[a].beam != want[n].inc[a].first ||
          rec.incident[a].at_end != want[n].inc[a].second)
        fail("node " + std::to_string(n + 1) + " incidence " + std::to_string(a));
  }
}

namespace {

XField6 head6_of(const XField12& f) {
  std::vector<Vec6> vals(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) vals[k] = f.samples()[k].head<6>();
  if (f.is_constant()) return XField6::constant(vals[0]);
  return XField6::from_samples(f.start(), f.step(), std::move(vals));
}

struct EdgeInfo {
  int start_node = -1;
  int end_node = -1;
  int node_at(bool at_end) const { return at_end ? end_node : start_node; }
};

std::vector<EdgeInfo> edge_infos(const NetworkSpec& net) {
  std::vector<EdgeInfo> out(net.beams.size());
  for (std::size_t n = 0; n < net.nodes.size(); ++n)
    for (const NodeIncidence& inc : net.nodes[n].incident)
      (inc.at_end ? out[std::size_t(inc.beam)].end_node
                  : out[std::size_t(inc.beam)].start_node) = int(n);
  return out;
}

const NodeIncidence& incidence_of(const NodeRecord& node, int beam) {
  for (const NodeIncidence& inc : node.incident)
    if (inc.beam == beam) return inc;
  throw TraceUnavailable("beam " + std::to_string(beam + 1) + " not incident with node " +
                         std::to_string(node.id));
}

FieldMask rectangle_mask(const BeamField& field, double height) {
  FieldMask mask;
  mask.nx = field.nx;
  mask.n_t = field.n_t;
  mask.keep.assign(std::size_t(field.nx + 1) * std::size_t(field.n_t + 1), 0);
  for (int it = 0; it <= field.n_t; ++it) {
    if (field.dt * it > height + 1e-12) break;
    for (int ix = 0; ix <= field.nx; ++ix)
      mask.keep[std::size_t(it) * std::size_t(field.nx + 1) + std::size_t(ix)] = 1;
  }
  return mask;
}

FieldMask mirrored_characteristic_mask(const BeamField& field, const DiagonalizedBeam& db,
                                       double anchor_time) {
  // Curve measured from x = length instead of x = 0.
  FieldMask mask;
  mask.nx = field.nx;
  mask.n_t = field.n_t;
  mask.keep.assign(std::size_t(field.nx + 1) * std::size_t(field.n_t + 1), 0);
  std::vector<double> limit(std::size_t(field.nx + 1));
  limit[std::size_t(field.nx)] = anchor_time;
  for (int j = field.nx - 1; j >= 0; --j)
    limit[std::size_t(j)] = limit[std::size_t(j + 1)] -
                            0.5 * field.dx * (db.slowness(j) + db.slowness(j + 1));
  for (int it = 0; it <= field.n_t; ++it) {
    const double t = field.dt * it;
    for (int ix = 0; ix <= field.nx; ++ix)
      if (t <= limit[std::size_t(ix)] + 1e-12)
        mask.keep[std::size_t(it) * std::size_t(field.nx + 1) + std::size_t(ix)] = 1;
  }
  return mask;
}

// Nodal data forced by the initial state; used in place of the unknown
// controls for the preliminary solve.
Series6 placeholder_data(const NetworkSpec& net, const std::vector<XField12>& y0, int node) {
  const NodeRecord& rec = net.nodes[std::size_t(node)];
  auto endpoint_y = [&](const NodeIncidence& inc) {
    const double x = inc.at_end ? net.beams[std::size_t(inc.beam)].length : 0.0;
    return Vec12(y0[std::size_t(inc.beam)].at(x));
  };
  Vec6 value = Vec6::Zero();
  if (rec.kind == NodeKind::SimpleNeumann) {
    value = double(rec.incident[0].tau) * endpoint_y(rec.incident[0]).tail<6>();
  } else if (rec.kind == NodeKind::SimpleDirichlet) {
    value = endpoint_y(rec.incident[0]).head<6>();
  } else {
    for (const NodeIncidence& inc : rec.incident) {
      const double x = inc.at_end ? net.beams[std::size_t(inc.beam)].length : 0.0;
      value += double(inc.tau) *
               (net.beams[std::size_t(inc.beam)].rotation6_at(x) * endpoint_y(inc).tail<6>());
    }
  }
  return Series6::constant(value);
}

struct WindowPass {
  double t_bar = 0.0;
  std::vector<RecoveryDomain> recovery;
};

WindowPass compute_windows(const Plan& plan, const NetworkSpec& net,
                           const std::vector<EdgeInfo>& edges,
                           const std::vector<double>& travel,
                           const std::vector<int>& charged) {
  const std::size_t ne = net.beams.size();
  std::vector<std::array<double, 2>> demand(ne, {0.0, 0.0});
  std::vector<int> solve_phase(ne, -1);
  for (std::size_t ph = 0; ph < plan.phases.size(); ++ph) {
    for (const ForwardSolve& f : plan.phases[ph].forward)
      for (int e : f.edges) solve_phase[std::size_t(e)] = int(ph);
    for (const SidewiseSolve& s : plan.phases[ph].sidewise)
      solve_phase[std::size_t(s.edge)] = int(ph);
  }

  WindowPass wp;
  wp.recovery.resize(ne);
  auto is_charged = [&](int n) {
    return std::find(charged.begin(), charged.end(), n) != charged.end();
  };

  for (std::size_t ph_r = plan.phases.size(); ph_r-- > 0;) {
    const Phase& ph = plan.phases[ph_r];
    for (const SidewiseSolve& s : ph.sidewise) {
      const std::size_t e = std::size_t(s.edge);
      const bool anchor_at_start = edges[e].start_node == s.anchor_node;
      const double need_far = demand[e][anchor_at_start ? 1 : 0];
      const double aval = travel[e] + need_far;
      wp.recovery[e] = {RecoveryDomain::Kind::Characteristic, aval, !anchor_at_start};
      if (is_charged(s.anchor_node)) {
        wp.t_bar = std::max(wp.t_bar, aval);
      } else {
        for (const NodeIncidence& inc :
             net.nodes[std::size_t(s.anchor_node)].incident) {
          if (inc.beam == s.edge) continue;
          demand[std::size_t(inc.beam)][inc.at_end ? 1 : 0] =
              std::max(demand[std::size_t(inc.beam)][inc.at_end ? 1 : 0], aval);
        }
      }
    }
    for (const ForwardSolve& f : ph.forward) {
      double w = 0.0;
      for (int e : f.edges)
        w = std::max({w, demand[std::size_t(e)][0], demand[std::size_t(e)][1]});
      for (int e : f.edges)
        wp.recovery[std::size_t(e)] = {RecoveryDomain::Kind::Rectangle, w, false};
      for (int n : f.nodes) {
        const NodeRecord& rec = net.nodes[std::size_t(n)];
        bool interior = true;
        for (const NodeIncidence& inc : rec.incident)
          if (std::find(f.edges.begin(), f.edges.end(), inc.beam) == f.edges.end())
            interior = false;
        if (interior) continue;
        for (const NodeIncidence& inc : rec.incident) {
          const std::size_t b = std::size_t(inc.beam);
          if (solve_phase[b] >= 0 && solve_phase[b] < int(ph_r))
            demand[b][inc.at_end ? 1 : 0] = std::max(demand[b][inc.at_end ? 1 : 0], w);
        }
      }
    }
  }
  return wp;
}

}  // namespace

std::vector<double> verify_initial_recovery(const Trajectory& constructed,
                                            const Trajectory& preliminary,
                                            std::span<const DiagonalizedBeam> dbs,
                                            std::span<const RecoveryDomain> domains) {
  std::vector<double> dev(constructed.beams.size(), 0.0);
  for (std::size_t i = 0; i < constructed.beams.size(); ++i) {
    const BeamField& field = constructed.beams[i];
    FieldMask mask;
    if (domains[i].kind == RecoveryDomain::Kind::Rectangle)
      mask = rectangle_mask(field, domains[i].window);
    else if (domains[i].anchor_at_end)
      mask = mirrored_characteristic_mask(field, dbs[i], domains[i].window);
    else
      mask = restrict_to_characteristic_domain(field, dbs[i], domains[i].window);
    dev[i] = masked_max_deviation(field, preliminary.beams[i], mask);
  }
  return dev;
}

ExecutionResult execute_plan(const Plan& plan, const GeneralControlProblem& p,
                               const Grid& grid) {
  const NetworkSpec& net = *p.network;
  const std::size_t nb = net.beams.size();
  const std::vector<EdgeInfo> edges = edge_infos(net);
  const double dt = grid.dt;
  const int n_t = grid.n_t;
  const double t_final = grid.horizon();

  ExecutionResult res;

  std::vector<double> travel(nb);
  for (std::size_t i = 0; i < nb; ++i) travel[i] = transmission_time(p.dbs[i]);
  const WindowPass wp = compute_windows(plan, net, edges, travel, p.charged);
  res.t_bar = wp.t_bar;
  res.recovery = wp.recovery;

  if (!(p.t_final > p.t_star))
    throw ValidationError("profile interval empty: t_final <= t_star");
  if (!(p.t_star > wp.t_bar))
    throw ValidationError("t_star " + std::to_string(p.t_star) +
                          " does not exceed the controllability time " +
                          std::to_string(wp.t_bar));

  // Check the prescribed profiles against the node conditions.
  for (std::size_t c = 0; c < p.charged.size(); ++c) {
    const NodeRecord& rec = net.nodes[std::size_t(p.charged[c])];
    const auto& prof = p.profiles[c];
    if (prof.size() != rec.incident.size())
      throw TraceDimensionMismatch("profiles for node " + std::to_string(rec.id) +
                                   ": expected one series per incident beam");
    double resid = 0.0;
    const int n_check = 257;
    for (int s = 0; s < n_check; ++s) {
      const double t = p.t_star + (p.t_final - p.t_star) * s / double(n_check - 1);
      const Vec6 q = p.node_data[std::size_t(p.charged[c])].at(t);
      if (rec.kind == NodeKind::MultipleKirchhoff) {
        Vec6 balance = Vec6::Zero();
        Vec6 ref = Vec6::Zero();
        for (std::size_t a = 0; a < rec.incident.size(); ++a) {
          const NodeIncidence& inc = rec.incident[a];
          const double x = inc.at_end ? net.beams[std::size_t(inc.beam)].length : 0.0;
          const Mat6 rr = net.beams[std::size_t(inc.beam)].rotation6_at(x);
          const Vec12 y = prof[a].at(t);
          if (a == 0) ref = rr * y.head<6>();
          resid = std::max(resid, (rr * y.head<6>() - ref).cwiseAbs().maxCoeff());
          balance += double(inc.tau) * (rr * y.tail<6>());
        }
        resid = std::max(resid, (balance - q).cwiseAbs().maxCoeff());
      } else if (rec.kind == NodeKind::SimpleNeumann) {
        resid = std::max(
            resid,
            (double(rec.incident[0].tau) * prof[0].at(t).tail<6>() - q).cwiseAbs().maxCoeff());
      } else {
        resid = std::max(resid, (prof[0].at(t).head<6>() - q).cwiseAbs().maxCoeff());
      }
    }
    if (resid > p.profile_tol)
      throw ProfileIncompatible("profiles violate the node conditions at node " +
                                std::to_string(rec.id) + " by " + std::to_string(resid));
  }

  // Preliminary forward solve with placeholder data at the controlled nodes.
  const int n_t_pre = std::min(n_t, int(std::ceil(wp.t_bar / dt - 1e-9)));
  res.t_bar_grid = dt * n_t_pre;
  std::vector<Series6> pre_data = p.node_data;
  for (int c : p.controlled) pre_data[std::size_t(c)] = placeholder_data(net, p.y0, c);
  Grid pre_grid = grid;
  pre_grid.n_t = std::max(n_t_pre, 1);
  SolveOptions pre_opt;
  res.preliminary = solve_forward(net, p.dbs, p.y0, pre_data, pre_grid, pre_opt);
  for (const auto& w : res.preliminary.warnings) res.warnings.push_back(w);

  // Bridged anchor data at the charged nodes, on the full horizon.
  const double t_bridge_lo = res.t_bar_grid;
  std::map<std::pair<int, int>, Series12> bridged;  // (node, beam) -> series
  for (std::size_t c = 0; c < p.charged.size(); ++c) {
    const int cn = p.charged[c];
    const NodeRecord& rec = net.nodes[std::size_t(cn)];
    std::vector<std::vector<Vec12>> samples(rec.incident.size(),
                                            std::vector<Vec12>(std::size_t(n_t + 1)));
    std::vector<Series12> pre_traces;
    std::vector<Mat6> rr;
    for (const NodeIncidence& inc : rec.incident) {
      const std::size_t b = std::size_t(inc.beam);
      pre_traces.push_back(
          res.preliminary.beams[b].trace(inc.at_end ? grid.nx[b] : 0));
      rr.push_back(net.beams[b].rotation6_at(inc.at_end ? net.beams[b].length : 0.0));
    }
    const std::size_t k = rec.incident.size();
    for (int m = 0; m <= n_t; ++m) {
      const double t = dt * m;
      const bool in_pre = t <= t_bridge_lo + 1e-12;
      const bool in_prof = t >= p.t_star - 1e-12;
      // Lowest-index beam first: its bridge seeds the others.
      for (std::size_t a = 0; a < k; ++a) {
        const auto& prof = p.profiles[c][a];
        Vec12 v;
        if (in_pre) {
          v = pre_traces[a].at(t);
        } else if (in_prof) {
          v = prof.at(t);
        } else {
          // Velocity half: cubic for the first beam, rotation compatibility
          // for the rest.
          if (a == 0) {
            v.head<6>() = hermite<Vec6>(
                t_bridge_lo, p.t_star, pre_traces[0].at(t_bridge_lo).head<6>(),
                pre_traces[0].derivative_at(t_bridge_lo).head<6>(),
                Vec6(prof.at(p.t_star).head<6>()),
                Vec6(prof.derivative_at(p.t_star).head<6>()), t);
          } else {
            v.head<6>() = rr[a].transpose() * rr[0] * samples[0][std::size_t(m)].head<6>();
          }
          // Force half: cubic except the last beam, which balances the node.
          if (a + 1 < k || rec.kind == NodeKind::SimpleDirichlet) {
            v.tail<6>() = hermite<Vec6>(
                t_bridge_lo, p.t_star, pre_traces[a].at(t_bridge_lo).tail<6>(),
                pre_traces[a].derivative_at(t_bridge_lo).tail<6>(),
                Vec6(prof.at(p.t_star).tail<6>()),
                Vec6(prof.derivative_at(p.t_star).tail<6>()), t);
          } else if (rec.kind == NodeKind::SimpleNeumann) {
            v.tail<6>() = double(rec.incident[0].tau) * p.node_data[std::size_t(cn)].at(t);
          } else if (rec.kind == NodeKind::MultipleKirchhoff) {
            Vec6 sum = Vec6::Zero();
            for (std::size_t b = 0; b + 1 < k; ++b)
              sum += double(rec.incident[b].tau) *
                     (rr[b] * samples[b][std::size_t(m)].tail<6>());
            v.tail<6>() = double(rec.incident[k - 1].tau) * rr[k - 1].transpose() *
                          (p.node_data[std::size_t(cn)].at(t) - sum);
          }
          if (rec.kind == NodeKind::SimpleDirichlet)
            v.head<6>() = p.node_data[std::size_t(cn)].at(t);
        }
        samples[a][std::size_t(m)] = v;
      }
    }
    for (std::size_t a = 0; a < k; ++a)
      bridged[{cn, rec.incident[a].beam}] =
          Series12::from_samples(0.0, dt, std::move(samples[a]));
  }

  // Phase execution.
  std::vector<std::optional<BeamField>> fields(nb);
  auto trace_at = [&](int beam, int node) -> Series12 {
    if (!fields[std::size_t(beam)])
      throw TraceUnavailable("beam " + std::to_string(beam + 1) + " not solved yet");
    const NodeIncidence& inc = incidence_of(net.nodes[std::size_t(node)], beam);
    return fields[std::size_t(beam)]->trace(inc.at_end ? grid.nx[std::size_t(beam)] : 0);
  };
  auto smallest_solved_at = [&](int node, int skip_beam) -> int {
    for (const NodeIncidence& inc : net.nodes[std::size_t(node)].incident)
      if (inc.beam != skip_beam && fields[std::size_t(inc.beam)]) return inc.beam;
    return -1;
  };
  auto rr_at = [&](int beam, int node) -> Mat6 {
    const NodeIncidence& inc = incidence_of(net.nodes[std::size_t(node)], beam);
    return net.beams[std::size_t(beam)].rotation6_at(
        inc.at_end ? net.beams[std::size_t(beam)].length : 0.0);
  };

  for (const Phase& ph : plan.phases) {
    for (const ForwardSolve& f : ph.forward) {
      // Sub-network: interior nodes keep their conditions, nodes adjacent to
      // already-solved beams get velocity data from them.
      NetworkSpec sub;
      std::vector<DiagonalizedBeam> sub_dbs;
      std::vector<XField12> sub_y0;
      Grid sub_grid;
      sub_grid.dt = dt;
      sub_grid.n_t = n_t;
      sub_grid.cfl = grid.cfl;
      std::map<int, int> local;
      for (int e : f.edges) {
        local[e] = int(sub.beams.size());
        sub.beams.push_back(net.beams[std::size_t(e)]);
        sub.beams.back().id = int(sub.beams.size()) - 1;
        sub_dbs.push_back(p.dbs[std::size_t(e)]);
        sub_y0.push_back(p.y0[std::size_t(e)]);
        sub_grid.nx.push_back(grid.nx[std::size_t(e)]);
        sub_grid.dx.push_back(grid.dx[std::size_t(e)]);
      }
      for (int n : f.nodes) {
        const NodeRecord& rec = net.nodes[std::size_t(n)];
        std::vector<NodeIncidence> in_sub;
        for (const NodeIncidence& inc : rec.incident)
          if (local.count(inc.beam)) in_sub.push_back(inc);
        const bool interior = in_sub.size() == rec.incident.size();
        if (interior) {
          NodeRecord copy = rec;
          copy.id = int(sub.nodes.size());
          copy.incident.clear();
          for (const NodeIncidence& inc : in_sub)
            copy.incident.push_back({local[inc.beam], inc.at_end, inc.tau});
          std::sort(copy.incident.begin(), copy.incident.end(),
                    [](const NodeIncidence& a, const NodeIncidence& b) {
                      return a.beam < b.beam;
                    });
          sub.nodes.push_back(copy);
          continue;
        }
        const int j = smallest_solved_at(n, -1);
        if (j < 0)
          throw TraceUnavailable("forward solve at node " + std::to_string(rec.id) +
                                 ": no solved beam to close the velocities");
        const Series12 tr = trace_at(j, n);
        const Mat6 rj = rr_at(j, n);
        for (const NodeIncidence& inc : in_sub) {
          const Mat6 rb = rr_at(inc.beam, n);
          std::vector<Vec6> vals(std::size_t(n_t + 1));
          for (int m = 0; m <= n_t; ++m)
            vals[std::size_t(m)] = rb.transpose() * rj * tr.at(dt * m).head<6>();
          NodeRecord dn;
          dn.id = int(sub.nodes.size());
          dn.kind = NodeKind::SimpleDirichlet;
          dn.incident = {{local[inc.beam], inc.at_end, inc.tau}};
          dn.ending_count = inc.at_end ? 1 : 0;
          dn.data = Series6::from_samples(0.0, dt, std::move(vals));
          sub.nodes.push_back(dn);
        }
      }
      for (NodeRecord& nr : sub.nodes) {
        nr.ending_count = 0;
        for (const NodeIncidence& inc : nr.incident) nr.ending_count += inc.at_end ? 1 : 0;
      }
      std::vector<Series6> sub_q;
      for (const NodeRecord& nr : sub.nodes) sub_q.push_back(nr.data);
      SolveOptions sub_opt;
      sub_opt.check_compatibility = false;
      Trajectory sub_traj = solve_forward(sub, sub_dbs, sub_y0, sub_q, sub_grid, sub_opt);
      for (int e : f.edges)
        fields[std::size_t(e)] = std::move(sub_traj.beams[std::size_t(local[e])]);
    }

    for (const SidewiseSolve& s : ph.sidewise) {
      const std::size_t e = std::size_t(s.edge);
      const NodeRecord& anchor = net.nodes[std::size_t(s.anchor_node)];
      const NodeIncidence& inc = incidence_of(anchor, s.edge);
      Series12 trace;
      const auto key = std::make_pair(s.anchor_node, s.edge);
      if (bridged.count(key)) {
        trace = bridged[key];
      } else if (anchor.kind == NodeKind::MultipleKirchhoff) {
        // Complete the one unknown trace from the node conditions.
        const int j = smallest_solved_at(s.anchor_node, s.edge);
        if (j < 0)
          throw TraceUnavailable("sidewise solve of edge " + std::to_string(s.edge + 1) +
                                 ": no solved neighbor at the anchor");
        const Mat6 re = rr_at(s.edge, s.anchor_node);
        const Series12 vj = trace_at(j, s.anchor_node);
        const Mat6 rj = rr_at(j, s.anchor_node);
        std::vector<Series12> others;
        std::vector<Mat6> rro;
        std::vector<double> tauo;
        for (const NodeIncidence& oi : anchor.incident) {
          if (oi.beam == s.edge) continue;
          if (!fields[std::size_t(oi.beam)])
            throw TraceUnavailable("sidewise solve of edge " + std::to_string(s.edge + 1) +
                                   ": neighbor beam " + std::to_string(oi.beam + 1) +
                                   " unsolved");
          others.push_back(trace_at(oi.beam, s.anchor_node));
          rro.push_back(rr_at(oi.beam, s.anchor_node));
          tauo.push_back(double(oi.tau));
        }
        std::vector<Vec12> vals(std::size_t(n_t + 1));
        for (int m = 0; m <= n_t; ++m) {
          const double t = dt * m;
          Vec12 v;
          v.head<6>() = re.transpose() * rj * vj.at(t).head<6>();
          Vec6 sum = Vec6::Zero();
          for (std::size_t o = 0; o < others.size(); ++o)
            sum += tauo[o] * (rro[o] * others[o].at(t).tail<6>());
          v.tail<6>() = double(inc.tau) * re.transpose() *
                        (p.node_data[std::size_t(s.anchor_node)].at(t) - sum);
          vals[std::size_t(m)] = v;
        }
        trace = Series12::from_samples(0.0, dt, std::move(vals));
      } else {
        throw TraceUnavailable("sidewise solve of edge " + std::to_string(s.edge + 1) +
                               ": anchor node carries no profile data");
      }

      const SweepDirection dir =
          inc.at_end ? SweepDirection::Leftward : SweepDirection::Rightward;
      const XField6 v0 = head6_of(p.y0[e]);
      // Artificial terminal data: linear in x with the slope the transport
      // equation implies at the anchor corner, so the constructed solution
      // has no derivative kink there.
      const double xa = inc.at_end ? net.beams[e].length : 0.0;
      const Vec12 y_corner = trace.at(t_final);
      const Vec12 dy_corner = trace.derivative_at(t_final);
      const Vec12 rhs = gbar(net.beams[e], xa, y_corner) -
                        assemble_Bbar(net.beams[e], xa) * y_corner - dy_corner;
      const std::size_t ka = inc.at_end ? std::size_t(grid.nx[e]) : 0;
      const Vec6 slope = Vec6(Vec12(p.dbs[e].A[ka].partialPivLu().solve(rhs)).tail<6>());
      const XField6 zT = XField6::from_samples(
          0.0, net.beams[e].length,
          {Vec6(y_corner.tail<6>() - xa * slope),
           Vec6(y_corner.tail<6>() + (net.beams[e].length - xa) * slope)});
      SolveOptions side_opt;
      fields[e] = solve_sidewise(net.beams[e], p.dbs[e], dir, trace, v0, zT,
                                 grid.nx[e], dt, n_t, side_opt, &res.warnings, int(e));
    }
  }

  for (std::size_t i = 0; i < nb; ++i)
    if (!fields[i])
      throw TraceUnavailable("plan left beam " + std::to_string(i + 1) + " unsolved");

  res.trajectory.grid = grid;
  for (std::size_t i = 0; i < nb; ++i) res.trajectory.beams.push_back(std::move(*fields[i]));

  // Controls: node traces at the controlled nodes.
  for (int c : p.controlled) {
    const NodeRecord& rec = net.nodes[std::size_t(c)];
    std::vector<Vec6> vals(std::size_t(n_t + 1));
    for (int m = 0; m <= n_t; ++m) {
      Vec6 v = Vec6::Zero();
      if (rec.kind == NodeKind::MultipleKirchhoff) {
        for (const NodeIncidence& inc : rec.incident) {
          const std::size_t b = std::size_t(inc.beam);
          const int ix = inc.at_end ? grid.nx[b] : 0;
          v += double(inc.tau) *
               (rr_at(inc.beam, c) * Vec12(res.trajectory.beams[b].at(ix, m)).tail<6>());
        }
      } else {
        const NodeIncidence& inc = rec.incident[0];
        const std::size_t b = std::size_t(inc.beam);
        const int ix = inc.at_end ? grid.nx[b] : 0;
        const Vec12 y = res.trajectory.beams[b].at(ix, m);
        v = rec.kind == NodeKind::SimpleNeumann ? Vec6(double(inc.tau) * y.tail<6>())
                                                : Vec6(y.head<6>());
      }
      vals[std::size_t(m)] = v;
    }
    res.controls.push_back(Series6::from_samples(0.0, dt, std::move(vals)));
  }

  // Diagnostics: how well the anchor traces carry the profiles, and where
  // the construction reproduces the preliminary solution.
  for (std::size_t c = 0; c < p.charged.size(); ++c) {
    const NodeRecord& rec = net.nodes[std::size_t(p.charged[c])];
    for (std::size_t a = 0; a < rec.incident.size(); ++a) {
      const NodeIncidence& inc = rec.incident[a];
      const std::size_t b = std::size_t(inc.beam);
      const int ix = inc.at_end ? grid.nx[b] : 0;
      double err = 0.0;
      for (int m = 0; m <= n_t; ++m) {
        const double t = dt * m;
        if (t < p.t_star - 1e-12) continue;
        err = std::max(err, (Vec12(res.trajectory.beams[b].at(ix, m)) -
                             p.profiles[c][a].at(t))
                                .cwiseAbs()
                                .maxCoeff());
      }
      res.profile_trace_error.push_back(err);
    }
  }
  res.recovery_deviation =
      verify_initial_recovery(res.trajectory, res.preliminary, p.dbs, res.recovery);
  return res;
}

std::string ControlResult::report() const {
  std::ostringstream os;
  os << "controllability time: " << t_bar << " (grid " << t_bar_grid << ")\n";
  for (std::size_t i = 0; i < recovery_deviation.size(); ++i)
    os << "beam " << i + 1 << " recovery deviation: " << recovery_deviation[i] << "\n";
  for (std::size_t i = 0; i < profile_trace_error.size(); ++i)
    os << "profile trace error " << i + 1 << ": " << profile_trace_error[i] << "\n";
  for (const auto& w : warnings) os << w << "\n";
  return os.str();
}

ControlResult synthesize(const ControlProblem& problem, int nx, double cfl) {
  const NetworkSpec& net = *problem.network;
  require_a_network(net);
  const ValidationReport vr = validate(net);
  if (!vr.ok()) throw ValidationError(vr.to_string());

  std::vector<DiagonalizedBeam> dbs;
  dbs.reserve(net.beams.size());
  for (const BeamSpec& b : net.beams) dbs.push_back(diagonalize(b, nx + 1));

  std::vector<double> travel;
  for (const auto& db : dbs) travel.push_back(transmission_time(db));
  const double t_bar = controllability_time(travel);
  if (!(problem.t_final > problem.t_star && problem.t_star > t_bar))
    throw ValidationError("need t_final > t_star > " + std::to_string(t_bar));

  std::vector<int> nxs(net.beams.size(), nx);
  const Grid grid = make_grid(dbs, nxs, cfl, problem.t_final);

  GeneralControlProblem gp;
  gp.network = &net;
  gp.dbs = dbs;
  gp.y0 = problem.y0;
  gp.node_data = {problem.q1, problem.q2, problem.q3, Series6::constant(Vec6::Zero()),
                  Series6::constant(Vec6::Zero())};
  gp.charged = {0};
  gp.controlled = {3, 4};
  gp.profiles = {{problem.profile1, problem.profile2}};
  gp.t_star = problem.t_star;
  gp.t_final = problem.t_final;

  const Plan plan = build_plan(PlanInput::from_network(net, {0}, {3, 4}, {0, 1, 3, 4}));
  ExecutionResult er = execute_plan(plan, gp, grid);

  ControlResult out;
  out.q4 = std::move(er.controls[0]);
  out.q5 = std::move(er.controls[1]);
  out.trajectory = std::move(er.trajectory);
  out.preliminary = std::move(er.preliminary);
  out.t_bar = er.t_bar;
  out.t_bar_grid = er.t_bar_grid;
  out.recovery = std::move(er.recovery);
  out.recovery_deviation = std::move(er.recovery_deviation);
  out.profile_trace_error = std::move(er.profile_trace_error);
  out.warnings = std::move(er.warnings);
  return out;
}

}  // namespace beamnet
