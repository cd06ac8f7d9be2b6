#include "beamnet/planner.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace beamnet {

int PlanInput::degree(int node) const {
  int d = 0;
  for (const auto& e : edge_nodes) d += (e[0] == node) + (e[1] == node);
  return d;
}

std::vector<int> PlanInput::incident_edges(int node) const {
  std::vector<int> out;
  for (int e = 0; e < int(edge_nodes.size()); ++e)
    if (edge_nodes[std::size_t(e)][0] == node || edge_nodes[std::size_t(e)][1] == node)
      out.push_back(e);
  return out;
}

PlanInput PlanInput::from_network(const NetworkSpec& spec, std::vector<int> charged,
                                  std::vector<int> controlled, std::vector<int> path_edges) {
  PlanInput in;
  in.n_nodes = int(spec.nodes.size());
  in.edge_nodes.assign(spec.beams.size(), {-1, -1});
  for (int n = 0; n < in.n_nodes; ++n)
    for (const NodeIncidence& inc : spec.nodes[std::size_t(n)].incident)
      in.edge_nodes[std::size_t(inc.beam)][inc.at_end ? 1 : 0] = n;
  in.charged = std::move(charged);
  in.controlled = std::move(controlled);
  in.path_edges = std::move(path_edges);
  std::sort(in.charged.begin(), in.charged.end());
  std::sort(in.controlled.begin(), in.controlled.end());
  std::sort(in.path_edges.begin(), in.path_edges.end());
  return in;
}

std::string ConditionReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v << "\n";
  return os.str();
}

namespace {

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

ConditionReport check_sufficient_conditions(const PlanInput& input) {
  ConditionReport rep;
  auto add = [&](const std::string& s) { rep.violations.push_back(s); };

  for (int n : input.charged)
    if (contains(input.controlled, n))
      add("node " + std::to_string(n + 1) + " both charged and controlled");

  int degree_sum = 0;
  for (int n : input.charged) degree_sum += input.degree(n);
  if (int(input.controlled.size()) != degree_sum)
    add("controlled-node count " + std::to_string(input.controlled.size()) +
        " != sum of charged-node degrees " + std::to_string(degree_sum));

  // Walk the path edges from each charged node; interior path nodes must
  // have exactly two path edges, terminals exactly one.
  std::vector<int> path_deg(std::size_t(input.n_nodes), 0);
  for (int e : input.path_edges) {
    path_deg[std::size_t(input.edge_nodes[std::size_t(e)][0])]++;
    path_deg[std::size_t(input.edge_nodes[std::size_t(e)][1])]++;
  }
  std::set<int> used_edges;
  std::set<int> visited_interior;  // interior path nodes over all walks
  std::set<int> reached_controlled;
  for (int n : input.charged) {
    std::set<int> own_nodes;  // nodes touched by this charged node's paths
    int paths = 0;
    for (int e0 : input.incident_edges(n)) {
      if (!contains(input.path_edges, e0)) {
        add("charged node " + std::to_string(n + 1) + ": incident edge " +
            std::to_string(e0 + 1) + " is not a path edge");
        continue;
      }
      // Walk away from n.
      int prev = n;
      int edge = e0;
      bool walk_ok = true;
      while (true) {
        if (used_edges.count(edge)) {
          add("path edge " + std::to_string(edge + 1) + " used by two paths");
          walk_ok = false;
          break;
        }
        used_edges.insert(edge);
        const auto& en = input.edge_nodes[std::size_t(edge)];
        const int next = (en[0] == prev) ? en[1] : en[0];
        if (contains(input.controlled, next)) {
          if (!reached_controlled.insert(next).second) {
            add("controlled node " + std::to_string(next + 1) + " reached by two paths");
            walk_ok = false;
          }
          break;
        }
        if (contains(input.charged, next)) {
          add("path from node " + std::to_string(n + 1) + " runs into charged node " +
              std::to_string(next + 1));
          walk_ok = false;
          break;
        }
        if (path_deg[std::size_t(next)] != 2) {
          add("path node " + std::to_string(next + 1) + " has path degree " +
              std::to_string(path_deg[std::size_t(next)]) + ", expected 2");
          walk_ok = false;
          break;
        }
        if (visited_interior.count(next) || own_nodes.count(next)) {
          add("paths share node " + std::to_string(next + 1));
          walk_ok = false;
          break;
        }
        own_nodes.insert(next);
        // The other path edge at `next`.
        int cont = -1;
        for (int e : input.incident_edges(next))
          if (e != edge && contains(input.path_edges, e)) cont = e;
        prev = next;
        edge = cont;
      }
      if (walk_ok) ++paths;
    }
    if (paths != input.degree(n))
      add("charged node " + std::to_string(n + 1) + ": " + std::to_string(paths) +
          " disjoint control paths, expected " + std::to_string(input.degree(n)));
    visited_interior.insert(own_nodes.begin(), own_nodes.end());
  }
  for (int e : input.path_edges)
    if (!used_edges.count(e))
      add("path edge " + std::to_string(e + 1) + " not on any charged-to-controlled walk");
  for (int c : input.controlled)
    if (!reached_controlled.count(c))
      add("controlled node " + std::to_string(c + 1) + " not reached by any path");
  return rep;
}

std::string Plan::to_string() const {
  std::ostringstream os;
  for (const Phase& ph : phases) {
    os << "phase " << ph.step << ":";
    bool first = true;
    for (const ForwardSolve& f : ph.forward) {
      os << (first ? " " : "; ") << "forward nodes {";
      for (std::size_t i = 0; i < f.nodes.size(); ++i)
        os << (i ? "," : "") << f.nodes[i] + 1;
      os << "} edges {";
      for (std::size_t i = 0; i < f.edges.size(); ++i)
        os << (i ? "," : "") << f.edges[i] + 1;
      os << "}";
      first = false;
    }
    for (const SidewiseSolve& s : ph.sidewise) {
      os << (first ? " " : "; ") << "sidewise edge " << s.edge + 1 << " from node "
         << s.anchor_node + 1;
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

Plan build_plan(const PlanInput& input) {
  const int nn = input.n_nodes;
  const int ne = int(input.edge_nodes.size());
  std::vector<int> J(std::size_t(nn), 0);
  for (int n : input.charged) J[std::size_t(n)] = input.degree(n) - 1;

  std::vector<bool> solved(std::size_t(ne), false);
  std::vector<bool> marked(std::size_t(nn), false);
  for (int n : input.charged) marked[std::size_t(n)] = true;
  for (int n = 0; n < nn; ++n) {
    bool touches_path = false;
    for (int e : input.incident_edges(n))
      if (contains(input.path_edges, e)) touches_path = true;
    if (!touches_path) marked[std::size_t(n)] = true;
  }

  Plan plan;
  int step = 1;
  int remaining = ne;
  int guard = 2 * (ne + nn) + 4;

  while (remaining > 0) {
    if (--guard < 0) throw PlanStalled("iteration guard exceeded");
    bool moved = false;

    // Forward solves: connected components of marked nodes joined by
    // unsolved non-path edges (at least one edge each).
    {
      Phase ph;
      ph.step = step;
      std::vector<bool> seen(std::size_t(nn), false);
      for (int seed = 0; seed < nn; ++seed) {
        if (!marked[std::size_t(seed)] || seen[std::size_t(seed)]) continue;
        std::vector<int> comp_nodes{seed};
        std::vector<int> comp_edges;
        seen[std::size_t(seed)] = true;
        for (std::size_t head = 0; head < comp_nodes.size(); ++head) {
          const int nc = comp_nodes[head];
          for (int e : input.incident_edges(nc)) {
            if (solved[std::size_t(e)] || contains(input.path_edges, e)) continue;
            const auto& en = input.edge_nodes[std::size_t(e)];
            const int other = (en[0] == nc) ? en[1] : en[0];
            if (!marked[std::size_t(other)]) continue;
            if (!contains(comp_edges, e)) comp_edges.push_back(e);
            if (!seen[std::size_t(other)]) {
              seen[std::size_t(other)] = true;
              comp_nodes.push_back(other);
            }
          }
        }
        if (comp_edges.empty()) continue;
        std::sort(comp_nodes.begin(), comp_nodes.end());
        std::sort(comp_edges.begin(), comp_edges.end());
        for (int e : comp_edges) solved[std::size_t(e)] = true;
        remaining -= int(comp_edges.size());
        for (int n : comp_nodes) J[std::size_t(n)] += 1;
        ph.forward.push_back({comp_nodes, comp_edges});
        moved = true;
      }
      if (!ph.forward.empty()) {
        plan.phases.push_back(std::move(ph));
        ++step;
      }
    }

    // Sidewise solves of path edges at nodes with all but one edge covered.
    {
      Phase ph;
      ph.step = step;
      std::vector<int> snapshot;
      for (int n = 0; n < nn; ++n)
        if (marked[std::size_t(n)]) snapshot.push_back(n);
      for (int n : snapshot) {
        if (J[std::size_t(n)] != input.degree(n) - 1) continue;
        bool fired = false;
        for (int e : input.incident_edges(n)) {
          if (solved[std::size_t(e)] || !contains(input.path_edges, e)) continue;
          solved[std::size_t(e)] = true;
          --remaining;
          const auto& en = input.edge_nodes[std::size_t(e)];
          for (int m : {en[0], en[1]}) {
            marked[std::size_t(m)] = true;
            J[std::size_t(m)] += 1;
          }
          ph.sidewise.push_back({e, n});
          fired = true;
        }
        moved = moved || fired;
      }
      if (!ph.sidewise.empty()) {
        plan.phases.push_back(std::move(ph));
        ++step;
      }
    }

    if (!moved)
      throw PlanStalled("no forward component and no sidewise-ready node; " +
                        std::to_string(remaining) + " edges unsolved");
  }
  return plan;
}

}  // namespace beamnet
