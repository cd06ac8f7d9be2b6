#include "beamnet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beamnet/geb.hpp"

namespace beamnet {

namespace {

// Linear interpolation of one component on a slice of 12-vectors.
double interp_component(const std::vector<Vec12>& slice, double spacing, double pos, int k) {
  const int last = int(slice.size()) - 1;
  double s = pos / spacing;
  s = std::clamp(s, 0.0, double(last));
  const int j = std::min(int(s), last - 1);
  const double w = s - j;
  return (1.0 - w) * slice[std::size_t(j)][k] + w * slice[std::size_t(j + 1)][k];
}

void check_blowup(const Vec12& r, double bound, const char* where) {
  if (!(r.cwiseAbs().maxCoeff() <= bound))
    throw BlowUp(std::string(where) + ": state exceeded bound " + std::to_string(bound));
}

// Source of the Riemann-variable transport equation at grid sample k.
struct SourceEval {
  const DiagonalizedBeam* db;
  const SolveOptions* opt;
  int beam;

  Vec12 operator()(int k, const Vec12& r, double t) const {
    const std::size_t i = std::size_t(k);
    Vec12 s = -db->B[i] * r + riemann_source(*db, k, r);
    if (opt->forcing) s += db->L[i] * opt->forcing(beam, db->x[i], t);
    return s;
  }
};

}  // namespace

Trajectory solve_forward(const NetworkSpec& spec, std::span<const DiagonalizedBeam> dbs,
                         const std::vector<XField12>& y0, const std::vector<Series6>& q,
                         const Grid& grid, const SolveOptions& opt) {
  const std::size_t nb = spec.beams.size();
  if (dbs.size() != nb || y0.size() != nb || q.size() != spec.nodes.size() ||
      grid.nx.size() != nb)
    throw TraceDimensionMismatch("solve_forward: input counts do not match the network");
  for (std::size_t i = 0; i < nb; ++i)
    if (dbs[i].n_samples() != grid.nx[i] + 1)
      throw TraceDimensionMismatch("solve_forward: beam sampling does not match the grid");

  std::vector<NodeCoupling> couplings;
  couplings.reserve(spec.nodes.size());
  for (int n = 0; n < int(spec.nodes.size()); ++n)
    couplings.push_back(assemble_coupling(spec, dbs, n));

  Trajectory traj;
  traj.grid = grid;
  traj.beams.resize(nb);

  // Current Riemann slices.
  std::vector<std::vector<Vec12>> cur(nb), next(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    traj.beams[i].allocate(grid.nx[i], grid.n_t, grid.dx[i], grid.dt);
    cur[i].resize(std::size_t(grid.nx[i] + 1));
    next[i].resize(cur[i].size());
    for (int ix = 0; ix <= grid.nx[i]; ++ix) {
      const Vec12 y = y0[i].at(grid.dx[i] * ix);
      traj.beams[i].at(ix, 0) = y;
      cur[i][std::size_t(ix)] = dbs[i].L[std::size_t(ix)] * y;
    }
  }

  if (opt.check_compatibility) {
    const CompatReport rep = check_first_order_compat(spec, dbs, y0, q);
    if (rep.max_residual > opt.compat_tol)
      traj.warnings.push_back("CompatibilityWarning: initial/nodal data residual " +
                              std::to_string(rep.max_residual) + " above " +
                              std::to_string(opt.compat_tol));
  }

  const double dt = grid.dt;
  for (int it = 1; it <= grid.n_t; ++it) {
    const double t_old = dt * (it - 1);
    const double t_new = dt * it;

    for (std::size_t i = 0; i < nb; ++i) {
      const DiagonalizedBeam& db = dbs[i];
      const int nx = grid.nx[i];
      const double dx = grid.dx[i];
      const SourceEval src{&db, &opt, int(i)};

      for (int ix = 0; ix <= nx; ++ix) {
        const std::size_t ks = std::size_t(ix);
        const double x = dx * ix;
        Vec12 base;
        for (int k = 0; k < 12; ++k) {
          const double lam = (k < 6) ? -db.speeds[ks][k] : db.speeds[ks][k - 6];
          const double foot = x - lam * dt;
          if (foot < -1e-12 || foot > db.length() + 1e-12) {
            base[k] = cur[i][ks][k];  // placeholder; overwritten by the node fill
          } else {
            base[k] = interp_component(cur[i], dx, foot, k);
          }
        }
        const Vec12 s1 = src(ix, base, t_old);
        const Vec12 pred = base + dt * s1;
        const Vec12 s2 = src(ix, pred, t_new);
        next[i][ks] = base + 0.5 * dt * (s1 + s2);
      }
    }

    // Close the node endpoints with the coupling maps.
    for (std::size_t n = 0; n < spec.nodes.size(); ++n) {
      const NodeRecord& node = spec.nodes[n];
      const auto order = node_block_order(node);
      const int kdeg = int(order.size());
      Eigen::VectorXd r_in(6 * kdeg);
      for (int a = 0; a < kdeg; ++a) {
        const NodeIncidence& inc = order[std::size_t(a)];
        const std::size_t b = std::size_t(inc.beam);
        const int ix = inc.at_end ? grid.nx[b] : 0;
        const Vec12& r = next[b][std::size_t(ix)];
        r_in.segment<6>(6 * a) = inc.at_end ? r.tail<6>() : r.head<6>();
      }
      const Eigen::VectorXd r_out = apply_node(couplings[n], r_in, q[n].at(t_new));
      for (int a = 0; a < kdeg; ++a) {
        const NodeIncidence& inc = order[std::size_t(a)];
        const std::size_t b = std::size_t(inc.beam);
        const int ix = inc.at_end ? grid.nx[b] : 0;
        if (inc.at_end)
          next[b][std::size_t(ix)].head<6>() = r_out.segment<6>(6 * a);
        else
          next[b][std::size_t(ix)].tail<6>() = r_out.segment<6>(6 * a);
      }
    }

    for (std::size_t i = 0; i < nb; ++i) {
      for (int ix = 0; ix <= grid.nx[i]; ++ix) {
        const std::size_t ks = std::size_t(ix);
        check_blowup(next[i][ks], opt.blowup_bound, "solve_forward");
        traj.beams[i].at(ix, it) = dbs[i].Linv[ks] * next[i][ks];
      }
      cur[i].swap(next[i]);
    }
  }
  return traj;
}

BeamField solve_sidewise(const BeamSpec& spec, const DiagonalizedBeam& db, SweepDirection dir,
                         const Series12& anchor_trace, const XField6& velocity_t0,
                         const XField6& force_tT, int nx, double dt, int n_t,
                         const SolveOptions& opt, std::vector<std::string>* warnings,
                         int beam_index) {
  if (db.n_samples() != nx + 1)
    throw TraceDimensionMismatch("solve_sidewise: beam sampling does not match the grid");
  const double T = dt * n_t;
  const double dx = spec.length / nx;
  for (int k = 0; k < nx + 1; ++k)
    if (dx * db.slowness(k) > T)
      throw ValidationError("solve_sidewise: horizon too short for one x-step");

  BeamField field;
  field.allocate(nx, n_t, dx, dt);

  const bool rightward = dir == SweepDirection::Rightward;
  auto phys = [&](int col) { return rightward ? col : nx - col; };
  const double dxs = rightward ? dx : -dx;

  const SourceEval src{&db, &opt, beam_index};
  // Sidewise source: per-component slope scaling of the forward source.
  auto sidewise_rates = [&](int k_samp, const Vec12& r, double t) {
    const Vec12 s = src(k_samp, r, t);
    Vec12 out;
    for (int k = 0; k < 12; ++k) {
      const double lam =
          (k < 6) ? -db.speeds[std::size_t(k_samp)][k] : db.speeds[std::size_t(k_samp)][k - 6];
      out[k] = s[k] / lam;
    }
    return out;
  };

  // Anchor column.
  std::vector<Vec12> cur(std::size_t(n_t + 1)), nxt(cur.size());
  {
    const std::size_t ka = std::size_t(phys(0));
    const double xa = db.x[ka];
    for (int m = 0; m <= n_t; ++m) {
      const Vec12 y = anchor_trace.at(dt * m);
      field.at(phys(0), m) = y;
      cur[std::size_t(m)] = db.L[ka] * y;
    }
    const double corner0 =
        (anchor_trace.at(0.0).head<6>() - velocity_t0.at(xa)).cwiseAbs().maxCoeff();
    const double cornerT =
        (anchor_trace.at(T).tail<6>() - force_tT.at(xa)).cwiseAbs().maxCoeff();
    if (warnings && corner0 > 1e-6)
      warnings->push_back("CompatibilityWarning: sidewise corner (anchor, t=0) mismatch " +
                          std::to_string(corner0));
    if (warnings && cornerT > 1e-6)
      warnings->push_back("CompatibilityWarning: sidewise corner (anchor, t=T) mismatch " +
                          std::to_string(cornerT));
  }

  for (int col = 1; col <= nx; ++col) {
    const int p_new = phys(col);
    const int p_old = phys(col - 1);
    const std::size_t kn = std::size_t(p_new);
    const double x_new = db.x[kn];

    auto signed_speed = [&](int k) {
      return (k < 6) ? -db.speeds[kn][k] : db.speeds[kn][k - 6];
    };

    // Trace one component back to the previous column or to a t-edge of the
    // new column strip; returns the advected value and the remaining
    // in-march distance for the source integration.
    auto trace_component = [&](int m, int k, bool edges_ready, double* step_len) -> double {
      const double t = dt * m;
      const double lam = signed_speed(k);
      const double foot = t - dxs / lam;
      *step_len = dxs;
      if (foot >= -1e-12 && foot <= T + 1e-12)
        return interp_component(cur, dt, std::clamp(foot, 0.0, T), k);
      // The characteristic leaves through a t-edge inside this strip.
      const double t_edge = foot < 0.0 ? 0.0 : T;
      const int m_edge = foot < 0.0 ? 0 : n_t;
      if (!edges_ready)
        throw ValidationError("solve_sidewise: edge row required before interior rows");
      const double x_star = x_new - lam * (t - t_edge);
      const double w = (x_star - db.x[std::size_t(p_old)]) / (x_new - db.x[std::size_t(p_old)]);
      const double at_old = cur[std::size_t(m_edge)][k];
      const double at_new = nxt[std::size_t(m_edge)][k];
      *step_len = x_new - x_star;
      return (1.0 - w) * at_old + w * at_new;
    };

    auto heun = [&](int m, const Vec12& base, const Vec12& step_len) {
      const double t = dt * m;
      const Vec12 s1 = sidewise_rates(p_new, base, t);
      Vec12 pred = base + step_len.cwiseProduct(s1);
      const Vec12 s2 = sidewise_rates(p_new, pred, t);
      return Vec12(base + 0.5 * step_len.cwiseProduct(s1 + s2));
    };

    auto compute_row = [&](int m, bool edges_ready) {
      Vec12 base, steps;
      std::array<bool, 12> missing{};
      for (int k = 0; k < 12; ++k) {
        const double lam = signed_speed(k);
        const double foot = dt * m - dxs / lam;
        const bool off_edge = (m == 0 && foot < -1e-12) || (m == n_t && foot > T + 1e-12);
        if (off_edge) {
          missing[std::size_t(k)] = true;
          base[k] = cur[std::size_t(m)][k];
          steps[k] = 0.0;
        } else {
          double len = dxs;
          base[k] = trace_component(m, k, edges_ready, &len);
          steps[k] = len;
        }
      }
      Vec12 r = heun(m, base, steps);
      // Close the family that enters through the t-edge at the edge rows.
      if (m == 0 || m == n_t) {
        const Mat6 u_chalf_inv = db.U[kn] * db.c_half_inv[kn];
        const Mat6 d_u_chalf = Mat6(db.speeds[kn].asDiagonal()) * db.U[kn] * db.c_half[kn];
        if (m == 0) {
          const Vec6 rhs = 2.0 * u_chalf_inv * velocity_t0.at(x_new);
          if (missing[6])
            r.tail<6>() = rhs - r.head<6>();
          else if (missing[0])
            r.head<6>() = rhs - r.tail<6>();
        } else {
          const Vec6 rhs = 2.0 * d_u_chalf * force_tT.at(x_new);
          if (missing[0])
            r.head<6>() = r.tail<6>() + rhs;
          else if (missing[6])
            r.tail<6>() = r.head<6>() - rhs;
        }
      }
      check_blowup(r, opt.blowup_bound, "solve_sidewise");
      nxt[std::size_t(m)] = r;
      field.at(p_new, m) = db.Linv[kn] * r;
    };

    compute_row(0, false);
    compute_row(n_t, false);
    for (int m = 1; m < n_t; ++m) compute_row(m, true);
    cur.swap(nxt);
  }
  return field;
}

}  // namespace beamnet
