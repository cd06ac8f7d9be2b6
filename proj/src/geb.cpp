#include "beamnet/geb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace beamnet {

namespace {

// Asymmetry tolerance for finite-difference rotation products: large enough
// for discretization noise, small enough to flag a non-rotation field.
constexpr double kFdSkewTol = 1e-3;

Vec6 strain_block(const BeamSpec& spec, double x, const Mat3& r, const Vec3& dp,
                  const Mat3& dr) {
  Vec6 raw;
  raw.head<3>() = r.transpose() * dp - e1();
  raw.tail<3>() = vec(r.transpose() * dr, kFdSkewTol) - spec.curvature_at(x);
  Eigen::LLT<Mat6> llt(spec.flex_at(x));
  return llt.solve(raw);
}

}  // namespace

void GebField::allocate(int nx_, int nt_, double dx_, double dt_) {
  nx = nx_;
  n_t = nt_;
  dx = dx_;
  dt = dt_;
  p.assign(std::size_t(nx + 1) * std::size_t(n_t + 1), Vec3::Zero());
  R.assign(p.size(), Mat3::Identity());
}

BeamField transform(const GebField& field, const BeamSpec& spec) {
  if (field.nx < 2 || field.n_t < 2)
    throw ValidationError("transform: need at least 3 samples in each direction");
  BeamField out;
  out.allocate(field.nx, field.n_t, field.dx, field.dt);

  // Centered differences, second-order one-sided at the edges.
  auto stencil = [](auto get, int i, int last, double h) {
    using T = decltype(get(0));
    if (i == 0) return T(((-3.0) * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h));
    if (i == last)
      return T((3.0 * get(last) - 4.0 * get(last - 1) + get(last - 2)) / (2.0 * h));
    return T((get(i + 1) - get(i - 1)) / (2.0 * h));
  };
  auto d_dt_p = [&](int ix, int it) -> Vec3 {
    return stencil([&](int j) -> Vec3 { return field.p_at(ix, j); }, it, field.n_t, field.dt);
  };
  auto d_dt_R = [&](int ix, int it) -> Mat3 {
    return stencil([&](int j) -> Mat3 { return field.R_at(ix, j); }, it, field.n_t, field.dt);
  };
  auto d_dx_p = [&](int ix, int it) -> Vec3 {
    return stencil([&](int j) -> Vec3 { return field.p_at(j, it); }, ix, field.nx, field.dx);
  };
  auto d_dx_R = [&](int ix, int it) -> Mat3 {
    return stencil([&](int j) -> Mat3 { return field.R_at(j, it); }, ix, field.nx, field.dx);
  };

  for (int it = 0; it <= field.n_t; ++it) {
    for (int ix = 0; ix <= field.nx; ++ix) {
      const Mat3& r = field.R_at(ix, it);
      const double x = field.dx * ix;
      Vec12 y;
      y.segment<3>(0) = r.transpose() * d_dt_p(ix, it);
      y.segment<3>(3) = vec(Mat3(r.transpose() * d_dt_R(ix, it)), kFdSkewTol);
      y.tail<6>() = strain_block(spec, x, r, d_dx_p(ix, it), d_dx_R(ix, it));
      out.at(ix, it) = y;
    }
  }
  return out;
}

XField12 igeb_initial_from_geb(const GebBeamData& data, const BeamSpec& spec, int n_samples) {
  std::vector<Vec12> vals(static_cast<std::size_t>(n_samples));
  const double h = spec.length / double(n_samples - 1);
  for (int k = 0; k < n_samples; ++k) {
    const double x = h * k;
    const Mat3 r0 = data.R0.at(x);
    Vec12 y;
    y.segment<3>(0) = r0.transpose() * data.p1.at(x);
    y.segment<3>(3) = r0.transpose() * data.w0.at(x);
    y.tail<6>() = strain_block(spec, x, r0, data.p0.derivative_at(x), data.R0.derivative_at(x));
    vals[std::size_t(k)] = y;
  }
  return XField12::from_samples(0.0, h, std::move(vals));
}

Series6 qn_from_dirichlet(const Sampled<Vec3>& fp, const Sampled<Mat3>& fR) {
  const std::size_t n = std::max<std::size_t>(fp.size(), 2);
  const double step = fp.is_constant() ? 1.0 : fp.step();
  std::vector<Vec6> vals(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = fp.start() + step * double(k);
    const Mat3 r = fR.at(t);
    Vec6 q;
    q.head<3>() = r.transpose() * fp.derivative_at(t);
    q.tail<3>() = vec(Mat3(r.transpose() * fR.derivative_at(t)), kFdSkewTol);
    vals[k] = q;
  }
  return Series6::from_samples(fp.start(), step, std::move(vals));
}

Series6 fn_from_qn(const Series6& q, const Sampled<Mat3>& rotation_trace,
                   const Mat3& undeformed_rotation, NodeKind kind) {
  const std::size_t n = std::max<std::size_t>(q.size(), 1);
  std::vector<Vec6> vals(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = q.start() + q.step() * double(k);
    Mat3 m = rotation_trace.at(t);
    if (kind == NodeKind::MultipleKirchhoff) m = m * undeformed_rotation.transpose();
    Vec6 f;
    f.head<3>() = m * q.at(t).head<3>();
    f.tail<3>() = m * q.at(t).tail<3>();
    vals[k] = f;
  }
  return Series6::from_samples(q.start(), q.step(), std::move(vals));
}

std::string CompatReport::to_string() const {
  std::ostringstream os;
  for (const auto& l : lines) os << l << "\n";
  return os.str();
}

namespace {

struct EndpointState {
  Vec6 v, z;
  Mat6 rr;  // diag(R, R) of the undeformed rotation at the endpoint
};

void compat_families(const NetworkSpec& spec, const std::vector<Series6>& q,
                     const std::vector<std::vector<EndpointState>>& st, int order,
                     CompatReport* rep) {
  auto note = [&](int node, const char* what, double r) {
    std::ostringstream os;
    os << "node " << spec.nodes[std::size_t(node)].id << " order " << order << " " << what
       << ": residual " << r;
    rep->lines.push_back(os.str());
    rep->max_residual = std::max(rep->max_residual, r);
  };
  for (std::size_t n = 0; n < spec.nodes.size(); ++n) {
    const NodeRecord& node = spec.nodes[n];
    const Vec6 qn = (order == 0) ? q[n].at(q[n].start()) : q[n].derivative_at(q[n].start());
    const auto& states = st[n];
    if (node.kind == NodeKind::MultipleKirchhoff) {
      double cont = 0.0;
      const Vec6 ref = states[0].rr * states[0].v;
      Vec6 balance = Vec6::Zero();
      for (std::size_t a = 0; a < states.size(); ++a) {
        cont = std::max(cont,
                        (states[a].rr * states[a].v - ref).cwiseAbs().maxCoeff());
        balance += double(node.incident[a].tau) * (states[a].rr * states[a].z);
      }
      note(int(n), "velocity continuity", cont);
      note(int(n), "force balance", (balance - qn).cwiseAbs().maxCoeff());
    } else if (node.kind == NodeKind::SimpleNeumann) {
      const double r =
          (double(node.incident[0].tau) * states[0].z - qn).cwiseAbs().maxCoeff();
      note(int(n), "force data", r);
    } else {
      note(int(n), "velocity data", (states[0].v - qn).cwiseAbs().maxCoeff());
    }
  }
}

}  // namespace

CompatReport check_first_order_compat(const NetworkSpec& spec,
                                      std::span<const DiagonalizedBeam> dbs,
                                      const std::vector<XField12>& y0,
                                      const std::vector<Series6>& q) {
  CompatReport rep;
  // Endpoint values of the data and of its implied first time derivative.
  auto endpoint = [&](const NodeIncidence& inc, int order) {
    const BeamSpec& b = spec.beams[std::size_t(inc.beam)];
    const double x = inc.at_end ? b.length : 0.0;
    EndpointState s;
    s.rr = b.rotation6_at(x);
    Vec12 y;
    if (order == 0) {
      y = y0[std::size_t(inc.beam)].at(x);
    } else {
      const Vec12 y_here = y0[std::size_t(inc.beam)].at(x);
      const Vec12 dy = y0[std::size_t(inc.beam)].derivative_at(x);
      y = -assemble_A(b, x) * dy - assemble_Bbar(b, x) * y_here + gbar(b, x, y_here);
    }
    s.v = y.head<6>();
    s.z = y.tail<6>();
    return s;
  };
  for (int order = 0; order <= 1; ++order) {
    std::vector<std::vector<EndpointState>> st(spec.nodes.size());
    for (std::size_t n = 0; n < spec.nodes.size(); ++n)
      for (const NodeIncidence& inc : spec.nodes[n].incident)
        st[n].push_back(endpoint(inc, order));
    compat_families(spec, q, st, order, &rep);
  }
  (void)dbs;
  return rep;
}

CompatReport check_geb_compat(const GebData& data, const NetworkSpec& spec) {
  CompatReport rep;
  auto note = [&](int node, const char* what, double r) {
    std::ostringstream os;
    os << "node " << spec.nodes[std::size_t(node)].id << " " << what << ": residual " << r;
    rep.lines.push_back(os.str());
    rep.max_residual = std::max(rep.max_residual, r);
  };
  auto endpoint_x = [&](const NodeIncidence& inc) {
    return inc.at_end ? spec.beams[std::size_t(inc.beam)].length : 0.0;
  };
  auto z0_at = [&](const NodeIncidence& inc) {
    const BeamSpec& b = spec.beams[std::size_t(inc.beam)];
    const GebBeamData& d = data.beams[std::size_t(inc.beam)];
    const double x = endpoint_x(inc);
    return strain_block(b, x, d.R0.at(x), d.p0.derivative_at(x), d.R0.derivative_at(x));
  };

  for (std::size_t n = 0; n < spec.nodes.size(); ++n) {
    const NodeRecord& node = spec.nodes[n];
    if (node.kind == NodeKind::SimpleDirichlet) {
      const NodeIncidence& inc = node.incident[0];
      const GebBeamData& d = data.beams[std::size_t(inc.beam)];
      const double x = endpoint_x(inc);
      note(int(n), "initial position match",
           (data.node_fp[n].at(data.node_fp[n].start()) - d.p0.at(x)).cwiseAbs().maxCoeff());
      note(int(n), "initial rotation match",
           (data.node_fR[n].at(data.node_fR[n].start()) - d.R0.at(x)).norm());
      // Rates at t = 0.
      const Mat3 fr0 = data.node_fR[n].at(data.node_fR[n].start());
      note(int(n), "velocity rate match",
           (d.p1.at(x) - data.node_fp[n].derivative_at(data.node_fp[n].start()))
               .cwiseAbs()
               .maxCoeff());
      const Vec3 w_node =
          vec(Mat3(data.node_fR[n].derivative_at(data.node_fR[n].start()) * fr0.transpose()),
              kFdSkewTol);
      note(int(n), "rotation rate match", (d.w0.at(x) - w_node).cwiseAbs().maxCoeff());
      continue;
    }
    if (node.kind == NodeKind::MultipleKirchhoff) {
      const NodeIncidence& ref = node.incident[0];
      const GebBeamData& dref = data.beams[std::size_t(ref.beam)];
      const double xref = endpoint_x(ref);
      const Mat3 change_ref =
          dref.R0.at(xref) * spec.beams[std::size_t(ref.beam)].rotation_at(xref).transpose();
      double pos = 0.0, rot = 0.0, vel = 0.0, wrate = 0.0;
      Vec6 balance = Vec6::Zero();
      for (const NodeIncidence& inc : node.incident) {
        const GebBeamData& d = data.beams[std::size_t(inc.beam)];
        const BeamSpec& b = spec.beams[std::size_t(inc.beam)];
        const double x = endpoint_x(inc);
        pos = std::max(pos, (d.p0.at(x) - dref.p0.at(xref)).cwiseAbs().maxCoeff());
        rot = std::max(rot,
                       (d.R0.at(x) * b.rotation_at(x).transpose() - change_ref).norm());
        vel = std::max(vel, (d.p1.at(x) - dref.p1.at(xref)).cwiseAbs().maxCoeff());
        wrate = std::max(wrate, (d.w0.at(x) - dref.w0.at(xref)).cwiseAbs().maxCoeff());
        balance += double(inc.tau) * (b.rotation6_at(x) * z0_at(inc));
      }
      note(int(n), "position continuity", pos);
      note(int(n), "rotation change continuity", rot);
      note(int(n), "velocity continuity", vel);
      note(int(n), "rotation rate continuity", wrate);
      const Vec6 q0 = data.node_q[n].at(data.node_q[n].start());
      note(int(n), "strain force balance", (balance - q0).cwiseAbs().maxCoeff());
      continue;
    }
    // Simple Neumann.
    const NodeIncidence& inc = node.incident[0];
    const BeamSpec& b = spec.beams[std::size_t(inc.beam)];
    const double x = endpoint_x(inc);
    const Vec6 q0 = data.node_q[n].at(data.node_q[n].start());
    const Vec6 bal = double(inc.tau) * (b.rotation6_at(x) * z0_at(inc));
    note(int(n), "strain force data", (bal - q0).cwiseAbs().maxCoeff());
  }
  return rep;
}

namespace {

// u = diag(I, C) y: velocities and strains.
Vec12 strain_state(const BeamSpec& spec, double x, const Vec12& y) {
  Vec12 u = y;
  u.tail<6>() = spec.flex_at(x) * y.tail<6>();
  return u;
}

}  // namespace

GebField reconstruct_beam(const BeamField& field, const BeamSpec& spec,
                          const BeamAnchor& anchor, const ReconstructOptions& opt,
                          ReconstructReport* report, int beam_index) {
  const int nx = field.nx, nt = field.n_t;
  const double dx = field.dx, dt = field.dt;
  if (anchor.ix != 0 && anchor.ix != nx)
    throw ValidationError("reconstruct: anchor must sit at a beam endpoint");

  // Strain-state samples.
  std::vector<Vec12> u(std::size_t(nx + 1) * std::size_t(nt + 1));
  for (int it = 0; it <= nt; ++it)
    for (int ix = 0; ix <= nx; ++ix)
      u[std::size_t(it) * std::size_t(nx + 1) + std::size_t(ix)] =
          strain_state(spec, dx * ix, field.at(ix, it));
  auto uat = [&](int ix, int it) -> const Vec12& {
    return u[std::size_t(it) * std::size_t(nx + 1) + std::size_t(ix)];
  };

  // Transport identity of the strain state, interior samples; large values
  // mean the input does not correspond to any displacement field.
  double identity_residual = 0.0;
  for (int it = 1; it < nt; ++it) {
    for (int ix = 1; ix < nx; ++ix) {
      const Vec12& uc = uat(ix, it);
      const Vec6 dtu =
          (uat(ix, it + 1).tail<6>() - uat(ix, it - 1).tail<6>()) / (2.0 * dt);
      const Vec6 dxu = (uat(ix + 1, it).head<6>() - uat(ix - 1, it).head<6>()) / (2.0 * dx);
      const Vec3 upsilon = spec.curvature_at(dx * ix);
      Vec6 lhs = dtu - dxu;
      lhs.head<3>() -= hat(upsilon) * uc.segment<3>(0) + hat(e1()) * uc.segment<3>(3);
      lhs.tail<3>() -= hat(upsilon) * uc.segment<3>(3);
      Vec6 rhs;
      rhs.head<3>() = hat(uc.segment<3>(3)) * uc.segment<3>(6) +
                      hat(uc.segment<3>(0)) * uc.segment<3>(9);
      rhs.tail<3>() = hat(uc.segment<3>(3)) * uc.segment<3>(9);
      identity_residual = std::max(identity_residual, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  if (report) {
    report->strain_identity_residual.push_back(identity_residual);
    if (identity_residual > opt.compat_tol)
      report->warnings.push_back(
          "CompatibilityWarning: beam " + std::to_string(beam_index) +
          " strain transport identity residual " + std::to_string(identity_residual));
  }

  GebField out;
  out.allocate(nx, nt, dx, dt);

  std::vector<UnitQuaternion> quat(std::size_t(nx + 1) * std::size_t(nt + 1));
  auto qref = [&](int ix, int it) -> UnitQuaternion& {
    return quat[std::size_t(it) * std::size_t(nx + 1) + std::size_t(ix)];
  };

  auto step_quat = [](const UnitQuaternion& q, const Vec3& omega, double h) {
    UnitQuaternion r = q * UnitQuaternion::from_rotation_vector(omega * h);
    r.normalize();
    return r;
  };
  auto omega_x = [&](int ix, int it) -> Vec3 {
    return uat(ix, it).segment<3>(9) + spec.curvature_at(dx * ix);
  };
  auto integrate_row_x = [&](int it) {
    for (int ix = anchor.ix; ix < nx; ++ix)
      qref(ix + 1, it) =
          step_quat(qref(ix, it), 0.5 * (omega_x(ix, it) + omega_x(ix + 1, it)), dx);
    for (int ix = anchor.ix; ix > 0; --ix)
      qref(ix - 1, it) =
          step_quat(qref(ix, it), 0.5 * (omega_x(ix, it) + omega_x(ix - 1, it)), -dx);
  };
  auto omega_t = [&](int ix, int it) -> Vec3 { return uat(ix, it).segment<3>(3); };

  qref(anchor.ix, 0) = quat_from_rot(anchor.R0);
  if (opt.order == SweepOrder::TimeThenSpace) {
    for (int it = 0; it < nt; ++it)
      qref(anchor.ix, it + 1) = step_quat(
          qref(anchor.ix, it), 0.5 * (omega_t(anchor.ix, it) + omega_t(anchor.ix, it + 1)), dt);
    for (int it = 0; it <= nt; ++it) integrate_row_x(it);
  } else {
    integrate_row_x(0);
    for (int ix = 0; ix <= nx; ++ix)
      for (int it = 0; it < nt; ++it)
        qref(ix, it + 1) =
            step_quat(qref(ix, it), 0.5 * (omega_t(ix, it) + omega_t(ix, it + 1)), dt);
  }

  double drift = 0.0;
  for (int it = 0; it <= nt; ++it)
    for (int ix = 0; ix <= nx; ++ix) {
      const Mat3 r = quat_to_rot(qref(ix, it));
      drift = std::max(drift, (r.transpose() * r - Mat3::Identity()).norm());
      out.R_at(ix, it) = r;
    }
  if (report) report->rotation_drift.push_back(drift);
  if (drift > opt.rotation_tol)
    throw NotRotation("reconstruct: orthonormality drift " + std::to_string(drift));

  // Initial centerline from the axial strain, then velocities in time.
  auto axis_dir = [&](int ix) -> Vec3 {
    return out.R_at(ix, 0) * (uat(ix, 0).segment<3>(6) + e1());
  };
  out.p_at(anchor.ix, 0) = anchor.p0;
  for (int ix = anchor.ix; ix < nx; ++ix)
    out.p_at(ix + 1, 0) = out.p_at(ix, 0) + 0.5 * dx * (axis_dir(ix) + axis_dir(ix + 1));
  for (int ix = anchor.ix; ix > 0; --ix)
    out.p_at(ix - 1, 0) = out.p_at(ix, 0) - 0.5 * dx * (axis_dir(ix) + axis_dir(ix - 1));
  for (int ix = 0; ix <= nx; ++ix) {
    for (int it = 0; it < nt; ++it) {
      const Vec3 va = out.R_at(ix, it) * uat(ix, it).segment<3>(0);
      const Vec3 vb = out.R_at(ix, it + 1) * uat(ix, it + 1).segment<3>(0);
      out.p_at(ix, it + 1) = out.p_at(ix, it) + 0.5 * dt * (va + vb);
    }
  }
  return out;
}

std::vector<GebField> reconstruct(const Trajectory& traj, std::span<const BeamSpec> specs,
                                  std::span<const BeamAnchor> anchors,
                                  const ReconstructOptions& opt, ReconstructReport* report) {
  std::vector<GebField> out;
  out.reserve(traj.beams.size());
  for (std::size_t i = 0; i < traj.beams.size(); ++i)
    out.push_back(reconstruct_beam(traj.beams[i], specs[i], anchors[i], opt, report, int(i)));
  return out;
}

std::vector<double> geb_residual(const GebField& field, const BeamSpec& spec) {
  const int nx = field.nx, nt = field.n_t;
  const double dx = field.dx, dt = field.dt;
  const BeamField y = transform(field, spec);

  // Momentum in the fixed basis and fixed-basis internal forces.
  std::vector<Vec6> mom(std::size_t(nx + 1) * std::size_t(nt + 1));
  std::vector<Vec6> flux(mom.size());
  auto id = [&](int ix, int it) {
    return std::size_t(it) * std::size_t(nx + 1) + std::size_t(ix);
  };
  for (int it = 0; it <= nt; ++it)
    for (int ix = 0; ix <= nx; ++ix) {
      const Vec12 yv = y.at(ix, it);
      const Mat3& r = field.R_at(ix, it);
      const Vec6 mv = spec.mass_at(dx * ix) * yv.head<6>();
      Vec6 m;
      m.head<3>() = r * mv.head<3>();
      m.tail<3>() = r * mv.tail<3>();
      Vec6 f;
      f.head<3>() = r * yv.segment<3>(6);
      f.tail<3>() = r * yv.segment<3>(9);
      mom[id(ix, it)] = m;
      flux[id(ix, it)] = f;
    }

  // Doubly-interior samples only: both difference layers are centered
  // there, so the edge stencil switch cannot pollute the residual.
  std::vector<double> res(mom.size(), 0.0);
  for (int it = 2; it + 1 < nt; ++it) {
    for (int ix = 2; ix + 1 < nx; ++ix) {
      const Vec6 dtm = (mom[id(ix, it + 1)] - mom[id(ix, it - 1)]) / (2.0 * dt);
      const Vec6 dxf = (flux[id(ix + 1, it)] - flux[id(ix - 1, it)]) / (2.0 * dx);
      const Vec3 dxp = (field.p_at(ix + 1, it) - field.p_at(ix - 1, it)) / (2.0 * dx);
      Vec6 rhs = dxf;
      rhs.tail<3>() += dxp.cross(Vec3(flux[id(ix, it)].head<3>()));
      res[id(ix, it)] = (dtm - rhs).norm();
    }
  }
  return res;
}

}  // namespace beamnet
