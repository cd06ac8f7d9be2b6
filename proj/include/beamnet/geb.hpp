#pragma once

#include <span>
#include <string>
#include <vector>

#include "beamnet/kinematics.hpp"
#include "beamnet/network.hpp"
#include "beamnet/trajectory.hpp"

namespace beamnet {

/// Centerline positions and cross-section rotations of one beam sampled on a
/// space-time grid. Layout matches BeamField: [t][x].
struct GebField {
  int nx = 0;
  int n_t = 0;
  double dx = 0.0;
  double dt = 0.0;
  std::vector<Vec3> p;
  std::vector<Mat3> R;

  void allocate(int nx_, int nt_, double dx_, double dt_);
  std::size_t idx(int ix, int it) const {
    return std::size_t(it) * std::size_t(nx + 1) + std::size_t(ix);
  }
  const Vec3& p_at(int ix, int it) const { return p[idx(ix, it)]; }
  Vec3& p_at(int ix, int it) { return p[idx(ix, it)]; }
  const Mat3& R_at(int ix, int it) const { return R[idx(ix, it)]; }
  Mat3& R_at(int ix, int it) { return R[idx(ix, it)]; }
};

/// Initial data of the displacement-form model for one beam.
struct GebBeamData {
  XField3 p0 = XField3::constant(Vec3::Zero());       // initial centerline
  XFieldMat3 R0 = XFieldMat3::constant(Mat3::Identity());
  XField3 p1 = XField3::constant(Vec3::Zero());       // initial centerline velocity
  XField3 w0 = XField3::constant(Vec3::Zero());       // initial rotation rate, fixed basis
};

/// Displacement-form data for a network: per-beam initial fields plus nodal
/// series. Dirichlet nodes carry a prescribed position/rotation motion, the
/// others carry the body-frame load series.
struct GebData {
  std::vector<GebBeamData> beams;
  std::vector<Sampled<Vec3>> node_fp;   // Dirichlet nodes
  std::vector<Sampled<Mat3>> node_fR;   // Dirichlet nodes
  std::vector<Series6> node_q;          // multiple / Neumann nodes
};

/// Intrinsic state field from a displacement field: body-frame velocities
/// from time differences, strains from space differences against the
/// undeformed shape. Centered differences, one-sided at the edges.
BeamField transform(const GebField& field, const BeamSpec& spec);

/// Intrinsic initial state from displacement-form initial data, sampled on
/// an n-point grid.
XField12 igeb_initial_from_geb(const GebBeamData& data, const BeamSpec& spec, int n_samples);

/// Body-frame nodal data equivalent to a prescribed position/rotation motion.
Series6 qn_from_dirichlet(const Sampled<Vec3>& fp, const Sampled<Mat3>& fR);

/// Fixed-basis load series from body-frame data and the rotation trace of
/// the lowest-index incident beam at the node.
Series6 fn_from_qn(const Series6& q, const Sampled<Mat3>& rotation_trace,
                   const Mat3& undeformed_rotation, NodeKind kind);

struct CompatReport {
  double max_residual = 0.0;
  std::vector<std::string> lines;
  std::string to_string() const;
};

/// Residuals of the nodal conditions at t = 0 for the data itself and for
/// its first time derivative implied by the governing equations.
CompatReport check_first_order_compat(const NetworkSpec& spec,
                                      std::span<const DiagonalizedBeam> dbs,
                                      const std::vector<XField12>& y0,
                                      const std::vector<Series6>& q);

/// Residuals of the displacement-form compatibility conditions: initial
/// match of Dirichlet data, position / rotation-change continuity at
/// joints, velocity continuity, strain-form balance, Dirichlet rates.
CompatReport check_geb_compat(const GebData& data, const NetworkSpec& spec);

enum class SweepOrder { TimeThenSpace, SpaceThenTime };

struct ReconstructOptions {
  SweepOrder order = SweepOrder::TimeThenSpace;
  double compat_tol = 1e-3;     // residual of the strain transport identity
  double rotation_tol = 1e-6;   // orthonormality drift
};

struct BeamAnchor {
  int ix = 0;  // grid index of the anchoring node endpoint
  Vec3 p0 = Vec3::Zero();
  Mat3 R0 = Mat3::Identity();
};

struct ReconstructReport {
  std::vector<double> strain_identity_residual;  // per beam
  std::vector<double> rotation_drift;            // per beam
  std::vector<std::string> warnings;
};

/// Rebuilds centerline positions and rotations from an intrinsic field by
/// quaternion integration of the rotation rates and trapezoid integration
/// of the velocities, anchored at one node endpoint per beam.
GebField reconstruct_beam(const BeamField& field, const BeamSpec& spec,
                          const BeamAnchor& anchor, const ReconstructOptions& opt,
                          ReconstructReport* report, int beam_index);

std::vector<GebField> reconstruct(const Trajectory& traj, std::span<const BeamSpec> specs,
                                  std::span<const BeamAnchor> anchors,
                                  const ReconstructOptions& opt, ReconstructReport* report);

/// Pointwise norm of the displacement-form momentum balance residual,
/// evaluated by centered differences on interior samples (boundary ring is
/// zero).
std::vector<double> geb_residual(const GebField& field, const BeamSpec& spec);

}  // namespace beamnet
