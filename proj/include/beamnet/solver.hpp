#pragma once

#include <functional>
#include <span>

#include "beamnet/network.hpp"
#include "beamnet/trajectory.hpp"

namespace beamnet {

/// Optional extras for the transport solvers. `forcing` is an extra source
/// in physical variables, used to manufacture exact solutions in tests.
struct SolveOptions {
  double blowup_bound = 1e6;
  double compat_tol = 1e-6;
  bool check_compatibility = true;
  std::function<Vec12(int beam, double x, double t)> forcing;
};

/// Integrates the coupled network system forward in time by characteristic
/// back-tracing (linear interpolation at the feet, Heun treatment of the
/// lower-order terms). Node endpoints are closed with the assembled
/// couplings each step.
///
/// y0 holds one x-sampled initial state per beam; q holds one time series
/// per node. Throws BlowUp when any state component exceeds the bound.
Trajectory solve_forward(const NetworkSpec& spec, std::span<const DiagonalizedBeam> dbs,
                         const std::vector<XField12>& y0, const std::vector<Series6>& q,
                         const Grid& grid, const SolveOptions& opt = {});

enum class SweepDirection { Rightward, Leftward };

/// Integrates one beam in x, treating t as the transverse variable. The
/// full state is prescribed on the anchor edge (x = 0 for a rightward sweep,
/// x = length for a leftward one); velocities are prescribed on the t = 0
/// edge and internal forces on the t = T edge, each closing the
/// characteristic family that enters there.
BeamField solve_sidewise(const BeamSpec& spec, const DiagonalizedBeam& db, SweepDirection dir,
                         const Series12& anchor_trace, const XField6& velocity_t0,
                         const XField6& force_tT, int nx, double dt, int n_t,
                         const SolveOptions& opt = {}, std::vector<std::string>* warnings = nullptr,
                         int beam_index = 0);

}  // namespace beamnet
