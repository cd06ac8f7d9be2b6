#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamnet/planner.hpp"
#include "beamnet/solver.hpp"

namespace beamnet {

/// Travel time of the slowest characteristic across the beam (trapezoid
/// quadrature on the sample grid).
double transmission_time(const DiagonalizedBeam& db);

/// Smallest horizon from which profiles can be prescribed on the A-shaped
/// network: slowest time across either upper beam plus slowest time across
/// either controlled beam.
double controllability_time(std::span<const double> beam_times);

/// Cubic series matching (value, slope) at both ends of [a, b], sampled at
/// the requested count.
template <int N>
Sampled<Eigen::Matrix<double, N, 1>> hermite_bridge(
    double a, double b, const Eigen::Matrix<double, N, 1>& ya,
    const Eigen::Matrix<double, N, 1>& da, const Eigen::Matrix<double, N, 1>& yb,
    const Eigen::Matrix<double, N, 1>& db, int n_samples) {
  using V = Eigen::Matrix<double, N, 1>;
  std::vector<V> vals(static_cast<std::size_t>(n_samples));
  const double step = (b - a) / double(n_samples - 1);
  for (int k = 0; k < n_samples; ++k)
    vals[std::size_t(k)] = hermite(a, b, ya, da, yb, db, a + step * k);
  return Sampled<V>::from_samples(a, step, std::move(vals));
}

/// Where a constructed solution must coincide with the preliminary forward
/// solution: below a characteristic curve from the anchor side, or on a full
/// time strip for beams solved forward.
struct RecoveryDomain {
  enum class Kind { Characteristic, Rectangle } kind = Kind::Rectangle;
  double window = 0.0;  // anchor value of the curve, or the strip height
  bool anchor_at_end = false;
};

/// Control synthesis over an arbitrary scheduled network. Profiles are given
/// per charged node for every incident beam (ascending beam index), on
/// [t_star, t_final].
struct GeneralControlProblem {
  const NetworkSpec* network = nullptr;
  std::span<const DiagonalizedBeam> dbs;
  std::vector<XField12> y0;
  std::vector<Series6> node_data;  // all nodes; controlled-node entries ignored
  std::vector<int> charged;
  std::vector<int> controlled;
  std::vector<std::vector<Series12>> profiles;  // aligned with `charged`
  double t_star = 0.0;
  double t_final = 0.0;
  double profile_tol = 1e-8;
};

struct ExecutionResult {
  Trajectory trajectory;
  Trajectory preliminary;
  std::vector<Series6> controls;  // aligned with the controlled-node list
  double t_bar = 0.0;             // minimal preliminary horizon
  double t_bar_grid = 0.0;        // grid-snapped preliminary horizon
  std::vector<RecoveryDomain> recovery;     // per beam
  std::vector<double> recovery_deviation;   // per beam, vs the preliminary
  std::vector<double> profile_trace_error;  // per charged-node beam
  std::vector<std::string> warnings;
};

/// Runs the planned phases: preliminary whole-network solve, bridged data at
/// charged nodes, then forward/sidewise solves in order, sharing traces.
/// Controls are the resulting traces at the controlled nodes.
ExecutionResult execute_plan(const Plan& plan, const GeneralControlProblem& problem,
                               const Grid& grid);

/// Profile steering on the A-shaped network: five beams, the two top beams
/// leave the profiled node, the crossbar joins their far ends, and the two
/// controlled legs hang from the crossbar joints.
struct ControlProblem {
  const NetworkSpec* network = nullptr;
  std::vector<XField12> y0;
  Series6 q1 = Series6::constant(Vec6::Zero());
  Series6 q2 = Series6::constant(Vec6::Zero());
  Series6 q3 = Series6::constant(Vec6::Zero());
  Series12 profile1 = Series12::constant(Vec12::Zero());
  Series12 profile2 = Series12::constant(Vec12::Zero());
  double t_star = 0.0;
  double t_final = 0.0;
};

struct ControlResult {
  Series6 q4, q5;
  Trajectory trajectory;
  Trajectory preliminary;
  double t_bar = 0.0;
  double t_bar_grid = 0.0;
  std::vector<RecoveryDomain> recovery;
  std::vector<double> recovery_deviation;
  std::vector<double> profile_trace_error;
  std::vector<std::string> warnings;
  std::string report() const;
};

/// Throws ValidationError unless the network matches the A-shaped layout.
void require_a_network(const NetworkSpec& spec);

ControlResult synthesize(const ControlProblem& problem, int nx, double cfl);

/// Max deviation from the preliminary solution over each beam's recovery
/// domain (diagnostic; equals scheme error for consistent data).
std::vector<double> verify_initial_recovery(const Trajectory& constructed,
                                            const Trajectory& preliminary,
                                            std::span<const DiagonalizedBeam> dbs,
                                            std::span<const RecoveryDomain> domains);

}  // namespace beamnet
