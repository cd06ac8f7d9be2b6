#pragma once

#include <span>
#include <string>
#include <vector>

#include "beamnet/beam.hpp"
#include "beamnet/network.hpp"
#include "beamnet/types.hpp"

namespace beamnet {

/// Shared space-time discretization: every beam carries nx cells of its own
/// width, all beams advance with the common step dt. dt satisfies
/// dt <= cfl * min over beams of (dx / fastest speed).
struct Grid {
  std::vector<int> nx;     // cells per beam
  std::vector<double> dx;  // cell width per beam
  double dt = 0.0;
  int n_t = 0;  // steps; horizon T = dt * n_t
  double cfl = 0.9;

  double horizon() const { return dt * n_t; }
};

double cfl_dt(std::span<const DiagonalizedBeam> dbs, std::span<const int> nx, double cfl);

/// Builds a grid whose step lands exactly on the horizon T.
Grid make_grid(std::span<const DiagonalizedBeam> dbs, std::span<const int> nx, double cfl,
               double T);

/// One beam's space-time field of 12-component states, stored physically
/// (velocities then internal forces). Layout: [t][x][component].
struct BeamField {
  int nx = 0;
  int n_t = 0;
  double dx = 0.0;
  double dt = 0.0;
  std::vector<double> y;

  void allocate(int nx_, int nt_, double dx_, double dt_) {
    nx = nx_;
    n_t = nt_;
    dx = dx_;
    dt = dt_;
    y.assign(std::size_t(nx + 1) * std::size_t(n_t + 1) * 12, 0.0);
  }

  Eigen::Map<Vec12> at(int ix, int it) {
    return Eigen::Map<Vec12>(&y[(std::size_t(it) * std::size_t(nx + 1) + std::size_t(ix)) * 12]);
  }
  Eigen::Map<const Vec12> at(int ix, int it) const {
    return Eigen::Map<const Vec12>(
        &y[(std::size_t(it) * std::size_t(nx + 1) + std::size_t(ix)) * 12]);
  }

  /// Trace along one endpoint as a time series on [0, dt*n_t].
  Series12 trace(int ix) const;
  /// Field restricted to one time level as an x-sampled series.
  XField12 slice_t(int it) const;
};

/// Space-time sampled intrinsic states of all beams. The Riemann view
/// r = L y is exposed per sample through the beam's change of basis.
struct Trajectory {
  Grid grid;
  std::vector<BeamField> beams;
  std::vector<std::string> warnings;

  Vec12 riemann_at(const DiagonalizedBeam& db, int beam, int ix, int it) const {
    return db.L[std::size_t(ix)] * Vec12(beams[std::size_t(beam)].at(ix, it));
  }
};

/// Mask over a beam field: keep samples with t <= t_limit(x). Used to
/// compare solutions on domains of determinacy.
struct FieldMask {
  int nx = 0;
  int n_t = 0;
  std::vector<std::uint8_t> keep;  // same [t][x] layout

  bool at(int ix, int it) const {
    return keep[std::size_t(it) * std::size_t(nx + 1) + std::size_t(ix)] != 0;
  }
  std::size_t count() const;
};

/// t_limit(x) = anchor_time - integral of the slowest characteristic slope,
/// measured from x = 0; `margin_slope` and `margin_const` shrink the domain
/// to account for the discrete dependency widening.
FieldMask restrict_to_characteristic_domain(const BeamField& field, const DiagonalizedBeam& db,
                                            double anchor_time, double margin_slope = 0.0,
                                            double margin_const = 0.0);

/// Max componentwise deviation between two fields over a mask.
double masked_max_deviation(const BeamField& a, const BeamField& b, const FieldMask& mask);

}  // namespace beamnet
