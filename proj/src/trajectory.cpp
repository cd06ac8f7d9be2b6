#include "beamnet/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace beamnet {

double cfl_dt(std::span<const DiagonalizedBeam> dbs, std::span<const int> nx, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0))
    throw ValidationError("cfl must lie in (0, 1], got " + std::to_string(cfl));
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dbs.size(); ++i) {
    const double dx = dbs[i].length() / double(nx[i]);
    for (int k = 0; k < dbs[i].n_samples(); ++k)
      dt = std::min(dt, dx / dbs[i].speeds[std::size_t(k)].maxCoeff());
  }
  return cfl * dt;
}

Grid make_grid(std::span<const DiagonalizedBeam> dbs, std::span<const int> nx, double cfl,
               double T) {
  Grid g;
  g.cfl = cfl;
  g.nx.assign(nx.begin(), nx.end());
  for (std::size_t i = 0; i < dbs.size(); ++i)
    g.dx.push_back(dbs[i].length() / double(nx[i]));
  const double dt0 = cfl_dt(dbs, nx, cfl);
  g.n_t = std::max(1, int(std::ceil(T / dt0 - 1e-9)));
  g.dt = T / g.n_t;
  return g;
}

Series12 BeamField::trace(int ix) const {
  std::vector<Vec12> vals(std::size_t(n_t + 1));
  for (int it = 0; it <= n_t; ++it) vals[std::size_t(it)] = at(ix, it);
  return Series12::from_samples(0.0, dt, std::move(vals));
}

XField12 BeamField::slice_t(int it) const {
  std::vector<Vec12> vals(std::size_t(nx + 1));
  for (int ix = 0; ix <= nx; ++ix) vals[std::size_t(ix)] = at(ix, it);
  return XField12::from_samples(0.0, dx, std::move(vals));
}

std::size_t FieldMask::count() const {
  std::size_t c = 0;
  for (auto k : keep) c += k;
  return c;
}

FieldMask restrict_to_characteristic_domain(const BeamField& field, const DiagonalizedBeam& db,
                                            double anchor_time, double margin_slope,
                                            double margin_const) {
  FieldMask mask;
  mask.nx = field.nx;
  mask.n_t = field.n_t;
  mask.keep.assign(std::size_t(field.nx + 1) * std::size_t(field.n_t + 1), 0);

  // Cumulative trapezoid of the slowest characteristic slope on the shared grid.
  std::vector<double> limit(std::size_t(field.nx + 1));
  limit[0] = anchor_time;
  for (int j = 1; j <= field.nx; ++j)
    limit[std::size_t(j)] = limit[std::size_t(j - 1)] -
                            0.5 * field.dx * (db.slowness(j - 1) + db.slowness(j));
  for (int j = 0; j <= field.nx; ++j)
    limit[std::size_t(j)] -= margin_slope * field.dx * j + margin_const;

  for (int it = 0; it <= field.n_t; ++it) {
    const double t = field.dt * it;
    for (int ix = 0; ix <= field.nx; ++ix) {
      if (t <= limit[std::size_t(ix)] + 1e-12)
        mask.keep[std::size_t(it) * std::size_t(field.nx + 1) + std::size_t(ix)] = 1;
    }
  }
  return mask;
}

double masked_max_deviation(const BeamField& a, const BeamField& b, const FieldMask& mask) {
  double dev = 0.0;
  const int nt = std::min({a.n_t, b.n_t, mask.n_t});
  for (int it = 0; it <= nt; ++it)
    for (int ix = 0; ix <= a.nx; ++ix)
      if (mask.at(ix, it))
        dev = std::max(dev, (Vec12(a.at(ix, it)) - Vec12(b.at(ix, it))).cwiseAbs().maxCoeff());
  return dev;
}

}  // namespace beamnet
