#pragma once

#include <string>
#include <vector>

#include "beamnet/geb.hpp"
#include "beamnet/sampling.hpp"
#include "beamnet/trajectory.hpp"

namespace beamnet {

/// CSV output uses fixed significant-digit formatting (17 by default) so
/// repeated runs are byte-identical.
std::string format_double(double v, int digits = 17);

/// Header: beam,x,t,v1..v6,z1..z6. Rows ordered by beam, then t, then x.
/// Beam ids are 1-based.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, int digits = 17);

/// Header: t,c1..cN.
template <int N>
void write_series_csv(const std::string& path, const Sampled<Eigen::Matrix<double, N, 1>>& s,
                      int digits = 17);

/// Reads t,c1..cN with a uniform time grid (ParseError otherwise).
template <int N>
Sampled<Eigen::Matrix<double, N, 1>> read_series_csv(const std::string& path);

/// Inverse of write_trajectory_csv; requires a complete uniform grid.
struct TrajectoryCsv {
  std::vector<BeamField> beams;
};
TrajectoryCsv read_trajectory_csv(const std::string& path);

/// Header: beam,x,t,p1..p3,r11..r33 (rotation row-major).
void write_centerline_csv(const std::string& path, const std::vector<GebField>& fields,
                          int digits = 17);

}  // namespace beamnet
