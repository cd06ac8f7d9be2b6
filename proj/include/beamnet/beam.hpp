#pragma once

#include <vector>

#include "beamnet/errors.hpp"
#include "beamnet/sampling.hpp"
#include "beamnet/types.hpp"

namespace beamnet {

/// Physical description of one beam: length, 6x6 mass and flexibility
/// matrices (constant or sampled along the axis) and the undeformed
/// cross-section rotation field.
struct BeamSpec {
  int id = 0;
  double length = 1.0;
  XFieldMat6 mass = XFieldMat6::constant(Mat6::Identity());
  XFieldMat6 flexibility = XFieldMat6::constant(Mat6::Identity());
  XFieldMat3 undeformed_rotation = XFieldMat3::constant(Mat3::Identity());

  Mat6 mass_at(double x) const { return mass.at(x); }
  Mat6 flex_at(double x) const { return flexibility.at(x); }
  Mat3 rotation_at(double x) const { return undeformed_rotation.at(x); }
  /// diag(R, R) at x.
  Mat6 rotation6_at(double x) const;
  /// vec(R^T dR/dx) at x; identically zero for a constant rotation field.
  Vec3 curvature_at(double x) const;

  /// Throws ValidationError on a non-SPD mass/flexibility sample or a
  /// rotation sample outside SO(3).
  void validate() const;
};

/// Uniformly sampled transport coefficients of one beam together with the
/// change of basis to Riemann invariants. All arrays share the grid `x`.
///
/// At every sample, A = Linv * diag(-speeds, speeds) * L holds to 1e-9
/// relative accuracy, speeds are strictly positive and sorted ascending, and
/// L * Linv = I to 1e-10.
struct DiagonalizedBeam {
  std::vector<double> x;
  std::vector<Mat12> A;      // first-order transport coefficient
  std::vector<Mat12> Bbar;   // lower-order coefficient, physical variables
  std::vector<Vec6> speeds;  // positive characteristic speeds (diagonal of D)
  std::vector<Mat12> L;      // y -> r
  std::vector<Mat12> Linv;   // r -> y
  std::vector<Mat12> B;      // lower-order coefficient, Riemann variables
  std::vector<Vec3> curvature;
  std::vector<Mat6> U;       // orthonormal eigenvector rows of Theta
  std::vector<Mat6> c_half;  // symmetric square root of the flexibility
  std::vector<Mat6> c_half_inv;
  std::vector<Mat6> mass;
  std::vector<Mat6> flex;

  double dx() const { return x[1] - x[0]; }
  double length() const { return x.back(); }
  int n_samples() const { return int(x.size()); }

  double max_speed() const;
  /// 1 / (slowest characteristic speed) at sample k.
  double slowness(int k) const;
};

/// vec(R^T dR/dx) sampled on a uniform n-point grid over [0, length].
std::vector<Vec3> curvature(const BeamSpec& spec, int n_samples);

/// A(x) = -[[0, M^-1], [C^-1, 0]]. Inverses via SPD factorization.
Mat12 assemble_A(const BeamSpec& spec, double x);

/// Lower-order coefficient built from the curvature and the axis direction.
Mat12 assemble_Bbar(const BeamSpec& spec, double x);

/// Quadratic source term in physical variables.
Vec12 gbar(const BeamSpec& spec, double x, const Vec12& u);
Vec12 gbar(const Mat6& mass, const Mat6& flex, const Vec12& u);

/// Samples the coefficients on an n-point grid and computes the
/// eigen-structure. Eigenvector continuity across samples is enforced by
/// column matching with sign fixing; a column overlap below 0.9 signals an
/// eigenvalue crossing and throws EigenSplitFailure.
DiagonalizedBeam diagonalize(const BeamSpec& spec, int n_samples);

/// Source in Riemann variables at grid sample k: L g(x, Linv r).
Vec12 riemann_source(const DiagonalizedBeam& db, int k, const Vec12& r);

/// Symmetric positive-definite square root; throws NotSPD.
Mat6 spd_sqrt(const Mat6& m, const char* what);

}  // namespace beamnet
