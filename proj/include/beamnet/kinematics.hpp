#pragma once

#include "beamnet/errors.hpp"
#include "beamnet/types.hpp"

namespace beamnet {

/// Skew matrix of u, i.e. hat(u) * w == u.cross(w).
Mat3 hat(const Vec3& u);

/// Inverse of hat. Nearly-skew inputs are projected onto their skew part;
/// asymmetry beyond `tol` (measured as ||M + M^T||) throws NotSkew.
Vec3 vec(const Mat3& m, double tol = 1e-10);

/// Unit quaternion (w, x, y, z) representing a rotation.
struct UnitQuaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static UnitQuaternion identity() { return {}; }

  /// Quaternion for a rotation of |rv| radians about rv/|rv|.
  static UnitQuaternion from_rotation_vector(const Vec3& rv);

  void normalize();
  double norm() const;

  UnitQuaternion operator*(const UnitQuaternion& o) const;
};

Mat3 quat_to_rot(const UnitQuaternion& q);
UnitQuaternion quat_from_rot(const Mat3& r);

/// One step of dR/dt = R * hat(omega) with body-frame rate `omega` held
/// constant over the step. Quaternion increment, renormalized, so the
/// result stays orthonormal regardless of step count.
Mat3 rot_step(const Mat3& r, const Vec3& omega, double dt);

bool is_rotation(const Mat3& m, double tol);

}  // namespace beamnet
