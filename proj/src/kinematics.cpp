#include "beamnet/kinematics.hpp"

#include <cmath>

namespace beamnet {

Mat3 hat(const Vec3& u) {
  Mat3 m;
  m << 0.0, -u.z(), u.y(),
       u.z(), 0.0, -u.x(),
      -u.y(), u.x(), 0.0;
  return m;
}

Vec3 vec(const Mat3& m, double tol) {
  const double asym = (m + m.transpose()).norm();
  if (asym > tol) {
    throw NotSkew("asymmetry " + std::to_string(asym) + " exceeds tolerance " +
                  std::to_string(tol));
  }
  const Mat3 s = 0.5 * (m - m.transpose());
  return Vec3(s(2, 1), s(0, 2), s(1, 0));
}

UnitQuaternion UnitQuaternion::from_rotation_vector(const Vec3& rv) {
  const double angle = rv.norm();
  UnitQuaternion q;
  if (angle < 1e-300) return q;
  const double half = 0.5 * angle;
  const double s = std::sin(half) / angle;
  q.w = std::cos(half);
  q.x = s * rv.x();
  q.y = s * rv.y();
  q.z = s * rv.z();
  return q;
}

double UnitQuaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

void UnitQuaternion::normalize() {
  const double n = norm();
  w /= n;
  x /= n;
  y /= n;
  z /= n;
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& o) const {
  UnitQuaternion q;
  q.w = w * o.w - x * o.x - y * o.y - z * o.z;
  q.x = w * o.x + x * o.w + y * o.z - z * o.y;
  q.y = w * o.y - x * o.z + y * o.w + z * o.x;
  q.z = w * o.z + x * o.y - y * o.x + z * o.w;
  return q;
}

Mat3 quat_to_rot(const UnitQuaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

UnitQuaternion quat_from_rot(const Mat3& r) {
  // Shepperd's method: pick the largest of the four candidate pivots.
  UnitQuaternion q;
  const double tr = r.trace();
  if (tr > r(0, 0) && tr > r(1, 1) && tr > r(2, 2)) {
    const double s = std::sqrt(tr + 1.0) * 2.0;
    q.w = 0.25 * s;
    q.x = (r(2, 1) - r(1, 2)) / s;
    q.y = (r(0, 2) - r(2, 0)) / s;
    q.z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    q.w = (r(2, 1) - r(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (r(0, 1) + r(1, 0)) / s;
    q.z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    q.w = (r(0, 2) - r(2, 0)) / s;
    q.x = (r(0, 1) + r(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    q.w = (r(1, 0) - r(0, 1)) / s;
    q.x = (r(0, 2) + r(2, 0)) / s;
    q.y = (r(1, 2) + r(2, 1)) / s;
    q.z = 0.25 * s;
  }
  q.normalize();
  return q;
}

Mat3 rot_step(const Mat3& r, const Vec3& omega, double dt) {
  UnitQuaternion q = quat_from_rot(r) * UnitQuaternion::from_rotation_vector(omega * dt);
  q.normalize();
  return quat_to_rot(q);
}

bool is_rotation(const Mat3& m, double tol) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  return ortho <= tol && m.determinant() > 0.0;
}

}  // namespace beamnet
