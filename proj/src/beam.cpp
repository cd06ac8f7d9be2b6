#include "beamnet/beam.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "beamnet/kinematics.hpp"

namespace beamnet {

namespace {

Mat6 spd_inverse(const Mat6& m, const char* what) {
  Eigen::LLT<Mat6> llt(m);
  if (llt.info() != Eigen::Success) throw NotSPD(std::string(what) + ": factorization failed");
  return llt.solve(Mat6::Identity());
}

}  // namespace

Mat6 spd_sqrt(const Mat6& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(m);
  if (es.info() != Eigen::Success) throw NotSPD(std::string(what) + ": eigensolver failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NotSPD(std::string(what) + ": nonpositive eigenvalue " +
                 std::to_string(es.eigenvalues().minCoeff()));
  return es.operatorSqrt();
}

Mat6 BeamSpec::rotation6_at(double x) const {
  const Mat3 r = rotation_at(x);
  Mat6 rr = Mat6::Zero();
  rr.topLeftCorner<3, 3>() = r;
  rr.bottomRightCorner<3, 3>() = r;
  return rr;
}

Vec3 BeamSpec::curvature_at(double x) const {
  if (undeformed_rotation.is_constant()) return Vec3::Zero();
  const Mat3 r = undeformed_rotation.at(x);
  const Mat3 dr = undeformed_rotation.derivative_at(x);
  return vec(r.transpose() * dr, 1e-6);
}

void BeamSpec::validate() const {
  if (!(length > 0.0)) throw ValidationError("beam " + std::to_string(id) + ": length <= 0");
  auto check_spd = [&](const XFieldMat6& f, const char* name) {
    for (const Mat6& m : f.samples()) {
      if ((m - m.transpose()).norm() > 1e-9 * (1.0 + m.norm()))
        throw ValidationError("beam " + std::to_string(id) + ": " + name + " not symmetric");
      Eigen::SelfAdjointEigenSolver<Mat6> es(m);
      if (es.eigenvalues().minCoeff() <= 1e-10)
        throw ValidationError("beam " + std::to_string(id) + ": " + name + " not SPD");
    }
  };
  check_spd(mass, "mass");
  check_spd(flexibility, "flexibility");
  for (const Mat3& r : undeformed_rotation.samples()) {
    if (!is_rotation(r, 1e-8))
      throw ValidationError("beam " + std::to_string(id) + ": rotation sample outside SO(3)");
  }
}

std::vector<Vec3> curvature(const BeamSpec& spec, int n_samples) {
  if (n_samples < 3 && !spec.undeformed_rotation.is_constant())
    throw ValidationError("curvature: need at least 3 samples");
  std::vector<Vec3> out(static_cast<std::size_t>(n_samples));
  const double h = spec.length / double(n_samples - 1);
  for (int k = 0; k < n_samples; ++k) out[std::size_t(k)] = spec.curvature_at(h * k);
  return out;
}

Mat12 assemble_A(const BeamSpec& spec, double x) {
  const Mat6 minv = spd_inverse(spec.mass_at(x), "mass");
  const Mat6 cinv = spd_inverse(spec.flex_at(x), "flexibility");
  Mat12 a = Mat12::Zero();
  a.topRightCorner<6, 6>() = -minv;
  a.bottomLeftCorner<6, 6>() = -cinv;
  return a;
}

namespace {

Mat6 axis_coupling(const Vec3& curvature) {
  Mat6 e = Mat6::Zero();
  e.topLeftCorner<3, 3>() = hat(curvature);
  e.bottomLeftCorner<3, 3>() = hat(e1());
  e.bottomRightCorner<3, 3>() = hat(curvature);
  return e;
}

}  // namespace

Mat12 assemble_Bbar(const BeamSpec& spec, double x) {
  const Mat6 minv = spd_inverse(spec.mass_at(x), "mass");
  const Mat6 cinv = spd_inverse(spec.flex_at(x), "flexibility");
  const Mat6 e = axis_coupling(spec.curvature_at(x));
  Mat12 b = Mat12::Zero();
  b.topRightCorner<6, 6>() = -minv * e;
  b.bottomLeftCorner<6, 6>() = cinv * e.transpose();
  return b;
}

Vec12 gbar(const Mat6& mass, const Mat6& flex, const Vec12& u) {
  const Vec3 u1 = u.segment<3>(0);
  const Vec3 u2 = u.segment<3>(3);
  const Vec3 u3 = u.segment<3>(6);
  const Vec3 u4 = u.segment<3>(9);
  Vec12 m;
  m.head<6>() = mass * u.head<6>();
  m.tail<6>() = flex * u.tail<6>();
  const Vec3 m1 = m.segment<3>(0);
  const Vec3 m2 = m.segment<3>(3);
  const Vec3 m3 = m.segment<3>(6);
  const Vec3 m4 = m.segment<3>(9);
  Vec12 k;
  k.segment<3>(0) = u2.cross(m1) + u3.cross(m4);
  k.segment<3>(3) = u1.cross(m1) + u2.cross(m2) + u3.cross(m3) + u4.cross(m4);
  k.segment<3>(6) = u2.cross(m3) + u1.cross(m4);
  k.segment<3>(9) = u2.cross(m4);
  Vec12 g;
  g.head<6>() = -spd_inverse(mass, "mass") * k.head<6>();
  g.tail<6>() = -spd_inverse(flex, "flexibility") * k.tail<6>();
  return g;
}

Vec12 gbar(const BeamSpec& spec, double x, const Vec12& u) {
  return gbar(spec.mass_at(x), spec.flex_at(x), u);
}

double DiagonalizedBeam::max_speed() const {
  double s = 0.0;
  for (const Vec6& d : speeds) s = std::max(s, d.maxCoeff());
  return s;
}

double DiagonalizedBeam::slowness(int k) const { return 1.0 / speeds[std::size_t(k)].minCoeff(); }

DiagonalizedBeam diagonalize(const BeamSpec& spec, int n_samples) {
  if (n_samples < 3) throw ValidationError("diagonalize: need at least 3 samples");
  spec.validate();

  DiagonalizedBeam db;
  const double h = spec.length / double(n_samples - 1);
  db.x.resize(std::size_t(n_samples));
  db.A.resize(db.x.size());
  db.Bbar.resize(db.x.size());
  db.speeds.resize(db.x.size());
  db.L.resize(db.x.size());
  db.Linv.resize(db.x.size());
  db.B.resize(db.x.size());
  db.curvature.resize(db.x.size());
  db.U.resize(db.x.size());
  db.c_half.resize(db.x.size());
  db.c_half_inv.resize(db.x.size());
  db.mass.resize(db.x.size());
  db.flex.resize(db.x.size());

  for (int k = 0; k < n_samples; ++k) {
    const std::size_t i = std::size_t(k);
    const double x = h * k;
    db.x[i] = x;
    db.mass[i] = spec.mass_at(x);
    db.flex[i] = spec.flex_at(x);
    db.curvature[i] = spec.curvature_at(x);
    db.A[i] = assemble_A(spec, x);
    db.Bbar[i] = assemble_Bbar(spec, x);

    db.c_half[i] = spd_sqrt(db.flex[i], "flexibility");
    db.c_half_inv[i] = spd_inverse(db.c_half[i], "flexibility sqrt");

    const Mat6 theta = spd_inverse(db.c_half[i] * db.mass[i] * db.c_half[i], "theta");
    Eigen::SelfAdjointEigenSolver<Mat6> es(theta);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
      throw NotSPD("theta eigendecomposition failed");

    Mat6 vcols = es.eigenvectors();  // ascending eigenvalues
    Vec6 lam = es.eigenvalues();
    if (k == 0) {
      // Deterministic sign: largest-magnitude entry of each column positive.
      for (int c = 0; c < 6; ++c) {
        int imax = 0;
        vcols.col(c).cwiseAbs().maxCoeff(&imax);
        if (vcols(imax, c) < 0.0) vcols.col(c) = -vcols.col(c);
      }
    } else {
      const Mat6 prev = db.U[i - 1].transpose();
      for (int c = 0; c < 6; ++c) {
        const double overlap = prev.col(c).dot(vcols.col(c));
        if (std::abs(overlap) < 0.9)
          throw EigenSplitFailure("beam " + std::to_string(spec.id) +
                                  ": eigenvector overlap " + std::to_string(std::abs(overlap)) +
                                  " below 0.9 near x=" + std::to_string(x));
        if (overlap < 0.0) vcols.col(c) = -vcols.col(c);
      }
    }
    db.U[i] = vcols.transpose();
    db.speeds[i] = lam.cwiseSqrt();

    const Mat6 d = db.speeds[i].asDiagonal();
    const Mat6 dinv = db.speeds[i].cwiseInverse().asDiagonal();
    Mat12 l;
    l.topLeftCorner<6, 6>() = db.U[i] * db.c_half_inv[i];
    l.topRightCorner<6, 6>() = d * db.U[i] * db.c_half[i];
    l.bottomLeftCorner<6, 6>() = db.U[i] * db.c_half_inv[i];
    l.bottomRightCorner<6, 6>() = -d * db.U[i] * db.c_half[i];
    Mat12 linv;
    linv.topLeftCorner<6, 6>() = 0.5 * db.c_half[i] * db.U[i].transpose();
    linv.topRightCorner<6, 6>() = 0.5 * db.c_half[i] * db.U[i].transpose();
    linv.bottomLeftCorner<6, 6>() = 0.5 * db.c_half_inv[i] * db.U[i].transpose() * dinv;
    linv.bottomRightCorner<6, 6>() = -0.5 * db.c_half_inv[i] * db.U[i].transpose() * dinv;
    db.L[i] = l;
    db.Linv[i] = linv;

    Mat12 dd = Mat12::Zero();
    dd.topLeftCorner<6, 6>() = -d;
    dd.bottomRightCorner<6, 6>() = d;
    const double sim = (l * db.A[i] * linv - dd).norm();
    if (sim > 1e-9 * (1.0 + db.A[i].norm()))
      throw NotSPD("similarity residual " + std::to_string(sim) + " out of tolerance");
    if ((l * linv - Mat12::Identity()).norm() > 1e-10)
      throw NotSPD("inverse residual out of tolerance");
  }

  // Lower-order Riemann coefficient; d(Linv)/dx by centered differences.
  for (int k = 0; k < n_samples; ++k) {
    const std::size_t i = std::size_t(k);
    Mat12 dlinv;
    if (k == 0)
      dlinv = (db.Linv[1] - db.Linv[0]) / h;
    else if (k == n_samples - 1)
      dlinv = (db.Linv[i] - db.Linv[i - 1]) / h;
    else
      dlinv = (db.Linv[i + 1] - db.Linv[i - 1]) / (2.0 * h);
    db.B[i] = db.L[i] * db.Bbar[i] * db.Linv[i] + db.L[i] * db.A[i] * dlinv;
  }
  return db;
}

Vec12 riemann_source(const DiagonalizedBeam& db, int k, const Vec12& r) {
  const std::size_t i = std::size_t(k);
  return db.L[i] * gbar(db.mass[i], db.flex[i], Vec12(db.Linv[i] * r));
}

}  // namespace beamnet
