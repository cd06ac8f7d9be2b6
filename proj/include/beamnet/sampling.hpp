#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "beamnet/errors.hpp"
#include "beamnet/types.hpp"

namespace beamnet {

/// Values sampled on a uniform grid over [start, start + (n-1)*step], with
/// Catmull-Rom cubic interpolation (finite-difference slopes, one-sided at
/// the ends). A single sample represents a constant. Evaluation outside the
/// grid clamps to the nearest end value.
template <typename T>
class Sampled {
 public:
  Sampled() = default;

  static Sampled constant(const T& value) {
    Sampled s;
    s.start_ = 0.0;
    s.step_ = 1.0;
    s.values_ = {value};
    return s;
  }

  static Sampled from_samples(double start, double step, std::vector<T> values) {
    Sampled s;
    s.start_ = start;
    s.step_ = step;
    s.values_ = std::move(values);
    return s;
  }

  bool is_constant() const { return values_.size() == 1; }
  std::size_t size() const { return values_.size(); }
  double start() const { return start_; }
  double step() const { return step_; }
  double end() const { return start_ + step_ * double(values_.size() - 1); }
  const std::vector<T>& samples() const { return values_; }

  T at(double t) const {
    if (is_constant()) return values_[0];
    double u;
    std::size_t k = segment(t, &u);
    const T m0 = slope(k);
    const T m1 = slope(k + 1);
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1;
    const double h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2;
    const double h11 = u3 - u2;
    return h00 * values_[k] + h10 * m0 + h01 * values_[k + 1] + h11 * m1;
  }

  /// Derivative of the interpolant with respect to the grid coordinate.
  T derivative_at(double t) const {
    if (is_constant()) return zero_like(values_[0]);
    double u;
    std::size_t k = segment(t, &u);
    const T m0 = slope(k);
    const T m1 = slope(k + 1);
    const double u2 = u * u;
    const double d00 = 6 * u2 - 6 * u;
    const double d10 = 3 * u2 - 4 * u + 1;
    const double d01 = -6 * u2 + 6 * u;
    const double d11 = 3 * u2 - 2 * u;
    return (d00 * values_[k] + d10 * m0 + d01 * values_[k + 1] + d11 * m1) / step_;
  }

 private:
  static T zero_like(const T& v) { return T(v - v); }

  // Per-unit-parameter slopes; centered in the interior, second-order
  // one-sided at the ends (first-order with only two samples).
  T slope(std::size_t k) const {
    const std::size_t n = values_.size();
    if (k == 0) {
      if (n < 3) return values_[1] - values_[0];
      return T(-1.5 * values_[0] + 2.0 * values_[1] - 0.5 * values_[2]);
    }
    if (k + 1 == n) {
      if (n < 3) return values_[n - 1] - values_[n - 2];
      return T(1.5 * values_[n - 1] - 2.0 * values_[n - 2] + 0.5 * values_[n - 3]);
    }
    return 0.5 * (values_[k + 1] - values_[k - 1]);
  }

  std::size_t segment(double t, double* u) const {
    const double s = (t - start_) / step_;
    double k = std::floor(s);
    k = std::clamp(k, 0.0, double(values_.size() - 2));
    *u = std::clamp(s - k, 0.0, 1.0);
    return std::size_t(k);
  }

  double start_ = 0.0;
  double step_ = 1.0;
  std::vector<T> values_;
};

using XField3 = Sampled<Vec3>;
using XField6 = Sampled<Vec6>;
using XField12 = Sampled<Vec12>;
using XFieldMat3 = Sampled<Mat3>;
using XFieldMat6 = Sampled<Mat6>;
using Series6 = Sampled<Vec6>;
using Series12 = Sampled<Vec12>;

/// Cubic Hermite segment on [a, b] matching values and first derivatives at
/// both ends.
template <typename T>
T hermite(double a, double b, const T& ya, const T& da, const T& yb, const T& db, double t) {
  const double h = b - a;
  const double u = (t - a) / h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * ya + (u3 - 2 * u2 + u) * h * da +
         (-2 * u3 + 3 * u2) * yb + (u3 - u2) * h * db;
}

}  // namespace beamnet
