// SPDX-License-Identifier: Apache-2.0
#include "pofcap/rotation.hpp"

#include <cmath>

namespace pofcap {

namespace {
constexpr double kSeriesThreshold = 1e-6;
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& aa) {
  const double theta = aa.norm();
  const Eigen::Matrix3d k = skew(aa);
  double a, b;  // R = I + a*K + b*K^2 with K unscaled
  if (theta < kSeriesThreshold) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;          // sin(t)/t
    b = 0.5 - t2 / 24.0;         // (1-cos(t))/t^2
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Eigen::Matrix3d::Identity() + a * k + b * (k * k);
}

Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& aa) {
  const double theta = aa.norm();
  const Eigen::Matrix3d k = skew(aa);
  double b, c;  // J_l = I + b*K + c*K^2
  if (theta < kSeriesThreshold) {
    const double t2 = theta * theta;
    b = 0.5 - t2 / 24.0;               // (1-cos(t))/t^2
    c = 1.0 / 6.0 - t2 / 120.0;        // (t-sin(t))/t^3
  } else {
    b = (1.0 - std::cos(theta)) / (theta * theta);
    c = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Eigen::Matrix3d::Identity() + b * k + c * (k * k);
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& r) {
  const double tr = r.trace();
  const double cos_theta = std::min(1.0, std::max(-1.0, (tr - 1.0) * 0.5));
  const double theta = std::acos(cos_theta);
  const Eigen::Vector3d w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (theta < kSeriesThreshold) return 0.5 * w;
  const double wn = w.norm();  // = 2 sin(theta), exact even where acos is not
  if (wn < 1e-9) {
    // At pi the vee part vanishes; recover the axis from R + I.
    Eigen::Matrix3d m = 0.5 * (r + Eigen::Matrix3d::Identity());
    int i = 0;
    if (m(1, 1) > m(i, i)) i = 1;
    if (m(2, 2) > m(i, i)) i = 2;
    Eigen::Vector3d axis = m.col(i) / std::sqrt(m(i, i));
    axis.normalize();
    if (axis.dot(w) < 0.0) axis = -axis;
    return theta * axis;
  }
  return (theta / wn) * w;
}

}  // namespace pofcap
