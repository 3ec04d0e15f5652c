// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace pofcap {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Rotation matrix of an axis-angle vector (Rodrigues). Switches to the series
// expansion below ‖aa‖ = 1e-6.
Eigen::Matrix3d rodrigues(const Eigen::Vector3d& aa);

// Left Jacobian J_l of SO(3): exp((aa + d)^) ≈ exp((J_l(aa) d)^) exp(aa^).
// Used to differentiate rotated points: d(R(aa) p)/d aa = -[R(aa) p]x J_l(aa).
Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& aa);

// Axis-angle vector of a rotation matrix. Inverse of rodrigues up to the usual
// angle wrap; angle returned in [0, pi].
Eigen::Vector3d log_so3(const Eigen::Matrix3d& r);

}  // namespace pofcap
