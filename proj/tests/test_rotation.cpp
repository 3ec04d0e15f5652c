// SPDX-License-Identifier: Apache-2.0
#include <Eigen/Geometry>

#include "doctest.h"
#include "pofcap/rng.hpp"
#include "pofcap/rotation.hpp"

using namespace pofcap;

namespace {

Eigen::Vector3d random_vec(CounterRng& rng, double scale) {
  return {rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
}

}  // namespace

TEST_CASE("rodrigues matches quaternion rotation") {
  CounterRng rng(42);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d aa = random_vec(rng, 2.5);
    const double angle = aa.norm();
    Eigen::Matrix3d expected = Eigen::Matrix3d::Identity();
    if (angle > 0.0)
      expected = Eigen::Quaterniond(Eigen::AngleAxisd(angle, aa / angle)).toRotationMatrix();
    CHECK((rodrigues(aa) - expected).norm() < 1e-12);
  }
}

TEST_CASE("rodrigues small-angle series") {
  const Eigen::Vector3d aa(1e-8, -2e-8, 5e-9);
  const Eigen::Matrix3d r = rodrigues(aa);
  CHECK((r - (Eigen::Matrix3d::Identity() + skew(aa))).norm() < 1e-15);
  CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-15);
}

TEST_CASE("log_so3 inverts rodrigues") {
  CounterRng rng(7);
  for (int i = 0; i < 50; ++i) {
    Eigen::Vector3d aa = random_vec(rng, 1.8);
    CHECK((log_so3(rodrigues(aa)) - aa).norm() < 1e-9);
  }
  // Near pi.
  const Eigen::Vector3d aa = 3.14159 * Eigen::Vector3d(1, 2, -1).normalized();
  CHECK((rodrigues(log_so3(rodrigues(aa))) - rodrigues(aa)).norm() < 1e-7);
}

TEST_CASE("left jacobian matches finite differences of rotated point") {
  CounterRng rng(11);
  const double h = 1e-6;
  for (int i = 0; i < 25; ++i) {
    const Eigen::Vector3d aa = random_vec(rng, 1.5);
    const Eigen::Vector3d p = random_vec(rng, 30.0);
    const Eigen::Matrix3d analytic = -skew(rodrigues(aa) * p) * so3_left_jacobian(aa);
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      dp[k] = h;
      const Eigen::Vector3d fd = (rodrigues(aa + dp) * p - rodrigues(aa - dp) * p) / (2 * h);
      CHECK((analytic.col(k) - fd).norm() < 1e-5 * std::max(1.0, fd.norm()));
    }
  }
}
