// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "json.hpp"

namespace pofcap {

// Pixel coordinates: x right, y down. Camera frame: x right, y down, z into
// the scene (cm). Weak perspective scales x,y by a fixed px/cm factor and
// ignores depth; perspective divides by z and requires z > 0.
struct Camera {
  enum class Mode { WeakPerspective, Perspective };

  Mode mode = Mode::WeakPerspective;
  double scale = 1.8;                    // px/cm, weak-perspective only
  double focal = 1000.0;                 // px, perspective only
  Eigen::Vector2d principal{184, 184};   // px

  Eigen::Vector2d project(const Eigen::Vector3d& p) const;

  // d(pixel)/d(point), 2x3.
  Eigen::Matrix<double, 2, 3> projection_jacobian(const Eigen::Vector3d& p) const;
};

std::vector<Eigen::Vector2d> project(const Camera& cam,
                                     const std::vector<Eigen::Vector3d>& points);

void to_json(nlohmann::json& j, const Camera& c);
void from_json(const nlohmann::json& j, Camera& c);

}  // namespace pofcap
