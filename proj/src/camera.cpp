// SPDX-License-Identifier: Apache-2.0
#include "pofcap/camera.hpp"

#include "pofcap/common.hpp"

namespace pofcap {

Eigen::Vector2d Camera::project(const Eigen::Vector3d& p) const {
  if (mode == Mode::WeakPerspective)
    return {scale * p.x() + principal.x(), scale * p.y() + principal.y()};
  if (p.z() <= 0.0) throw SolverError("behind camera: non-positive depth in projection");
  return {focal * p.x() / p.z() + principal.x(), focal * p.y() / p.z() + principal.y()};
}

Eigen::Matrix<double, 2, 3> Camera::projection_jacobian(const Eigen::Vector3d& p) const {
  Eigen::Matrix<double, 2, 3> j = Eigen::Matrix<double, 2, 3>::Zero();
  if (mode == Mode::WeakPerspective) {
    j(0, 0) = scale;
    j(1, 1) = scale;
    return j;
  }
  if (p.z() <= 0.0) throw SolverError("behind camera: non-positive depth in projection");
  const double iz = 1.0 / p.z();
  j(0, 0) = focal * iz;
  j(0, 2) = -focal * p.x() * iz * iz;
  j(1, 1) = focal * iz;
  j(1, 2) = -focal * p.y() * iz * iz;
  return j;
}

std::vector<Eigen::Vector2d> project(const Camera& cam,
                                     const std::vector<Eigen::Vector3d>& points) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(cam.project(p));
  return out;
}

void to_json(nlohmann::json& j, const Camera& c) {
  j = nlohmann::json{{"mode", c.mode == Camera::Mode::WeakPerspective ? "weak_perspective"
                                                                      : "perspective"},
                     {"principal", {c.principal.x(), c.principal.y()}}};
  if (c.mode == Camera::Mode::WeakPerspective)
    j["scale"] = c.scale;
  else
    j["focal"] = c.focal;
}

void from_json(const nlohmann::json& j, Camera& c) {
  const std::string mode = j.value("mode", "weak_perspective");
  if (mode == "weak_perspective") {
    c.mode = Camera::Mode::WeakPerspective;
    c.scale = j.value("scale", 1.8);
    if (c.scale <= 0.0) throw ConfigError("camera scale must be positive");
  } else if (mode == "perspective") {
    c.mode = Camera::Mode::Perspective;
    c.focal = j.value("focal", 1000.0);
    if (c.focal <= 0.0) throw ConfigError("camera focal must be positive");
  } else {
    throw ConfigError("unknown camera mode: " + mode);
  }
  if (j.contains("principal")) {
    auto p = j.at("principal");
    c.principal = Eigen::Vector2d(p.at(0).get<double>(), p.at(1).get<double>());
  }
}

}  // namespace pofcap
