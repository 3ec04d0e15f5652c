// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pofcap/skeleton.hpp"

namespace pofcap {

using Pose3D = std::vector<Eigen::Vector3d>;  // per-joint positions, cm

enum class Alignment { None, Root };

// Mean per-joint position error, optionally after translating pred so the
// root joints coincide.
double mpjpe(const Pose3D& pred, const Pose3D& gt, Alignment alignment, int root = 0);

// Uniform scale about the root so the mean bone length matches the reference
// mean.
Pose3D rescale_to_average_skeleton(const Pose3D& pred,
                                   const std::vector<std::pair<int, int>>& parts,
                                   const std::vector<double>& reference_bone_lengths,
                                   int root = 0);

// Scales all joints along camera-center rays so the root depth matches gt.
Pose3D depth_align(const Pose3D& pred, double gt_root_depth,
                   const Eigen::Vector3d& camera_center, int root = 0);

struct PckCurve {
  std::vector<double> thresholds;
  std::vector<double> pck;
  double auc = 0.0;
};

PckCurve pck_auc(const std::vector<double>& errors_mm, double t_min_mm, double t_max_mm,
                 int n_thresholds);

struct ClusterResult {
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;  // k x dim
  std::vector<double> per_cluster_mpjpe;
  std::vector<int> counts;
};

// k-means (k-means++ seeding, multiple restarts) on flattened root-aligned
// poses. frame_errors, when given, produce the per-cluster mean error.
ClusterResult pose_clusters(const std::vector<Pose3D>& gt_poses, int k, std::uint64_t seed,
                            const std::vector<double>& frame_errors = {}, int root = 0,
                            int restarts = 50, int max_iterations = 300);

struct SweepCell {
  double azimuth = 0.0, elevation = 0.0;
  int count = 0;
  double mean = 0.0, stddev = 0.0;
};

struct SweepReport {
  std::vector<SweepCell> cells;  // full grid, row-major over (elevation, azimuth)
  std::vector<double> azimuths, elevations;
};

SweepReport view_sweep_report(const std::map<std::pair<double, double>, std::vector<double>>&
                                  errors_by_view,
                              const std::vector<double>& azimuths,
                              const std::vector<double>& elevations);

std::string sweep_report_csv(const SweepReport& report);

// Ridge least-squares joint regressor: one target joint as a fixed linear
// combination of source joints, shared across x/y/z.
Eigen::MatrixXd fit_joint_regressor(const std::vector<Pose3D>& source,
                                    const std::vector<Pose3D>& target, double ridge);

Pose3D apply_joint_regressor(const Eigen::MatrixXd& map, const Pose3D& source);

}  // namespace pofcap
