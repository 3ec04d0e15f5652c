// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pofcap/camera.hpp"
#include "pofcap/pofield.hpp"
#include "pofcap/rng.hpp"
#include "pofcap/skeleton.hpp"
#include "pofcap/tracking.hpp"

namespace pofcap {

struct NoiseConfig {
  double keypoint_sigma_px = 0.0;
  double pof_sigma = 0.0;          // per component, renormalized after
  double dropout_joint = 0.0;      // probability per joint
  double dropout_part = 0.0;       // probability per part
  double toe_sigma_px = 0.0;
  double face_sigma_px = 0.0;
};

struct MotionConfig {
  double start_sigma_rad = 0.30;       // truncated-Gaussian start pose
  double angular_velocity_max = 0.5;   // rad/s, per joint axis
  double translation_velocity_max = 0.0;  // cm/s
  double fps = 30.0;
  // Symmetric per-axis angle limits (rad): default for plain joints plus
  // per-group overrides keyed by skeleton group name.
  double default_limit = 1.0;
  double root_limit = 3.141592653589793;
  std::map<std::string, double> group_limits{{"head", 0.35}, {"fingers", 0.6}, {"toes", 0.4}};
};

struct FieldConfig {
  bool write = true;
  int size = 368;
  double sigma_px = 7.0;
  double half_width_px = 10.0;
};

struct FaceConfig {
  bool enabled = false;
  int landmarks = 70;
  int k_sigma = 200;
  std::uint64_t seed = 11;
  double sigma_scale = 0.5;  // magnitude of the GT expression coefficients
};

struct SceneConfig {
  std::uint64_t seed = 1;
  int n_frames = 20;
  std::string skeleton = "body18";  // body18 | hand21 | total
  Camera camera;
  NoiseConfig noise;
  MotionConfig motion;
  FieldConfig fields;
  FaceConfig face;
  int markers_per_part = 8;
  bool toes = false;  // render toe keypoints (total skeleton only)
};

nlohmann::json scene_config_to_json(const SceneConfig& cfg);
SceneConfig scene_config_from_json(const nlohmann::json& j);

SkeletonDef skeleton_by_name(const std::string& name, int markers_per_part = 8);

struct GtFrame {
  ModelParams params;
  std::vector<Eigen::Vector3d> joints;
  std::vector<Marker> markers;
};

struct SyntheticSequence {
  SkeletonDef skeleton;
  Camera camera;
  std::optional<FaceBasis> face;
  std::vector<GtFrame> frames;
};

// One feasible pose per draw: truncated Gaussians within per-joint angle
// limits. Shared by the prior training and the sequence start.
std::vector<Eigen::Vector3d> sample_feasible_pose(const SkeletonDef& skel,
                                                  const MotionConfig& motion,
                                                  double sigma_scale, CounterRng& rng);

// Smooth trajectory: constant per-axis angular velocities integrated from a
// feasible start, reflecting at the angle limits. Deterministic per seed.
SyntheticSequence generate_sequence(const SceneConfig& cfg);

struct RenderedFrame {
  FieldStack fields;
  Observation body;
  std::optional<Observation> left_hand;
  std::optional<Observation> right_hand;
};

// Renders fields from noise-perturbed ground truth; the returned observations
// hold the same perturbed values a decode would recover. Joints projecting
// outside the image are dropped. `frame_index` seeds the per-frame noise
// stream.
RenderedFrame render_observation(const GtFrame& gt, const SyntheticSequence& seq,
                                 const NoiseConfig& noise, const FieldConfig& fields,
                                 std::uint64_t seed, int frame_index, bool with_toes);

// Flow targets from ground-truth markers at the queried frame plus Gaussian
// pixel noise; validity follows part_visibility on the GT pose.
FlowTargets oracle_flow(const GtFrame& gt, const SkeletonDef& skel, const Camera& camera,
                        double sigma_flow, CounterRng& rng);

FlowProvider make_oracle_flow_provider(const SyntheticSequence& seq, double sigma_flow,
                                       std::uint64_t seed);

// Frame filter on bone-length consistency: drops any frame whose bone length
// deviates from the per-bone sequence average by more than `threshold`
// (fractional).
std::vector<int> filter_frames(const std::vector<std::vector<Eigen::Vector3d>>& joints_seq,
                               const SkeletonDef& skel, double threshold);

// Root-params view transform for the camera sweep: rotates the subject about
// `pivot` so the camera sits at (azimuth, elevation), keeping the same
// camera model.
ModelParams transform_to_view(const ModelParams& params, int root_joint, double azimuth_rad,
                              double elevation_rad, const Eigen::Vector3d& pivot);

}  // namespace pofcap
