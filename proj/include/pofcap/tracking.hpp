// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "pofcap/fitting.hpp"

namespace pofcap {

// Per-marker 2D targets produced by a flow provider; marker indices follow
// marker_positions order. Invalid markers contribute no residuals.
struct FlowTarget {
  int marker = 0;
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  bool valid = false;
};

struct FlowTargets {
  std::vector<FlowTarget> targets;
  bool ok = true;  // false marks provider failure; the frame passes through
};

// Contract standing in for texture render + optical flow: given the previous
// refined params and the current per-frame fit, return where each marker
// projection should move.
using FlowProvider =
    std::function<FlowTargets(const ModelParams& prev_refined, const ModelParams& current,
                              int frame_index)>;

Eigen::VectorXd residuals_tex(const ModelParams& params, const SkeletonDef& skel,
                              const Camera& camera, const FlowTargets& targets,
                              double w_tex);

Eigen::VectorXd residuals_dz(const ModelParams& params, const SkeletonDef& skel,
                             const Eigen::VectorXd& prev_joints_z, double w_dz);

struct TrackConfig {
  double w_tex = 1.0;
  double w_dz = 0.25;
  double wpof_body = 25.0;  // temporal-stage balance body:LH:RH = 25:1:1
  double wpof_hand = 1.0;
  double w_face = 1.0;
  LmSettings solver{.max_iterations = 30};
};

struct FrameInput {
  TotalObservation observation;
  ModelParams params;  // per-frame fit output, the refinement init
};

struct RefinedFrame {
  ModelParams params;
  bool refined = false;   // false for the anchor frame and provider failures
  bool flagged = false;   // provider failure
  LmResult solve;
};

// Builds the temporal-refinement system for one frame: flow targets,
// z-smoothness against the previous refined joints, and the frame's own
// POF/face terms, with theta and t free and phi/sigma frozen at `init`.
// Blocks whose weight is zero are omitted.
std::unique_ptr<ResidualSystem> assemble_refine(const Fitter& fitter, const TrackConfig& cfg,
                                                const TotalObservation& obs,
                                                const FlowTargets& targets,
                                                const Eigen::VectorXd& prev_joints_z,
                                                const ModelParams& init);

// Recursive temporal refinement: frame 0 is copied unrefined; each later
// frame is re-solved against flow targets queried with the previous refined
// params, a z-smoothness term against the previous refined joints, and the
// frame's own POF/face measurements. phi and sigma are frozen to the anchor's
// values for the whole sequence.
std::vector<RefinedFrame> refine_sequence(const std::vector<FrameInput>& frames,
                                          const FlowProvider& provider,
                                          const TrackConfig& cfg, const Fitter& fitter);

// Crude self-occlusion proxy: a part is visible iff its midpoint depth lies
// within the nearest 50% of part midpoint depths.
std::vector<bool> part_visibility(const std::vector<Eigen::Vector3d>& joints,
                                  const SkeletonDef& skel);

// Identity provider: targets are the current fit's own marker projections,
// all parts valid. Fixed point of the refinement on static sequences.
FlowProvider make_identity_flow_provider(const SkeletonDef& skel, const Camera& camera);

// Mean second difference of joint trajectories, averaged over joints and
// interior frames.
double jitter_metric(const std::vector<std::vector<Eigen::Vector3d>>& joints_per_frame);

// FlowTargets round-trip through the POFT container (marker id, x, y, valid
// as one N x 4 tensor) so externally computed flow can plug in.
void save_flow_targets(const std::string& path, const std::vector<FlowTargets>& frames);
std::vector<FlowTargets> load_flow_targets(const std::string& path);

}  // namespace pofcap
