// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pofcap/skeleton.hpp"
#include "pofcap/tensor_io.hpp"

namespace pofcap {

struct Keypoint2D {
  Eigen::Vector2d px = Eigen::Vector2d::Zero();
  double confidence = 0.0;
  bool present = false;
};

struct PartDirection {
  Eigen::Vector3d dir = Eigen::Vector3d::Zero();
  bool present = false;
};

// One network's worth of image-space fields: per-joint confidence maps and a
// 3-channel orientation field per part, float32 row-major.
struct FieldStack {
  int h = 0, w = 0;
  TensorF32 confidence;  // J x h x w, values in [0,1]
  TensorF32 pof;         // 3P x h x w, zero or unit vectors per pixel
};

// Decoded measurements for one network, plus the auxiliary point detections
// that arrive as plain keypoints rather than fields.
struct Observation {
  std::vector<Keypoint2D> keypoints;
  std::vector<PartDirection> orientations;
  std::vector<Keypoint2D> toes;
  std::vector<Keypoint2D> face;
};

TensorF32 render_confidence(const std::vector<Keypoint2D>& joints2d, int h, int w,
                            double sigma_px);

// One rendered segment. channel selects the 3-channel group written to;
// groups may be shared, in which case overlapping contributions are averaged
// per pixel and renormalized to unit length.
struct PofSegment {
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  Eigen::Vector3d dir = Eigen::Vector3d::Zero();
  int channel = 0;
  bool present = false;
};

struct PofRender {
  TensorF32 pof;
  std::vector<int> degenerate;  // segments skipped for coincident endpoints
};

PofRender render_pof(const std::vector<PofSegment>& segments, int channel_groups,
                     int h, int w, double half_width_px);

// Convenience wrapper: part i of the skeleton maps to channel group i.
PofRender render_pof(const std::vector<Keypoint2D>& joints2d,
                     const std::vector<PartDirection>& orientations,
                     const SkeletonDef& skel, int h, int w, double half_width_px);

// Per-channel argmax; present iff the peak reaches `threshold`. Ties break to
// the smallest row-major index.
std::vector<Keypoint2D> decode_keypoints(const TensorF32& confidence, double threshold);

// Averages bilinear samples along each part segment (ceil(length)+1 points)
// and renormalizes; absent when an endpoint is missing or the average norm
// falls below `min_norm`.
std::vector<PartDirection> decode_orientations(const TensorF32& pof,
                                               const std::vector<Keypoint2D>& keypoints,
                                               const std::vector<std::pair<int, int>>& parts,
                                               double min_norm = 0.1);

// Mirrors a stack about the vertical axis and negates the x component of the
// orientation channels. Lets right-hand data reuse the left-hand path.
FieldStack flip_horizontal(const FieldStack& fs);

nlohmann::json observation_to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j);

}  // namespace pofcap
