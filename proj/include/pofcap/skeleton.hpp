// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace pofcap {

struct Joint {
  std::string name;
  int parent = -1;  // -1 for the root
};

// Kinematic tree plus fixed template geometry. Lengths in cm. Each part is a
// (parent, child) joint pair; the part list must cover exactly the tree edges,
// so parts double as the bones scaled by ModelParams::phi.
struct SkeletonDef {
  std::string name;
  std::vector<Joint> joints;
  std::vector<std::pair<int, int>> parts;
  std::vector<Eigen::Vector3d> template_offsets;            // per joint, parent frame
  std::vector<std::vector<Eigen::Vector3d>> marker_offsets;  // per part, part-parent frame

  // Named joint/part index sets: stage schedules ("torso", "limbs"), network
  // observation maps ("body_joints", "lh_joints", ...), sampling groups.
  std::map<std::string, std::vector<int>> groups;

  int joint_count() const { return static_cast<int>(joints.size()); }
  int part_count() const { return static_cast<int>(parts.size()); }
  int root() const { return root_; }
  int joint_index(const std::string& joint_name) const;

  // Bone/part index whose child is joint j; -1 for the root.
  int bone_of_joint(int j) const { return bone_of_joint_[j]; }
  // Joints in parent-before-child order.
  const std::vector<int>& traversal_order() const { return order_; }
  // Root-first path of joints ending at j (inclusive).
  const std::vector<int>& path_from_root(int j) const { return paths_[j]; }

  const std::vector<int>& group(const std::string& key) const;
  bool has_group(const std::string& key) const { return groups.count(key) > 0; }

  // Checks the tree invariants and rebuilds the derived tables. Throws
  // MismatchError on violation. Must be called after manual edits.
  void finalize();

 private:
  int root_ = -1;
  std::vector<int> bone_of_joint_;
  std::vector<int> order_;
  std::vector<std::vector<int>> paths_;
};

// Pose/shape state. theta is per-joint axis-angle (the root entry is the
// global rotation), phi a per-bone length scale, t the root position in the
// camera frame, sigma facial expression coefficients.
struct ModelParams {
  std::vector<Eigen::Vector3d> theta;
  Eigen::VectorXd phi;
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  Eigen::VectorXd sigma;

  static ModelParams rest(const SkeletonDef& skel, int k_sigma = 0);
};

// Forward-kinematics products cached for residual/Jacobian evaluation.
struct KinematicCache {
  std::vector<Eigen::Vector3d> joints;       // world position per joint
  std::vector<Eigen::Matrix3d> world_rot;    // G_j
  std::vector<Eigen::Matrix3d> parent_rot;   // G_parent(j); identity at root
  std::vector<Eigen::Matrix3d> left_jac;     // J_l(theta_j)
};

KinematicCache forward_kinematics_cache(const ModelParams& params, const SkeletonDef& skel);
std::vector<Eigen::Vector3d> forward_kinematics(const ModelParams& params, const SkeletonDef& skel);

// Unit vector per part, parent joint to child joint. Throws SolverError
// naming the part if the endpoints coincide within 1e-8 cm.
std::vector<Eigen::Vector3d> part_orientations(const std::vector<Eigen::Vector3d>& joints,
                                               const SkeletonDef& skel);

struct Marker {
  int part = 0;
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
};

// Surface markers ride rigidly on their part: parent joint position plus the
// part frame rotation applied to the stored local offset (offsets are fixed
// cm, not phi-scaled).
std::vector<Marker> marker_positions(const ModelParams& params, const SkeletonDef& skel);
std::vector<Marker> marker_positions(const KinematicCache& cache, const SkeletonDef& skel);

// Linear facial expression model rigidly attached to one joint: landmark i =
// p_head + G_head * (offset_i + Basis.block(3i, :) * sigma).
struct FaceBasis {
  int head_joint = 0;
  std::vector<Eigen::Vector3d> offsets;  // rest offsets, head frame
  Eigen::MatrixXd basis;                 // (3*landmarks) x k_sigma

  int landmark_count() const { return static_cast<int>(offsets.size()); }
  int k_sigma() const { return static_cast<int>(basis.cols()); }
};

std::vector<Eigen::Vector3d> face_landmark_positions(const KinematicCache& cache,
                                                     const FaceBasis& face,
                                                     const Eigen::VectorXd& sigma);

// Flat parameter packing [theta | phi | t | sigma] shared by the solvers.
struct ParamLayout {
  int joints = 0, bones = 0, sigma = 0;

  int theta_offset() const { return 0; }
  int phi_offset() const { return 3 * joints; }
  int t_offset() const { return 3 * joints + bones; }
  int sigma_offset() const { return t_offset() + 3; }
  int size() const { return sigma_offset() + sigma; }

  Eigen::VectorXd pack(const ModelParams& p) const;
  ModelParams unpack(const Eigen::VectorXd& x) const;

  static ParamLayout of(const SkeletonDef& skel, int k_sigma);
};

// d(point)/d(theta, phi, t) for a world point rigidly attached to the frame of
// `frame_joint`. Adds into a 3 x layout.size() block starting at j3(0,0); the
// caller zeroes the block. Joint positions additionally need the own-bone phi
// column, handled by joint_position_jacobian.
void accumulate_point_jacobian(const SkeletonDef& skel, const KinematicCache& cache,
                               const ParamLayout& layout, int frame_joint,
                               const Eigen::Vector3d& point,
                               Eigen::Ref<Eigen::MatrixXd> j3);

void joint_position_jacobian(const SkeletonDef& skel, const KinematicCache& cache,
                             const ParamLayout& layout, const ModelParams& params,
                             int joint, Eigen::Ref<Eigen::MatrixXd> j3);

// Presets. Body follows the 18-point OpenPose/COCO ordering (17 parts), hands
// the 21-point OpenPose hand ordering (20 parts). The total skeleton merges
// body, both hands (sharing the body wrists as hand roots) and six foot
// keypoints.
SkeletonDef body18_preset();
SkeletonDef hand21_preset(bool right = false);
SkeletonDef total_preset();

// Fills marker_offsets with `per_part` markers per part: spaced along the
// template bone with alternating radial offsets.
void assign_default_markers(SkeletonDef& skel, int per_part = 8, double radius_cm = 4.0);

FaceBasis make_random_face_basis(const SkeletonDef& skel, int head_joint, int landmarks,
                                 int k_sigma, std::uint64_t seed, double radius_cm = 7.0);

nlohmann::json skeleton_to_json(const SkeletonDef& skel);
SkeletonDef skeleton_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

nlohmann::json face_basis_to_json(const FaceBasis& face);
FaceBasis face_basis_from_json(const nlohmann::json& j);

}  // namespace pofcap
