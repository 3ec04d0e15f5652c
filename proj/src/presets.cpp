// SPDX-License-Identifier: Apache-2.0
//
// Built-in skeleton templates. Geometry is a neutral ~170 cm figure in the
// camera frame convention (x right, y down, z into the scene), facing the
// camera. The same definitions ship as JSON under configs/.
#include <array>

#include "pofcap/skeleton.hpp"

namespace pofcap {

namespace {

struct JointSpec {
  const char* name;
  int parent;
  double x, y, z;
};

// 18-point OpenPose/COCO body ordering, rooted at the neck.
constexpr std::array<JointSpec, 18> kBody = {{
    {"nose", 1, 0.0, -16.0, -4.0},
    {"neck", -1, 0.0, 0.0, 0.0},
    {"rshoulder", 1, -17.0, 1.0, 0.0},
    {"relbow", 2, -1.0, 28.0, 0.0},
    {"rwrist", 3, 0.0, 25.0, 0.0},
    {"lshoulder", 1, 17.0, 1.0, 0.0},
    {"lelbow", 5, 1.0, 28.0, 0.0},
    {"lwrist", 6, 0.0, 25.0, 0.0},
    {"rhip", 1, -10.0, 48.0, 2.0},
    {"rknee", 8, 0.0, 42.0, 0.0},
    {"rankle", 9, 0.0, 40.0, 0.0},
    {"lhip", 1, 10.0, 48.0, 2.0},
    {"lknee", 11, 0.0, 42.0, 0.0},
    {"lankle", 12, 0.0, 40.0, 0.0},
    {"reye", 0, -3.5, -3.0, -1.0},
    {"leye", 0, 3.5, -3.0, -1.0},
    {"rear", 14, -4.5, 1.5, 5.0},
    {"lear", 15, 4.5, 1.5, 5.0},
}};

// Per-finger (base offset, three segment lengths), left hand, fingers up.
struct FingerSpec {
  const char* name;
  double bx, by, bz;
  double l1, l2, l3;
};

constexpr std::array<FingerSpec, 5> kFingers = {{
    {"thumb", -4.0, -3.5, 0.0, 3.4, 3.0, 2.4},
    {"index", -2.5, -9.0, 0.0, 4.5, 2.8, 2.2},
    {"middle", -0.5, -9.5, 0.0, 5.0, 3.0, 2.4},
    {"ring", 1.5, -9.0, 0.0, 4.5, 2.8, 2.2},
    {"little", 3.5, -8.0, 0.0, 3.5, 2.3, 1.9},
}};

void add_joint(SkeletonDef& s, const std::string& name, int parent, double x, double y,
               double z) {
  s.joints.push_back({name, parent});
  s.template_offsets.emplace_back(x, y, z);
  if (parent >= 0) s.parts.emplace_back(parent, static_cast<int>(s.joints.size()) - 1);
}

// Appends the 20 non-root hand joints under `wrist`, returning the new joint
// indices. Thumb direction gets a small x tilt; the mirrored right hand flips
// x offsets.
std::vector<int> add_hand_joints(SkeletonDef& s, int wrist, const std::string& prefix,
                                 bool right) {
  std::vector<int> ids;
  const double sx = right ? -1.0 : 1.0;
  for (const auto& f : kFingers) {
    const Eigen::Vector3d base(sx * f.bx, f.by, f.bz);
    Eigen::Vector3d dir = base.normalized();
    add_joint(s, prefix + f.name + "1", wrist, base.x(), base.y(), base.z());
    int prev = static_cast<int>(s.joints.size()) - 1;
    ids.push_back(prev);
    for (int seg = 0; seg < 3; ++seg) {
      const double len = seg == 0 ? f.l1 : (seg == 1 ? f.l2 : f.l3);
      const Eigen::Vector3d o = len * dir;
      add_joint(s, prefix + f.name + std::to_string(seg + 2), prev, o.x(), o.y(), o.z());
      prev = static_cast<int>(s.joints.size()) - 1;
      ids.push_back(prev);
    }
  }
  return ids;
}

std::vector<int> iota_vec(int begin, int end) {
  std::vector<int> v;
  for (int i = begin; i < end; ++i) v.push_back(i);
  return v;
}

}  // namespace

SkeletonDef body18_preset() {
  SkeletonDef s;
  s.name = "body18";
  for (const auto& j : kBody) add_joint(s, j.name, j.parent, j.x, j.y, j.z);
  s.groups["body_joints"] = iota_vec(0, 18);
  s.groups["body_parts"] = iota_vec(0, 17);
  s.groups["torso"] = {1, 2, 5, 8, 11};
  s.groups["limbs"] = {1, 2, 5, 8, 11, 3, 4, 6, 7, 9, 10, 12, 13};
  s.groups["head"] = {0, 14, 15, 16, 17};
  // Legs parts (hip->knee, knee->ankle both sides) by part index.
  s.finalize();
  std::vector<int> legs;
  for (int b = 0; b < s.part_count(); ++b) {
    auto [m, n] = s.parts[b];
    if (n == 9 || n == 10 || n == 12 || n == 13) legs.push_back(b);
  }
  s.groups["leg_parts"] = legs;
  assign_default_markers(s);
  return s;
}

SkeletonDef hand21_preset(bool right) {
  SkeletonDef s;
  s.name = right ? "hand21r" : "hand21l";
  add_joint(s, "wrist", -1, 0.0, 0.0, 0.0);
  add_hand_joints(s, 0, "", right);
  s.groups["body_joints"] = iota_vec(0, 21);
  s.groups["body_parts"] = iota_vec(0, 20);
  // Wrist plus finger bases first, then the remaining phalanges.
  s.groups["torso"] = {0, 1, 5, 9, 13, 17};
  s.groups["limbs"] = iota_vec(0, 21);
  s.groups["fingers"] = iota_vec(1, 21);
  s.finalize();
  assign_default_markers(s, 8, 1.0);
  return s;
}

SkeletonDef total_preset() {
  SkeletonDef s;
  s.name = "total";
  for (const auto& j : kBody) add_joint(s, j.name, j.parent, j.x, j.y, j.z);
  const std::vector<int> lh = add_hand_joints(s, 7, "l_", false);
  const std::vector<int> rh = add_hand_joints(s, 4, "r_", true);
  // Foot points: big toe, small toe, heel per side, children of the ankles.
  add_joint(s, "rbigtoe", 10, -2.0, 6.0, -15.0);
  add_joint(s, "rsmalltoe", 10, -7.0, 6.0, -12.0);
  add_joint(s, "rheel", 10, 0.0, 8.0, 6.0);
  add_joint(s, "lbigtoe", 13, 2.0, 6.0, -15.0);
  add_joint(s, "lsmalltoe", 13, 7.0, 6.0, -12.0);
  add_joint(s, "lheel", 13, 0.0, 8.0, 6.0);
  const int n = static_cast<int>(s.joints.size());

  s.groups["body_joints"] = iota_vec(0, 18);
  s.groups["torso"] = {1, 2, 5, 8, 11};
  s.groups["limbs"] = {1, 2, 5, 8, 11, 3, 4, 6, 7, 9, 10, 12, 13};
  s.groups["head"] = {0, 14, 15, 16, 17};
  // Hand observation maps: entry 0 is the shared body wrist.
  std::vector<int> lh_joints{7}, rh_joints{4};
  lh_joints.insert(lh_joints.end(), lh.begin(), lh.end());
  rh_joints.insert(rh_joints.end(), rh.begin(), rh.end());
  s.groups["lh_joints"] = lh_joints;
  s.groups["rh_joints"] = rh_joints;
  std::vector<int> fingers(lh.begin(), lh.end());
  fingers.insert(fingers.end(), rh.begin(), rh.end());
  s.groups["fingers"] = fingers;
  s.groups["toe_joints"] = iota_vec(n - 6, n);
  s.groups["toes"] = iota_vec(n - 6, n);
  s.finalize();

  // Part maps by child joint.
  std::vector<int> body_parts, lh_parts, rh_parts;
  for (int b = 0; b < s.part_count(); ++b) {
    const int child = s.parts[b].second;
    if (child < 18) body_parts.push_back(b);
  }
  for (int child : lh) lh_parts.push_back(s.bone_of_joint(child));
  for (int child : rh) rh_parts.push_back(s.bone_of_joint(child));
  s.groups["body_parts"] = body_parts;
  s.groups["lh_parts"] = lh_parts;
  s.groups["rh_parts"] = rh_parts;
  assign_default_markers(s);
  return s;
}

}  // namespace pofcap
