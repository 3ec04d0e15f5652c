// SPDX-License-Identifier: Apache-2.0
#include "pofcap/skeleton.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <deque>

#include "pofcap/common.hpp"
#include "pofcap/rng.hpp"
#include "pofcap/rotation.hpp"

namespace pofcap {

int SkeletonDef::joint_index(const std::string& joint_name) const {
  for (int i = 0; i < joint_count(); ++i)
    if (joints[i].name == joint_name) return i;
  throw MismatchError("unknown joint name: " + joint_name);
}

const std::vector<int>& SkeletonDef::group(const std::string& key) const {
  auto it = groups.find(key);
  if (it == groups.end()) throw MismatchError("skeleton '" + name + "' has no group: " + key);
  return it->second;
}

void SkeletonDef::finalize() {
  const int n = joint_count();
  if (n == 0) throw MismatchError("skeleton has no joints");
  if (static_cast<int>(template_offsets.size()) != n)
    throw MismatchError("template_offsets size does not match joint count");

  root_ = -1;
  for (int i = 0; i < n; ++i) {
    const int p = joints[i].parent;
    if (p == -1) {
      if (root_ != -1) throw MismatchError("skeleton has more than one root");
      root_ = i;
    } else if (p < 0 || p >= n || p == i) {
      throw MismatchError("joint '" + joints[i].name + "' has invalid parent");
    }
  }
  if (root_ == -1) throw MismatchError("skeleton has no root");

  // Parts must be exactly the tree edges (parent, child), one per non-root
  // joint, with strictly positive template lengths.
  bone_of_joint_.assign(n, -1);
  if (static_cast<int>(parts.size()) != n - 1)
    throw MismatchError("part count must equal joint count - 1");
  for (int b = 0; b < part_count(); ++b) {
    auto [m, c] = parts[b];
    if (c < 0 || c >= n || m != joints[c].parent)
      throw MismatchError("part " + std::to_string(b) + " is not a (parent, child) edge");
    if (bone_of_joint_[c] != -1)
      throw MismatchError("joint '" + joints[c].name + "' appears in two parts");
    bone_of_joint_[c] = b;
    if (template_offsets[c].norm() <= 0.0)
      throw MismatchError("template bone length must be positive for joint '" +
                          joints[c].name + "'");
  }

  // Parent-before-child order; also detects cycles/disconnected joints.
  order_.clear();
  order_.reserve(n);
  std::vector<std::vector<int>> children(n);
  for (int i = 0; i < n; ++i)
    if (i != root_) children[joints[i].parent].push_back(i);
  std::deque<int> queue{root_};
  while (!queue.empty()) {
    int j = queue.front();
    queue.pop_front();
    order_.push_back(j);
    for (int c : children[j]) queue.push_back(c);
  }
  if (static_cast<int>(order_.size()) != n)
    throw MismatchError("skeleton joints do not form a single tree");

  paths_.assign(n, {});
  for (int j : order_) {
    if (j != root_) paths_[j] = paths_[joints[j].parent];
    paths_[j].push_back(j);
  }

  if (marker_offsets.empty()) marker_offsets.resize(parts.size());
  if (marker_offsets.size() != parts.size())
    throw MismatchError("marker_offsets size does not match part count");
}

ModelParams ModelParams::rest(const SkeletonDef& skel, int k_sigma) {
  ModelParams p;
  p.theta.assign(skel.joint_count(), Eigen::Vector3d::Zero());
  p.phi = Eigen::VectorXd::Ones(skel.part_count());
  p.sigma = Eigen::VectorXd::Zero(k_sigma);
  return p;
}

KinematicCache forward_kinematics_cache(const ModelParams& params, const SkeletonDef& skel) {
  const int n = skel.joint_count();
  if (static_cast<int>(params.theta.size()) != n)
    throw MismatchError("theta size does not match skeleton");
  if (params.phi.size() != skel.part_count())
    throw MismatchError("phi size does not match skeleton");

  KinematicCache c;
  c.joints.resize(n);
  c.world_rot.resize(n);
  c.parent_rot.resize(n);
  c.left_jac.resize(n);
  for (int j : skel.traversal_order()) {
    const Eigen::Matrix3d local = rodrigues(params.theta[j]);
    c.left_jac[j] = so3_left_jacobian(params.theta[j]);
    if (j == skel.root()) {
      c.parent_rot[j] = Eigen::Matrix3d::Identity();
      c.world_rot[j] = local;
      c.joints[j] = params.t;
    } else {
      const int p = skel.joints[j].parent;
      c.parent_rot[j] = c.world_rot[p];
      c.world_rot[j] = c.world_rot[p] * local;
      const double scale = params.phi[skel.bone_of_joint(j)];
      c.joints[j] = c.joints[p] + c.world_rot[p] * (scale * skel.template_offsets[j]);
    }
  }
  return c;
}

std::vector<Eigen::Vector3d> forward_kinematics(const ModelParams& params,
                                                const SkeletonDef& skel) {
  return forward_kinematics_cache(params, skel).joints;
}

std::vector<Eigen::Vector3d> part_orientations(const std::vector<Eigen::Vector3d>& joints,
                                               const SkeletonDef& skel) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(skel.part_count());
  for (int b = 0; b < skel.part_count(); ++b) {
    auto [m, n] = skel.parts[b];
    const Eigen::Vector3d d = joints[n] - joints[m];
    const double len = d.norm();
    if (len <= 1e-8)
      throw SolverError("degenerate part " + std::to_string(b) + " (" + skel.joints[m].name +
                        " -> " + skel.joints[n].name + "): coincident endpoints");
    out.push_back(d / len);
  }
  return out;
}

std::vector<Marker> marker_positions(const KinematicCache& cache, const SkeletonDef& skel) {
  std::vector<Marker> out;
  for (int b = 0; b < skel.part_count(); ++b) {
    const int m = skel.parts[b].first;
    for (const auto& offset : skel.marker_offsets[b])
      out.push_back({b, cache.joints[m] + cache.world_rot[m] * offset});
  }
  return out;
}

std::vector<Marker> marker_positions(const ModelParams& params, const SkeletonDef& skel) {
  return marker_positions(forward_kinematics_cache(params, skel), skel);
}

std::vector<Eigen::Vector3d> face_landmark_positions(const KinematicCache& cache,
                                                     const FaceBasis& face,
                                                     const Eigen::VectorXd& sigma) {
  if (sigma.size() != face.basis.cols())
    throw MismatchError("sigma length does not match face basis");
  std::vector<Eigen::Vector3d> out(face.offsets.size());
  const Eigen::VectorXd disp = face.basis * sigma;
  const Eigen::Vector3d head = cache.joints[face.head_joint];
  const Eigen::Matrix3d& rot = cache.world_rot[face.head_joint];
  for (int i = 0; i < face.landmark_count(); ++i)
    out[i] = head + rot * (face.offsets[i] + disp.segment<3>(3 * i));
  return out;
}

Eigen::VectorXd ParamLayout::pack(const ModelParams& p) const {
  Eigen::VectorXd x(size());
  for (int j = 0; j < joints; ++j) x.segment<3>(3 * j) = p.theta[j];
  x.segment(phi_offset(), bones) = p.phi;
  x.segment<3>(t_offset()) = p.t;
  if (sigma > 0) x.segment(sigma_offset(), sigma) = p.sigma;
  return x;
}

ModelParams ParamLayout::unpack(const Eigen::VectorXd& x) const {
  ModelParams p;
  p.theta.resize(joints);
  for (int j = 0; j < joints; ++j) p.theta[j] = x.segment<3>(3 * j);
  p.phi = x.segment(phi_offset(), bones);
  p.t = x.segment<3>(t_offset());
  p.sigma = x.segment(sigma_offset(), sigma);
  return p;
}

ParamLayout ParamLayout::of(const SkeletonDef& skel, int k_sigma) {
  return {skel.joint_count(), skel.part_count(), k_sigma};
}

void accumulate_point_jacobian(const SkeletonDef& skel, const KinematicCache& cache,
                               const ParamLayout& layout, int frame_joint,
                               const Eigen::Vector3d& point,
                               Eigen::Ref<Eigen::MatrixXd> j3) {
  // theta: for each joint m on the root->frame path, the point rides on
  // G_m = G_parent(m) R(theta_m), so
  //   d point / d theta_m = -G_par [G_par^T (point - p_m)]x J_l(theta_m).
  for (int m : skel.path_from_root(frame_joint)) {
    const Eigen::Matrix3d& gp = cache.parent_rot[m];
    const Eigen::Vector3d local = gp.transpose() * (point - cache.joints[m]);
    j3.block<3, 3>(0, 3 * m) -= gp * skew(local) * cache.left_jac[m];
  }
  // phi: bones along the path move the frame origin.
  for (int a : skel.path_from_root(frame_joint)) {
    if (a == skel.root()) continue;
    const int b = skel.bone_of_joint(a);
    j3.col(layout.phi_offset() + b) += cache.parent_rot[a] * skel.template_offsets[a];
  }
  j3.block<3, 3>(0, layout.t_offset()) += Eigen::Matrix3d::Identity();
}

void joint_position_jacobian(const SkeletonDef& skel, const KinematicCache& cache,
                             const ParamLayout& layout, const ModelParams& params,
                             int joint, Eigen::Ref<Eigen::MatrixXd> j3) {
  (void)params;
  if (joint == skel.root()) {
    j3.block<3, 3>(0, layout.t_offset()) += Eigen::Matrix3d::Identity();
    return;
  }
  const int parent = skel.joints[joint].parent;
  accumulate_point_jacobian(skel, cache, layout, parent, cache.joints[joint], j3);
  const int b = skel.bone_of_joint(joint);
  j3.col(layout.phi_offset() + b) += cache.parent_rot[joint] * skel.template_offsets[joint];
}

void assign_default_markers(SkeletonDef& skel, int per_part, double radius_cm) {
  skel.marker_offsets.assign(skel.parts.size(), {});
  for (int b = 0; b < skel.part_count(); ++b) {
    const int child = skel.parts[b].second;
    const Eigen::Vector3d bone = skel.template_offsets[child];
    const double len = bone.norm();
    const Eigen::Vector3d u = bone / len;
    // Two radial axes perpendicular to the template bone.
    Eigen::Vector3d a = u.cross(Eigen::Vector3d::UnitX());
    if (a.norm() < 1e-6) a = u.cross(Eigen::Vector3d::UnitY());
    a.normalize();
    const Eigen::Vector3d c = u.cross(a);
    const double r = std::min(radius_cm, 0.4 * len);
    const Eigen::Vector3d dirs[4] = {a, c, -a, -c};
    for (int i = 0; i < per_part; ++i) {
      const double f = (i + 0.5) / per_part;
      skel.marker_offsets[b].push_back(f * bone + r * dirs[i % 4]);
    }
  }
}

FaceBasis make_random_face_basis(const SkeletonDef& skel, int head_joint, int landmarks,
                                 int k_sigma, std::uint64_t seed, double radius_cm) {
  (void)skel;
  FaceBasis face;
  face.head_joint = head_joint;
  CounterRng rng(seed, 0xfaceull);
  face.offsets.resize(landmarks);
  for (auto& o : face.offsets)
    o = Eigen::Vector3d(rng.uniform(-radius_cm, radius_cm), rng.uniform(-radius_cm, radius_cm),
                        rng.uniform(-radius_cm * 0.5, radius_cm * 0.5));
  // Orthonormal columns require k <= 3*landmarks.
  const int k = std::min(k_sigma, 3 * landmarks);
  Eigen::MatrixXd g(3 * landmarks, k);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(3 * landmarks, k);
  face.basis = q;
  return face;
}

nlohmann::json skeleton_to_json(const SkeletonDef& skel) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = skel.name;
  j["joints"] = nlohmann::json::array();
  for (const auto& joint : skel.joints)
    j["joints"].push_back({{"name", joint.name}, {"parent", joint.parent}});
  j["parts"] = nlohmann::json::array();
  for (auto [m, n] : skel.parts) j["parts"].push_back({m, n});
  j["template_offsets_cm"] = nlohmann::json::array();
  for (const auto& o : skel.template_offsets)
    j["template_offsets_cm"].push_back({o.x(), o.y(), o.z()});
  j["marker_offsets_cm"] = nlohmann::json::array();
  for (const auto& ms : skel.marker_offsets) {
    nlohmann::json part = nlohmann::json::array();
    for (const auto& o : ms) part.push_back({o.x(), o.y(), o.z()});
    j["marker_offsets_cm"].push_back(part);
  }
  j["groups"] = skel.groups;
  return j;
}

nlohmann::json params_to_json(const ModelParams& p) {
  nlohmann::json j;
  j["theta"] = nlohmann::json::array();
  for (const auto& a : p.theta) j["theta"].push_back({a.x(), a.y(), a.z()});
  j["phi"] = std::vector<double>(p.phi.data(), p.phi.data() + p.phi.size());
  j["t"] = {p.t.x(), p.t.y(), p.t.z()};
  j["sigma"] = std::vector<double>(p.sigma.data(), p.sigma.data() + p.sigma.size());
  return j;
}

ModelParams params_from_json(const nlohmann::json& j) {
  ModelParams p;
  for (const auto& a : j.at("theta"))
    p.theta.emplace_back(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
  const auto phi = j.at("phi").get<std::vector<double>>();
  p.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()));
  const auto& t = j.at("t");
  p.t = Eigen::Vector3d(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
  const auto sig = j.at("sigma").get<std::vector<double>>();
  p.sigma = Eigen::Map<const Eigen::VectorXd>(sig.data(), static_cast<Eigen::Index>(sig.size()));
  return p;
}

nlohmann::json face_basis_to_json(const FaceBasis& face) {
  nlohmann::json j;
  j["head_joint"] = face.head_joint;
  j["offsets_cm"] = nlohmann::json::array();
  for (const auto& o : face.offsets) j["offsets_cm"].push_back({o.x(), o.y(), o.z()});
  j["basis"] = nlohmann::json::array();
  for (int r = 0; r < face.basis.rows(); ++r) {
    std::vector<double> row(face.basis.cols());
    for (int c = 0; c < face.basis.cols(); ++c) row[c] = face.basis(r, c);
    j["basis"].push_back(row);
  }
  return j;
}

FaceBasis face_basis_from_json(const nlohmann::json& j) {
  FaceBasis face;
  face.head_joint = j.at("head_joint").get<int>();
  for (const auto& o : j.at("offsets_cm"))
    face.offsets.emplace_back(o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>());
  const auto& rows = j.at("basis");
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows.at(0).size()) : 0;
  face.basis.resize(r, c);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < c; ++k) face.basis(i, k) = rows.at(i).at(k).get<double>();
  return face;
}

SkeletonDef skeleton_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != 1) throw FormatError("unsupported skeleton schema");
  SkeletonDef s;
  s.name = j.value("name", "");
  for (const auto& joint : j.at("joints"))
    s.joints.push_back({joint.at("name").get<std::string>(), joint.at("parent").get<int>()});
  for (const auto& part : j.at("parts"))
    s.parts.emplace_back(part.at(0).get<int>(), part.at(1).get<int>());
  for (const auto& o : j.at("template_offsets_cm"))
    s.template_offsets.emplace_back(o.at(0).get<double>(), o.at(1).get<double>(),
                                    o.at(2).get<double>());
  if (j.contains("marker_offsets_cm")) {
    for (const auto& part : j.at("marker_offsets_cm")) {
      std::vector<Eigen::Vector3d> ms;
      for (const auto& o : part)
        ms.emplace_back(o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>());
      s.marker_offsets.push_back(std::move(ms));
    }
  }
  if (j.contains("groups"))
    s.groups = j.at("groups").get<std::map<std::string, std::vector<int>>>();
  s.finalize();
  return s;
}

}  // namespace pofcap
