// SPDX-License-Identifier: Apache-2.0
#include "pofcap/synth.hpp"

#include <cmath>
#include <fstream>

#include "pofcap/common.hpp"
#include "pofcap/rotation.hpp"

namespace pofcap {

namespace {

// Per-joint symmetric angle limits from the motion config and skeleton groups.
std::vector<double> joint_limits(const SkeletonDef& skel, const MotionConfig& m) {
  std::vector<double> lim(skel.joint_count(), m.default_limit);
  for (const auto& [group, value] : m.group_limits) {
    if (!skel.has_group(group)) continue;
    for (int j : skel.group(group)) lim[j] = value;
  }
  lim[skel.root()] = m.root_limit;
  return lim;
}

// Folds an unbounded coordinate into [lo, hi] by reflection (triangle wave).
double reflect_into(double x, double lo, double hi) {
  const double period = 2.0 * (hi - lo);
  if (period <= 0.0) return lo;
  double y = std::fmod(x - lo, period);
  if (y < 0.0) y += period;
  return lo + (y <= hi - lo ? y : period - y);
}

// Always consumes two draws so noise-level sweeps see identical noise
// directions at every sigma, differing only in magnitude.
Eigen::Vector2d perturb(const Eigen::Vector2d& p, double sigma, CounterRng& rng) {
  const Eigen::Vector2d n(rng.normal(), rng.normal());
  return p + sigma * n;
}

bool inside(const Eigen::Vector2d& p, int size) {
  return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= size - 1 && p.y() <= size - 1;
}

std::vector<Keypoint2D> observe_points(const std::vector<Eigen::Vector3d>& points,
                                       const Camera& camera, double sigma, double dropout,
                                       int size, CounterRng& rng) {
  std::vector<Keypoint2D> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool dropped = dropout > 0.0 && rng.uniform() < dropout;
    Eigen::Vector2d px = perturb(camera.project(points[i]), sigma, rng);
    if (dropped || !inside(px, size)) continue;
    out[i] = {px, 1.0, true};
  }
  return out;
}

}  // namespace

SkeletonDef skeleton_by_name(const std::string& name, int markers_per_part) {
  SkeletonDef skel;
  if (name == "body18")
    skel = body18_preset();
  else if (name == "hand21" || name == "hand21l")
    skel = hand21_preset(false);
  else if (name == "hand21r")
    skel = hand21_preset(true);
  else if (name == "total")
    skel = total_preset();
  else if (name.size() > 5 && name.substr(name.size() - 5) == ".json") {
    std::ifstream in(name);
    if (!in) throw ConfigError("cannot open skeleton file: " + name);
    skel = skeleton_from_json(nlohmann::json::parse(in));
    if (skel.marker_offsets.empty() ||
        skel.marker_offsets[0].size() != static_cast<std::size_t>(markers_per_part))
      assign_default_markers(skel, markers_per_part);
    return skel;
  } else {
    throw ConfigError("unknown skeleton preset: " + name);
  }
  if (markers_per_part != 8)
    assign_default_markers(skel, markers_per_part,
                           name.rfind("hand", 0) == 0 ? 1.0 : 4.0);
  return skel;
}

std::vector<Eigen::Vector3d> sample_feasible_pose(const SkeletonDef& skel,
                                                  const MotionConfig& motion,
                                                  double sigma_scale, CounterRng& rng) {
  const auto limits = joint_limits(skel, motion);
  std::vector<Eigen::Vector3d> pose(skel.joint_count());
  for (int j = 0; j < skel.joint_count(); ++j) {
    const double sigma = sigma_scale * motion.start_sigma_rad;
    for (int k = 0; k < 3; ++k)
      pose[j][k] = rng.truncated_normal(0.0, sigma, -limits[j], limits[j]);
  }
  return pose;
}

SyntheticSequence generate_sequence(const SceneConfig& cfg) {
  SyntheticSequence seq;
  seq.skeleton = skeleton_by_name(cfg.skeleton, cfg.markers_per_part);
  seq.camera = cfg.camera;
  const SkeletonDef& skel = seq.skeleton;

  int k_sigma = 0;
  if (cfg.face.enabled) {
    if (cfg.skeleton.rfind("hand", 0) == 0)
      throw ConfigError("face model requires a body skeleton");
    seq.face = make_random_face_basis(skel, skel.joint_index("nose"), cfg.face.landmarks,
                                      cfg.face.k_sigma, cfg.face.seed);
    k_sigma = seq.face->k_sigma();
  }

  CounterRng rng(cfg.seed, 1);
  const auto limits = joint_limits(skel, cfg.motion);
  const auto theta0 = sample_feasible_pose(skel, cfg.motion, 1.0, rng);

  std::vector<Eigen::Vector3d> omega(skel.joint_count());
  for (auto& w : omega)
    for (int k = 0; k < 3; ++k)
      w[k] = rng.uniform(-cfg.motion.angular_velocity_max, cfg.motion.angular_velocity_max);

  // Center the rest-pose bounding box on the camera axis so the whole figure
  // projects inside the crop.
  Eigen::Vector3d t0 = Eigen::Vector3d::Zero();
  {
    const auto rest = forward_kinematics(ModelParams::rest(skel), skel);
    Eigen::Vector3d lo = rest[0], hi = rest[0];
    for (const auto& p : rest) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    t0.x() = -center.x();
    t0.y() = -center.y();
  }
  if (cfg.camera.mode == Camera::Mode::Perspective) t0.z() = 300.0;
  Eigen::Vector3d vt;
  for (int k = 0; k < 3; ++k)
    vt[k] = rng.uniform(-cfg.motion.translation_velocity_max,
                        cfg.motion.translation_velocity_max);

  Eigen::VectorXd sigma_gt = Eigen::VectorXd::Zero(k_sigma);
  if (k_sigma > 0)
    for (int k = 0; k < k_sigma; ++k) sigma_gt[k] = cfg.face.sigma_scale * rng.normal();

  const double dt = 1.0 / cfg.motion.fps;
  for (int i = 0; i < cfg.n_frames; ++i) {
    ModelParams p = ModelParams::rest(skel, k_sigma);
    const double time = i * dt;
    for (int j = 0; j < skel.joint_count(); ++j)
      for (int k = 0; k < 3; ++k)
        p.theta[j][k] =
            reflect_into(theta0[j][k] + omega[j][k] * time, -limits[j], limits[j]);
    p.t = t0 + time * vt;
    p.sigma = sigma_gt;

    GtFrame frame;
    frame.params = std::move(p);
    frame.joints = forward_kinematics(frame.params, skel);
    frame.markers = marker_positions(frame.params, skel);
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

RenderedFrame render_observation(const GtFrame& gt, const SyntheticSequence& seq,
                                 const NoiseConfig& noise, const FieldConfig& fields,
                                 std::uint64_t seed, int frame_index, bool with_toes) {
  const SkeletonDef& skel = seq.skeleton;
  CounterRng rng(seed, 0xb5000000ull + static_cast<std::uint64_t>(frame_index));
  RenderedFrame out;
  const int size = fields.size;

  auto observe_network = [&](const std::vector<int>& joint_ids,
                             const std::vector<int>& part_ids) {
    Observation obs;
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(joint_ids.size());
    for (int j : joint_ids) pts.push_back(gt.joints[j]);
    obs.keypoints =
        observe_points(pts, seq.camera, noise.keypoint_sigma_px, noise.dropout_joint, size, rng);
    // Decode-equivalent semantics: an orientation is recoverable only when
    // both endpoint keypoints survived.
    std::vector<int> joint_to_obs(skel.joint_count(), -1);
    for (std::size_t i = 0; i < joint_ids.size(); ++i)
      joint_to_obs[joint_ids[i]] = static_cast<int>(i);
    obs.orientations.resize(part_ids.size());
    for (std::size_t i = 0; i < part_ids.size(); ++i) {
      const bool dropped = noise.dropout_part > 0.0 && rng.uniform() < noise.dropout_part;
      auto [m, n] = skel.parts[part_ids[i]];
      Eigen::Vector3d dir = (gt.joints[n] - gt.joints[m]).normalized();
      if (noise.pof_sigma > 0.0) {
        for (int k = 0; k < 3; ++k) dir[k] += noise.pof_sigma * rng.normal();
        const double norm = dir.norm();
        if (norm < 1e-12) continue;
        dir /= norm;
      }
      if (dropped) continue;
      const int om = joint_to_obs[m], on = joint_to_obs[n];
      if (om < 0 || on < 0 || !obs.keypoints[om].present || !obs.keypoints[on].present)
        continue;
      obs.orientations[i] = {dir, true};
    }
    return obs;
  };

  out.body = observe_network(skel.group("body_joints"), skel.group("body_parts"));
  if (skel.has_group("lh_joints")) {
    out.left_hand = observe_network(skel.group("lh_joints"), skel.group("lh_parts"));
    out.right_hand = observe_network(skel.group("rh_joints"), skel.group("rh_parts"));
  }
  if (with_toes && skel.has_group("toe_joints")) {
    std::vector<Eigen::Vector3d> pts;
    for (int j : skel.group("toe_joints")) pts.push_back(gt.joints[j]);
    out.body.toes =
        observe_points(pts, seq.camera, noise.toe_sigma_px, noise.dropout_joint, size, rng);
  }
  if (seq.face) {
    const auto cache = forward_kinematics_cache(gt.params, skel);
    const auto landmarks = face_landmark_positions(cache, *seq.face, gt.params.sigma);
    out.body.face =
        observe_points(landmarks, seq.camera, noise.face_sigma_px, 0.0, size, rng);
  }

  if (fields.write) {
    out.fields.h = size;
    out.fields.w = size;
    out.fields.confidence = render_confidence(out.body.keypoints, size, size, fields.sigma_px);
    // Segment endpoints come from the observed keypoints so a decode
    // round-trip recovers exactly the observation values.
    std::vector<std::pair<int, int>> obs_parts;
    const auto& part_ids = skel.group("body_parts");
    const auto& joint_ids = skel.group("body_joints");
    std::vector<int> joint_to_obs(skel.joint_count(), -1);
    for (std::size_t i = 0; i < joint_ids.size(); ++i)
      joint_to_obs[joint_ids[i]] = static_cast<int>(i);
    std::vector<PofSegment> segments;
    for (std::size_t i = 0; i < part_ids.size(); ++i) {
      auto [m, n] = skel.parts[part_ids[i]];
      PofSegment s;
      s.channel = static_cast<int>(i);
      const int om = joint_to_obs[m], on = joint_to_obs[n];
      s.present = om >= 0 && on >= 0 && out.body.keypoints[om].present &&
                  out.body.keypoints[on].present && out.body.orientations[i].present;
      if (s.present) {
        s.a = out.body.keypoints[om].px;
        s.b = out.body.keypoints[on].px;
        s.dir = out.body.orientations[i].dir;
      }
      segments.push_back(s);
    }
    out.fields.pof =
        render_pof(segments, static_cast<int>(part_ids.size()), size, size, fields.half_width_px)
            .pof;
  }
  return out;
}

FlowTargets oracle_flow(const GtFrame& gt, const SkeletonDef& skel, const Camera& camera,
                        double sigma_flow, CounterRng& rng) {
  FlowTargets out;
  const auto visible = part_visibility(gt.joints, skel);
  out.targets.resize(gt.markers.size());
  for (std::size_t i = 0; i < gt.markers.size(); ++i) {
    out.targets[i].marker = static_cast<int>(i);
    out.targets[i].valid = visible[gt.markers[i].part];
    if (out.targets[i].valid)
      out.targets[i].target = perturb(camera.project(gt.markers[i].pos), sigma_flow, rng);
  }
  return out;
}

FlowProvider make_oracle_flow_provider(const SyntheticSequence& seq, double sigma_flow,
                                       std::uint64_t seed) {
  // The oracle ignores the estimates entirely; it reads the ground truth for
  // the queried frame.
  const SyntheticSequence* sp = &seq;
  return [sp, sigma_flow, seed](const ModelParams&, const ModelParams&, int frame_index) {
    if (frame_index < 0 || frame_index >= static_cast<int>(sp->frames.size()))
      throw MismatchError("oracle flow: frame index out of range");
    CounterRng rng(seed, 0xf100000ull + static_cast<std::uint64_t>(frame_index));
    return oracle_flow(sp->frames[frame_index], sp->skeleton, sp->camera, sigma_flow, rng);
  };
}

std::vector<int> filter_frames(const std::vector<std::vector<Eigen::Vector3d>>& joints_seq,
                               const SkeletonDef& skel, double threshold) {
  std::vector<int> kept;
  if (joints_seq.empty()) return kept;
  const int p = skel.part_count();
  std::vector<double> avg(p, 0.0);
  std::vector<std::vector<double>> lengths(joints_seq.size(), std::vector<double>(p));
  for (std::size_t f = 0; f < joints_seq.size(); ++f) {
    for (int b = 0; b < p; ++b) {
      auto [m, n] = skel.parts[b];
      lengths[f][b] = (joints_seq[f][n] - joints_seq[f][m]).norm();
      avg[b] += lengths[f][b];
    }
  }
  for (auto& a : avg) a /= static_cast<double>(joints_seq.size());
  for (std::size_t f = 0; f < joints_seq.size(); ++f) {
    bool ok = true;
    for (int b = 0; b < p && ok; ++b)
      if (std::abs(lengths[f][b] - avg[b]) > threshold * avg[b]) ok = false;
    if (ok) kept.push_back(static_cast<int>(f));
  }
  return kept;
}

ModelParams transform_to_view(const ModelParams& params, int root_joint, double azimuth_rad,
                              double elevation_rad, const Eigen::Vector3d& pivot) {
  // Rotate the subject about the pivot: azimuth about the vertical (y) axis,
  // then elevation about the horizontal (x) axis. Equivalent to moving the
  // camera to that viewpoint while keeping its intrinsics.
  const Eigen::Matrix3d r_az = rodrigues(Eigen::Vector3d(0.0, azimuth_rad, 0.0));
  const Eigen::Matrix3d r_el = rodrigues(Eigen::Vector3d(elevation_rad, 0.0, 0.0));
  const Eigen::Matrix3d r_view = r_el * r_az;
  ModelParams out = params;
  out.theta[root_joint] = log_so3(r_view * rodrigues(params.theta[root_joint]));
  out.t = pivot + r_view * (params.t - pivot);
  return out;
}

nlohmann::json scene_config_to_json(const SceneConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["seed"] = cfg.seed;
  j["n_frames"] = cfg.n_frames;
  j["skeleton"] = cfg.skeleton;
  j["camera"] = cfg.camera;
  j["noise"] = {{"keypoint_sigma_px", cfg.noise.keypoint_sigma_px},
                {"pof_sigma", cfg.noise.pof_sigma},
                {"dropout_joint", cfg.noise.dropout_joint},
                {"dropout_part", cfg.noise.dropout_part},
                {"toe_sigma_px", cfg.noise.toe_sigma_px},
                {"face_sigma_px", cfg.noise.face_sigma_px}};
  j["motion"] = {{"start_sigma_rad", cfg.motion.start_sigma_rad},
                 {"angular_velocity_max", cfg.motion.angular_velocity_max},
                 {"translation_velocity_max", cfg.motion.translation_velocity_max},
                 {"fps", cfg.motion.fps},
                 {"default_limit", cfg.motion.default_limit},
                 {"root_limit", cfg.motion.root_limit},
                 {"group_limits", cfg.motion.group_limits}};
  j["fields"] = {{"write", cfg.fields.write},
                 {"size", cfg.fields.size},
                 {"sigma_px", cfg.fields.sigma_px},
                 {"half_width_px", cfg.fields.half_width_px}};
  j["face"] = {{"enabled", cfg.face.enabled},
               {"landmarks", cfg.face.landmarks},
               {"k_sigma", cfg.face.k_sigma},
               {"seed", cfg.face.seed},
               {"sigma_scale", cfg.face.sigma_scale}};
  j["markers_per_part"] = cfg.markers_per_part;
  j["toes"] = cfg.toes;
  return j;
}

SceneConfig scene_config_from_json(const nlohmann::json& j) {
  SceneConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.n_frames = j.value("n_frames", cfg.n_frames);
  cfg.skeleton = j.value("skeleton", cfg.skeleton);
  if (j.contains("camera")) cfg.camera = j.at("camera").get<Camera>();
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    cfg.noise.keypoint_sigma_px = n.value("keypoint_sigma_px", 0.0);
    cfg.noise.pof_sigma = n.value("pof_sigma", 0.0);
    cfg.noise.dropout_joint = n.value("dropout_joint", 0.0);
    cfg.noise.dropout_part = n.value("dropout_part", 0.0);
    cfg.noise.toe_sigma_px = n.value("toe_sigma_px", 0.0);
    cfg.noise.face_sigma_px = n.value("face_sigma_px", 0.0);
    if (cfg.noise.keypoint_sigma_px < 0.0 || cfg.noise.pof_sigma < 0.0 ||
        cfg.noise.dropout_joint < 0.0 || cfg.noise.dropout_joint > 1.0 ||
        cfg.noise.dropout_part < 0.0 || cfg.noise.dropout_part > 1.0)
      throw ConfigError("invalid noise configuration");
  }
  if (j.contains("motion")) {
    const auto& m = j.at("motion");
    cfg.motion.start_sigma_rad = m.value("start_sigma_rad", cfg.motion.start_sigma_rad);
    cfg.motion.angular_velocity_max =
        m.value("angular_velocity_max", cfg.motion.angular_velocity_max);
    cfg.motion.translation_velocity_max =
        m.value("translation_velocity_max", cfg.motion.translation_velocity_max);
    cfg.motion.fps = m.value("fps", cfg.motion.fps);
    cfg.motion.default_limit = m.value("default_limit", cfg.motion.default_limit);
    cfg.motion.root_limit = m.value("root_limit", cfg.motion.root_limit);
    if (m.contains("group_limits"))
      cfg.motion.group_limits = m.at("group_limits").get<std::map<std::string, double>>();
  }
  if (j.contains("fields")) {
    const auto& f = j.at("fields");
    cfg.fields.write = f.value("write", cfg.fields.write);
    cfg.fields.size = f.value("size", cfg.fields.size);
    cfg.fields.sigma_px = f.value("sigma_px", cfg.fields.sigma_px);
    cfg.fields.half_width_px = f.value("half_width_px", cfg.fields.half_width_px);
  }
  if (j.contains("face")) {
    const auto& f = j.at("face");
    cfg.face.enabled = f.value("enabled", cfg.face.enabled);
    cfg.face.landmarks = f.value("landmarks", cfg.face.landmarks);
    cfg.face.k_sigma = f.value("k_sigma", cfg.face.k_sigma);
    cfg.face.seed = f.value("seed", cfg.face.seed);
    cfg.face.sigma_scale = f.value("sigma_scale", cfg.face.sigma_scale);
  }
  cfg.markers_per_part = j.value("markers_per_part", cfg.markers_per_part);
  cfg.toes = j.value("toes", cfg.toes);
  return cfg;
}

}  // namespace pofcap
