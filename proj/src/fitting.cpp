// SPDX-License-Identifier: Apache-2.0
#include "pofcap/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pofcap/common.hpp"
#include "pofcap/rng.hpp"
#include "pofcap/synth.hpp"
#include "residual_blocks.hpp"

namespace pofcap {

using detail::BlockImpl;
using detail::FaceBlock;
using detail::FaceEntry;
using detail::Keypoint2DBlock;
using detail::Kp2DEntry;
using detail::PofBlock;
using detail::PofEntry;
using detail::PriorBlock;
using detail::RegularizerBlock;
using detail::SystemImpl;
using detail::collect_kp_entries;
using detail::collect_pof_entries;

namespace {

bool has_block(const Stage& stage, Block b) {
  return std::find(stage.blocks.begin(), stage.blocks.end(), b) != stage.blocks.end();
}

}  // namespace

StageSchedule default_schedule(const SkeletonDef& skel, bool with_hands, bool with_toes,
                               bool with_face) {
  StageSchedule schedule;
  Stage torso{"torso", skel.group("torso"),
              {Block::Body2D, Block::BodyPof, Block::BodyPrior}, true, false, false, 30};
  Stage limbs{"limbs", skel.group("limbs"),
              {Block::Body2D, Block::BodyPof, Block::BodyPrior}, true, false, false, 60};
  Stage full{"full", {}, {Block::Body2D, Block::BodyPof, Block::BodyPrior}, true, true,
             with_face, 120};
  for (int j = 0; j < skel.joint_count(); ++j) full.joints.push_back(j);
  if (with_hands) {
    full.blocks.push_back(Block::Hands2D);
    full.blocks.push_back(Block::HandsPof);
    full.blocks.push_back(Block::HandsPrior);
  }
  if (with_toes) full.blocks.push_back(Block::Toes);
  if (with_face) full.blocks.push_back(Block::Face);
  full.blocks.push_back(Block::Regularizers);
  schedule.push_back(std::move(torso));
  schedule.push_back(std::move(limbs));
  schedule.push_back(std::move(full));
  return schedule;
}

// ---------------------------------------------------------------------------
// Standalone residual evaluators.

Eigen::VectorXd residuals_keypoints2d(const ModelParams& params, const SkeletonDef& skel,
                                      const Camera& camera,
                                      const std::vector<Keypoint2D>& keypoints,
                                      const JointMap& joint_map, double weight) {
  const auto joints = forward_kinematics(params, skel);
  const double sw = std::sqrt(weight);
  std::vector<double> vals;
  for (auto [obs_idx, joint] : joint_map) {
    const auto& kp = keypoints[obs_idx];
    if (!kp.present) continue;
    const Eigen::Vector2d d = sw * kp.confidence * (kp.px - camera.project(joints[joint]));
    vals.push_back(d.x());
    vals.push_back(d.y());
  }
  if (vals.empty()) return {};
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Eigen::VectorXd residuals_pof(const ModelParams& params, const SkeletonDef& skel,
                              const std::vector<PartDirection>& orientations,
                              const PartMap& part_map, double weight) {
  // Three rows per part, sqrt(w/2) (obs - dir); squared sum w (1 - obs . dir).
  const auto dirs = part_orientations(forward_kinematics(params, skel), skel);
  const double sw = std::sqrt(0.5 * weight);
  std::vector<double> vals;
  for (auto [obs_idx, part] : part_map) {
    if (!orientations[obs_idx].present) continue;
    const Eigen::Vector3d d = sw * (orientations[obs_idx].dir - dirs[part]);
    vals.push_back(d.x());
    vals.push_back(d.y());
    vals.push_back(d.z());
  }
  if (vals.empty()) return {};
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Eigen::VectorXd residuals_face(const ModelParams& params, const SkeletonDef& skel,
                               const FaceBasis& face, const Camera& camera,
                               const std::vector<Keypoint2D>& face_kps, double weight) {
  const auto cache = forward_kinematics_cache(params, skel);
  const auto landmarks = face_landmark_positions(cache, face, params.sigma);
  const double sw = std::sqrt(weight);
  std::vector<double> vals;
  for (std::size_t i = 0; i < face_kps.size() && i < landmarks.size(); ++i) {
    if (!face_kps[i].present) continue;
    const Eigen::Vector2d d =
        sw * face_kps[i].confidence * (face_kps[i].px - camera.project(landmarks[i]));
    vals.push_back(d.x());
    vals.push_back(d.y());
  }
  if (vals.empty()) return {};
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Eigen::VectorXd residuals_regularizers(const ModelParams& params, const Weights& weights) {
  Eigen::VectorXd r(params.phi.size() + params.sigma.size());
  r.head(params.phi.size()) =
      std::sqrt(weights.w_phi) * (params.phi.array() - 1.0).matrix();
  r.tail(params.sigma.size()) = std::sqrt(weights.w_sigma) * params.sigma;
  return r;
}

// ---------------------------------------------------------------------------

Fitter::Fitter(SkeletonDef skel, FitConfig cfg, std::optional<FaceBasis> face)
    : skel_(std::move(skel)), cfg_(std::move(cfg)), face_(std::move(face)) {
  const bool with_hands = skel_.has_group("lh_joints");
  const bool with_toes = skel_.has_group("toe_joints");
  schedule_ = cfg_.schedule ? *cfg_.schedule
                            : default_schedule(skel_, with_hands, with_toes, face_.has_value());

  // Prior joint partition: hands get their own priors, everything else
  // non-root belongs to the body prior.
  std::vector<bool> is_hand(skel_.joint_count(), false);
  if (skel_.has_group("fingers"))
    for (int j : skel_.group("fingers")) is_hand[j] = true;
  if (with_hands) {
    lh_joints_ = skel_.group("lh_joints");
    rh_joints_ = skel_.group("rh_joints");
    lh_joints_.erase(lh_joints_.begin());  // entry 0 is the shared body wrist
    rh_joints_.erase(rh_joints_.begin());
  }
  for (int j = 0; j < skel_.joint_count(); ++j)
    if (j != skel_.root() && !is_hand[j]) body_prior_joints_.push_back(j);

  // Train the priors on synthetically drawn feasible poses spanning the
  // admissible range (group limits scale with the base limit).
  MotionConfig motion;
  const double limit_ratio = cfg_.prior.angle_limit / motion.default_limit;
  motion.default_limit = cfg_.prior.angle_limit;
  for (auto& [group, value] : motion.group_limits) value *= limit_ratio;
  auto train = [&](const std::vector<int>& joints, std::uint64_t stream) {
    CounterRng rng(cfg_.prior.seed, stream);
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(cfg_.prior.samples);
    for (int i = 0; i < cfg_.prior.samples; ++i) {
      const auto pose = sample_feasible_pose(skel_, motion, cfg_.prior.sigma_scale, rng);
      Eigen::VectorXd v(3 * joints.size());
      for (std::size_t k = 0; k < joints.size(); ++k)
        v.segment<3>(3 * static_cast<Eigen::Index>(k)) = pose[joints[k]];
      samples.push_back(std::move(v));
    }
    return fit_prior(samples, cfg_.prior.eps);
  };
  body_prior_ = train(body_prior_joints_, 0);
  if (with_hands) {
    lh_prior_ = train(lh_joints_, 1);
    rh_prior_ = train(rh_joints_, 2);
  }
}

std::unique_ptr<ResidualSystem> Fitter::assemble(const Stage& stage,
                                                 const TotalObservation& obs,
                                                 const ModelParams& params) const {
  bool in_schedule = false;
  for (const auto& s : schedule_)
    if (s.name == stage.name) in_schedule = true;
  if (!in_schedule) throw MismatchError("stage not in schedule: " + stage.name);

  const int k_sigma = face_ ? face_->k_sigma() : 0;
  const ParamLayout layout = ParamLayout::of(skel_, k_sigma);

  std::vector<bool> active(skel_.joint_count(), false);
  for (int j : stage.joints) active[j] = true;

  std::vector<std::unique_ptr<BlockImpl>> blocks;
  const auto& w = cfg_.weights;

  if (has_block(stage, Block::Body2D)) {
    auto entries =
        collect_kp_entries(obs.body.keypoints, skel_.group("body_joints"), active);
    blocks.push_back(std::make_unique<Keypoint2DBlock>("body2d", std::move(entries),
                                                       cfg_.camera, w.w2d_body));
  }
  if (has_block(stage, Block::BodyPof)) {
    auto entries = collect_pof_entries(obs.body.orientations, skel_.group("body_parts"),
                                       skel_, active);
    blocks.push_back(std::make_unique<PofBlock>("bodypof", std::move(entries), w.wpof_body));
  }
  if (has_block(stage, Block::BodyPrior)) {
    blocks.push_back(
        std::make_unique<PriorBlock>("bodyprior", body_prior_, body_prior_joints_, w.wprior_body));
  }
  if (has_block(stage, Block::Hands2D)) {
    std::vector<Kp2DEntry> entries;
    if (obs.left_hand) {
      auto e = collect_kp_entries(obs.left_hand->keypoints, skel_.group("lh_joints"), active, 0);
      entries.insert(entries.end(), e.begin(), e.end());
    }
    if (obs.right_hand) {
      auto e = collect_kp_entries(obs.right_hand->keypoints, skel_.group("rh_joints"), active, 0);
      entries.insert(entries.end(), e.begin(), e.end());
    }
    blocks.push_back(std::make_unique<Keypoint2DBlock>("hands2d", std::move(entries),
                                                       cfg_.camera, w.w2d_hand));
  }
  if (has_block(stage, Block::HandsPof)) {
    std::vector<PofEntry> entries;
    if (obs.left_hand) {
      auto e = collect_pof_entries(obs.left_hand->orientations, skel_.group("lh_parts"), skel_,
                                   active);
      entries.insert(entries.end(), e.begin(), e.end());
    }
    if (obs.right_hand) {
      auto e = collect_pof_entries(obs.right_hand->orientations, skel_.group("rh_parts"), skel_,
                                   active);
      entries.insert(entries.end(), e.begin(), e.end());
    }
    blocks.push_back(std::make_unique<PofBlock>("handspof", std::move(entries), w.wpof_hand));
  }
  if (has_block(stage, Block::HandsPrior)) {
    if (lh_prior_)
      blocks.push_back(
          std::make_unique<PriorBlock>("lhprior", *lh_prior_, lh_joints_, w.wprior_hand));
    if (rh_prior_)
      blocks.push_back(
          std::make_unique<PriorBlock>("rhprior", *rh_prior_, rh_joints_, w.wprior_hand));
  }
  if (has_block(stage, Block::Toes) && skel_.has_group("toe_joints")) {
    auto entries = collect_kp_entries(obs.body.toes, skel_.group("toe_joints"), active);
    blocks.push_back(
        std::make_unique<Keypoint2DBlock>("toes", std::move(entries), cfg_.camera, w.w_toes));
  }
  if (has_block(stage, Block::Face) && face_) {
    std::vector<FaceEntry> entries;
    if (active[face_->head_joint]) {
      for (std::size_t i = 0; i < obs.body.face.size() &&
                              i < static_cast<std::size_t>(face_->landmark_count());
           ++i) {
        if (!obs.body.face[i].present) continue;
        entries.push_back({obs.body.face[i].px, obs.body.face[i].confidence,
                           static_cast<int>(i)});
      }
    }
    blocks.push_back(std::make_unique<FaceBlock>("face", std::move(entries), *face_,
                                                 cfg_.camera, w.w_face));
  }
  if (has_block(stage, Block::Regularizers)) {
    blocks.push_back(
        std::make_unique<RegularizerBlock>("regularizers", w.w_phi, w.w_sigma, layout));
  }

  // Free parameter mask.
  std::vector<int> free_idx;
  for (int j : stage.joints)
    for (int k = 0; k < 3; ++k) free_idx.push_back(3 * j + k);
  if (stage.free_phi)
    for (int b = 0; b < layout.bones; ++b) free_idx.push_back(layout.phi_offset() + b);
  if (stage.free_translation)
    for (int k = 0; k < 3; ++k) free_idx.push_back(layout.t_offset() + k);
  if (stage.free_sigma)
    for (int k = 0; k < layout.sigma; ++k) free_idx.push_back(layout.sigma_offset() + k);
  std::sort(free_idx.begin(), free_idx.end());

  ModelParams base = params;
  if (static_cast<int>(base.sigma.size()) != k_sigma) {
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(k_sigma);
    sigma.head(std::min<Eigen::Index>(base.sigma.size(), k_sigma)) =
        base.sigma.head(std::min<Eigen::Index>(base.sigma.size(), k_sigma));
    base.sigma = sigma;
  }

  auto system = std::make_unique<SystemImpl>(skel_, layout, layout.pack(base),
                                             std::move(free_idx), std::move(blocks));
  if (system->observation_block_count() > 0 && system->measurement_rows() == 0)
    throw SolverError("no constraints: stage '" + stage.name +
                      "' has no usable observation rows");
  return system;
}

ModelParams Fitter::default_init(const TotalObservation& obs) const {
  ModelParams init = ModelParams::rest(skel_, face_ ? face_->k_sigma() : 0);
  // theta = prior mean for the body prior joints.
  for (std::size_t i = 0; i < body_prior_joints_.size(); ++i)
    init.theta[body_prior_joints_[i]] =
        body_prior_.mu.segment<3>(3 * static_cast<Eigen::Index>(i));
  if (lh_prior_)
    for (std::size_t i = 0; i < lh_joints_.size(); ++i)
      init.theta[lh_joints_[i]] = lh_prior_->mu.segment<3>(3 * static_cast<Eigen::Index>(i));
  if (rh_prior_)
    for (std::size_t i = 0; i < rh_joints_.size(); ++i)
      init.theta[rh_joints_[i]] = rh_prior_->mu.segment<3>(3 * static_cast<Eigen::Index>(i));

  // Translation: back-project the observed root keypoint; fall back to the
  // mean of the present torso keypoints.
  const auto& joint_map = skel_.group("body_joints");
  std::optional<Eigen::Vector2d> anchor;
  for (std::size_t i = 0; i < obs.body.keypoints.size() && i < joint_map.size(); ++i) {
    if (joint_map[i] == skel_.root() && obs.body.keypoints[i].present) {
      anchor = obs.body.keypoints[i].px;
      break;
    }
  }
  if (!anchor) {
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    int count = 0;
    for (int j : skel_.group("torso")) {
      for (std::size_t i = 0; i < obs.body.keypoints.size() && i < joint_map.size(); ++i) {
        if (joint_map[i] == j && obs.body.keypoints[i].present) {
          sum += obs.body.keypoints[i].px;
          ++count;
        }
      }
    }
    if (count == 0) throw SolverError("fit_frame requires at least one torso keypoint");
    anchor = sum / count;
  }
  const Eigen::Vector2d rel = *anchor - cfg_.camera.principal;
  if (cfg_.camera.mode == Camera::Mode::WeakPerspective) {
    init.t = Eigen::Vector3d(rel.x() / cfg_.camera.scale, rel.y() / cfg_.camera.scale, 0.0);
  } else {
    const double z = cfg_.init_depth_cm;
    init.t = Eigen::Vector3d(rel.x() * z / cfg_.camera.focal, rel.y() * z / cfg_.camera.focal, z);
  }
  return init;
}

FitResult Fitter::fit_frame(const TotalObservation& obs,
                            std::optional<ModelParams> init) const {
  ModelParams params = init ? *init : default_init(obs);
  if (face_ && static_cast<int>(params.sigma.size()) != face_->k_sigma())
    params.sigma = Eigen::VectorXd::Zero(face_->k_sigma());

  FitResult result;
  bool all_converged = true;
  for (const auto& stage : schedule_) {
    auto system = assemble(stage, obs, params);
    Eigen::VectorXd x = system->initial_free();
    LmSettings settings = cfg_.solver;
    settings.max_iterations = stage.max_iterations;
    const LmResult lm = solve_lm(
        [&](const Eigen::VectorXd& xv, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
          system->eval(xv, r, J);
        },
        x, settings);
    params = system->to_params(x);
    result.stages.push_back({stage.name, lm.initial_cost, lm.final_cost, lm.iterations,
                             lm.converged, lm.stop_reason});
    result.iterations += lm.iterations;
    all_converged = all_converged && lm.converged;
    if (&stage == &schedule_.back()) {
      result.final_cost = lm.final_cost;
      result.block_costs = system->block_costs(x);
    }
  }
  result.params = std::move(params);
  result.converged = all_converged;
  return result;
}

double Fitter::full_cost(const TotalObservation& obs, const ModelParams& params) const {
  auto system = assemble(schedule_.back(), obs, params);
  Eigen::VectorXd r;
  system->eval(system->initial_free(), r, nullptr);
  return r.squaredNorm();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

const std::map<std::string, Block>& block_names() {
  static const std::map<std::string, Block> names{
      {"body2d", Block::Body2D},         {"bodypof", Block::BodyPof},
      {"bodyprior", Block::BodyPrior},   {"hands2d", Block::Hands2D},
      {"handspof", Block::HandsPof},     {"handsprior", Block::HandsPrior},
      {"toes", Block::Toes},             {"face", Block::Face},
      {"regularizers", Block::Regularizers}};
  return names;
}

std::string block_to_name(Block b) {
  for (const auto& [name, val] : block_names())
    if (val == b) return name;
  return "?";
}

}  // namespace

nlohmann::json fit_config_to_json(const FitConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["camera"] = cfg.camera;
  j["weights"] = {{"w2d_body", cfg.weights.w2d_body},
                  {"wpof_body", cfg.weights.wpof_body},
                  {"wprior_body", cfg.weights.wprior_body},
                  {"w2d_hand", cfg.weights.w2d_hand},
                  {"wpof_hand", cfg.weights.wpof_hand},
                  {"wprior_hand", cfg.weights.wprior_hand},
                  {"w_toes", cfg.weights.w_toes},
                  {"w_face", cfg.weights.w_face},
                  {"w_phi", cfg.weights.w_phi},
                  {"w_sigma", cfg.weights.w_sigma}};
  j["solver"] = {{"max_iterations", cfg.solver.max_iterations},
                 {"lambda0", cfg.solver.lambda0},
                 {"lambda_up", cfg.solver.lambda_up},
                 {"lambda_down", cfg.solver.lambda_down},
                 {"ftol", cfg.solver.ftol},
                 {"xtol", cfg.solver.xtol},
                 {"lambda_max", cfg.solver.lambda_max}};
  j["prior"] = {{"samples", cfg.prior.samples},
                {"seed", cfg.prior.seed},
                {"eps", cfg.prior.eps},
                {"sigma_scale", cfg.prior.sigma_scale},
                {"angle_limit", cfg.prior.angle_limit}};
  j["keypoint_presence_threshold"] = cfg.keypoint_presence_threshold;
  j["orientation_presence_threshold"] = cfg.orientation_presence_threshold;
  j["init_depth_cm"] = cfg.init_depth_cm;
  if (cfg.schedule) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : *cfg.schedule) {
      nlohmann::json js{{"name", s.name},
                        {"joints", s.joints},
                        {"free_translation", s.free_translation},
                        {"free_phi", s.free_phi},
                        {"free_sigma", s.free_sigma},
                        {"max_iterations", s.max_iterations}};
      std::vector<std::string> blocks;
      for (Block b : s.blocks) blocks.push_back(block_to_name(b));
      js["blocks"] = blocks;
      stages.push_back(js);
    }
    j["stages"] = stages;
  }
  return j;
}

FitConfig fit_config_from_json(const nlohmann::json& j) {
  FitConfig cfg;
  if (j.contains("camera")) cfg.camera = j.at("camera").get<Camera>();
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    cfg.weights.w2d_body = w.value("w2d_body", cfg.weights.w2d_body);
    cfg.weights.wpof_body = w.value("wpof_body", cfg.weights.wpof_body);
    cfg.weights.wprior_body = w.value("wprior_body", cfg.weights.wprior_body);
    cfg.weights.w2d_hand = w.value("w2d_hand", cfg.weights.w2d_hand);
    cfg.weights.wpof_hand = w.value("wpof_hand", cfg.weights.wpof_hand);
    cfg.weights.wprior_hand = w.value("wprior_hand", cfg.weights.wprior_hand);
    cfg.weights.w_toes = w.value("w_toes", cfg.weights.w_toes);
    cfg.weights.w_face = w.value("w_face", cfg.weights.w_face);
    cfg.weights.w_phi = w.value("w_phi", cfg.weights.w_phi);
    cfg.weights.w_sigma = w.value("w_sigma", cfg.weights.w_sigma);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    cfg.solver.max_iterations = s.value("max_iterations", cfg.solver.max_iterations);
    cfg.solver.lambda0 = s.value("lambda0", cfg.solver.lambda0);
    cfg.solver.lambda_up = s.value("lambda_up", cfg.solver.lambda_up);
    cfg.solver.lambda_down = s.value("lambda_down", cfg.solver.lambda_down);
    cfg.solver.ftol = s.value("ftol", cfg.solver.ftol);
    cfg.solver.xtol = s.value("xtol", cfg.solver.xtol);
    cfg.solver.lambda_max = s.value("lambda_max", cfg.solver.lambda_max);
  }
  if (j.contains("prior")) {
    const auto& p = j.at("prior");
    cfg.prior.samples = p.value("samples", cfg.prior.samples);
    cfg.prior.seed = p.value("seed", cfg.prior.seed);
    cfg.prior.eps = p.value("eps", cfg.prior.eps);
    cfg.prior.sigma_scale = p.value("sigma_scale", cfg.prior.sigma_scale);
    cfg.prior.angle_limit = p.value("angle_limit", cfg.prior.angle_limit);
  }
  cfg.keypoint_presence_threshold =
      j.value("keypoint_presence_threshold", cfg.keypoint_presence_threshold);
  cfg.orientation_presence_threshold =
      j.value("orientation_presence_threshold", cfg.orientation_presence_threshold);
  cfg.init_depth_cm = j.value("init_depth_cm", cfg.init_depth_cm);
  if (j.contains("stages")) {
    StageSchedule schedule;
    for (const auto& js : j.at("stages")) {
      Stage s;
      s.name = js.at("name").get<std::string>();
      s.joints = js.at("joints").get<std::vector<int>>();
      s.free_translation = js.value("free_translation", true);
      s.free_phi = js.value("free_phi", false);
      s.free_sigma = js.value("free_sigma", false);
      s.max_iterations = js.value("max_iterations", 30);
      for (const auto& name : js.at("blocks")) {
        auto it = block_names().find(name.get<std::string>());
        if (it == block_names().end())
          throw ConfigError("unknown residual block: " + name.get<std::string>());
        s.blocks.push_back(it->second);
      }
      schedule.push_back(std::move(s));
    }
    cfg.schedule = std::move(schedule);
  }
  return cfg;
}

nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json j;
  j["params"] = params_to_json(r.params);
  j["final_cost"] = r.final_cost;
  j["block_costs"] = r.block_costs;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : r.stages)
    j["stages"].push_back({{"name", s.name},
                           {"initial_cost", s.initial_cost},
                           {"final_cost", s.final_cost},
                           {"iterations", s.iterations},
                           {"converged", s.converged},
                           {"message", s.message}});
  return j;
}

FitResult fit_result_from_json(const nlohmann::json& j) {
  FitResult r;
  r.params = params_from_json(j.at("params"));
  r.final_cost = j.at("final_cost").get<double>();
  r.block_costs = j.at("block_costs").get<std::map<std::string, double>>();
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  for (const auto& js : j.value("stages", nlohmann::json::array())) {
    r.stages.push_back({js.at("name").get<std::string>(), js.at("initial_cost").get<double>(),
                        js.at("final_cost").get<double>(), js.at("iterations").get<int>(),
                        js.at("converged").get<bool>(), js.value("message", "")});
  }
  return r;
}

}  // namespace pofcap
