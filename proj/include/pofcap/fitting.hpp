// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pofcap/camera.hpp"
#include "pofcap/lm.hpp"
#include "pofcap/pofield.hpp"
#include "pofcap/prior.hpp"
#include "pofcap/skeleton.hpp"

namespace pofcap {

struct Weights {
  double w2d_body = 1.0;
  double wpof_body = 22500.0;
  double wprior_body = 200.0;
  double w2d_hand = 1.0;
  double wpof_hand = 2500.0;
  double wprior_hand = 10.0;
  double w_toes = 1.0;
  double w_face = 1.0;
  double w_phi = 0.01;
  double w_sigma = 100.0;
};

// Residual block identifiers used by the stage schedule.
enum class Block {
  Body2D,
  BodyPof,
  BodyPrior,
  Hands2D,
  HandsPof,
  HandsPrior,
  Toes,
  Face,
  Regularizers,
};

struct Stage {
  std::string name;
  std::vector<int> joints;  // active joint set; also the freed theta entries
  std::vector<Block> blocks;
  bool free_translation = true;
  bool free_phi = false;
  bool free_sigma = false;
  int max_iterations = 30;
};

using StageSchedule = std::vector<Stage>;

// Torso, then limbs, then the full objective. Built from the skeleton's
// "torso"/"limbs" groups.
StageSchedule default_schedule(const SkeletonDef& skel, bool with_hands, bool with_toes,
                               bool with_face);

struct PriorSpec {
  int samples = 2000;
  std::uint64_t seed = 7;
  double eps = 1e-3;
  // The trained prior is a pose-feasibility prior: samples are truncated
  // Gaussians spanning the admissible angle range, not the narrower motion
  // of any one sequence. A sharper prior biases limb poses toward its mean
  // at the fixed weight w_p = 200.
  double sigma_scale = 5.0;   // sample sigma, multiples of the 0.3 rad base
  double angle_limit = 1.8;   // admissible range per axis, rad; group limits scale
};

struct FitConfig {
  Camera camera;
  Weights weights;
  LmSettings solver;
  std::optional<StageSchedule> schedule;  // default_schedule when unset
  PriorSpec prior;
  double keypoint_presence_threshold = 0.1;
  double orientation_presence_threshold = 0.1;
  double init_depth_cm = 300.0;  // perspective-mode root init
};

nlohmann::json fit_config_to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const nlohmann::json& j);

// Per-network measurements for one frame. Hand slots are optional; toe and
// face points live on the body observation.
struct TotalObservation {
  Observation body;
  std::optional<Observation> left_hand;
  std::optional<Observation> right_hand;
};

struct StageReport {
  std::string name;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

struct FitResult {
  ModelParams params;
  double final_cost = 0.0;
  std::map<std::string, double> block_costs;  // squared sums on the full objective
  int iterations = 0;
  bool converged = false;
  std::vector<StageReport> stages;
};

nlohmann::json fit_result_to_json(const FitResult& r);
FitResult fit_result_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Standalone residual evaluators. These return the stacked residual vectors
// of the individual objective terms; the Fitter composes the same blocks with
// analytic Jacobians.

using JointMap = std::vector<std::pair<int, int>>;  // (observation index, model joint)

Eigen::VectorXd residuals_keypoints2d(const ModelParams& params, const SkeletonDef& skel,
                                      const Camera& camera,
                                      const std::vector<Keypoint2D>& keypoints,
                                      const JointMap& joint_map, double weight = 1.0);

// (observation part index, model part index) pairs.
using PartMap = std::vector<std::pair<int, int>>;

Eigen::VectorXd residuals_pof(const ModelParams& params, const SkeletonDef& skel,
                              const std::vector<PartDirection>& orientations,
                              const PartMap& part_map, double weight);

Eigen::VectorXd residuals_face(const ModelParams& params, const SkeletonDef& skel,
                               const FaceBasis& face, const Camera& camera,
                               const std::vector<Keypoint2D>& face_kps, double weight);

Eigen::VectorXd residuals_regularizers(const ModelParams& params, const Weights& weights);

// ---------------------------------------------------------------------------

// A stage's assembled nonlinear least-squares system over the free parameter
// subset. eval fills residuals and optionally the Jacobian w.r.t. the free
// parameters.
class ResidualSystem {
 public:
  virtual ~ResidualSystem() = default;
  virtual int residual_count() const = 0;
  virtual int free_count() const = 0;
  virtual Eigen::VectorXd initial_free() const = 0;
  virtual void eval(const Eigen::VectorXd& x_free, Eigen::VectorXd& r,
                    Eigen::MatrixXd* J) const = 0;
  virtual ModelParams to_params(const Eigen::VectorXd& x_free) const = 0;
  virtual std::map<std::string, double> block_costs(const Eigen::VectorXd& x_free) const = 0;
};

class Fitter {
 public:
  Fitter(SkeletonDef skel, FitConfig cfg, std::optional<FaceBasis> face = std::nullopt);

  const SkeletonDef& skeleton() const { return skel_; }
  const FitConfig& config() const { return cfg_; }
  const PosePrior& body_prior() const { return body_prior_; }
  const std::optional<FaceBasis>& face_basis() const { return face_; }
  const StageSchedule& schedule() const { return schedule_; }

  // Throws MismatchError when the stage is unknown and SolverError("no
  // constraints") when no observation row survives.
  std::unique_ptr<ResidualSystem> assemble(const Stage& stage, const TotalObservation& obs,
                                           const ModelParams& params) const;

  FitResult fit_frame(const TotalObservation& obs,
                      std::optional<ModelParams> init = std::nullopt) const;

  ModelParams default_init(const TotalObservation& obs) const;

  // Full-objective cost of arbitrary params against an observation (used by
  // the stage monotonicity checks).
  double full_cost(const TotalObservation& obs, const ModelParams& params) const;

 private:
  SkeletonDef skel_;
  FitConfig cfg_;
  std::optional<FaceBasis> face_;
  StageSchedule schedule_;
  PosePrior body_prior_;
  std::optional<PosePrior> lh_prior_, rh_prior_;
  std::vector<int> body_prior_joints_, lh_joints_, rh_joints_;
};

}  // namespace pofcap
