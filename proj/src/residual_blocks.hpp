// SPDX-License-Identifier: Apache-2.0
//
// Internal residual block machinery shared by the per-frame fitter and the
// temporal refinement. Each block writes residual rows plus the analytic
// Jacobian w.r.t. the packed [theta | phi | t | sigma] vector.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pofcap/camera.hpp"
#include "pofcap/fitting.hpp"
#include "pofcap/skeleton.hpp"

namespace pofcap::detail {

struct EvalContext {
  const SkeletonDef& skel;
  const ParamLayout& layout;
  const ModelParams& params;
  const KinematicCache& cache;
};

class BlockImpl {
 public:
  explicit BlockImpl(std::string name) : name_(std::move(name)) {}
  virtual ~BlockImpl() = default;
  const std::string& name() const { return name_; }
  virtual int rows() const = 0;
  virtual int measurement_rows() const { return rows(); }
  // Observation-driven blocks participate in the "no constraints" check.
  virtual bool is_observation() const { return true; }
  virtual void eval(const EvalContext& ctx, Eigen::Ref<Eigen::VectorXd> r, Eigen::MatrixXd* J,
                    int row0) const = 0;

 private:
  std::string name_;
};

struct Kp2DEntry {
  Eigen::Vector2d obs;
  double conf;
  int joint;
};

class Keypoint2DBlock : public BlockImpl {
 public:
  Keypoint2DBlock(std::string name, std::vector<Kp2DEntry> entries, Camera camera, double w)
      : BlockImpl(std::move(name)), entries_(std::move(entries)), camera_(camera),
        sqrt_w_(std::sqrt(w)) {}

  int rows() const override { return 2 * static_cast<int>(entries_.size()); }

  void eval(const EvalContext& ctx, Eigen::Ref<Eigen::VectorXd> r, Eigen::MatrixXd* J,
            int row0) const override {
    Eigen::MatrixXd j3;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      const Eigen::Vector3d& p = ctx.cache.joints[e.joint];
      const int row = row0 + 2 * static_cast<int>(i);
      if (camera_.mode == Camera::Mode::Perspective && p.z() <= 0.0) {
        // Reject the trial step instead of aborting the solve.
        r.segment<2>(row).setConstant(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const Eigen::Vector2d pix = camera_.project(p);
      r.segment<2>(row) = sqrt_w_ * e.conf * (e.obs - pix);
      if (J) {
        j3.setZero(3, ctx.layout.size());
        joint_position_jacobian(ctx.skel, ctx.cache, ctx.layout, ctx.params, e.joint, j3);
        J->middleRows(row, 2) = -sqrt_w_ * e.conf * camera_.projection_jacobian(p) * j3;
      }
    }
  }

 private:
  std::vector<Kp2DEntry> entries_;
  Camera camera_;
  double sqrt_w_;
};

struct PofEntry {
  Eigen::Vector3d obs_dir;
  int part;
};

// Orientation term as the smooth 3-vector residual sqrt(w/2) (obs - dir);
// its squared sum is w (1 - obs . dir) since both vectors are unit. The
// scalar sqrt(1 - dot) factorization has the same cost but a conical graph
// whose Gauss-Newton model overshoots whenever the optimum balances against
// other terms, stalling the solver.
class PofBlock : public BlockImpl {
 public:
  PofBlock(std::string name, std::vector<PofEntry> entries, double w)
      : BlockImpl(std::move(name)), entries_(std::move(entries)),
        sqrt_half_w_(std::sqrt(0.5 * w)) {}

  int rows() const override { return 3 * static_cast<int>(entries_.size()); }

  void eval(const EvalContext& ctx, Eigen::Ref<Eigen::VectorXd> r, Eigen::MatrixXd* J,
            int row0) const override {
    Eigen::MatrixXd jm, jn;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      auto [m, n] = ctx.skel.parts[e.part];
      const Eigen::Vector3d u = ctx.cache.joints[n] - ctx.cache.joints[m];
      const double len = u.norm();
      const int row = row0 + 3 * static_cast<int>(i);
      if (len < 1e-12) {
        r.segment<3>(row).setConstant(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const Eigen::Vector3d dir = u / len;
      r.segment<3>(row) = sqrt_half_w_ * (e.obs_dir - dir);
      if (J) {
        jm.setZero(3, ctx.layout.size());
        jn.setZero(3, ctx.layout.size());
        joint_position_jacobian(ctx.skel, ctx.cache, ctx.layout, ctx.params, m, jm);
        joint_position_jacobian(ctx.skel, ctx.cache, ctx.layout, ctx.params, n, jn);
        // d dir = (I - dir dir^T)/len * du
        const Eigen::Matrix3d proj =
            (Eigen::Matrix3d::Identity() - dir * dir.transpose()) / len;
        J->middleRows(row, 3) = -sqrt_half_w_ * proj * (jn - jm);
      }
    }
  }

 private:
  std::vector<PofEntry> entries_;
  double sqrt_half_w_;
};

struct FaceEntry {
  Eigen::Vector2d obs;
  double conf;
  int landmark;
};

class FaceBlock : public BlockImpl {
 public:
  FaceBlock(std::string name, std::vector<FaceEntry> entries, const FaceBasis& face,
            Camera camera, double w)
      : BlockImpl(std::move(name)), entries_(std::move(entries)), face_(face), camera_(camera),
        sqrt_w_(std::sqrt(w)) {}

  int rows() const override { return 2 * static_cast<int>(entries_.size()); }

  void eval(const EvalContext& ctx, Eigen::Ref<Eigen::VectorXd> r, Eigen::MatrixXd* J,
            int row0) const override {
    const Eigen::VectorXd disp = face_.basis * ctx.params.sigma;
    const Eigen::Vector3d head = ctx.cache.joints[face_.head_joint];
    const Eigen::Matrix3d& rot = ctx.cache.world_rot[face_.head_joint];
    Eigen::MatrixXd j3;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      const Eigen::Vector3d p =
          head + rot * (face_.offsets[e.landmark] + disp.segment<3>(3 * e.landmark));
      const int row = row0 + 2 * static_cast<int>(i);
      if (camera_.mode == Camera::Mode::Perspective && p.z() <= 0.0) {
        r.segment<2>(row).setConstant(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const Eigen::Vector2d pix = camera_.project(p);
      r.segment<2>(row) = sqrt_w_ * e.conf * (e.obs - pix);
      if (J) {
        j3.setZero(3, ctx.layout.size());
        accumulate_point_jacobian(ctx.skel, ctx.cache, ctx.layout, face_.head_joint, p, j3);
        if (ctx.layout.sigma > 0)
          j3.middleCols(ctx.layout.sigma_offset(), ctx.layout.sigma) +=
              rot * face_.basis.middleRows(3 * e.landmark, 3);
        J->middleRows(row, 2) = -sqrt_w_ * e.conf * camera_.projection_jacobian(p) * j3;
      }
    }
  }

 private:
  std::vector<FaceEntry> entries_;
  const FaceBasis& face_;
  Camera camera_;
  double sqrt_w_;
};

class PriorBlock : public BlockImpl {
 public:
  PriorBlock(std::string name, const PosePrior& prior, std::vector<int> joints, double w)
      : BlockImpl(std::move(name)), prior_(prior), joints_(std::move(joints)),
        sqrt_w_(std::sqrt(w)) {}

  int rows() const override { return static_cast<int>(prior_.A.rows()); }
  int measurement_rows() const override { return 0; }
  bool is_observation() const override { return false; }

  void eval(const EvalContext& ctx, Eigen::Ref<Eigen::VectorXd> r, Eigen::MatrixXd* J,
            int row0) const override {
    Eigen::VectorXd sel(3 * joints_.size());
    for (std::size_t i = 0; i < joints_.size(); ++i)
      sel.segment<3>(3 * static_cast<Eigen::Index>(i)) = ctx.params.theta[joints_[i]];
    r.segment(row0, rows()) = sqrt_w_ * (prior_.A * (sel - prior_.mu));
    if (J) {
      for (std::size_t i = 0; i < joints_.size(); ++i)
        J->block(row0, 3 * joints_[i], rows(), 3) =
            sqrt_w_ * prior_.A.middleCols(3 * static_cast<Eigen::Index>(i), 3);
    }
  }

 private:
  const PosePrior& prior_;
  std::vector<int> joints_;
  double sqrt_w_;
};

class RegularizerBlock : public BlockImpl {
 public:
  RegularizerBlock(std::string name, double w_phi, double w_sigma, const ParamLayout& layout)
      : BlockImpl(std::move(name)), sqrt_w_phi_(std::sqrt(w_phi)),
        sqrt_w_sigma_(std::sqrt(w_sigma)), layout_(layout) {}

  int rows() const override { return layout_.bones + layout_.sigma; }
  int measurement_rows() const override { return 0; }
  bool is_observation() const override { return false; }

  void eval(const EvalContext& ctx, Eigen::Ref<Eigen::VectorXd> r, Eigen::MatrixXd* J,
            int row0) const override {
    for (int b = 0; b < layout_.bones; ++b) {
      r[row0 + b] = sqrt_w_phi_ * (ctx.params.phi[b] - 1.0);
      if (J) (*J)(row0 + b, layout_.phi_offset() + b) = sqrt_w_phi_;
    }
    for (int k = 0; k < layout_.sigma; ++k) {
      r[row0 + layout_.bones + k] = sqrt_w_sigma_ * ctx.params.sigma[k];
      if (J) (*J)(row0 + layout_.bones + k, layout_.sigma_offset() + k) = sqrt_w_sigma_;
    }
  }

 private:
  double sqrt_w_phi_, sqrt_w_sigma_;
  ParamLayout layout_;
};

// Flow-target term: marker projections pulled toward fixed 2D destinations.
struct TexEntry {
  int part;
  Eigen::Vector3d offset;
  Eigen::Vector2d target;
};

class TexBlock : public BlockImpl {
 public:
  TexBlock(std::string name, std::vector<TexEntry> entries, Camera camera, double w)
      : BlockImpl(std::move(name)), entries_(std::move(entries)), camera_(camera),
        sqrt_w_(std::sqrt(w)) {}

  int rows() const override { return 2 * static_cast<int>(entries_.size()); }

  void eval(const EvalContext& ctx, Eigen::Ref<Eigen::VectorXd> r, Eigen::MatrixXd* J,
            int row0) const override {
    Eigen::MatrixXd j3;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      const int m = ctx.skel.parts[e.part].first;
      const Eigen::Vector3d p = ctx.cache.joints[m] + ctx.cache.world_rot[m] * e.offset;
      const int row = row0 + 2 * static_cast<int>(i);
      if (camera_.mode == Camera::Mode::Perspective && p.z() <= 0.0) {
        r.segment<2>(row).setConstant(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      r.segment<2>(row) = sqrt_w_ * (camera_.project(p) - e.target);
      if (J) {
        j3.setZero(3, ctx.layout.size());
        accumulate_point_jacobian(ctx.skel, ctx.cache, ctx.layout, m, p, j3);
        J->middleRows(row, 2) = sqrt_w_ * camera_.projection_jacobian(p) * j3;
      }
    }
  }

 private:
  std::vector<TexEntry> entries_;
  Camera camera_;
  double sqrt_w_;
};

// z-smoothness between consecutive frames; touches only the depth row.
class DzBlock : public BlockImpl {
 public:
  DzBlock(std::string name, Eigen::VectorXd prev_z, double w)
      : BlockImpl(std::move(name)), prev_z_(std::move(prev_z)), sqrt_w_(std::sqrt(w)) {}

  int rows() const override { return static_cast<int>(prev_z_.size()); }
  bool is_observation() const override { return false; }

  void eval(const EvalContext& ctx, Eigen::Ref<Eigen::VectorXd> r, Eigen::MatrixXd* J,
            int row0) const override {
    Eigen::MatrixXd j3;
    for (int j = 0; j < rows(); ++j) {
      r[row0 + j] = sqrt_w_ * (ctx.cache.joints[j].z() - prev_z_[j]);
      if (J) {
        j3.setZero(3, ctx.layout.size());
        joint_position_jacobian(ctx.skel, ctx.cache, ctx.layout, ctx.params, j, j3);
        J->row(row0 + j) = sqrt_w_ * j3.row(2);
      }
    }
  }

 private:
  Eigen::VectorXd prev_z_;
  double sqrt_w_;
};

class SystemImpl : public ResidualSystem {
 public:
  SystemImpl(const SkeletonDef& skel, ParamLayout layout, Eigen::VectorXd x_base,
             std::vector<int> free_idx, std::vector<std::unique_ptr<BlockImpl>> blocks)
      : skel_(skel), layout_(layout), x_base_(std::move(x_base)),
        free_idx_(std::move(free_idx)), blocks_(std::move(blocks)) {
    rows_ = 0;
    for (const auto& b : blocks_) rows_ += b->rows();
  }

  int residual_count() const override { return rows_; }
  int free_count() const override { return static_cast<int>(free_idx_.size()); }

  Eigen::VectorXd initial_free() const override {
    Eigen::VectorXd x(free_idx_.size());
    for (std::size_t i = 0; i < free_idx_.size(); ++i) x[i] = x_base_[free_idx_[i]];
    return x;
  }

  void eval(const Eigen::VectorXd& x_free, Eigen::VectorXd& r,
            Eigen::MatrixXd* J) const override {
    Eigen::VectorXd x_full = x_base_;
    for (std::size_t i = 0; i < free_idx_.size(); ++i) x_full[free_idx_[i]] = x_free[i];
    const ModelParams params = layout_.unpack(x_full);
    const KinematicCache cache = forward_kinematics_cache(params, skel_);
    const EvalContext ctx{skel_, layout_, params, cache};

    r.resize(rows_);
    Eigen::MatrixXd j_full;
    if (J) j_full.setZero(rows_, layout_.size());
    int row = 0;
    for (const auto& b : blocks_) {
      b->eval(ctx, r, J ? &j_full : nullptr, row);
      row += b->rows();
    }
    if (J) {
      J->resize(rows_, static_cast<Eigen::Index>(free_idx_.size()));
      for (std::size_t i = 0; i < free_idx_.size(); ++i) J->col(i) = j_full.col(free_idx_[i]);
    }
  }

  ModelParams to_params(const Eigen::VectorXd& x_free) const override {
    Eigen::VectorXd x_full = x_base_;
    for (std::size_t i = 0; i < free_idx_.size(); ++i) x_full[free_idx_[i]] = x_free[i];
    return layout_.unpack(x_full);
  }

  std::map<std::string, double> block_costs(const Eigen::VectorXd& x_free) const override {
    Eigen::VectorXd r;
    eval(x_free, r, nullptr);
    std::map<std::string, double> out;
    int row = 0;
    for (const auto& b : blocks_) {
      out[b->name()] += r.segment(row, b->rows()).squaredNorm();
      row += b->rows();
    }
    return out;
  }

  int measurement_rows() const {
    int n = 0;
    for (const auto& b : blocks_) n += b->measurement_rows();
    return n;
  }

  int observation_block_count() const {
    int n = 0;
    for (const auto& b : blocks_) n += b->is_observation() ? 1 : 0;
    return n;
  }

 private:
  const SkeletonDef& skel_;
  ParamLayout layout_;
  Eigen::VectorXd x_base_;
  std::vector<int> free_idx_;
  std::vector<std::unique_ptr<BlockImpl>> blocks_;
  int rows_ = 0;
};

inline std::vector<Kp2DEntry> collect_kp_entries(const std::vector<Keypoint2D>& kps,
                                                 const std::vector<int>& joint_map,
                                                 const std::vector<bool>& joint_active,
                                                 int skip_obs_index = -1) {
  std::vector<Kp2DEntry> entries;
  for (std::size_t i = 0; i < kps.size() && i < joint_map.size(); ++i) {
    if (static_cast<int>(i) == skip_obs_index) continue;
    if (!kps[i].present) continue;
    const int joint = joint_map[i];
    if (!joint_active[joint]) continue;
    entries.push_back({kps[i].px, kps[i].confidence, joint});
  }
  return entries;
}

inline std::vector<PofEntry> collect_pof_entries(const std::vector<PartDirection>& dirs,
                                                 const std::vector<int>& part_map,
                                                 const SkeletonDef& skel,
                                                 const std::vector<bool>& joint_active) {
  std::vector<PofEntry> entries;
  for (std::size_t i = 0; i < dirs.size() && i < part_map.size(); ++i) {
    if (!dirs[i].present) continue;
    const int part = part_map[i];
    auto [m, n] = skel.parts[part];
    if (!joint_active[m] || !joint_active[n]) continue;
    entries.push_back({dirs[i].dir, part});
  }
  return entries;
}

}  // namespace pofcap::detail
