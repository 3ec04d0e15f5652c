// SPDX-License-Identifier: Apache-2.0
#include "pofcap/tracking.hpp"

#include <algorithm>
#include <cmath>

#include "pofcap/common.hpp"
#include "residual_blocks.hpp"

namespace pofcap {

using detail::DzBlock;
using detail::TexBlock;
using detail::TexEntry;

Eigen::VectorXd residuals_tex(const ModelParams& params, const SkeletonDef& skel,
                              const Camera& camera, const FlowTargets& targets,
                              double w_tex) {
  const auto markers = marker_positions(params, skel);
  const double sw = std::sqrt(w_tex);
  std::vector<double> vals;
  for (const auto& t : targets.targets) {
    if (!t.valid) continue;
    const Eigen::Vector2d d = sw * (camera.project(markers[t.marker].pos) - t.target);
    vals.push_back(d.x());
    vals.push_back(d.y());
  }
  if (vals.empty()) return {};
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Eigen::VectorXd residuals_dz(const ModelParams& params, const SkeletonDef& skel,
                             const Eigen::VectorXd& prev_joints_z, double w_dz) {
  const auto joints = forward_kinematics(params, skel);
  if (prev_joints_z.size() != static_cast<Eigen::Index>(joints.size()))
    throw MismatchError("prev_joints_z size does not match skeleton");
  Eigen::VectorXd r(prev_joints_z.size());
  const double sw = std::sqrt(w_dz);
  for (Eigen::Index j = 0; j < r.size(); ++j) r[j] = sw * (joints[j].z() - prev_joints_z[j]);
  return r;
}

std::vector<bool> part_visibility(const std::vector<Eigen::Vector3d>& joints,
                                  const SkeletonDef& skel) {
  const int p = skel.part_count();
  std::vector<double> depth(p);
  for (int b = 0; b < p; ++b) {
    auto [m, n] = skel.parts[b];
    depth[b] = 0.5 * (joints[m].z() + joints[n].z());
  }
  std::vector<double> sorted = depth;
  std::sort(sorted.begin(), sorted.end());
  const double cutoff = sorted[(p - 1) / 2];
  std::vector<bool> visible(p);
  for (int b = 0; b < p; ++b) visible[b] = depth[b] <= cutoff + 1e-12;
  return visible;
}

FlowProvider make_identity_flow_provider(const SkeletonDef& skel, const Camera& camera) {
  return [skel, camera](const ModelParams&, const ModelParams& current, int) {
    FlowTargets out;
    const auto markers = marker_positions(current, skel);
    out.targets.resize(markers.size());
    for (std::size_t i = 0; i < markers.size(); ++i) {
      out.targets[i].marker = static_cast<int>(i);
      out.targets[i].target = camera.project(markers[i].pos);
      out.targets[i].valid = true;
    }
    return out;
  };
}

std::unique_ptr<ResidualSystem> assemble_refine(const Fitter& fitter, const TrackConfig& cfg,
                                                const TotalObservation& obs,
                                                const FlowTargets& targets,
                                                const Eigen::VectorXd& prev_joints_z,
                                                const ModelParams& init) {
  const SkeletonDef& skel = fitter.skeleton();
  const auto& face = fitter.face_basis();
  const int k_sigma = face ? face->k_sigma() : 0;
  const ParamLayout layout = ParamLayout::of(skel, k_sigma);
  const std::vector<bool> all_active(skel.joint_count(), true);

  std::vector<std::unique_ptr<detail::BlockImpl>> blocks;
  if (cfg.w_tex > 0.0 && !targets.targets.empty()) {
    // Marker index -> (part, local offset) following marker_positions order.
    std::vector<std::pair<int, Eigen::Vector3d>> flat;
    for (int b = 0; b < skel.part_count(); ++b)
      for (const auto& o : skel.marker_offsets[b]) flat.emplace_back(b, o);
    std::vector<TexEntry> entries;
    for (const auto& t : targets.targets) {
      if (!t.valid) continue;
      if (t.marker < 0 || t.marker >= static_cast<int>(flat.size()))
        throw MismatchError("flow target marker index out of range");
      entries.push_back({flat[t.marker].first, flat[t.marker].second, t.target});
    }
    blocks.push_back(std::make_unique<TexBlock>("tex", std::move(entries),
                                                fitter.config().camera, cfg.w_tex));
  }
  if (cfg.w_dz > 0.0)
    blocks.push_back(std::make_unique<DzBlock>("dz", prev_joints_z, cfg.w_dz));
  if (cfg.wpof_body > 0.0) {
    auto entries = detail::collect_pof_entries(obs.body.orientations,
                                               skel.group("body_parts"), skel, all_active);
    blocks.push_back(
        std::make_unique<detail::PofBlock>("bodypof", std::move(entries), cfg.wpof_body));
  }
  if (cfg.wpof_hand > 0.0 && skel.has_group("lh_parts")) {
    std::vector<detail::PofEntry> entries;
    if (obs.left_hand) {
      auto e = detail::collect_pof_entries(obs.left_hand->orientations, skel.group("lh_parts"),
                                           skel, all_active);
      entries.insert(entries.end(), e.begin(), e.end());
    }
    if (obs.right_hand) {
      auto e = detail::collect_pof_entries(obs.right_hand->orientations,
                                           skel.group("rh_parts"), skel, all_active);
      entries.insert(entries.end(), e.begin(), e.end());
    }
    if (!entries.empty())
      blocks.push_back(
          std::make_unique<detail::PofBlock>("handspof", std::move(entries), cfg.wpof_hand));
  }
  if (cfg.w_face > 0.0 && face) {
    std::vector<detail::FaceEntry> entries;
    for (std::size_t i = 0;
         i < obs.body.face.size() && i < static_cast<std::size_t>(face->landmark_count()); ++i) {
      if (!obs.body.face[i].present) continue;
      entries.push_back({obs.body.face[i].px, obs.body.face[i].confidence,
                         static_cast<int>(i)});
    }
    if (!entries.empty())
      blocks.push_back(std::make_unique<detail::FaceBlock>(
          "face", std::move(entries), *face, fitter.config().camera, cfg.w_face));
  }

  // theta + t free; phi and sigma stay frozen at the init values.
  std::vector<int> free_idx;
  for (int j = 0; j < skel.joint_count(); ++j)
    for (int k = 0; k < 3; ++k) free_idx.push_back(3 * j + k);
  for (int k = 0; k < 3; ++k) free_idx.push_back(layout.t_offset() + k);

  ModelParams base = init;
  if (static_cast<int>(base.sigma.size()) != k_sigma)
    base.sigma = Eigen::VectorXd::Zero(k_sigma);
  return std::make_unique<detail::SystemImpl>(skel, layout, layout.pack(base),
                                              std::move(free_idx), std::move(blocks));
}

std::vector<RefinedFrame> refine_sequence(const std::vector<FrameInput>& frames,
                                          const FlowProvider& provider,
                                          const TrackConfig& cfg, const Fitter& fitter) {
  std::vector<RefinedFrame> out;
  if (frames.empty()) return out;
  const SkeletonDef& skel = fitter.skeleton();
  const auto& face = fitter.face_basis();
  const int k_sigma = face ? face->k_sigma() : 0;

  RefinedFrame anchor;
  anchor.params = frames[0].params;
  if (static_cast<int>(anchor.params.sigma.size()) != k_sigma)
    anchor.params.sigma = Eigen::VectorXd::Zero(k_sigma);
  out.push_back(anchor);

  const Eigen::VectorXd phi_fixed = out[0].params.phi;
  const Eigen::VectorXd sigma_fixed = out[0].params.sigma;

  for (std::size_t i = 1; i < frames.size(); ++i) {
    const ModelParams& prev = out[i - 1].params;
    RefinedFrame frame;
    FlowTargets targets;
    bool provider_ok = true;
    try {
      targets = provider(prev, frames[i].params, static_cast<int>(i));
      provider_ok = targets.ok;
    } catch (const std::exception&) {
      provider_ok = false;
    }
    if (!provider_ok) {
      frame.params = frames[i].params;
      frame.flagged = true;
      out.push_back(std::move(frame));
      continue;
    }

    // The z anchor is the previous frame's own fit (J^z, no refinement);
    // anchoring to the refined output instead lets depth errors of occluded
    // parts compound across the recursion.
    const auto prev_joints = forward_kinematics(frames[i - 1].params, skel);
    Eigen::VectorXd prev_z(prev_joints.size());
    for (std::size_t j = 0; j < prev_joints.size(); ++j) prev_z[j] = prev_joints[j].z();

    ModelParams init = frames[i].params;
    init.phi = phi_fixed;
    init.sigma = sigma_fixed;
    auto system = assemble_refine(fitter, cfg, frames[i].observation, targets, prev_z, init);
    Eigen::VectorXd x = system->initial_free();
    frame.solve = solve_lm(
        [&](const Eigen::VectorXd& xv, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
          system->eval(xv, r, J);
        },
        x, cfg.solver);
    frame.params = system->to_params(x);
    frame.refined = true;
    out.push_back(std::move(frame));
  }
  return out;
}

double jitter_metric(const std::vector<std::vector<Eigen::Vector3d>>& joints_per_frame) {
  const int n = static_cast<int>(joints_per_frame.size());
  if (n < 3) return 0.0;
  const std::size_t m = joints_per_frame[0].size();
  double sum = 0.0;
  int count = 0;
  for (int i = 1; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      sum += (joints_per_frame[i + 1][j] - 2.0 * joints_per_frame[i][j] +
              joints_per_frame[i - 1][j])
                 .norm();
      ++count;
    }
  }
  return sum / count;
}

void save_flow_targets(const std::string& path, const std::vector<FlowTargets>& frames) {
  std::vector<TensorF32> tensors;
  for (const auto& f : frames) {
    TensorF32 t({static_cast<std::uint32_t>(f.targets.size()), 4});
    for (std::size_t i = 0; i < f.targets.size(); ++i) {
      t.data[4 * i + 0] = static_cast<float>(f.targets[i].marker);
      t.data[4 * i + 1] = static_cast<float>(f.targets[i].target.x());
      t.data[4 * i + 2] = static_cast<float>(f.targets[i].target.y());
      t.data[4 * i + 3] = f.targets[i].valid ? 1.0f : 0.0f;
    }
    tensors.push_back(std::move(t));
  }
  write_poft_file(path, tensors);
}

std::vector<FlowTargets> load_flow_targets(const std::string& path) {
  const auto tensors = read_poft_file(path);
  std::vector<FlowTargets> out;
  for (const auto& t : tensors) {
    if (t.dims.size() != 2 || t.dims[1] != 4)
      throw FormatError("bad container: flow targets must be N x 4");
    FlowTargets f;
    f.targets.resize(t.dims[0]);
    for (std::uint32_t i = 0; i < t.dims[0]; ++i) {
      f.targets[i].marker = static_cast<int>(t.data[4 * i + 0]);
      f.targets[i].target =
          Eigen::Vector2d(t.data[4 * i + 1], t.data[4 * i + 2]);
      f.targets[i].valid = t.data[4 * i + 3] != 0.0f;
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace pofcap
