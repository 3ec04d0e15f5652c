// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "pofcap/eval.hpp"
#include "pofcap/pofield.hpp"
#include "pofcap/rng.hpp"
#include "pofcap/synth.hpp"
#include "pofcap/tracking.hpp"

using namespace pofcap;

TEST_CASE("zero velocity bounds give a constant pose") {
  SceneConfig cfg;
  cfg.seed = 4;
  cfg.n_frames = 5;
  cfg.motion.angular_velocity_max = 0.0;
  cfg.motion.translation_velocity_max = 0.0;
  cfg.fields.write = false;
  const SyntheticSequence seq = generate_sequence(cfg);
  const ParamLayout layout = ParamLayout::of(seq.skeleton, 0);
  const Eigen::VectorXd first = layout.pack(seq.frames[0].params);
  for (const auto& f : seq.frames) CHECK((layout.pack(f.params) - first).norm() == 0.0);
}

TEST_CASE("same seed reproduces the sequence bit-identically") {
  SceneConfig cfg;
  cfg.seed = 99;
  cfg.n_frames = 4;
  cfg.noise.keypoint_sigma_px = 1.5;
  cfg.noise.pof_sigma = 0.05;
  cfg.noise.dropout_joint = 0.1;
  cfg.fields.write = false;
  const SyntheticSequence a = generate_sequence(cfg);
  const SyntheticSequence b = generate_sequence(cfg);
  const ParamLayout layout = ParamLayout::of(a.skeleton, 0);
  for (int i = 0; i < cfg.n_frames; ++i) {
    CHECK(layout.pack(a.frames[i].params) == layout.pack(b.frames[i].params));
    const RenderedFrame ra =
        render_observation(a.frames[i], a, cfg.noise, cfg.fields, cfg.seed, i, false);
    const RenderedFrame rb =
        render_observation(b.frames[i], b, cfg.noise, cfg.fields, cfg.seed, i, false);
    REQUIRE(ra.body.keypoints.size() == rb.body.keypoints.size());
    for (std::size_t k = 0; k < ra.body.keypoints.size(); ++k) {
      CHECK(ra.body.keypoints[k].present == rb.body.keypoints[k].present);
      CHECK(ra.body.keypoints[k].px == rb.body.keypoints[k].px);
    }
  }
}

TEST_CASE("bone lengths stay rigid across the sequence") {
  SceneConfig cfg;
  cfg.seed = 11;
  cfg.n_frames = 8;
  cfg.fields.write = false;
  const SyntheticSequence seq = generate_sequence(cfg);
  for (const auto& f : seq.frames) {
    for (int b = 0; b < seq.skeleton.part_count(); ++b) {
      auto [m, n] = seq.skeleton.parts[b];
      const double len = (f.joints[n] - f.joints[m]).norm();
      CHECK(len == doctest::Approx(seq.skeleton.template_offsets[n].norm()).epsilon(1e-9));
    }
  }
}

TEST_CASE("noiseless render decodes within codec tolerances") {
  SceneConfig cfg;
  cfg.seed = 23;
  cfg.n_frames = 2;
  cfg.motion.root_limit = 0.5;
  const SyntheticSequence seq = generate_sequence(cfg);
  for (int i = 0; i < cfg.n_frames; ++i) {
    const RenderedFrame rf =
        render_observation(seq.frames[i], seq, NoiseConfig{}, cfg.fields, cfg.seed, i, false);
    const auto kps = decode_keypoints(rf.fields.confidence, 0.1);
    for (std::size_t k = 0; k < kps.size(); ++k) {
      if (!rf.body.keypoints[k].present) continue;
      REQUIRE(kps[k].present);
      CHECK((kps[k].px - rf.body.keypoints[k].px).norm() <= 1.0);
    }
    std::vector<std::pair<int, int>> parts;
    for (int b : seq.skeleton.group("body_parts"))
      parts.push_back(seq.skeleton.parts[b]);
    const auto dirs = decode_orientations(rf.fields.pof, kps, parts);
    for (std::size_t b = 0; b < parts.size(); ++b) {
      if (!rf.body.orientations[b].present) continue;
      if (!dirs[b].present) continue;
      const double angle =
          std::acos(std::min(1.0, dirs[b].dir.dot(rf.body.orientations[b].dir))) * 180.0 /
          M_PI;
      CHECK(angle <= 2.0);
    }
  }
}

TEST_CASE("full dropout empties the observation") {
  SceneConfig cfg;
  cfg.seed = 5;
  cfg.n_frames = 1;
  cfg.noise.dropout_joint = 1.0;
  cfg.noise.dropout_part = 1.0;
  cfg.fields.write = false;
  const SyntheticSequence seq = generate_sequence(cfg);
  const RenderedFrame rf =
      render_observation(seq.frames[0], seq, cfg.noise, cfg.fields, cfg.seed, 0, false);
  for (const auto& kp : rf.body.keypoints) CHECK_FALSE(kp.present);
  for (const auto& d : rf.body.orientations) CHECK_FALSE(d.present);
}

TEST_CASE("keypoint noise matches its Monte Carlo RMS") {
  // sigma = 2 px per component -> RMS 2-vector displacement 2*sqrt(2).
  CounterRng rng(123);
  const double sigma = 2.0;
  double sum_sq = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double dx = sigma * rng.normal();
    const double dy = sigma * rng.normal();
    sum_sq += dx * dx + dy * dy;
  }
  const double rms = std::sqrt(sum_sq / n);
  CHECK(rms == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("filter_frames") {
  const SkeletonDef skel = body18_preset();
  SceneConfig cfg;
  cfg.seed = 7;
  cfg.n_frames = 6;
  cfg.fields.write = false;
  const SyntheticSequence seq = generate_sequence(cfg);
  std::vector<std::vector<Eigen::Vector3d>> joints_seq;
  for (const auto& f : seq.frames) joints_seq.push_back(f.joints);

  SUBCASE("rigid sequences keep every frame") {
    CHECK(filter_frames(joints_seq, skel, 0.2).size() == joints_seq.size());
  }
  SUBCASE("a stretched bone drops its frame") {
    auto corrupted = joints_seq;
    const auto [m, n] = skel.parts[3];
    // Stretch one bone in frame 2 to ~1.3x the average.
    corrupted[2][n] = corrupted[2][m] + 1.3 * (corrupted[2][n] - corrupted[2][m]);
    const auto kept = filter_frames(corrupted, skel, 0.2);
    CHECK(kept.size() == joints_seq.size() - 1);
    for (int idx : kept) CHECK(idx != 2);
  }
  SUBCASE("threshold zero keeps only exactly-average frames") {
    // Hand-built two-joint skeleton with exactly constant lengths.
    SkeletonDef tiny;
    tiny.joints = {{"a", -1}, {"b", 0}};
    tiny.template_offsets = {{0, 0, 0}, {1, 0, 0}};
    tiny.parts = {{0, 1}};
    tiny.finalize();
    std::vector<std::vector<Eigen::Vector3d>> exact = {
        {{0, 0, 0}, {1, 0, 0}}, {{5, 5, 5}, {6, 5, 5}}, {{0, 0, 0}, {0, 2, 0}}};
    const auto kept = filter_frames(exact, tiny, 0.0);
    // Average length (1+1+2)/3 = 4/3; no frame matches it exactly.
    CHECK(kept.empty());
    std::vector<std::vector<Eigen::Vector3d>> constant = {
        {{0, 0, 0}, {1, 0, 0}}, {{5, 5, 5}, {6, 5, 5}}};
    CHECK(filter_frames(constant, tiny, 0.0).size() == 2);
  }
}

TEST_CASE("oracle flow hits ground-truth marker projections") {
  SceneConfig cfg;
  cfg.seed = 13;
  cfg.n_frames = 2;
  cfg.fields.write = false;
  const SyntheticSequence seq = generate_sequence(cfg);
  CounterRng rng(1);
  const FlowTargets targets =
      oracle_flow(seq.frames[1], seq.skeleton, seq.camera, 0.0, rng);
  // With the estimate equal to GT, valid tex residuals vanish.
  CHECK(residuals_tex(seq.frames[1].params, seq.skeleton, seq.camera, targets, 1.0).norm() <
        1e-12);
  // Invalid markers follow part visibility.
  const auto visible = part_visibility(seq.frames[1].joints, seq.skeleton);
  for (const auto& t : targets.targets)
    CHECK(t.valid == visible[seq.frames[1].markers[t.marker].part]);
}

TEST_CASE("view transform keeps the pivot and rotates joints rigidly") {
  SceneConfig cfg;
  cfg.seed = 3;
  cfg.n_frames = 1;
  cfg.fields.write = false;
  const SyntheticSequence seq = generate_sequence(cfg);
  const auto& frame = seq.frames[0];
  const Eigen::Vector3d pivot = frame.params.t;
  const ModelParams turned =
      transform_to_view(frame.params, seq.skeleton.root(), M_PI / 3, 0.2, pivot);
  const auto joints = forward_kinematics(turned, seq.skeleton);
  // Distances from the pivot are preserved.
  for (int j = 0; j < seq.skeleton.joint_count(); ++j)
    CHECK((joints[j] - pivot).norm() ==
          doctest::Approx((frame.joints[j] - pivot).norm()).epsilon(1e-9));
  // Relative geometry is preserved.
  for (int b = 0; b < seq.skeleton.part_count(); ++b) {
    auto [m, n] = seq.skeleton.parts[b];
    CHECK((joints[n] - joints[m]).norm() ==
          doctest::Approx((frame.joints[n] - frame.joints[m]).norm()).epsilon(1e-9));
  }
}

TEST_CASE("scene config json round trip") {
  SceneConfig cfg;
  cfg.seed = 42;
  cfg.n_frames = 17;
  cfg.skeleton = "total";
  cfg.noise.keypoint_sigma_px = 2.5;
  cfg.motion.angular_velocity_max = 0.75;
  cfg.fields.size = 256;
  cfg.face.enabled = true;
  cfg.face.landmarks = 12;
  cfg.face.k_sigma = 6;
  cfg.toes = true;
  const SceneConfig back = scene_config_from_json(scene_config_to_json(cfg));
  CHECK(back.seed == 42);
  CHECK(back.n_frames == 17);
  CHECK(back.skeleton == "total");
  CHECK(back.noise.keypoint_sigma_px == 2.5);
  CHECK(back.motion.angular_velocity_max == 0.75);
  CHECK(back.fields.size == 256);
  CHECK(back.face.enabled);
  CHECK(back.face.k_sigma == 6);
  CHECK(back.toes);
}
