// SPDX-License-Identifier: Apache-2.0
#include <Eigen/Geometry>

#include "doctest.h"
#include "pofcap/camera.hpp"
#include "pofcap/common.hpp"
#include "pofcap/rng.hpp"
#include "pofcap/rotation.hpp"
#include "pofcap/skeleton.hpp"

using namespace pofcap;

namespace {

// Independent FK oracle: explicit chain multiplication, no shared code with
// forward_kinematics.
std::vector<Eigen::Vector3d> fk_brute_force(const ModelParams& p, const SkeletonDef& skel) {
  const int n = skel.joint_count();
  std::vector<Eigen::Vector3d> pos(n);
  std::vector<Eigen::Matrix3d> rot(n);
  for (int j : skel.traversal_order()) {
    if (j == skel.root()) {
      rot[j] = rodrigues(p.theta[j]);
      pos[j] = p.t;
      continue;
    }
    // Multiply the whole ancestor chain from scratch.
    Eigen::Matrix3d chain = Eigen::Matrix3d::Identity();
    for (int a : skel.path_from_root(j)) {
      if (a == j) break;
      chain = chain * rodrigues(p.theta[a]);
    }
    const int parent = skel.joints[j].parent;
    pos[j] = pos[parent] + chain * (p.phi[skel.bone_of_joint(j)] * skel.template_offsets[j]);
    rot[j] = chain * rodrigues(p.theta[j]);
  }
  return pos;
}

ModelParams random_params(const SkeletonDef& skel, CounterRng& rng, double theta_scale = 0.5) {
  ModelParams p = ModelParams::rest(skel);
  for (auto& th : p.theta)
    th = Eigen::Vector3d(rng.uniform(-theta_scale, theta_scale),
                         rng.uniform(-theta_scale, theta_scale),
                         rng.uniform(-theta_scale, theta_scale));
  for (int b = 0; b < p.phi.size(); ++b) p.phi[b] = rng.uniform(0.8, 1.2);
  p.t = Eigen::Vector3d(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20));
  return p;
}

SkeletonDef three_joint_chain() {
  SkeletonDef s;
  s.name = "chain3";
  s.joints = {{"root", -1}, {"mid", 0}, {"tip", 1}};
  s.template_offsets = {{0, 0, 0}, {0, 0, 2}, {0, 0, 3}};
  s.parts = {{0, 1}, {1, 2}};
  s.finalize();
  return s;
}

}  // namespace

TEST_CASE("preset joint and part counts") {
  const SkeletonDef body = body18_preset();
  CHECK(body.joint_count() == 18);
  CHECK(body.part_count() == 17);
  const SkeletonDef hand = hand21_preset();
  CHECK(hand.joint_count() == 21);
  CHECK(hand.part_count() == 20);
  const SkeletonDef total = total_preset();
  CHECK(total.joint_count() == 64);
  CHECK(total.part_count() == 63);
  CHECK(total.group("lh_joints").size() == 21);
  CHECK(total.group("lh_parts").size() == 20);
  CHECK(total.group("rh_joints").size() == 21);
  CHECK(total.group("toe_joints").size() == 6);
}

TEST_CASE("fk at rest equals accumulated template offsets") {
  const SkeletonDef skel = body18_preset();
  const ModelParams p = ModelParams::rest(skel);
  const auto joints = forward_kinematics(p, skel);
  for (int j = 0; j < skel.joint_count(); ++j) {
    Eigen::Vector3d expected = Eigen::Vector3d::Zero();
    for (int a : skel.path_from_root(j))
      if (a != skel.root()) expected += skel.template_offsets[a];
    CHECK((joints[j] - expected).norm() < 1e-12);
  }
}

TEST_CASE("root rotation by pi about z mirrors x and y") {
  const SkeletonDef skel = body18_preset();
  ModelParams p = ModelParams::rest(skel);
  const auto rest = forward_kinematics(p, skel);
  p.theta[skel.root()] = Eigen::Vector3d(0, 0, M_PI);
  const auto rotated = forward_kinematics(p, skel);
  for (int j = 0; j < skel.joint_count(); ++j) {
    CHECK(rotated[j].x() == doctest::Approx(-rest[j].x()).epsilon(1e-12).scale(1.0));
    CHECK(rotated[j].y() == doctest::Approx(-rest[j].y()).epsilon(1e-12).scale(1.0));
    CHECK(rotated[j].z() == doctest::Approx(rest[j].z()).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("doubling one bone scale shifts its subtree along the bone") {
  const SkeletonDef skel = body18_preset();
  ModelParams p = ModelParams::rest(skel);
  const int knee = skel.joint_index("rknee");
  const int bone = skel.bone_of_joint(knee);
  p.phi[bone] = 2.0;
  const auto scaled = forward_kinematics(p, skel);
  const auto oracle = fk_brute_force(p, skel);
  const auto rest = forward_kinematics(ModelParams::rest(skel), skel);
  const Eigen::Vector3d shift = skel.template_offsets[knee];  // one extra template length
  for (int j = 0; j < skel.joint_count(); ++j) {
    CHECK((scaled[j] - oracle[j]).norm() < 1e-12);
    const auto& path = skel.path_from_root(j);
    const bool below = std::find(path.begin(), path.end(), knee) != path.end();
    const Eigen::Vector3d expected = rest[j] + (below ? shift : Eigen::Vector3d::Zero());
    CHECK((scaled[j] - expected).norm() < 1e-12);
  }
}

TEST_CASE("fk matches brute-force chain oracle on random params") {
  const SkeletonDef skel = total_preset();
  CounterRng rng(3);
  for (int i = 0; i < 10; ++i) {
    const ModelParams p = random_params(skel, rng);
    const auto fast = forward_kinematics(p, skel);
    const auto slow = fk_brute_force(p, skel);
    for (int j = 0; j < skel.joint_count(); ++j) CHECK((fast[j] - slow[j]).norm() < 1e-10);
  }
}

TEST_CASE("fk is rigid per bone") {
  const SkeletonDef skel = body18_preset();
  CounterRng rng(5);
  for (int i = 0; i < 20; ++i) {
    const ModelParams p = random_params(skel, rng, 1.0);
    const auto joints = forward_kinematics(p, skel);
    for (int b = 0; b < skel.part_count(); ++b) {
      auto [m, n] = skel.parts[b];
      const double len = (joints[n] - joints[m]).norm();
      const double expected = p.phi[b] * skel.template_offsets[n].norm();
      CHECK(len == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("global rotation invariance") {
  const SkeletonDef skel = body18_preset();
  CounterRng rng(9);
  for (int i = 0; i < 10; ++i) {
    const ModelParams p = random_params(skel, rng);
    const Eigen::Vector3d axis(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Eigen::Matrix3d r = rodrigues(axis);
    ModelParams q = p;
    q.theta[skel.root()] = log_so3(r * rodrigues(p.theta[skel.root()]));
    q.t = r * p.t;
    const auto a = forward_kinematics(q, skel);
    const auto b = forward_kinematics(p, skel);
    for (int j = 0; j < skel.joint_count(); ++j)
      CHECK((a[j] - r * b[j]).norm() < 1e-9 * std::max(1.0, b[j].norm()));
  }
}

TEST_CASE("part orientation examples") {
  const SkeletonDef chain = three_joint_chain();
  SUBCASE("axis aligned") {
    std::vector<Eigen::Vector3d> joints = {{0, 0, 0}, {0, 0, 2}, {1, 1, 2}};
    const auto dirs = part_orientations(joints, chain);
    CHECK((dirs[0] - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
    CHECK((dirs[1] - Eigen::Vector3d(0.7071067811865476, 0.7071067811865476, 0)).norm() < 1e-9);
  }
  SUBCASE("45 degrees in plane") {
    std::vector<Eigen::Vector3d> joints = {{1, 1, 1}, {2, 2, 1}, {2, 2, 2}};
    const auto dirs = part_orientations(joints, chain);
    CHECK(dirs[0].x() == doctest::Approx(0.70711).epsilon(1e-4));
    CHECK(dirs[0].y() == doctest::Approx(0.70711).epsilon(1e-4));
    CHECK(dirs[0].z() == doctest::Approx(0.0).scale(1.0));
  }
  SUBCASE("degenerate part throws with part name") {
    std::vector<Eigen::Vector3d> joints = {{0, 0, 0}, {0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_WITH_AS(part_orientations(joints, chain),
                         doctest::Contains("degenerate part"), SolverError);
  }
  SUBCASE("unit norm on random poses") {
    const SkeletonDef skel = body18_preset();
    CounterRng rng(13);
    for (int i = 0; i < 10; ++i) {
      const auto joints = forward_kinematics(random_params(skel, rng), skel);
      for (const auto& d : part_orientations(joints, skel))
        CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("marker positions") {
  SkeletonDef chain = three_joint_chain();
  SUBCASE("zero offsets coincide with parent joints") {
    chain.marker_offsets = {{Eigen::Vector3d::Zero()}, {Eigen::Vector3d::Zero()}};
    const ModelParams p = ModelParams::rest(chain);
    const auto markers = marker_positions(p, chain);
    const auto joints = forward_kinematics(p, chain);
    REQUIRE(markers.size() == 2);
    CHECK((markers[0].pos - joints[0]).norm() < 1e-12);
    CHECK((markers[1].pos - joints[1]).norm() < 1e-12);
  }
  SUBCASE("offset on a +z bone lands at parent + offset at rest") {
    chain.marker_offsets = {{Eigen::Vector3d(0, 1, 0)}, {}};
    const auto markers = marker_positions(ModelParams::rest(chain), chain);
    REQUIRE(markers.size() == 1);
    CHECK((markers[0].pos - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
  }
  SUBCASE("markers ride rigidly with the bone") {
    chain.marker_offsets = {{Eigen::Vector3d(1, 2, 0.5)}, {}};
    ModelParams p = ModelParams::rest(chain);
    p.theta[0] = Eigen::Vector3d(0.4, -0.2, 0.9);
    p.t = Eigen::Vector3d(3, -1, 2);
    const auto markers = marker_positions(p, chain);
    // Independent rigid-transform oracle.
    const Eigen::Vector3d expected =
        p.t + rodrigues(p.theta[0]) * Eigen::Vector3d(1, 2, 0.5);
    CHECK((markers[0].pos - expected).norm() < 1e-12);
  }
}

TEST_CASE("projection examples") {
  Camera weak;
  weak.mode = Camera::Mode::WeakPerspective;
  weak.scale = 2.0;
  weak.principal = {184, 184};
  CHECK((weak.project({10, 5, 100}) - Eigen::Vector2d(204, 194)).norm() < 1e-12);

  Camera persp;
  persp.mode = Camera::Mode::Perspective;
  persp.focal = 1000.0;
  persp.principal = {184, 184};
  CHECK((persp.project({10, 5, 100}) - Eigen::Vector2d(284, 234)).norm() < 1e-12);
  CHECK_THROWS_WITH_AS(persp.project({0, 0, -1}), doctest::Contains("behind camera"),
                       SolverError);
}

TEST_CASE("weak perspective commutes with in-plane translation") {
  Camera weak;
  weak.scale = 1.7;
  weak.principal = {100, 120};
  CounterRng rng(17);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d p(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
    const Eigen::Vector2d d(rng.uniform(-10, 10), rng.uniform(-10, 10));
    const Eigen::Vector2d lhs = weak.project(p + Eigen::Vector3d(d.x(), d.y(), 0));
    const Eigen::Vector2d rhs = weak.project(p) + weak.scale * d;
    CHECK((lhs - rhs).norm() < 1e-12);
  }
}

TEST_CASE("skeleton json round trip") {
  const SkeletonDef skel = body18_preset();
  const SkeletonDef back = skeleton_from_json(skeleton_to_json(skel));
  CHECK(back.joint_count() == skel.joint_count());
  CHECK(back.parts == skel.parts);
  CHECK(back.group("torso") == skel.group("torso"));
  for (int j = 0; j < skel.joint_count(); ++j) {
    CHECK(back.joints[j].name == skel.joints[j].name);
    CHECK((back.template_offsets[j] - skel.template_offsets[j]).norm() == 0.0);
  }
}

TEST_CASE("skeleton invariants rejected") {
  SUBCASE("two roots") {
    SkeletonDef s;
    s.joints = {{"a", -1}, {"b", -1}};
    s.template_offsets = {{0, 0, 0}, {0, 0, 1}};
    s.parts = {{0, 1}};
    CHECK_THROWS_AS(s.finalize(), MismatchError);
  }
  SUBCASE("part that is not an edge") {
    SkeletonDef s;
    s.joints = {{"a", -1}, {"b", 0}, {"c", 1}};
    s.template_offsets = {{0, 0, 0}, {0, 0, 1}, {0, 0, 1}};
    s.parts = {{0, 1}, {0, 2}};  // (0,2) skips b
    CHECK_THROWS_AS(s.finalize(), MismatchError);
  }
  SUBCASE("zero-length template bone") {
    SkeletonDef s;
    s.joints = {{"a", -1}, {"b", 0}};
    s.template_offsets = {{0, 0, 0}, {0, 0, 0}};
    s.parts = {{0, 1}};
    CHECK_THROWS_AS(s.finalize(), MismatchError);
  }
}

TEST_CASE("param layout pack/unpack round trip") {
  const SkeletonDef skel = body18_preset();
  CounterRng rng(23);
  ModelParams p = random_params(skel, rng);
  p.sigma = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
  const ParamLayout layout = ParamLayout::of(skel, 4);
  const ModelParams q = layout.unpack(layout.pack(p));
  for (int j = 0; j < skel.joint_count(); ++j) CHECK((p.theta[j] - q.theta[j]).norm() == 0.0);
  CHECK((p.phi - q.phi).norm() == 0.0);
  CHECK((p.t - q.t).norm() == 0.0);
  CHECK((p.sigma - q.sigma).norm() == 0.0);
}

TEST_CASE("face landmarks move linearly with sigma") {
  const SkeletonDef skel = body18_preset();
  const FaceBasis face = make_random_face_basis(skel, skel.joint_index("nose"), 6, 5, 99);
  CHECK(face.basis.cols() == 5);
  CHECK(face.basis.rows() == 18);
  // Orthonormal columns.
  CHECK((face.basis.transpose() * face.basis - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-9);

  const ModelParams p = ModelParams::rest(skel, 5);
  const auto cache = forward_kinematics_cache(p, skel);
  const auto base = face_landmark_positions(cache, face, Eigen::VectorXd::Zero(5));
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(5);
  sigma[2] = 1.5;
  const auto moved = face_landmark_positions(cache, face, sigma);
  for (int i = 0; i < face.landmark_count(); ++i) {
    const Eigen::Vector3d expected = base[i] + 1.5 * face.basis.block<3, 1>(3 * i, 2);
    CHECK((moved[i] - expected).norm() < 1e-12);
  }
}
