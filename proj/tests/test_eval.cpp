// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "pofcap/common.hpp"
#include "pofcap/eval.hpp"
#include "pofcap/rng.hpp"
#include "pofcap/skeleton.hpp"

using namespace pofcap;

namespace {

Pose3D random_pose(CounterRng& rng, int joints, double scale = 50.0) {
  Pose3D p(joints);
  for (auto& v : p)
    v = Eigen::Vector3d(rng.uniform(-scale, scale), rng.uniform(-scale, scale),
                        rng.uniform(-scale, scale));
  return p;
}

}  // namespace

TEST_CASE("mpjpe examples") {
  CounterRng rng(1);
  const Pose3D gt = random_pose(rng, 10);
  SUBCASE("identical poses give zero") { CHECK(mpjpe(gt, gt, Alignment::None) == 0.0); }
  SUBCASE("constant offset vanishes under root alignment") {
    Pose3D pred = gt;
    for (auto& v : pred) v += Eigen::Vector3d(5, -3, 11);
    CHECK(mpjpe(pred, gt, Alignment::Root) < 1e-12);
    CHECK(mpjpe(pred, gt, Alignment::None) > 1.0);
  }
  SUBCASE("scaling about the root gives the mean scaled radius") {
    Pose3D pred(gt.size());
    for (std::size_t j = 0; j < gt.size(); ++j) pred[j] = gt[0] + 1.1 * (gt[j] - gt[0]);
    // Direct per-joint computation.
    double expected = 0.0;
    for (std::size_t j = 0; j < gt.size(); ++j) expected += 0.1 * (gt[j] - gt[0]).norm();
    expected /= gt.size();
    CHECK(mpjpe(pred, gt, Alignment::Root) == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("mismatched joint sets throw") {
    Pose3D small(gt.begin(), gt.begin() + 5);
    CHECK_THROWS_AS(mpjpe(small, gt, Alignment::None), MismatchError);
  }
}

TEST_CASE("mpjpe is a pseudometric on random triples") {
  CounterRng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Pose3D a = random_pose(rng, 8), b = random_pose(rng, 8), c = random_pose(rng, 8);
    CHECK(mpjpe(a, b, Alignment::None) == doctest::Approx(mpjpe(b, a, Alignment::None)));
    CHECK(mpjpe(a, a, Alignment::None) == 0.0);
    CHECK(mpjpe(a, c, Alignment::None) <=
          mpjpe(a, b, Alignment::None) + mpjpe(b, c, Alignment::None) + 1e-12);
  }
}

TEST_CASE("rescale_to_average_skeleton") {
  const SkeletonDef skel = body18_preset();
  const auto rest = forward_kinematics(ModelParams::rest(skel), skel);
  std::vector<double> ref_lengths;
  for (auto [m, n] : skel.parts) ref_lengths.push_back((rest[n] - rest[m]).norm());

  SUBCASE("matching skeleton is unchanged") {
    const Pose3D out = rescale_to_average_skeleton(rest, skel.parts, ref_lengths, skel.root());
    for (std::size_t j = 0; j < rest.size(); ++j) CHECK((out[j] - rest[j]).norm() < 1e-12);
  }
  SUBCASE("half scale doubles") {
    Pose3D half(rest.size());
    for (std::size_t j = 0; j < rest.size(); ++j)
      half[j] = rest[skel.root()] + 0.5 * (rest[j] - rest[skel.root()]);
    const Pose3D out = rescale_to_average_skeleton(half, skel.parts, ref_lengths, skel.root());
    for (std::size_t j = 0; j < rest.size(); ++j) CHECK((out[j] - rest[j]).norm() < 1e-9);
  }
  SUBCASE("scale factor is the ratio of mean bone lengths, verified per bone") {
    CounterRng rng(3);
    Pose3D pred(rest.size());
    const double s = 1.37;
    for (std::size_t j = 0; j < rest.size(); ++j)
      pred[j] = rest[skel.root()] + s * (rest[j] - rest[skel.root()]);
    const Pose3D out = rescale_to_average_skeleton(pred, skel.parts, ref_lengths, skel.root());
    // Brute-force bone recomputation.
    for (std::size_t b = 0; b < skel.parts.size(); ++b) {
      auto [m, n] = skel.parts[b];
      CHECK((out[n] - out[m]).norm() == doctest::Approx(ref_lengths[b]).epsilon(1e-9));
    }
  }
  SUBCASE("bone-direction dot products are preserved") {
    CounterRng rng(4);
    const Pose3D pose = random_pose(rng, skel.joint_count());
    const Pose3D out = rescale_to_average_skeleton(pose, skel.parts, ref_lengths, skel.root());
    for (std::size_t b = 1; b < skel.parts.size(); ++b) {
      auto [m1, n1] = skel.parts[b - 1];
      auto [m2, n2] = skel.parts[b];
      const double before =
          (pose[n1] - pose[m1]).normalized().dot((pose[n2] - pose[m2]).normalized());
      const double after =
          (out[n1] - out[m1]).normalized().dot((out[n2] - out[m2]).normalized());
      CHECK(before == doctest::Approx(after).epsilon(1e-9));
    }
  }
}

TEST_CASE("depth_align") {
  CounterRng rng(5);
  Pose3D gt = random_pose(rng, 9, 30.0);
  for (auto& v : gt) v.z() += 200.0;  // in front of the camera

  SUBCASE("a half-scale prediction snaps back exactly") {
    Pose3D pred(gt.size());
    for (std::size_t j = 0; j < gt.size(); ++j) pred[j] = 0.5 * gt[j];
    const Pose3D out = depth_align(pred, gt[0].z(), Eigen::Vector3d::Zero(), 0);
    CHECK(mpjpe(out, gt, Alignment::None) < 1e-9);
  }
  SUBCASE("matching root depth is a no-op") {
    const Pose3D out = depth_align(gt, gt[0].z(), Eigen::Vector3d::Zero(), 0);
    for (std::size_t j = 0; j < gt.size(); ++j) CHECK((out[j] - gt[j]).norm() < 1e-12);
  }
  SUBCASE("root depths match exactly after alignment") {
    Pose3D pred = gt;
    for (auto& v : pred) v *= 1.83;
    const Pose3D out = depth_align(pred, gt[0].z(), Eigen::Vector3d::Zero(), 0);
    CHECK(out[0].z() == doctest::Approx(gt[0].z()).epsilon(1e-12));
  }
  SUBCASE("ray directions are preserved") {
    Pose3D pred = gt;
    for (auto& v : pred) v *= 0.71;
    const Pose3D out = depth_align(pred, gt[0].z(), Eigen::Vector3d::Zero(), 0);
    for (std::size_t j = 0; j < gt.size(); ++j)
      CHECK((out[j].normalized() - pred[j].normalized()).norm() < 1e-9);
  }
}

TEST_CASE("pck curve and auc") {
  SUBCASE("all-zero errors saturate") {
    const PckCurve c = pck_auc({0, 0, 0}, 20, 50, 31);
    for (double v : c.pck) CHECK(v == 1.0);
    CHECK(c.auc == doctest::Approx(1.0));
  }
  SUBCASE("single error at 30mm in the 20-50 range") {
    const PckCurve c = pck_auc({30.0}, 20, 50, 31);
    CHECK(c.pck.front() == 0.0);
    CHECK(c.pck.back() == 1.0);
  }
  SUBCASE("uniform errors give auc near one half") {
    CounterRng rng(6);
    std::vector<double> errors(100000);
    for (auto& e : errors) e = rng.uniform(20.0, 50.0);
    const PckCurve c = pck_auc(errors, 20, 50, 301);
    CHECK(std::abs(c.auc - 0.5) <= 0.02);
  }
  SUBCASE("monotone non-decreasing in the threshold") {
    CounterRng rng(7);
    std::vector<double> errors(500);
    for (auto& e : errors) e = rng.uniform(0.0, 80.0);
    const PckCurve c = pck_auc(errors, 20, 50, 61);
    for (std::size_t i = 1; i < c.pck.size(); ++i) CHECK(c.pck[i] >= c.pck[i - 1]);
  }
}

TEST_CASE("pose clusters") {
  CounterRng rng(8);
  SUBCASE("k=1 gives the mean pose") {
    std::vector<Pose3D> poses;
    for (int i = 0; i < 12; ++i) poses.push_back(random_pose(rng, 5));
    const ClusterResult out = pose_clusters(poses, 1, 3);
    // Oracle: mean of root-aligned flattened poses.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(15);
    for (const auto& p : poses)
      for (int j = 0; j < 5; ++j) mean.segment<3>(3 * j) += (p[j] - p[0]) / 12.0;
    CHECK((out.centroids.row(0).transpose() - mean).norm() < 1e-9);
  }
  SUBCASE("two well-separated clusters are recovered exactly") {
    std::vector<Pose3D> poses;
    for (int i = 0; i < 10; ++i) {
      Pose3D p(4, Eigen::Vector3d::Zero());
      const double big = i < 5 ? 0.0 : 500.0;
      for (int j = 1; j < 4; ++j)
        p[j] = Eigen::Vector3d(big + rng.uniform(-1, 1), j * 10.0 + rng.uniform(-1, 1),
                               rng.uniform(-1, 1));
      poses.push_back(p);
    }
    const ClusterResult out = pose_clusters(poses, 2, 5);
    for (int i = 1; i < 5; ++i) CHECK(out.assignments[i] == out.assignments[0]);
    for (int i = 6; i < 10; ++i) CHECK(out.assignments[i] == out.assignments[5]);
    CHECK(out.assignments[0] != out.assignments[5]);
  }
  SUBCASE("k greater than the sample count throws") {
    std::vector<Pose3D> poses{random_pose(rng, 3), random_pose(rng, 3)};
    CHECK_THROWS_AS(pose_clusters(poses, 5, 1), MismatchError);
  }
  SUBCASE("deterministic for a fixed seed") {
    std::vector<Pose3D> poses;
    for (int i = 0; i < 30; ++i) poses.push_back(random_pose(rng, 6));
    const ClusterResult a = pose_clusters(poses, 4, 77);
    const ClusterResult b = pose_clusters(poses, 4, 77);
    CHECK(a.assignments == b.assignments);
  }
}

TEST_CASE("view sweep report") {
  std::map<std::pair<double, double>, std::vector<double>> errors;
  errors[{0.0, 0.0}] = {1.0, 3.0};
  errors[{45.0, 0.0}] = {2.0};
  // cell (0, 30) intentionally missing
  const SweepReport report = view_sweep_report(errors, {0.0, 45.0}, {0.0, 30.0});
  REQUIRE(report.cells.size() == 4);
  CHECK(report.cells[0].mean == doctest::Approx(2.0));
  CHECK(report.cells[0].count == 2);
  CHECK(report.cells[1].count == 1);
  CHECK(report.cells[2].count == 0);  // absent, not zero

  // Grid totals match the global mean weighted by counts.
  double weighted = 0.0;
  int count = 0;
  for (const auto& c : report.cells) {
    weighted += c.mean * c.count;
    count += c.count;
  }
  CHECK(weighted / count == doctest::Approx((1.0 + 3.0 + 2.0) / 3.0).epsilon(1e-12));

  const std::string csv = sweep_report_csv(report);
  CHECK(csv.find("azimuth_deg,elevation_deg,count,mean_mpjpe_cm,std_mpjpe_cm") == 0);
  CHECK(csv.find("45,30,0,,") != std::string::npos);  // absent cell fields empty
}

TEST_CASE("joint regressor") {
  CounterRng rng(9);
  std::vector<Pose3D> source;
  for (int i = 0; i < 40; ++i) source.push_back(random_pose(rng, 8));

  SUBCASE("subset selection is recovered exactly") {
    std::vector<Pose3D> target;
    for (const auto& s : source) target.push_back({s[2], s[5], s[7]});
    const Eigen::MatrixXd map = fit_joint_regressor(source, target, 1e-12);
    // Exact-solution oracle: residual below 1e-9 on every frame.
    for (std::size_t f = 0; f < source.size(); ++f) {
      const Pose3D mapped = apply_joint_regressor(map, source[f]);
      for (int t = 0; t < 3; ++t) CHECK((mapped[t] - target[f][t]).norm() < 1e-9);
    }
    CHECK(map(0, 2) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(map(1, 5) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("half-scale target gives a half-identity map") {
    std::vector<Pose3D> target;
    for (const auto& s : source) {
      Pose3D t(s.size());
      for (std::size_t j = 0; j < s.size(); ++j) t[j] = 0.5 * s[j];
      target.push_back(t);
    }
    const Eigen::MatrixXd map = fit_joint_regressor(source, target, 1e-12);
    for (int j = 0; j < 8; ++j) CHECK(map(j, j) == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("infinite ridge shrinks the map to zero") {
    std::vector<Pose3D> target = source;
    const Eigen::MatrixXd map = fit_joint_regressor(source, target, 1e12);
    CHECK(map.norm() < 1e-4);
  }
}
