// SPDX-License-Identifier: Apache-2.0
#include "pofcap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pofcap/common.hpp"
#include "pofcap/rng.hpp"

namespace pofcap {

double mpjpe(const Pose3D& pred, const Pose3D& gt, Alignment alignment, int root) {
  if (pred.size() != gt.size() || pred.empty())
    throw MismatchError("joint set mismatch in mpjpe");
  Eigen::Vector3d shift = Eigen::Vector3d::Zero();
  if (alignment == Alignment::Root) shift = gt[root] - pred[root];
  double sum = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) sum += (pred[j] + shift - gt[j]).norm();
  return sum / static_cast<double>(pred.size());
}

Pose3D rescale_to_average_skeleton(const Pose3D& pred,
                                   const std::vector<std::pair<int, int>>& parts,
                                   const std::vector<double>& reference_bone_lengths,
                                   int root) {
  if (parts.size() != reference_bone_lengths.size())
    throw MismatchError("reference bone lengths do not match parts");
  double pred_mean = 0.0, ref_mean = 0.0;
  for (std::size_t b = 0; b < parts.size(); ++b) {
    pred_mean += (pred[parts[b].second] - pred[parts[b].first]).norm();
    ref_mean += reference_bone_lengths[b];
  }
  if (pred_mean <= 0.0) throw SolverError("degenerate skeleton in rescale");
  const double scale = ref_mean / pred_mean;
  Pose3D out(pred.size());
  for (std::size_t j = 0; j < pred.size(); ++j)
    out[j] = pred[root] + scale * (pred[j] - pred[root]);
  return out;
}

Pose3D depth_align(const Pose3D& pred, double gt_root_depth,
                   const Eigen::Vector3d& camera_center, int root) {
  const double pred_depth = pred[root].z() - camera_center.z();
  if (std::abs(pred_depth) < 1e-12) throw SolverError("depth_align: root at camera depth");
  const double alpha = (gt_root_depth - camera_center.z()) / pred_depth;
  Pose3D out(pred.size());
  for (std::size_t j = 0; j < pred.size(); ++j)
    out[j] = camera_center + alpha * (pred[j] - camera_center);
  return out;
}

PckCurve pck_auc(const std::vector<double>& errors_mm, double t_min_mm, double t_max_mm,
                 int n_thresholds) {
  if (n_thresholds < 2) throw ConfigError("pck_auc needs at least 2 thresholds");
  if (t_max_mm <= t_min_mm) throw ConfigError("pck_auc needs t_max > t_min");
  PckCurve out;
  out.thresholds.resize(n_thresholds);
  out.pck.resize(n_thresholds);
  for (int i = 0; i < n_thresholds; ++i) {
    const double t = t_min_mm + (t_max_mm - t_min_mm) * i / (n_thresholds - 1);
    out.thresholds[i] = t;
    if (errors_mm.empty()) {
      out.pck[i] = 0.0;
      continue;
    }
    int ok = 0;
    for (double e : errors_mm)
      if (e <= t) ++ok;
    out.pck[i] = static_cast<double>(ok) / static_cast<double>(errors_mm.size());
  }
  // Trapezoid AUC normalized to [0, 1] over the threshold range.
  double auc = 0.0;
  for (int i = 0; i + 1 < n_thresholds; ++i)
    auc += 0.5 * (out.pck[i] + out.pck[i + 1]) * (out.thresholds[i + 1] - out.thresholds[i]);
  out.auc = auc / (t_max_mm - t_min_mm);
  return out;
}

namespace {

Eigen::VectorXd flatten_root_aligned(const Pose3D& pose, int root) {
  Eigen::VectorXd v(3 * pose.size());
  for (std::size_t j = 0; j < pose.size(); ++j)
    v.segment<3>(3 * static_cast<Eigen::Index>(j)) = pose[j] - pose[root];
  return v;
}

}  // namespace

ClusterResult pose_clusters(const std::vector<Pose3D>& gt_poses, int k, std::uint64_t seed,
                            const std::vector<double>& frame_errors, int root, int restarts,
                            int max_iterations) {
  const int n = static_cast<int>(gt_poses.size());
  if (k < 1) throw ConfigError("pose_clusters needs k >= 1");
  if (k > n) throw MismatchError("pose_clusters: k exceeds sample count");
  if (!frame_errors.empty() && static_cast<int>(frame_errors.size()) != n)
    throw MismatchError("frame_errors size does not match poses");

  const int dim = static_cast<int>(3 * gt_poses[0].size());
  Eigen::MatrixXd data(n, dim);
  for (int i = 0; i < n; ++i) data.row(i) = flatten_root_aligned(gt_poses[i], root);

  Eigen::MatrixXd best_centroids;
  std::vector<int> best_assign;
  double best_inertia = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < restarts; ++restart) {
    CounterRng rng(seed, 0xc1a5ull + static_cast<std::uint64_t>(restart));
    // k-means++ seeding.
    Eigen::MatrixXd centroids(k, dim);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    centroids.row(0) = data.row(static_cast<int>(rng.next_below(n)));
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], (data.row(i) - centroids.row(c - 1)).squaredNorm());
        total += d2[i];
      }
      double pick = rng.uniform() * total;
      int chosen = n - 1;
      for (int i = 0; i < n; ++i) {
        pick -= d2[i];
        if (pick <= 0.0) {
          chosen = i;
          break;
        }
      }
      centroids.row(c) = data.row(chosen);
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < max_iterations; ++iter) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int best = 0;
        double bestd = (data.row(i) - centroids.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
          const double d = (data.row(i) - centroids.row(c)).squaredNorm();
          if (d < bestd) {
            bestd = d;
            best = c;
          }
        }
        if (assign[i] != best) {
          assign[i] = best;
          changed = true;
        }
      }
      if (!changed) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, dim);
      std::vector<int> counts(k, 0);
      for (int i = 0; i < n; ++i) {
        sums.row(assign[i]) += data.row(i);
        ++counts[assign[i]];
      }
      for (int c = 0; c < k; ++c)
        if (counts[c] > 0) centroids.row(c) = sums.row(c) / counts[c];
    }

    double inertia = 0.0;
    for (int i = 0; i < n; ++i)
      inertia += (data.row(i) - centroids.row(assign[i])).squaredNorm();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_centroids = centroids;
      best_assign = assign;
    }
  }

  ClusterResult out;
  out.assignments = std::move(best_assign);
  out.centroids = std::move(best_centroids);
  out.counts.assign(k, 0);
  out.per_cluster_mpjpe.assign(k, 0.0);
  for (int i = 0; i < n; ++i) {
    ++out.counts[out.assignments[i]];
    if (!frame_errors.empty()) out.per_cluster_mpjpe[out.assignments[i]] += frame_errors[i];
  }
  for (int c = 0; c < k; ++c)
    if (out.counts[c] > 0 && !frame_errors.empty())
      out.per_cluster_mpjpe[c] /= out.counts[c];
  return out;
}

SweepReport view_sweep_report(const std::map<std::pair<double, double>, std::vector<double>>&
                                  errors_by_view,
                              const std::vector<double>& azimuths,
                              const std::vector<double>& elevations) {
  SweepReport out;
  out.azimuths = azimuths;
  out.elevations = elevations;
  for (double el : elevations) {
    for (double az : azimuths) {
      SweepCell cell;
      cell.azimuth = az;
      cell.elevation = el;
      auto it = errors_by_view.find({az, el});
      if (it != errors_by_view.end() && !it->second.empty()) {
        const auto& errs = it->second;
        cell.count = static_cast<int>(errs.size());
        double mean = 0.0;
        for (double e : errs) mean += e;
        mean /= cell.count;
        double var = 0.0;
        for (double e : errs) var += (e - mean) * (e - mean);
        cell.mean = mean;
        cell.stddev = cell.count > 1 ? std::sqrt(var / (cell.count - 1)) : 0.0;
      }
      out.cells.push_back(cell);
    }
  }
  return out;
}

std::string sweep_report_csv(const SweepReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "azimuth_deg,elevation_deg,count,mean_mpjpe_cm,std_mpjpe_cm\n";
  for (const auto& c : report.cells) {
    os << c.azimuth << "," << c.elevation << "," << c.count << ",";
    if (c.count > 0)
      os << c.mean << "," << c.stddev;
    else
      os << ",";  // absent, not zero
    os << "\n";
  }
  return os.str();
}

Eigen::MatrixXd fit_joint_regressor(const std::vector<Pose3D>& source,
                                    const std::vector<Pose3D>& target, double ridge) {
  if (source.size() != target.size() || source.empty())
    throw MismatchError("regressor needs matched, non-empty frame sets");
  const int f = static_cast<int>(source.size());
  const int js = static_cast<int>(source[0].size());
  const int jt = static_cast<int>(target[0].size());

  // Rows stack x/y/z equations per frame; one weight row per target joint.
  Eigen::MatrixXd a(3 * f, js);
  for (int i = 0; i < f; ++i)
    for (int s = 0; s < js; ++s)
      for (int d = 0; d < 3; ++d) a(3 * i + d, s) = source[i][s][d];

  Eigen::MatrixXd ata = a.transpose() * a;
  ata.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(ata);

  Eigen::MatrixXd map(jt, js);
  Eigen::VectorXd b(3 * f);
  for (int t = 0; t < jt; ++t) {
    for (int i = 0; i < f; ++i)
      for (int d = 0; d < 3; ++d) b[3 * i + d] = target[i][t][d];
    map.row(t) = ldlt.solve(a.transpose() * b).transpose();
  }
  return map;
}

Pose3D apply_joint_regressor(const Eigen::MatrixXd& map, const Pose3D& source) {
  if (map.cols() != static_cast<Eigen::Index>(source.size()))
    throw MismatchError("regressor source size mismatch");
  Pose3D out(map.rows(), Eigen::Vector3d::Zero());
  for (int t = 0; t < map.rows(); ++t)
    for (int s = 0; s < map.cols(); ++s) out[t] += map(t, s) * source[s];
  return out;
}

}  // namespace pofcap
