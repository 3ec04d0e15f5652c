// SPDX-License-Identifier: Apache-2.0
#include "pofcap/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "pofcap/common.hpp"
#include "pofcap/eval.hpp"
#include "pofcap/fitting.hpp"
#include "pofcap/synth.hpp"
#include "pofcap/tracking.hpp"

namespace pofcap {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

nlohmann::json load_json(const std::string& path, bool config) {
  std::ifstream in(path);
  if (!in) {
    if (config) throw ConfigError("cannot open config: " + path);
    throw FormatError("cannot open: " + path);
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    if (config) throw ConfigError("invalid JSON in " + path + ": " + e.what());
    throw FormatError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw FormatError("write failed: " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_manifest(const fs::path& out_dir, const std::string& command,
                    std::uint64_t config_hash, std::uint64_t seed,
                    const std::map<std::string, double>& timings,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j{{"schema_version", 1},
                   {"command", command},
                   {"config_hash", hex64(config_hash)},
                   {"seed", seed},
                   {"versions", {{"pofcap", kVersion}}},
                   {"timings_ms", timings},
                   {"outputs", outputs}};
  write_json(out_dir / "manifest.json", j);
}

int guard(const std::string& command, const std::function<void()>& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitFormat;
  } catch (const MismatchError& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitMismatch;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return 1;
  }
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string frame_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d", i);
  return buf;
}

nlohmann::json total_observation_to_json(const Observation& body,
                                         const std::optional<Observation>& lh,
                                         const std::optional<Observation>& rh) {
  nlohmann::json j;
  j["body"] = observation_to_json(body);
  j["left_hand"] = lh ? observation_to_json(*lh) : nlohmann::json();
  j["right_hand"] = rh ? observation_to_json(*rh) : nlohmann::json();
  return j;
}

TotalObservation total_observation_from_json(const nlohmann::json& j) {
  TotalObservation obs;
  obs.body = observation_from_json(j.at("body"));
  if (!j.at("left_hand").is_null()) obs.left_hand = observation_from_json(j.at("left_hand"));
  if (!j.at("right_hand").is_null()) obs.right_hand = observation_from_json(j.at("right_hand"));
  return obs;
}

struct LoadedSequence {
  SceneConfig config;
  SyntheticSequence seq;
  std::vector<TotalObservation> observations;
  bool has_fields = false;
  fs::path dir;
};

LoadedSequence load_sequence_dir(const std::string& dir) {
  LoadedSequence out;
  out.dir = dir;
  const auto scene = load_json((fs::path(dir) / "scene.json").string(), false);
  out.config = scene_config_from_json(scene.at("config"));
  out.seq.skeleton = skeleton_from_json(scene.at("skeleton"));
  out.seq.camera = out.config.camera;
  if (scene.contains("face") && !scene.at("face").is_null())
    out.seq.face = face_basis_from_json(scene.at("face"));

  const auto gt = load_json((fs::path(dir) / "gt.json").string(), false);
  for (const auto& jf : gt.at("frames")) {
    GtFrame f;
    f.params = params_from_json(jf.at("params"));
    f.joints = forward_kinematics(f.params, out.seq.skeleton);
    f.markers = marker_positions(f.params, out.seq.skeleton);
    out.seq.frames.push_back(std::move(f));
  }

  const auto obs = load_json((fs::path(dir) / "obs.json").string(), false);
  for (const auto& jo : obs.at("frames"))
    out.observations.push_back(total_observation_from_json(jo));
  if (out.observations.size() != out.seq.frames.size())
    throw FormatError("sequence dir: obs/gt frame count mismatch");
  out.has_fields = fs::exists(fs::path(dir) / "fields");
  return out;
}

std::vector<FitResult> load_fit_results(const std::string& dir) {
  const auto j = load_json((fs::path(dir) / "fits.json").string(), false);
  std::vector<FitResult> out;
  for (const auto& jf : j.at("frames")) out.push_back(fit_result_from_json(jf));
  return out;
}

}  // namespace

int resolve_jobs(std::optional<int> flag_value) {
  if (flag_value && *flag_value > 0) return *flag_value;
  if (const char* env = std::getenv("POFCAP_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

int run_synth(const std::string& config_path, const std::string& out_dir,
              const RunOptions& opt) {
  return guard("synth", [&] {
    const auto start = Clock::now();
    const auto cfg_json = load_json(config_path, true);
    SceneConfig cfg = scene_config_from_json(cfg_json);
    if (opt.seed) cfg.seed = *opt.seed;

    fs::create_directories(out_dir);
    const SyntheticSequence seq = generate_sequence(cfg);
    const auto t_gen = ms_since(start);

    nlohmann::json scene;
    scene["schema_version"] = 1;
    scene["config"] = scene_config_to_json(cfg);
    scene["skeleton"] = skeleton_to_json(seq.skeleton);
    scene["face"] = seq.face ? face_basis_to_json(*seq.face) : nlohmann::json();
    write_json(fs::path(out_dir) / "scene.json", scene);

    nlohmann::json gt;
    gt["frames"] = nlohmann::json::array();
    for (const auto& f : seq.frames) {
      nlohmann::json jf;
      jf["params"] = params_to_json(f.params);
      nlohmann::json joints = nlohmann::json::array();
      for (const auto& p : f.joints) joints.push_back({p.x(), p.y(), p.z()});
      jf["joints_cm"] = joints;
      gt["frames"].push_back(jf);
    }
    write_json(fs::path(out_dir) / "gt.json", gt);

    std::vector<std::string> outputs{"scene.json", "gt.json", "obs.json"};
    if (cfg.fields.write) fs::create_directories(fs::path(out_dir) / "fields");

    std::vector<nlohmann::json> obs_frames(seq.frames.size());
    parallel_for(static_cast<int>(seq.frames.size()), opt.jobs, [&](int i) {
      const RenderedFrame rf = render_observation(seq.frames[i], seq, cfg.noise, cfg.fields,
                                                  cfg.seed, i, cfg.toes);
      obs_frames[i] = total_observation_to_json(rf.body, rf.left_hand, rf.right_hand);
      if (cfg.fields.write) {
        write_poft_file((fs::path(out_dir) / "fields" / (frame_name(i) + ".poft")).string(),
                        {rf.fields.confidence, rf.fields.pof});
      }
    });
    nlohmann::json obs;
    obs["frames"] = obs_frames;
    write_json(fs::path(out_dir) / "obs.json", obs);
    if (cfg.fields.write)
      for (std::size_t i = 0; i < seq.frames.size(); ++i)
        outputs.push_back("fields/" + frame_name(static_cast<int>(i)) + ".poft");

    write_manifest(out_dir, "synth", fnv1a64(cfg_json.dump().data(), cfg_json.dump().size()),
                   cfg.seed, {{"generate", t_gen}, {"total", ms_since(start)}}, outputs);
  });
}

int run_fit(const std::string& sequence_dir, const std::string& fit_config_path,
            const std::string& out_dir, const RunOptions& opt) {
  return guard("fit", [&] {
    const auto start = Clock::now();
    nlohmann::json cfg_json = nlohmann::json::object();
    if (!fit_config_path.empty()) cfg_json = load_json(fit_config_path, true);
    FitConfig cfg = fit_config_from_json(cfg_json);

    const LoadedSequence seq = load_sequence_dir(sequence_dir);
    cfg.camera = seq.config.camera;  // the sequence fixes the camera
    Fitter fitter(seq.seq.skeleton, cfg, seq.seq.face);

    const int n = static_cast<int>(seq.seq.frames.size());
    std::vector<FitResult> results(n);
    std::vector<std::string> warnings(n);
    parallel_for(n, opt.jobs, [&](int i) {
      TotalObservation obs = seq.observations[i];
      const fs::path field_path = seq.dir / "fields" / (frame_name(i) + ".poft");
      if (fs::exists(field_path)) {
        const auto tensors = read_poft_file(field_path.string());
        if (tensors.size() != 2 || tensors[0].dims.size() != 3 || tensors[1].dims.size() != 3)
          throw FormatError("bad container: field stack needs confidence + pof tensors");
        const auto n_joints = seq.seq.skeleton.group("body_joints").size();
        const auto n_parts = seq.seq.skeleton.group("body_parts").size();
        if (tensors[0].dims[0] != n_joints || tensors[1].dims[0] != 3 * n_parts)
          throw FormatError("bad container: field channel counts do not match the skeleton");
        obs.body.keypoints =
            decode_keypoints(tensors[0], cfg.keypoint_presence_threshold);
        std::vector<std::pair<int, int>> obs_parts;
        const auto& part_ids = seq.seq.skeleton.group("body_parts");
        const auto& joint_ids = seq.seq.skeleton.group("body_joints");
        std::vector<int> joint_to_obs(seq.seq.skeleton.joint_count(), -1);
        for (std::size_t k = 0; k < joint_ids.size(); ++k)
          joint_to_obs[joint_ids[k]] = static_cast<int>(k);
        for (int b : part_ids)
          obs_parts.emplace_back(joint_to_obs[seq.seq.skeleton.parts[b].first],
                                 joint_to_obs[seq.seq.skeleton.parts[b].second]);
        obs.body.orientations = decode_orientations(tensors[1], obs.body.keypoints, obs_parts,
                                                    cfg.orientation_presence_threshold);
      }
      try {
        results[i] = fitter.fit_frame(obs);
      } catch (const SolverError& e) {
        results[i] = FitResult{};
        results[i].params = ModelParams::rest(seq.seq.skeleton,
                                              seq.seq.face ? seq.seq.face->k_sigma() : 0);
        results[i].converged = false;
        warnings[i] = e.what();
      }
    });

    fs::create_directories(out_dir);
    nlohmann::json fits;
    fits["frames"] = nlohmann::json::array();
    int converged = 0, warned = 0;
    for (int i = 0; i < n; ++i) {
      nlohmann::json jf = fit_result_to_json(results[i]);
      if (!warnings[i].empty()) {
        jf["warning"] = warnings[i];
        ++warned;
      }
      if (results[i].converged) ++converged;
      fits["frames"].push_back(jf);
    }
    write_json(fs::path(out_dir) / "fits.json", fits);
    write_json(fs::path(out_dir) / "summary.json",
               {{"frames", n}, {"converged", converged}, {"warnings", warned}});
    if (warned > 0) std::cerr << "fit: " << warned << " frame(s) skipped with warnings\n";

    write_manifest(out_dir, "fit", fnv1a64(cfg_json.dump().data(), cfg_json.dump().size()),
                   seq.config.seed, {{"total", ms_since(start)}},
                   {"fits.json", "summary.json"});
  });
}

int run_track(const std::string& sequence_dir, const std::string& fit_dir,
              const std::string& out_dir, const RunOptions& opt) {
  return guard("track", [&] {
    const auto start = Clock::now();
    const LoadedSequence seq = load_sequence_dir(sequence_dir);
    const auto fits = load_fit_results(fit_dir);
    if (fits.size() != seq.seq.frames.size())
      throw MismatchError("fit results do not match sequence frame count");

    FitConfig cfg;
    cfg.camera = seq.config.camera;
    Fitter fitter(seq.seq.skeleton, cfg, seq.seq.face);
    TrackConfig track;

    FlowProvider provider;
    if (opt.provider == "identity") {
      provider = make_identity_flow_provider(seq.seq.skeleton, seq.config.camera);
    } else if (opt.provider == "oracle") {
      provider = make_oracle_flow_provider(seq.seq, 0.0, seq.config.seed);
    } else if (opt.provider == "file") {
      if (opt.provider_file.empty()) throw ConfigError("provider=file needs --provider-file");
      if (!fs::exists(opt.provider_file))
        throw ConfigError("provider file not found: " + opt.provider_file);
      auto frames_targets = load_flow_targets(opt.provider_file);
      provider = [frames_targets](const ModelParams&, const ModelParams&, int frame) {
        if (frame < 0 || frame >= static_cast<int>(frames_targets.size())) {
          FlowTargets bad;
          bad.ok = false;
          return bad;
        }
        return frames_targets[frame];
      };
    } else {
      throw ConfigError("unknown provider: " + opt.provider);
    }

    std::vector<FrameInput> inputs;
    for (std::size_t i = 0; i < fits.size(); ++i)
      inputs.push_back({seq.observations[i], fits[i].params});
    const auto refined = refine_sequence(inputs, provider, track, fitter);

    auto joints_of = [&](const ModelParams& p) {
      return forward_kinematics(p, seq.seq.skeleton);
    };
    std::vector<std::vector<Eigen::Vector3d>> before, after;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      before.push_back(joints_of(fits[i].params));
      after.push_back(joints_of(refined[i].params));
    }
    const double jitter_before = jitter_metric(before);
    const double jitter_after = jitter_metric(after);

    fs::create_directories(out_dir);
    nlohmann::json out;
    out["frames"] = nlohmann::json::array();
    int flagged = 0;
    for (const auto& f : refined) {
      out["frames"].push_back({{"params", params_to_json(f.params)},
                               {"refined", f.refined},
                               {"flagged", f.flagged}});
      if (f.flagged) ++flagged;
    }
    write_json(fs::path(out_dir) / "refined.json", out);
    write_json(fs::path(out_dir) / "jitter.json",
               {{"before_cm", jitter_before},
                {"after_cm", jitter_after},
                {"flagged_frames", flagged}});
    std::cout << "jitter before " << jitter_before << " cm, after " << jitter_after << " cm\n";

    write_manifest(out_dir, "track", 0, seq.config.seed, {{"total", ms_since(start)}},
                   {"refined.json", "jitter.json"});
  });
}

int run_eval(const std::string& pred_dir, const std::string& gt_dir,
             const std::string& out_dir, const RunOptions& opt) {
  return guard("eval", [&] {
    const auto start = Clock::now();
    const LoadedSequence seq = load_sequence_dir(gt_dir);
    const SkeletonDef& skel = seq.seq.skeleton;
    const int root = skel.root();

    // Predictions come from a fit dir (fits.json) or a track dir (refined.json).
    std::vector<ModelParams> preds;
    if (fs::exists(fs::path(pred_dir) / "fits.json")) {
      for (const auto& r : load_fit_results(pred_dir)) preds.push_back(r.params);
    } else if (fs::exists(fs::path(pred_dir) / "refined.json")) {
      const auto j = load_json((fs::path(pred_dir) / "refined.json").string(), false);
      for (const auto& jf : j.at("frames")) preds.push_back(params_from_json(jf.at("params")));
    } else {
      throw FormatError("pred dir has neither fits.json nor refined.json");
    }
    if (preds.size() != seq.seq.frames.size())
      throw MismatchError("joint set mismatch: prediction/gt frame counts differ");
    for (const auto& p : preds)
      if (static_cast<int>(p.theta.size()) != skel.joint_count())
        throw MismatchError("joint set mismatch: prediction params do not fit skeleton");

    const bool all = std::find(opt.protocols.begin(), opt.protocols.end(), "all") !=
                     opt.protocols.end();
    auto wants = [&](const char* name) {
      return all || std::find(opt.protocols.begin(), opt.protocols.end(), name) !=
                        opt.protocols.end();
    };

    std::vector<Pose3D> pred_joints, gt_joints;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      pred_joints.push_back(forward_kinematics(preds[i], skel));
      gt_joints.push_back(seq.seq.frames[i].joints);
    }

    fs::create_directories(out_dir);
    nlohmann::json metrics;
    std::vector<std::string> outputs{"metrics.json"};

    std::vector<double> per_frame;
    for (std::size_t i = 0; i < preds.size(); ++i)
      per_frame.push_back(mpjpe(pred_joints[i], gt_joints[i], Alignment::Root, root));
    const double mean_mpjpe =
        std::accumulate(per_frame.begin(), per_frame.end(), 0.0) / per_frame.size();
    if (wants("mpjpe")) {
      metrics["mpjpe_root_cm"] = {{"mean", mean_mpjpe}, {"per_frame", per_frame}};
    }
    if (wants("rescale")) {
      std::vector<double> ref(skel.part_count(), 0.0);
      for (const auto& g : gt_joints)
        for (int b = 0; b < skel.part_count(); ++b)
          ref[b] += (g[skel.parts[b].second] - g[skel.parts[b].first]).norm();
      for (auto& v : ref) v /= static_cast<double>(gt_joints.size());
      double sum = 0.0;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const Pose3D scaled = rescale_to_average_skeleton(pred_joints[i], skel.parts, ref, root);
        sum += mpjpe(scaled, gt_joints[i], Alignment::Root, root);
      }
      metrics["mpjpe_rescaled_cm"] = {{"mean", sum / preds.size()}};
    }
    if (wants("depth")) {
      // Depth-ray alignment needs a real depth axis; a weak-perspective
      // sequence keeps its root at zero depth where the scaling is singular.
      if (seq.config.camera.mode == Camera::Mode::Perspective) {
        double sum = 0.0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
          const Pose3D aligned = depth_align(pred_joints[i], gt_joints[i][root].z(),
                                             Eigen::Vector3d::Zero(), root);
          sum += mpjpe(aligned, gt_joints[i], Alignment::None, root);
        }
        metrics["mpjpe_depth_aligned_cm"] = {{"mean", sum / preds.size()}};
      } else {
        metrics["mpjpe_depth_aligned_cm"] = {{"applicable", false}};
      }
    }
    if (wants("pck")) {
      std::vector<double> errors_mm;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const Eigen::Vector3d shift = gt_joints[i][root] - pred_joints[i][root];
        for (int j = 0; j < skel.joint_count(); ++j)
          errors_mm.push_back(10.0 * (pred_joints[i][j] + shift - gt_joints[i][j]).norm());
      }
      const PckCurve curve =
          pck_auc(errors_mm, opt.pck_min_mm, opt.pck_max_mm, opt.pck_thresholds);
      metrics["pck"] = {{"auc", curve.auc},
                        {"t_min_mm", opt.pck_min_mm},
                        {"t_max_mm", opt.pck_max_mm}};
      std::ostringstream csv;
      csv.precision(17);
      csv << "threshold_mm,pck\n";
      for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        csv << curve.thresholds[i] << "," << curve.pck[i] << "\n";
      write_text(fs::path(out_dir) / "pck.csv", csv.str());
      outputs.push_back("pck.csv");
    }
    if (wants("clusters")) {
      const int k = std::min<int>(opt.cluster_k, static_cast<int>(gt_joints.size()));
      const ClusterResult clusters =
          pose_clusters(gt_joints, k, seq.config.seed, per_frame, root);
      std::ostringstream csv;
      csv.precision(17);
      csv << "cluster,count,mean_mpjpe_cm\n";
      for (int c = 0; c < k; ++c)
        csv << c << "," << clusters.counts[c] << "," << clusters.per_cluster_mpjpe[c] << "\n";
      write_text(fs::path(out_dir) / "clusters.csv", csv.str());
      outputs.push_back("clusters.csv");
      metrics["clusters"] = {{"k", k}};
    }

    write_json(fs::path(out_dir) / "metrics.json", metrics);
    std::cout << "mean root-aligned MPJPE " << mean_mpjpe << " cm over " << preds.size()
              << " frames\n";
    write_manifest(out_dir, "eval", 0, seq.config.seed, {{"total", ms_since(start)}}, outputs);
  });
}

int run_sweep(const std::string& config_path, const std::vector<double>& azimuths_deg,
              const std::vector<double>& elevations_deg, const std::string& out_dir,
              const RunOptions& opt) {
  return guard("sweep", [&] {
    const auto start = Clock::now();
    const auto cfg_json = load_json(config_path, true);
    SceneConfig cfg = scene_config_from_json(cfg_json);
    if (opt.seed) cfg.seed = *opt.seed;
    if (azimuths_deg.empty() || elevations_deg.empty())
      throw ConfigError("sweep needs at least one azimuth and one elevation");

    fs::create_directories(out_dir);
    const SyntheticSequence base = generate_sequence(cfg);
    const int root = base.skeleton.root();
    const Eigen::Vector3d pivot = base.frames.empty() ? Eigen::Vector3d::Zero()
                                                      : base.frames[0].params.t;

    struct Cell {
      int ai, ei;
      double az, el;
    };
    std::vector<Cell> cells;
    for (std::size_t ei = 0; ei < elevations_deg.size(); ++ei)
      for (std::size_t ai = 0; ai < azimuths_deg.size(); ++ai)
        cells.push_back({static_cast<int>(ai), static_cast<int>(ei), azimuths_deg[ai],
                         elevations_deg[ei]});

    std::vector<std::vector<double>> cell_errors(cells.size());
    parallel_for(static_cast<int>(cells.size()), opt.jobs, [&](int ci) {
      const Cell& cell = cells[ci];
      const fs::path cell_dir =
          fs::path(out_dir) / ("cell_a" + std::to_string(cell.ai) + "_e" +
                               std::to_string(cell.ei));
      const fs::path errors_path = cell_dir / "errors.json";
      if (fs::exists(errors_path)) {  // resumable: reuse finished cells
        const auto j = load_json(errors_path.string(), false);
        cell_errors[ci] = j.at("errors_cm").get<std::vector<double>>();
        return;
      }
      fs::create_directories(cell_dir);

      const double az = cell.az * M_PI / 180.0;
      const double el = cell.el * M_PI / 180.0;
      SyntheticSequence view = base;
      for (auto& f : view.frames) {
        f.params = transform_to_view(f.params, root, az, el, pivot);
        f.joints = forward_kinematics(f.params, view.skeleton);
        f.markers = marker_positions(f.params, view.skeleton);
      }

      FitConfig fit_cfg;
      fit_cfg.camera = cfg.camera;
      Fitter fitter(view.skeleton, fit_cfg, view.face);
      std::vector<double> errors;
      for (std::size_t i = 0; i < view.frames.size(); ++i) {
        const RenderedFrame rf =
            render_observation(view.frames[i], view, cfg.noise, cfg.fields,
                               cfg.seed + 1000003ull * (ci + 1), static_cast<int>(i), cfg.toes);
        TotalObservation obs{rf.body, rf.left_hand, rf.right_hand};
        const FitResult fit = fitter.fit_frame(obs);
        errors.push_back(mpjpe(forward_kinematics(fit.params, view.skeleton),
                               view.frames[i].joints, Alignment::Root, root));
      }
      cell_errors[ci] = errors;
      write_json(errors_path, {{"azimuth_deg", cell.az},
                               {"elevation_deg", cell.el},
                               {"errors_cm", errors}});
    });

    std::map<std::pair<double, double>, std::vector<double>> by_view;
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
      by_view[{cells[ci].az, cells[ci].el}] = cell_errors[ci];
    const SweepReport report = view_sweep_report(by_view, azimuths_deg, elevations_deg);
    write_text(fs::path(out_dir) / "grid.csv", sweep_report_csv(report));

    double total = 0.0;
    int count = 0;
    for (const auto& c : report.cells) {
      total += c.mean * c.count;
      count += c.count;
    }
    write_json(fs::path(out_dir) / "summary.json",
               {{"global_mean_mpjpe_cm", count > 0 ? total / count : 0.0},
                {"total_frames", count}});

    write_manifest(out_dir, "sweep", fnv1a64(cfg_json.dump().data(), cfg_json.dump().size()),
                   cfg.seed, {{"total", ms_since(start)}},
                   {"grid.csv", "summary.json"});
  });
}

}  // namespace pofcap
