// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: synth -> fit -> track -> eval pipelines plus the
// camera view sweep.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pofcap/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pofcap: monocular articulated pose fitting on part orientation fields"};
  app.require_subcommand(1);

  std::string config, out, seq_dir, fit_dir, pred_dir, gt_dir, provider = "oracle";
  std::string provider_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::vector<std::string> protocols{"mpjpe"};
  std::vector<double> azimuths, elevations;
  double pck_min = 20.0, pck_max = 50.0;
  int pck_thresholds = 31, cluster_k = 14;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--jobs", jobs, "worker threads (fallback: POFCAP_JOBS, then 1)");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic sequence directory");
  synth->add_option("--config", config, "scene config JSON")->required();
  synth->add_option("--out", out, "output directory")->required();
  add_common(synth);

  auto* fit = app.add_subcommand("fit", "fit model parameters to each frame");
  fit->add_option("sequence", seq_dir, "sequence directory from synth")->required();
  fit->add_option("--config", config, "fit config JSON (defaults when omitted)");
  fit->add_option("--out", out, "output directory")->required();
  add_common(fit);

  auto* track = app.add_subcommand("track", "temporal refinement of per-frame fits");
  track->add_option("sequence", seq_dir, "sequence directory from synth")->required();
  track->add_option("fits", fit_dir, "fit output directory")->required();
  track->add_option("--provider", provider, "flow provider: oracle | identity | file");
  track->add_option("--provider-file", provider_file, "POFT flow targets for provider=file");
  track->add_option("--out", out, "output directory")->required();
  add_common(track);

  auto* eval = app.add_subcommand("eval", "evaluation protocols against ground truth");
  eval->add_option("pred", pred_dir, "fit or track output directory")->required();
  eval->add_option("gt", gt_dir, "sequence directory with ground truth")->required();
  eval->add_option("--protocol", protocols,
                   "protocols: mpjpe, rescale, depth, pck, clusters, all");
  eval->add_option("--pck-min", pck_min, "PCK range lower bound, mm");
  eval->add_option("--pck-max", pck_max, "PCK range upper bound, mm");
  eval->add_option("--pck-thresholds", pck_thresholds, "PCK grid size");
  eval->add_option("--k", cluster_k, "pose cluster count");
  eval->add_option("--out", out, "output directory")->required();
  add_common(eval);

  auto* sweep = app.add_subcommand("sweep", "synth+fit per camera viewpoint, grid report");
  sweep->add_option("--config", config, "scene config JSON")->required();
  sweep->add_option("--azimuths", azimuths, "azimuth list, degrees")->required();
  sweep->add_option("--elevations", elevations, "elevation list, degrees")->required();
  sweep->add_option("--out", out, "output directory")->required();
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return pofcap::kExitConfig;
  }

  pofcap::RunOptions opt;
  opt.seed = seed;
  opt.jobs = pofcap::resolve_jobs(jobs);
  opt.provider = provider;
  opt.provider_file = provider_file;
  opt.protocols = protocols;
  opt.pck_min_mm = pck_min;
  opt.pck_max_mm = pck_max;
  opt.pck_thresholds = pck_thresholds;
  opt.cluster_k = cluster_k;

  if (synth->parsed()) return pofcap::run_synth(config, out, opt);
  if (fit->parsed()) return pofcap::run_fit(seq_dir, config, out, opt);
  if (track->parsed()) return pofcap::run_track(seq_dir, fit_dir, out, opt);
  if (eval->parsed()) return pofcap::run_eval(pred_dir, gt_dir, out, opt);
  if (sweep->parsed()) return pofcap::run_sweep(config, azimuths, elevations, out, opt);
  return pofcap::kExitConfig;
}
