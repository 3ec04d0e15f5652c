// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace pofcap {

// Exit codes shared by the CLI and the library entry points.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitMismatch = 4;

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int jobs = 1;
  std::string provider = "oracle";  // track: oracle | identity | file
  std::string provider_file;
  std::vector<std::string> protocols{"mpjpe"};  // eval: mpjpe, pck, clusters, all
  double pck_min_mm = 20.0, pck_max_mm = 50.0;
  int pck_thresholds = 31;
  int cluster_k = 14;
};

// Each command writes its outputs plus a manifest.json (config hash, seed,
// versions, timings, output paths) into out_dir and returns an exit code.
// Errors are reported on stderr.
int run_synth(const std::string& config_path, const std::string& out_dir,
              const RunOptions& opt = {});
int run_fit(const std::string& sequence_dir, const std::string& fit_config_path,
            const std::string& out_dir, const RunOptions& opt = {});
int run_track(const std::string& sequence_dir, const std::string& fit_dir,
              const std::string& out_dir, const RunOptions& opt = {});
int run_eval(const std::string& pred_dir, const std::string& gt_dir,
             const std::string& out_dir, const RunOptions& opt = {});
int run_sweep(const std::string& config_path, const std::vector<double>& azimuths_deg,
              const std::vector<double>& elevations_deg, const std::string& out_dir,
              const RunOptions& opt = {});

// Resolves --jobs: explicit flag, else POFCAP_JOBS, else 1.
int resolve_jobs(std::optional<int> flag_value);

}  // namespace pofcap
