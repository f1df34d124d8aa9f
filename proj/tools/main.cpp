/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "trackvo.h"

namespace {

// Exit codes: 0 success, 1 usage/config, 2 data error, 3 filter divergence.
int exit_code_for(tvo_status status) {
  switch (status) {
    case TVO_OK:
      return 0;
    case TVO_ERROR_INVALID_ARGUMENT:
    case TVO_ERROR_CONFIG:
      return 1;
    case TVO_ERROR_IO:
    case TVO_ERROR_PARSE:
    case TVO_ERROR_DATA:
      return 2;
    case TVO_ERROR_DIVERGED:
      return 3;
    default:
      return 2;
  }
}

int report(tvo_status status) {
  if (status != TVO_OK)
    std::fprintf(stderr, "error: %s: %s\n", tvo_status_name(status),
                 tvo_last_error());
  return exit_code_for(status);
}

using ConfigPtr = std::unique_ptr<tvo_config, decltype(&tvo_config_free)>;

ConfigPtr make_config(const std::string& config_path, bool has_seed,
                      uint64_t seed, tvo_status* status) {
  ConfigPtr cfg(nullptr, &tvo_config_free);
  if (config_path.empty()) {
    cfg.reset(tvo_config_default());
    *status = TVO_OK;
  } else {
    tvo_config* raw = nullptr;
    *status = tvo_config_load(config_path.c_str(), &raw);
    cfg.reset(raw);
  }
  if (*status == TVO_OK && has_seed)
    *status = tvo_config_set_seed(cfg.get(), seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trackvo: asynchronous monocular visual odometry"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 0;
  bool has_seed = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--out", out_dir, "output directory")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "seed override")
        ->each([&](const std::string&) { has_seed = true; });
  };

  auto* simulate = app.add_subcommand(
      "simulate", "generate a synthetic track stream with ground truth");
  add_common(simulate);

  std::string tracks_path;
  auto* run = app.add_subcommand(
      "run", "run the filter over a track stream and write the estimate");
  add_common(run);
  run->add_option("tracks", tracks_path, "track stream file")->required();

  std::string est_path, ref_path, cov_path;
  double max_dt = 0.01;
  auto* eval = app.add_subcommand(
      "eval", "align an estimated trajectory to a reference and report APE");
  add_common(eval);
  eval->add_option("estimate", est_path, "estimated trajectory")->required();
  eval->add_option("reference", ref_path, "reference trajectory")->required();
  eval->add_option("--cov", cov_path,
                   "pose covariance file from 'run' (adds NEES)");
  eval->add_option("--max-dt", max_dt, "association window, seconds")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  tvo_status status = TVO_OK;

  if (simulate->parsed()) {
    const auto cfg = make_config(config_path, has_seed, seed, &status);
    if (status != TVO_OK) return report(status);
    status = tvo_simulate(cfg.get(), out_dir.c_str());
    if (status == TVO_OK)
      std::printf("simulate: wrote tracks.txt, gt_trajectory.txt, "
                  "landmarks.txt to %s\n",
                  out_dir.c_str());
    return report(status);
  }

  if (run->parsed()) {
    const auto cfg = make_config(config_path, has_seed, seed, &status);
    if (status != TVO_OK) return report(status);
    status = tvo_run(cfg.get(), tracks_path.c_str(), out_dir.c_str());
    if (status == TVO_OK)
      std::printf("run: wrote est_trajectory.txt, events.txt, timeline.txt, "
                  "pose_cov.txt to %s\n",
                  out_dir.c_str());
    return report(status);
  }

  status = tvo_evaluate(est_path.c_str(), ref_path.c_str(),
                        cov_path.empty() ? nullptr : cov_path.c_str(), max_dt,
                        out_dir.c_str());
  if (status == TVO_OK)
    std::printf("eval: wrote metrics.json, residuals.txt to %s\n",
                out_dir.c_str());
  return report(status);
}
