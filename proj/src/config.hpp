/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <stdexcept>
#include <string>

#include "bootstrap.hpp"
#include "simulator.hpp"

namespace tvo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FilterParams {
  // Triangulation gate (ray angle). At sigma_px = 1 and f = 200 the depth
  // error of a fresh landmark is ~sigma_px*sqrt(2)/(f*tan(threshold)); 6
  // degrees keeps it under ~7%, where the map stops scale-drifting.
  double parallax_threshold_deg = 6.0;
  int max_landmarks = 80;       // new features ignored at the cap
  int min_landmarks = 4;        // below this tracking is degraded
  double failure_window = 1.0;  // s of degradation before logging
};

// Whole-pipeline configuration; JSON on disk, unknown keys rejected,
// defaults mirror the reference operating point (sigma_a = sigma_w = 2.0,
// sigma_px = 1.0).
struct RunConfig {
  std::uint64_t seed = 1;
  geom::CameraIntrinsics camera{200.0, 200.0, 120.0, 90.0, 240, 180};
  NoiseConfig noise;
  FilterParams filter;
  BootstrapConfig bootstrap;
  sim::SimConfig simulator;

  // Keeps the duplicated fields (intrinsics, seed) coherent.
  void sync_derived() {
    simulator.intrinsics = camera;
    simulator.seed = seed;
  }
};

RunConfig default_config();

// Throws ConfigError naming the offending field.
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);
void validate(const RunConfig& config);

}  // namespace tvo
