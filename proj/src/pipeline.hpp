/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bootstrap.hpp"
#include "config.hpp"
#include "evaluation.hpp"
#include "io.hpp"

namespace tvo {

struct FilterDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pose estimate record emitted after every accepted update.
struct EstimateRecord {
  double t = 0.0;
  geom::Pose pose;
  geom::Vec3 v = geom::Vec3::Zero();
  int landmarks = 0;
  int clones = 0;
  double trace_cam = 0.0;  // trace of the 9x9 camera block
  eval::Mat6 pose_cov = eval::Mat6::Zero();
};

struct FailureWindow {
  double start = 0.0;
  double end = 0.0;
};

// Routes the time-ordered message stream: bootstrap until initialized, then
// per-message propagation plus correction / registration / triangulation.
class Pipeline {
 public:
  explicit Pipeline(const RunConfig& config);

  // Throws FilterDivergence when the state goes non-finite.
  void push(const TrackUpdate& msg);
  void push(const TrackDeletion& msg);
  void push(const sim::TrackMessage& msg);
  void finish();  // closes an open failure window

  bool initialized() const {
    return bootstrap_.phase() == BootstrapPhase::kInitialized;
  }
  const Eskf& filter() const { return filter_; }
  Eskf& filter() { return filter_; }

  const std::vector<EstimateRecord>& estimates() const { return estimates_; }
  const std::optional<InitEvent>& init_event() const { return init_event_; }
  const std::vector<FailureWindow>& failure_windows() const {
    return failures_;
  }

  Trajectory estimate_trajectory() const;

  struct Counters {
    std::uint64_t updates = 0;
    std::uint64_t accepted = 0;
    std::uint64_t gated = 0;
    std::uint64_t depth_failures = 0;
    std::uint64_t registered = 0;
    std::uint64_t triangulated = 0;
    std::uint64_t rejected = 0;
    std::uint64_t capped = 0;
    std::uint64_t deleted_ids = 0;
    std::uint64_t unknown_deletions = 0;
  };
  const Counters& counters() const { return counters_; }

 private:
  void record_estimate(double t);
  void check_health(double t);

  RunConfig config_;
  Eskf filter_;
  LandmarkPipeline landmarks_;
  Bootstrap bootstrap_;
  Counters counters_;
  std::vector<EstimateRecord> estimates_;
  std::optional<InitEvent> init_event_;
  std::vector<FailureWindow> failures_;
  std::optional<double> low_since_;
  double last_msg_t_ = 0.0;
};

// File-level entry points shared by the C API and the CLI.

// Writes tracks.txt, gt_trajectory.txt, landmarks.txt.
void simulate_to_files(const RunConfig& config, const std::string& out_dir);

struct RunSummary {
  int estimate_count = 0;
  std::optional<InitEvent> init_event;
  Pipeline::Counters counters;
  std::vector<FailureWindow> failure_windows;
};
// Streams the track file through the pipeline; writes est_trajectory.txt,
// events.txt, timeline.txt, pose_cov.txt.
RunSummary run_to_files(const RunConfig& config, const std::string& tracks_path,
                        const std::string& out_dir);

// Writes metrics.json and residuals.txt; NEES is included when a pose
// covariance file is supplied.
io::MetricsReport evaluate_to_files(const std::string& est_path,
                                    const std::string& ref_path,
                                    const std::string& cov_path,
                                    double max_dt, const std::string& out_dir);

}  // namespace tvo
