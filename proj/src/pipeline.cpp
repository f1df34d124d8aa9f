/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

namespace tvo {

namespace {

bool finite(const geom::Vec3& v) { return v.array().isFinite().all(); }

}  // namespace

Pipeline::Pipeline(const RunConfig& config)
    : config_(config),
      filter_(config.camera, config.noise),
      landmarks_(config.filter.parallax_threshold_deg * M_PI / 180.0),
      bootstrap_(config.bootstrap, config.camera, config.noise) {}

void Pipeline::push(const sim::TrackMessage& msg) {
  if (const auto* u = std::get_if<TrackUpdate>(&msg))
    push(*u);
  else
    push(std::get<TrackDeletion>(msg));
}

void Pipeline::push(const TrackUpdate& msg) {
  last_msg_t_ = msg.t;
  if (!initialized()) {
    bootstrap_.accumulate(msg);
    if (auto event = bootstrap_.try_initialize(filter_)) {
      init_event_ = *event;
      record_estimate(event->t);
    }
    return;
  }

  ++counters_.updates;
  filter_.propagate_to(msg.t);

  auto& sm = filter_.states();
  if (sm.has_landmark(msg.id)) {
    const auto outcome = filter_.update(msg);
    switch (outcome.status) {
      case UpdateStatus::kAccepted:
        ++counters_.accepted;
        record_estimate(msg.t);
        break;
      case UpdateStatus::kGated:
        ++counters_.gated;
        break;
      case UpdateStatus::kNonPositiveDepth:
        // Behind the camera: drop the landmark.
        ++counters_.depth_failures;
        sm.marginalize(msg.id);
        break;
      default:
        break;
    }
  } else if (landmarks_.has_pending(msg.id)) {
    const auto outcome = landmarks_.try_triangulate(filter_, msg);
    if (outcome == TriangulateOutcome::kInserted)
      ++counters_.triangulated;
    else if (outcome == TriangulateOutcome::kRejected)
      ++counters_.rejected;
  } else {
    if (sm.landmark_count() >= config_.filter.max_landmarks) {
      ++counters_.capped;
    } else if (landmarks_.register_feature(filter_, msg) ==
               StateOpStatus::kOk) {
      ++counters_.registered;
    }
  }
  check_health(msg.t);
}

void Pipeline::push(const TrackDeletion& msg) {
  last_msg_t_ = msg.t;
  if (!initialized()) {
    bootstrap_.handle_deletion(msg);
    return;
  }
  filter_.propagate_to(msg.t);
  for (FeatureId id : msg.ids) {
    auto& sm = filter_.states();
    if (sm.has_landmark(id)) {
      sm.marginalize(id);
      ++counters_.deleted_ids;
    } else if (landmarks_.has_pending(id) || sm.has_clone(id)) {
      landmarks_.remove(filter_, id);
      ++counters_.deleted_ids;
    } else {
      ++counters_.unknown_deletions;
    }
  }
  check_health(msg.t);
}

void Pipeline::finish() {
  if (low_since_ &&
      last_msg_t_ - *low_since_ >= config_.filter.failure_window) {
    failures_.push_back({*low_since_, last_msg_t_});
  }
  low_since_.reset();
}

void Pipeline::record_estimate(double t) {
  const auto& sm = filter_.states();
  const auto& x = sm.state();
  if (!finite(x.p) || !finite(x.v) ||
      !std::isfinite(x.q.norm())) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "non-finite state at t=%.6f", t);
    throw FilterDivergence(buf);
  }

  EstimateRecord rec;
  rec.t = t;
  rec.pose = x.pose();
  rec.v = x.v;
  rec.landmarks = sm.landmark_count();
  rec.clones = sm.clone_count();
  rec.trace_cam = sm.covariance().topLeftCorner<9, 9>().trace();
  rec.pose_cov = sm.covariance().topLeftCorner<6, 6>();
  estimates_.push_back(rec);
}

void Pipeline::check_health(double t) {
  const bool degraded =
      filter_.states().landmark_count() < config_.filter.min_landmarks;
  if (degraded) {
    if (!low_since_) low_since_ = t;
  } else if (low_since_) {
    if (t - *low_since_ >= config_.filter.failure_window)
      failures_.push_back({*low_since_, t});
    low_since_.reset();
  }
}

Trajectory Pipeline::estimate_trajectory() const {
  Trajectory out;
  for (const auto& rec : estimates_) {
    // Several accepted updates may share one stamp; keep the latest.
    if (!out.samples.empty() && rec.t <= out.samples.back().t) {
      out.samples.back() = {rec.t, rec.pose};
    } else {
      out.samples.push_back({rec.t, rec.pose});
    }
  }
  return out;
}

void simulate_to_files(const RunConfig& config, const std::string& out_dir) {
  validate(config);
  std::filesystem::create_directories(out_dir);
  const auto output = sim::generate(config.simulator);
  io::write_tracks(out_dir + "/tracks.txt", output.messages);
  io::write_trajectory(out_dir + "/gt_trajectory.txt", output.ground_truth);
  io::write_landmarks(out_dir + "/landmarks.txt", output.landmarks);
}

RunSummary run_to_files(const RunConfig& config, const std::string& tracks_path,
                        const std::string& out_dir) {
  validate(config);
  std::filesystem::create_directories(out_dir);
  const auto messages = io::read_tracks(tracks_path);

  Pipeline pipeline(config);
  double last_t = -std::numeric_limits<double>::infinity();
  for (const auto& msg : messages) {
    const double t = sim::message_time(msg);
    if (t < last_t)
      throw DataError(tracks_path + ": stream not time-ordered at t=" +
                      std::to_string(t));
    last_t = t;
    pipeline.push(msg);
  }
  pipeline.finish();

  io::write_trajectory(out_dir + "/est_trajectory.txt",
                       pipeline.estimate_trajectory());

  // Timeline: one line per accepted update, plus state dimensions.
  {
    std::FILE* f = std::fopen((out_dir + "/timeline.txt").c_str(), "w");
    if (!f) throw io::IoError("cannot open for writing: " + out_dir +
                              "/timeline.txt");
    for (const auto& rec : pipeline.estimates()) {
      std::fprintf(f, "%.6f %.9f %.9f %.9f %d %d %d %.9e\n", rec.t, rec.v.x(),
                   rec.v.y(), rec.v.z(), rec.landmarks, rec.clones,
                   kCameraDim + kLandmarkDim * rec.landmarks +
                       kCloneDim * rec.clones,
                   rec.trace_cam);
    }
    std::fclose(f);
  }

  {
    std::vector<double> times;
    std::vector<eval::Mat6> covs;
    times.reserve(pipeline.estimates().size());
    covs.reserve(pipeline.estimates().size());
    for (const auto& rec : pipeline.estimates()) {
      times.push_back(rec.t);
      covs.push_back(rec.pose_cov);
    }
    io::write_pose_covariances(out_dir + "/pose_cov.txt", times, covs);
  }

  {
    std::FILE* f = std::fopen((out_dir + "/events.txt").c_str(), "w");
    if (!f) throw io::IoError("cannot open for writing: " + out_dir +
                              "/events.txt");
    if (pipeline.init_event()) {
      const auto& e = *pipeline.init_event();
      std::fprintf(f, "INIT %.6f landmarks=%d\n", e.t, e.landmark_count);
    } else {
      std::fprintf(f, "WARN no-initialization\n");
    }
    for (const auto& w : pipeline.failure_windows())
      std::fprintf(f, "TRACKING_FAILURE %.6f %.6f\n", w.start, w.end);
    const auto& c = pipeline.counters();
    std::fprintf(f,
                 "STATS updates=%" PRIu64 " accepted=%" PRIu64
                 " gated=%" PRIu64 " depth_failures=%" PRIu64
                 " registered=%" PRIu64 " triangulated=%" PRIu64
                 " rejected=%" PRIu64 " capped=%" PRIu64 " deleted=%" PRIu64
                 " unknown_deletions=%" PRIu64 "\n",
                 c.updates, c.accepted, c.gated, c.depth_failures,
                 c.registered, c.triangulated, c.rejected, c.capped,
                 c.deleted_ids, c.unknown_deletions);
    std::fclose(f);
  }

  RunSummary summary;
  summary.estimate_count = static_cast<int>(pipeline.estimates().size());
  summary.init_event = pipeline.init_event();
  summary.counters = pipeline.counters();
  summary.failure_windows = pipeline.failure_windows();
  return summary;
}

io::MetricsReport evaluate_to_files(const std::string& est_path,
                                    const std::string& ref_path,
                                    const std::string& cov_path,
                                    double max_dt,
                                    const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const Trajectory est = io::read_trajectory(est_path);
  const Trajectory ref = io::read_trajectory(ref_path);
  if (est.empty() || ref.empty())
    throw DataError("empty trajectory: " + (est.empty() ? est_path : ref_path));

  const auto ape = eval::ape_sim3(est, ref, max_dt);
  if (ape.status == eval::EvalStatus::kNoOverlap) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "no overlap within max_dt=%.3f: est [%.6f, %.6f] vs ref "
                  "[%.6f, %.6f]",
                  max_dt, est.samples.front().t, est.samples.back().t,
                  ref.samples.front().t, ref.samples.back().t);
    throw DataError(buf);
  }
  if (!ape.ok()) throw DataError("degenerate trajectory alignment");

  io::MetricsReport report;
  report.ape = ape.report;
  report.init_time = est.samples.front().t;
  report.est_samples = static_cast<int>(est.size());
  report.ref_samples = static_cast<int>(ref.size());

  if (!cov_path.empty()) {
    std::vector<double> times;
    std::vector<eval::Mat6> covs;
    io::read_pose_covariances(cov_path, &times, &covs);
    // Covariances are recorded per accepted update; the trajectory collapses
    // duplicate stamps keeping the latest, so the last record at each
    // surviving stamp wins.
    std::vector<eval::Mat6> matched(est.size());
    std::vector<bool> found(est.size(), false);
    size_t k = 0;
    for (size_t i = 0; i < times.size(); ++i) {
      while (k < est.size() && est.samples[k].t < times[i]) ++k;
      if (k < est.size() && times[i] == est.samples[k].t) {
        matched[k] = covs[i];
        found[k] = true;
      }
    }
    if (std::all_of(found.begin(), found.end(), [](bool b) { return b; })) {
      report.nees = eval::nees(est, matched, ref, max_dt);
      report.has_nees = report.nees.ok();
    }
  }

  io::write_metrics(out_dir + "/metrics.json", report);
  io::write_residuals(out_dir + "/residuals.txt", report.ape.residual_times,
                      report.ape.residuals);
  return report;
}

}  // namespace tvo
