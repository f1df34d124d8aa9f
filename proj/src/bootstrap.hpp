/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <map>
#include <optional>
#include <string>

#include "eskf.hpp"
#include "landmarks.hpp"

namespace tvo {

struct BootstrapConfig {
  int reference_size = 20;  // N distinct features freeze the reference
  double min_displacement_px = 25.0;  // median smoothed displacement gate
  int min_correspondences = 8;
  double smoother_accel_px_s2 = 50.0;  // process noise of the track smoother
  double init_pose_sigma = 1e-6;       // seeded pose prior (m, rad)
  double init_velocity_sigma = 0.1;    // seeded velocity prior (m/s)
};

// Per-feature constant-velocity Kalman filter over pixel position, applied
// to raw track updates to stabilize the sets used for initialization.
class TrackSmoother {
 public:
  TrackSmoother() = default;
  TrackSmoother(const geom::Vec2& z0, double t0, double sigma_meas_px,
                double accel_psd);

  void update(const geom::Vec2& z, double t);

  geom::Vec2 position() const { return state_.head<2>(); }
  geom::Vec2 velocity() const { return state_.tail<2>(); }
  const Eigen::Matrix4d& covariance() const { return cov_; }
  double time() const { return t_; }

 private:
  Eigen::Vector4d state_ = Eigen::Vector4d::Zero();  // px, py, vx, vy
  Eigen::Matrix4d cov_ = Eigen::Matrix4d::Identity();
  double t_ = 0.0;
  double r_ = 1.0;  // measurement variance, px^2
  double q_ = 1.0;  // acceleration PSD, px^2/s^3
};

enum class BootstrapPhase { kCollecting, kReferenceFrozen, kInitialized };

struct InitEvent {
  double t = 0.0;
  geom::Pose pose;
  int landmark_count = 0;
};

// Homography-based filter initialization from scratch: groups asynchronous
// updates into a reference and a current set, smooths per-feature tracks,
// and once parallax suffices estimates relative motion and seeds the map.
// Consumes messages only while the filter is uninitialized.
class Bootstrap {
 public:
  Bootstrap(const BootstrapConfig& cfg, const geom::CameraIntrinsics& intr,
            const NoiseConfig& noise)
      : cfg_(cfg), intr_(intr), noise_(noise) {}

  BootstrapPhase phase() const { return phase_; }

  BootstrapPhase accumulate(const TrackUpdate& msg);
  void handle_deletion(const TrackDeletion& msg);

  // Attempts homography initialization over the surviving correspondences;
  // on success seeds the filter and reports the event.
  std::optional<InitEvent> try_initialize(Eskf& filter);

  int reference_count() const { return static_cast<int>(reference_.size()); }

  // Why the last try_initialize returned NotReady.
  const std::string& diagnostic() const { return diagnostic_; }

  // Exposed for tests.
  const std::map<FeatureId, geom::Vec2>& reference_set() const {
    return reference_;
  }
  std::map<FeatureId, geom::Vec2> current_set() const;

 private:
  struct TrackedFeature {
    geom::Vec2 reference = geom::Vec2::Zero();  // first observation
    double reference_t = 0.0;
    TrackSmoother smoother;
    double latest_t = 0.0;
  };

  BootstrapConfig cfg_;
  geom::CameraIntrinsics intr_;
  NoiseConfig noise_;
  BootstrapPhase phase_ = BootstrapPhase::kCollecting;
  std::map<FeatureId, geom::Vec2> reference_;   // frozen first observations
  std::map<FeatureId, TrackedFeature> tracks_;  // reference members only
  double reference_t_ = 0.0;                    // mean first-obs timestamp
  double latest_t_ = 0.0;
  std::string diagnostic_;
};

}  // namespace tvo
