/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <algorithm>
#include <vector>

#include "state.hpp"

namespace tvo {

// One asynchronous feature observation from the tracking frontend.
struct TrackUpdate {
  double t = 0.0;  // seconds, microsecond resolution
  FeatureId id = 0;
  double u = 0.0;  // undistorted pixels
  double v = 0.0;

  geom::Vec2 pixel() const { return {u, v}; }
};

struct TrackDeletion {
  double t = 0.0;
  std::vector<FeatureId> ids;
};

// Floor applied to sigma_px wherever it enters a covariance, so declared
// noise-free streams keep R invertible.
inline constexpr double kSigmaPxFloor = 1e-3;

struct NoiseConfig {
  double sigma_a = 2.0;          // velocity random walk, m/s per sqrt(s)
  double sigma_w = 2.0;          // orientation random walk, rad per sqrt(s)
  double sigma_px = 1.0;         // per-axis pixel measurement noise
  double gate_threshold = 9.21;  // chi-square, 2 DoF, 99%
  bool gating_enabled = true;

  double effective_sigma_px() const {
    return std::max(sigma_px, kSigmaPxFloor);
  }
};

enum class UpdateStatus {
  kAccepted,
  kGated,
  kNonPositiveDepth,
  kSingularInnovation,
  kUnknownLandmark,
};

struct UpdateOutcome {
  UpdateStatus status = UpdateStatus::kUnknownLandmark;
  geom::Vec2 innovation = geom::Vec2::Zero();
  geom::Mat2 innovation_cov = geom::Mat2::Zero();
  double mahalanobis2 = 0.0;

  bool accepted() const { return status == UpdateStatus::kAccepted; }
};

// Error-State Kalman Filter over the camera + landmark state. Constant
// velocity, constant orientation kinematics; one pixel measurement per
// correction. Sequential consumer: callers deliver messages time-sorted.
class Eskf {
 public:
  Eskf(const geom::CameraIntrinsics& intr, const NoiseConfig& noise)
      : intr_(intr), noise_(noise) {}

  StateManager& states() { return sm_; }
  const StateManager& states() const { return sm_; }
  const geom::CameraIntrinsics& intrinsics() const { return intr_; }
  const NoiseConfig& noise() const { return noise_; }

  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  // Lazy propagation to the message stamp; dt = 0 is legal and skips.
  // Returns false for a backwards stamp.
  bool propagate_to(double t);

  // p <- p + v dt; P <- F P F^T + Q with the position-velocity coupling
  // block dt*I and random-walk noise on velocity and orientation.
  void propagate(double dt);

  // Innovation, gate, Kalman correction and error reset for a mapped
  // landmark observation.
  UpdateOutcome update(const TrackUpdate& msg);

  // P <- G P G^T with the orientation block I - skew(dtheta/2). Called once
  // per accepted update with the correction just folded into the nominal
  // state; exposed for the dense-oracle tests.
  void reset(const Eigen::VectorXd& applied_delta);

  struct DeletionStats {
    int landmarks_removed = 0;
    int clones_removed = 0;
    int unknown_ids = 0;
  };
  // Marginalizes every listed id that is currently mapped or cloned;
  // unknown ids are counted and ignored.
  DeletionStats handle_deletion(const TrackDeletion& msg);

 private:
  geom::CameraIntrinsics intr_;
  NoiseConfig noise_;
  StateManager sm_;
  double time_ = 0.0;
  // Update-loop workspaces, sized to the current state dimension.
  Eigen::Matrix<double, Eigen::Dynamic, 2> pht_;
  Eigen::VectorXd delta_;
  Eigen::Matrix<double, 3, Eigen::Dynamic> rot_rows_;
};

}  // namespace tvo
