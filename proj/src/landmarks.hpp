/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <map>
#include <optional>

#include "eskf.hpp"

namespace tvo {

// Feature seen but not yet triangulated; its first-sight camera pose lives in
// the clone registry under the same id.
struct PendingFeature {
  FeatureId id = 0;
  geom::Vec2 first_obs = geom::Vec2::Zero();
  geom::Vec2 latest_obs = geom::Vec2::Zero();
  double latest_t = 0.0;
  int obs_count = 0;
};

// Angle between the bearing rays of the first and latest observation,
// expressed in the global frame. Rotation-only motion yields ~0 regardless
// of pixel displacement.
double parallax_of(const geom::Pose& clone_pose, const geom::Vec2& first_obs,
                   const geom::Pose& current_pose,
                   const geom::Vec2& latest_obs,
                   const geom::CameraIntrinsics& intr);

// Central-difference Jacobians of the two-view triangulation. Steps follow
// the module defaults: 1e-6 on pose entries (m, rad), 1e-4 px on pixels.
struct TriangulationJacobians {
  Eigen::Matrix<double, 3, 6> d_pose_a;  // first (clone) pose error
  Eigen::Matrix<double, 3, 6> d_pose_b;  // current pose error
  Eigen::Matrix<double, 3, 2> d_z_a;
  Eigen::Matrix<double, 3, 2> d_z_b;
};
std::optional<TriangulationJacobians> triangulation_jacobians(
    const geom::Pose& pose_a, const geom::Pose& pose_b, const geom::Vec2& z_a,
    const geom::Vec2& z_b, const geom::CameraIntrinsics& intr,
    double step_state = 1e-6, double step_px = 1e-4);

enum class TriangulateOutcome { kInserted, kStillPending, kRejected };

// Tracks features between first observation and map insertion. Operates
// inside the filter's sequential message loop.
class LandmarkPipeline {
 public:
  explicit LandmarkPipeline(double parallax_threshold_rad)
      : parallax_threshold_(parallax_threshold_rad) {}

  bool has_pending(FeatureId id) const { return pending_.count(id) > 0; }
  const PendingFeature* pending(FeatureId id) const {
    auto it = pending_.find(id);
    return it == pending_.end() ? nullptr : &it->second;
  }
  int pending_count() const { return static_cast<int>(pending_.size()); }

  // First observation: clone the camera pose and start a pending entry.
  StateOpStatus register_feature(Eskf& filter, const TrackUpdate& msg);

  // Subsequent observation of a pending feature: triangulate and insert once
  // parallax crosses the threshold, otherwise refresh the latest
  // observation. Cheirality failures drop the feature.
  TriangulateOutcome try_triangulate(Eskf& filter, const TrackUpdate& msg);

  // Deletion bookkeeping: drops the pending entry and its clone.
  bool remove(Eskf& filter, FeatureId id);

 private:
  double parallax_threshold_;
  std::map<FeatureId, PendingFeature> pending_;
};

}  // namespace tvo
