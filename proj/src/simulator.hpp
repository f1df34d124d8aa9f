/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "eskf.hpp"
#include "trajectory.hpp"

namespace tvo::sim {

enum class SceneKind { kPlane, kBox };

struct SimConfig {
  std::uint64_t seed = 1;
  int landmark_count = 300;

  // Scene: landmarks uniform over a region centered on the waypoint centroid
  // at plane_depth along +z. kPlane uses zero depth extent.
  SceneKind scene = SceneKind::kPlane;
  double plane_depth = 3.0;  // m
  geom::Vec3 extent = geom::Vec3(6.0, 3.5, 0.0);

  // Landmarks appear and disappear; lifetimes are normal-clamped.
  double lifetime_mean = 8.0;  // s
  double lifetime_std = 3.0;   // s

  // Catmull-Rom trajectory through the waypoints over the duration, with an
  // optional smooth pan about the camera y axis. The default is a closed
  // loop: the central landmarks stay in view for the whole run and anchor
  // the monocular scale.
  std::vector<geom::Vec3> waypoints = {{-1.2, 0.0, 0.0},
                                       {0.0, 0.5, 0.1},
                                       {1.2, 0.0, 0.0},
                                       {0.0, -0.5, -0.1},
                                       {-1.2, 0.0, 0.0}};
  double duration = 6.0;       // s
  double pan_amplitude_deg = 0.0;
  double pan_period = 10.0;    // s

  double tick_rate = 1000.0;       // internal projection clock, Hz
  double pixel_noise_sigma = 1.0;  // px
  double min_pixel_motion = 1.0;   // emission trigger, px
  geom::CameraIntrinsics intrinsics{200.0, 200.0, 120.0, 90.0, 240, 180};

  bool valid() const {
    return landmark_count > 0 && lifetime_mean > 0.0 && lifetime_std >= 0.0 &&
           waypoints.size() >= 2 && duration > 0.0 && tick_rate > 0.0 &&
           pixel_noise_sigma >= 0.0 && min_pixel_motion >= 0.0 &&
           pan_period > 0.0 && intrinsics.valid();
  }
};

struct LandmarkTruth {
  FeatureId id = 0;
  geom::Vec3 position = geom::Vec3::Zero();
  double birth = 0.0;
  double death = 0.0;
};

using TrackMessage = std::variant<TrackUpdate, TrackDeletion>;

inline double message_time(const TrackMessage& msg) {
  return std::visit([](const auto& m) { return m.t; }, msg);
}

struct SimOutput {
  std::vector<TrackMessage> messages;  // time-ordered
  Trajectory ground_truth;             // sampled at the tick rate
  std::vector<LandmarkTruth> landmarks;
};

// Ground-truth camera pose along the spline; exposed for tests.
geom::Pose pose_at(const SimConfig& config, double t);

// Deterministic under a fixed config (including seed). Per tick, live
// in-frustum landmarks whose projection moved at least min_pixel_motion
// since their last emitted update produce a TrackUpdate with Gaussian pixel
// noise, in seeded random order; exits and end-of-life produce deletions.
SimOutput generate(const SimConfig& config);

}  // namespace tvo::sim
