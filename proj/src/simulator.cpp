/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tvo::sim {

namespace {

geom::Vec3 catmull_rom(const std::vector<geom::Vec3>& pts, double u) {
  // Uniform Catmull-Rom with reflected phantom endpoints; u in [0, n-1].
  const int n = static_cast<int>(pts.size());
  const int seg = std::clamp(static_cast<int>(std::floor(u)), 0, n - 2);
  const double s = u - seg;

  auto at = [&](int i) -> geom::Vec3 {
    if (i < 0) return 2.0 * pts[0] - pts[1];
    if (i >= n) return 2.0 * pts[n - 1] - pts[n - 2];
    return pts[i];
  };
  const geom::Vec3 p0 = at(seg - 1);
  const geom::Vec3 p1 = at(seg);
  const geom::Vec3 p2 = at(seg + 1);
  const geom::Vec3 p3 = at(seg + 2);

  const double s2 = s * s;
  const double s3 = s2 * s;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * s +
                (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * s2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * s3);
}

}  // namespace

geom::Pose pose_at(const SimConfig& config, double t) {
  const int segments = static_cast<int>(config.waypoints.size()) - 1;
  const double u =
      std::clamp(t / config.duration, 0.0, 1.0) * static_cast<double>(segments);
  geom::Pose pose;
  pose.p = catmull_rom(config.waypoints, u);
  if (config.pan_amplitude_deg != 0.0) {
    const double amp = config.pan_amplitude_deg * M_PI / 180.0;
    const double angle = amp * std::sin(2.0 * M_PI * t / config.pan_period);
    pose.q = geom::exp_so3(geom::Vec3(0.0, angle, 0.0));
  }
  return pose;
}

SimOutput generate(const SimConfig& config) {
  if (!config.valid()) throw std::invalid_argument("invalid simulator config");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  geom::Vec3 center = geom::Vec3::Zero();
  for (const auto& w : config.waypoints) center += w;
  center /= static_cast<double>(config.waypoints.size());
  center.z() += config.plane_depth;

  SimOutput out;
  out.landmarks.reserve(config.landmark_count);
  for (int i = 0; i < config.landmark_count; ++i) {
    LandmarkTruth lm;
    lm.id = i + 1;
    const geom::Vec3 extent =
        config.scene == SceneKind::kPlane
            ? geom::Vec3(config.extent.x(), config.extent.y(), 0.0)
            : config.extent;
    lm.position = center + geom::Vec3((unit(rng) - 0.5) * extent.x(),
                                      (unit(rng) - 0.5) * extent.y(),
                                      (unit(rng) - 0.5) * extent.z());
    // Births spread over [-mean, duration-1] and clamped keep the standing
    // population roughly steady while guaranteeing features alive at t = 0.
    const double birth = std::max(
        0.0, -config.lifetime_mean +
                 unit(rng) * (config.duration - 1.0 + config.lifetime_mean));
    const double lifetime =
        std::max(0.5, config.lifetime_mean + config.lifetime_std * gauss(rng));
    lm.birth = birth;
    lm.death = birth + lifetime;
    out.landmarks.push_back(lm);
  }

  struct Emitted {
    bool ever = false;
    bool dead = false;
    geom::Vec2 last_px = geom::Vec2::Zero();
  };
  std::vector<Emitted> status(out.landmarks.size());

  const auto ticks =
      static_cast<std::int64_t>(std::floor(config.duration * config.tick_rate));
  std::vector<size_t> emit;
  for (std::int64_t k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) / config.tick_rate;
    const geom::Pose pose = pose_at(config, t);
    out.ground_truth.samples.push_back({t, pose});

    TrackDeletion deletions;
    deletions.t = t;
    emit.clear();

    for (size_t i = 0; i < out.landmarks.size(); ++i) {
      const auto& lm = out.landmarks[i];
      auto& st = status[i];
      if (st.dead || t < lm.birth) continue;

      const auto px = geom::project(config.intrinsics, pose, lm.position);
      const bool visible = px && config.intrinsics.contains(*px);
      if (t >= lm.death || !visible) {
        if (st.ever) deletions.ids.push_back(lm.id);
        st.dead = true;
        continue;
      }
      if (!st.ever ||
          (*px - st.last_px).cwiseAbs().maxCoeff() >=
              config.min_pixel_motion) {
        emit.push_back(i);
      }
    }

    if (!deletions.ids.empty()) out.messages.emplace_back(deletions);

    // Mirrors the frontend: active landmarks project sequentially in random
    // order.
    std::shuffle(emit.begin(), emit.end(), rng);
    for (size_t i : emit) {
      const auto& lm = out.landmarks[i];
      const auto px = geom::project(config.intrinsics, pose, lm.position);
      geom::Vec2 noisy = *px;
      if (config.pixel_noise_sigma > 0.0) {
        noisy.x() += config.pixel_noise_sigma * gauss(rng);
        noisy.y() += config.pixel_noise_sigma * gauss(rng);
      }
      if (!config.intrinsics.contains(noisy)) continue;

      TrackUpdate update;
      update.t = t;
      update.id = lm.id;
      update.u = noisy.x();
      update.v = noisy.y();
      out.messages.emplace_back(update);
      status[i].ever = true;
      status[i].last_px = *px;
    }
  }

  // Trim death times the stream never reached so the truth table matches
  // what was emitted.
  for (auto& lm : out.landmarks)
    lm.death = std::min(lm.death, config.duration + 1.0 / config.tick_rate);
  return out;
}

}  // namespace tvo::sim
