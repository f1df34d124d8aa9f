/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "bootstrap.hpp"

#include <algorithm>
#include <cmath>

namespace tvo {

TrackSmoother::TrackSmoother(const geom::Vec2& z0, double t0,
                             double sigma_meas_px, double accel_psd)
    : t_(t0), r_(sigma_meas_px * sigma_meas_px), q_(accel_psd * accel_psd) {
  state_.head<2>() = z0;
  state_.tail<2>().setZero();
  cov_.setZero();
  cov_(0, 0) = r_;
  cov_(1, 1) = r_;
  // Velocity is unknown until a second observation arrives.
  cov_(2, 2) = 1e4;
  cov_(3, 3) = 1e4;
}

void TrackSmoother::update(const geom::Vec2& z, double t) {
  const double dt = std::max(0.0, t - t_);
  t_ = t;

  if (dt > 0.0) {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    Eigen::Matrix4d qm = Eigen::Matrix4d::Zero();
    qm(0, 0) = qm(1, 1) = q_ * dt3 / 3.0;
    qm(0, 2) = qm(2, 0) = qm(1, 3) = qm(3, 1) = q_ * dt2 / 2.0;
    qm(2, 2) = qm(3, 3) = q_ * dt;
    state_.head<2>() += dt * state_.tail<2>();
    cov_ = f * cov_ * f.transpose() + qm;
  }

  // H = [I2 0]
  const geom::Vec2 innovation = z - state_.head<2>();
  Eigen::Matrix2d s = cov_.topLeftCorner<2, 2>();
  s(0, 0) += r_;
  s(1, 1) += r_;
  const Eigen::Matrix<double, 4, 2> k = cov_.leftCols<2>() * s.inverse();
  state_ += k * innovation;
  cov_ -= (k * cov_.topRows<2>()).eval();
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

BootstrapPhase Bootstrap::accumulate(const TrackUpdate& msg) {
  if (phase_ == BootstrapPhase::kInitialized) return phase_;
  latest_t_ = msg.t;

  auto it = tracks_.find(msg.id);
  if (it != tracks_.end()) {
    it->second.smoother.update(msg.pixel(), msg.t);
    it->second.latest_t = msg.t;
    return phase_;
  }

  if (phase_ == BootstrapPhase::kCollecting &&
      static_cast<int>(reference_.size()) < cfg_.reference_size) {
    reference_[msg.id] = msg.pixel();
    TrackedFeature tf;
    tf.reference = msg.pixel();
    tf.reference_t = msg.t;
    tf.latest_t = msg.t;
    tf.smoother = TrackSmoother(msg.pixel(), msg.t,
                                noise_.effective_sigma_px(),
                                cfg_.smoother_accel_px_s2);
    tracks_[msg.id] = tf;
    if (static_cast<int>(reference_.size()) == cfg_.reference_size) {
      phase_ = BootstrapPhase::kReferenceFrozen;
      double sum_t = 0.0;
      for (const auto& [id, track] : tracks_) sum_t += track.reference_t;
      reference_t_ = sum_t / static_cast<double>(tracks_.size());
    }
  }
  // Updates for non-reference ids are ignored here; those features register
  // with the filter on their next update once it is live.
  return phase_;
}

void Bootstrap::handle_deletion(const TrackDeletion& msg) {
  if (phase_ == BootstrapPhase::kInitialized) return;
  for (FeatureId id : msg.ids) {
    reference_.erase(id);
    tracks_.erase(id);
  }
  if (phase_ == BootstrapPhase::kReferenceFrozen &&
      static_cast<int>(tracks_.size()) < cfg_.min_correspondences) {
    // Too much mortality: re-seed the reference from scratch.
    reference_.clear();
    tracks_.clear();
    phase_ = BootstrapPhase::kCollecting;
  }
}

std::map<FeatureId, geom::Vec2> Bootstrap::current_set() const {
  std::map<FeatureId, geom::Vec2> out;
  for (const auto& [id, track] : tracks_) out[id] = track.smoother.position();
  return out;
}

std::optional<InitEvent> Bootstrap::try_initialize(Eskf& filter) {
  if (phase_ != BootstrapPhase::kReferenceFrozen) return std::nullopt;
  if (static_cast<int>(tracks_.size()) < cfg_.min_correspondences) {
    diagnostic_ = "too few surviving correspondences";
    return std::nullopt;
  }

  std::vector<double> displacements;
  displacements.reserve(tracks_.size());
  for (const auto& [id, track] : tracks_)
    displacements.push_back(
        (track.smoother.position() - track.reference).norm());
  std::nth_element(displacements.begin(),
                   displacements.begin() + displacements.size() / 2,
                   displacements.end());
  if (displacements[displacements.size() / 2] < cfg_.min_displacement_px) {
    diagnostic_ = "parallax gate";
    return std::nullopt;
  }

  std::vector<geom::NormalizedPair> pairs;
  std::vector<FeatureId> ids;
  pairs.reserve(tracks_.size());
  for (const auto& [id, track] : tracks_) {
    pairs.emplace_back(intr_.normalized(track.reference),
                       intr_.normalized(track.smoother.position()));
    ids.push_back(id);
  }

  const auto hom = geom::estimate_homography(pairs);
  if (!hom.ok()) {
    diagnostic_ = "degenerate homography";
    return std::nullopt;
  }
  const auto motion = geom::decompose_homography(hom.h, pairs);
  if (!motion.ok()) {
    diagnostic_ = motion.status == geom::DecompositionStatus::kPureRotation
                      ? "pure rotation, translation unobservable"
                      : "no cheirality-consistent decomposition";
    return std::nullopt;
  }

  // Reference camera fixes the global frame; scale convention |t| = 1
  // between the sets. X_cur = R X_ref + t, so camera-to-global for the
  // current view is (R^T, -R^T t).
  const geom::Pose ref_pose;
  geom::Pose cur_pose;
  cur_pose.q = geom::canonicalized(geom::Quat(motion.rotation.transpose()));
  cur_pose.p = -(motion.rotation.transpose() * motion.translation);

  struct Seeded {
    FeatureId id;
    geom::Vec3 point;
    TriangulationJacobians jac;
  };
  std::vector<Seeded> seeded;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& track = tracks_.at(ids[i]);
    const geom::Vec2 cur_px = track.smoother.position();
    const auto tri = geom::triangulate_two_view(ref_pose, cur_pose,
                                                track.reference, cur_px,
                                                intr_, 1e-6);
    if (!tri.ok()) continue;
    const auto jac = triangulation_jacobians(ref_pose, cur_pose,
                                             track.reference, cur_px, intr_);
    if (!jac) continue;
    seeded.push_back({ids[i], tri.point, *jac});
  }
  if (static_cast<int>(seeded.size()) < cfg_.min_correspondences) {
    diagnostic_ = "triangulation survivors below minimum";
    return std::nullopt;
  }

  FilterState state;
  state.p = cur_pose.p;
  state.q = cur_pose.q;
  double mean_latest = 0.0;
  for (const auto& s : seeded) mean_latest += tracks_.at(s.id).latest_t;
  mean_latest /= static_cast<double>(seeded.size());
  const double dt = mean_latest - reference_t_;
  state.v = dt > 1e-6 ? geom::Vec3(cur_pose.p / dt) : geom::Vec3::Zero();
  for (const auto& s : seeded) {
    state.landmark_ids.push_back(s.id);
    state.landmark_positions.push_back(s.point);
  }

  // Seeded covariance from the generative model
  //   d_lm_i = G_cur_i d_cur + G_ref_i d_ref + G_z_i d_z_i
  // with the reference pose pinned at the same tight prior. The result is a
  // congruence of a block-diagonal covariance, hence PSD.
  const int n_lm = static_cast<int>(seeded.size());
  const int dim = kCameraDim + kLandmarkDim * n_lm;
  const double sp2 = cfg_.init_pose_sigma * cfg_.init_pose_sigma;
  const double sv2 = cfg_.init_velocity_sigma * cfg_.init_velocity_sigma;
  const double sz = noise_.effective_sigma_px();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  cov.topLeftCorner<6, 6>() = sp2 * Eigen::Matrix<double, 6, 6>::Identity();
  cov.block<3, 3>(kVelOffset, kVelOffset) = sv2 * geom::Mat3::Identity();
  for (int i = 0; i < n_lm; ++i) {
    const int ri = kCameraDim + kLandmarkDim * i;
    const auto& gi_cur = seeded[i].jac.d_pose_b;
    cov.block<3, 6>(ri, 0) = sp2 * gi_cur;
    cov.block<6, 3>(0, ri) = sp2 * gi_cur.transpose();
    for (int j = 0; j < n_lm; ++j) {
      const int rj = kCameraDim + kLandmarkDim * j;
      geom::Mat3 block = sp2 * gi_cur * seeded[j].jac.d_pose_b.transpose() +
                         sp2 * seeded[i].jac.d_pose_a *
                             seeded[j].jac.d_pose_a.transpose();
      if (i == j) {
        block += sz * sz *
                 (seeded[i].jac.d_z_a * seeded[i].jac.d_z_a.transpose() +
                  seeded[i].jac.d_z_b * seeded[i].jac.d_z_b.transpose());
      }
      cov.block<3, 3>(ri, rj) = block;
    }
  }
  cov = 0.5 * (cov + cov.transpose()).eval();

  if (filter.states().initialize(state, cov) != StateOpStatus::kOk) {
    diagnostic_ = "seed rejected by state manager";
    return std::nullopt;
  }
  filter.set_time(latest_t_);
  phase_ = BootstrapPhase::kInitialized;
  diagnostic_ = "";

  InitEvent event;
  event.t = latest_t_;
  event.pose = cur_pose;
  event.landmark_count = n_lm;
  return event;
}

}  // namespace tvo
