/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "landmarks.hpp"

namespace tvo {

double parallax_of(const geom::Pose& clone_pose, const geom::Vec2& first_obs,
                   const geom::Pose& current_pose,
                   const geom::Vec2& latest_obs,
                   const geom::CameraIntrinsics& intr) {
  const geom::Vec3 r1 = geom::bearing_ray(intr, clone_pose, first_obs);
  const geom::Vec3 r2 = geom::bearing_ray(intr, current_pose, latest_obs);
  return std::atan2(r1.cross(r2).norm(), r1.dot(r2));
}

namespace {

geom::Pose perturbed(const geom::Pose& pose, int coord, double step) {
  geom::Pose out = pose;
  if (coord < 3) {
    out.p(coord) += step;
  } else {
    geom::Vec3 dtheta = geom::Vec3::Zero();
    dtheta(coord - 3) = step;
    out.q = geom::canonicalized(geom::exp_so3(dtheta) * pose.q);
  }
  return out;
}

}  // namespace

std::optional<TriangulationJacobians> triangulation_jacobians(
    const geom::Pose& pose_a, const geom::Pose& pose_b, const geom::Vec2& z_a,
    const geom::Vec2& z_b, const geom::CameraIntrinsics& intr,
    double step_state, double step_px) {
  TriangulationJacobians jac;
  // The steps stay well inside the triangulation's validity region, so a
  // failed evaluation means the geometry is marginal; give up.
  auto eval = [&](const geom::Pose& pa, const geom::Pose& pb,
                  const geom::Vec2& za,
                  const geom::Vec2& zb) -> std::optional<geom::Vec3> {
    const auto res = geom::triangulate_two_view(pa, pb, za, zb, intr, 0.0);
    if (!res.ok()) return std::nullopt;
    return res.point;
  };

  for (int c = 0; c < 6; ++c) {
    const auto plus = eval(perturbed(pose_a, c, step_state), pose_b, z_a, z_b);
    const auto minus =
        eval(perturbed(pose_a, c, -step_state), pose_b, z_a, z_b);
    if (!plus || !minus) return std::nullopt;
    jac.d_pose_a.col(c) = (*plus - *minus) / (2.0 * step_state);
  }
  for (int c = 0; c < 6; ++c) {
    const auto plus = eval(pose_a, perturbed(pose_b, c, step_state), z_a, z_b);
    const auto minus =
        eval(pose_a, perturbed(pose_b, c, -step_state), z_a, z_b);
    if (!plus || !minus) return std::nullopt;
    jac.d_pose_b.col(c) = (*plus - *minus) / (2.0 * step_state);
  }
  for (int c = 0; c < 2; ++c) {
    geom::Vec2 dz = geom::Vec2::Zero();
    dz(c) = step_px;
    const auto plus = eval(pose_a, pose_b, z_a + dz, z_b);
    const auto minus = eval(pose_a, pose_b, z_a - dz, z_b);
    if (!plus || !minus) return std::nullopt;
    jac.d_z_a.col(c) = (*plus - *minus) / (2.0 * step_px);
  }
  for (int c = 0; c < 2; ++c) {
    geom::Vec2 dz = geom::Vec2::Zero();
    dz(c) = step_px;
    const auto plus = eval(pose_a, pose_b, z_a, z_b + dz);
    const auto minus = eval(pose_a, pose_b, z_a, z_b - dz);
    if (!plus || !minus) return std::nullopt;
    jac.d_z_b.col(c) = (*plus - *minus) / (2.0 * step_px);
  }
  return jac;
}

StateOpStatus LandmarkPipeline::register_feature(Eskf& filter,
                                                 const TrackUpdate& msg) {
  auto& sm = filter.states();
  if (sm.has_landmark(msg.id) || has_pending(msg.id))
    return StateOpStatus::kDuplicateFeature;

  const auto status = sm.clone_camera_pose(msg.id, msg.pixel(), msg.t);
  if (status != StateOpStatus::kOk) return status;

  PendingFeature pf;
  pf.id = msg.id;
  pf.first_obs = msg.pixel();
  pf.latest_obs = msg.pixel();
  pf.latest_t = msg.t;
  pf.obs_count = 1;
  pending_[msg.id] = pf;
  return StateOpStatus::kOk;
}

TriangulateOutcome LandmarkPipeline::try_triangulate(Eskf& filter,
                                                     const TrackUpdate& msg) {
  auto& sm = filter.states();
  auto it = pending_.find(msg.id);
  if (it == pending_.end()) return TriangulateOutcome::kRejected;
  PendingFeature& pf = it->second;
  pf.latest_obs = msg.pixel();
  pf.latest_t = msg.t;
  ++pf.obs_count;

  const geom::Pose clone_pose = sm.clone(msg.id).pose;
  const geom::Pose current_pose = sm.state().pose();
  const double parallax = parallax_of(clone_pose, pf.first_obs, current_pose,
                                      pf.latest_obs, filter.intrinsics());
  if (parallax < parallax_threshold_)
    return TriangulateOutcome::kStillPending;

  const auto tri = geom::triangulate_two_view(
      clone_pose, current_pose, pf.first_obs, pf.latest_obs,
      filter.intrinsics(), 0.5 * parallax_threshold_);
  if (!tri.ok()) {
    remove(filter, msg.id);
    return TriangulateOutcome::kRejected;
  }
  const auto jac =
      triangulation_jacobians(clone_pose, current_pose, pf.first_obs,
                              pf.latest_obs, filter.intrinsics());
  if (!jac) {
    remove(filter, msg.id);
    return TriangulateOutcome::kRejected;
  }

  // G_x: current pose columns at the camera block, first-sight pose columns
  // at the clone block, exact zeros elsewhere.
  Eigen::MatrixXd g_x = Eigen::MatrixXd::Zero(kLandmarkDim, sm.dim());
  g_x.middleCols<6>(kPosOffset) = jac->d_pose_b;
  g_x.middleCols<6>(sm.clone_offset(msg.id)) = jac->d_pose_a;

  Eigen::Matrix<double, 3, 4> g_z;
  g_z.leftCols<2>() = jac->d_z_a;
  g_z.rightCols<2>() = jac->d_z_b;
  const double sigma = filter.noise().effective_sigma_px();
  const Eigen::Matrix4d r_meas =
      sigma * sigma * Eigen::Matrix4d::Identity();

  const auto status = sm.insert_landmark(msg.id, tri.point, g_x, g_z, r_meas);
  if (status != StateOpStatus::kOk) {
    remove(filter, msg.id);
    return TriangulateOutcome::kRejected;
  }
  sm.marginalize_clone(msg.id);  // the landmark entry remains
  pending_.erase(it);
  return TriangulateOutcome::kInserted;
}

bool LandmarkPipeline::remove(Eskf& filter, FeatureId id) {
  const bool was_pending = pending_.erase(id) > 0;
  if (filter.states().has_clone(id)) filter.states().marginalize(id);
  return was_pending;
}

}  // namespace tvo
