/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "eskf.hpp"

namespace tvo {

bool Eskf::propagate_to(double t) {
  const double dt = t - time_;
  if (dt < 0.0) return false;
  if (dt > 0.0) propagate(dt);
  time_ = t;
  return true;
}

void Eskf::propagate(double dt) {
  auto& x = sm_.state();
  x.p += x.v * dt;

  // F = I except the position-velocity coupling dt*I. Apply F P F^T as a
  // row update followed by a column update; everything else is untouched.
  auto& p = sm_.covariance();
  p.middleRows<3>(kPosOffset) += dt * p.middleRows<3>(kVelOffset);
  p.middleCols<3>(kPosOffset) += dt * p.middleCols<3>(kVelOffset);

  const double qw = noise_.sigma_w * noise_.sigma_w * dt;
  const double qa = noise_.sigma_a * noise_.sigma_a * dt;
  for (int i = 0; i < 3; ++i) {
    p(kRotOffset + i, kRotOffset + i) += qw;
    p(kVelOffset + i, kVelOffset + i) += qa;
  }
}

UpdateOutcome Eskf::update(const TrackUpdate& msg) {
  UpdateOutcome outcome;
  if (!sm_.has_landmark(msg.id)) {
    outcome.status = UpdateStatus::kUnknownLandmark;
    return outcome;
  }

  const geom::Pose pose = sm_.state().pose();
  const geom::Vec3& landmark = sm_.landmark(msg.id);
  const auto predicted = geom::project(intr_, pose, landmark);
  if (!predicted) {
    outcome.status = UpdateStatus::kNonPositiveDepth;
    return outcome;
  }
  const auto jac = geom::projection_jacobians(intr_, pose, landmark);

  outcome.innovation = msg.pixel() - *predicted;

  // H is nonzero only at the camera pose and the landmark's slot, and P is
  // symmetric, so P H^T is three contiguous 3-column gathers.
  const int dim = sm_.dim();
  const int lm_off = sm_.landmark_offset(msg.id);
  const auto& p = sm_.covariance();
  pht_.resize(dim, 2);
  pht_.noalias() = p.middleCols<3>(kPosOffset) * jac->h_pos.transpose();
  pht_.noalias() += p.middleCols<3>(kRotOffset) * jac->h_rot.transpose();
  pht_.noalias() += p.middleCols<3>(lm_off) * jac->h_lm.transpose();

  const double sigma = noise_.effective_sigma_px();
  geom::Mat2 s;
  s.noalias() = jac->h_pos * pht_.middleRows<3>(kPosOffset);
  s.noalias() += jac->h_rot * pht_.middleRows<3>(kRotOffset);
  s.noalias() += jac->h_lm * pht_.middleRows<3>(lm_off);
  s = 0.5 * (s + s.transpose()).eval();
  s(0, 0) += sigma * sigma;
  s(1, 1) += sigma * sigma;
  outcome.innovation_cov = s;

  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  if (!(det > 0.0) || !(s(0, 0) > 0.0)) {
    outcome.status = UpdateStatus::kSingularInnovation;
    return outcome;
  }
  geom::Mat2 s_inv;
  s_inv << s(1, 1), -s(0, 1), -s(1, 0), s(0, 0);
  s_inv /= det;

  outcome.mahalanobis2 =
      outcome.innovation.dot(s_inv * outcome.innovation);
  if (noise_.gating_enabled && outcome.mahalanobis2 > noise_.gate_threshold) {
    outcome.status = UpdateStatus::kGated;
    return outcome;
  }

  // delta = K y = (P H^T) S^-1 y, and
  // (I - K H) P = P - (P H^T) S^-1 (P H^T)^T for symmetric P. With
  // S = L L^T the downdate is the symmetric rank-2 form -W W^T with
  // W = P H^T L^-T, applied to the lower triangle and mirrored, which
  // doubles as the resymmetrization.
  delta_.noalias() = pht_ * (s_inv * outcome.innovation);

  const Eigen::LLT<geom::Mat2> llt(s);
  Eigen::Matrix2d l_upper = llt.matrixU();
  l_upper.triangularView<Eigen::Upper>()
      .solveInPlace<Eigen::OnTheRight>(pht_);
  auto& p_mut = sm_.covariance();
  p_mut.selfadjointView<Eigen::Lower>().rankUpdate(pht_, -1.0);
  p_mut.triangularView<Eigen::StrictlyUpper>() = p_mut.transpose();

  sm_.compose(delta_);
  reset(delta_);

  outcome.status = UpdateStatus::kAccepted;
  return outcome;
}

void Eskf::reset(const Eigen::VectorXd& applied_delta) {
  const geom::Vec3 dtheta = applied_delta.segment<3>(kRotOffset);
  if (dtheta.isZero(0.0)) return;

  const geom::Mat3 g_rot =
      geom::Mat3::Identity() - geom::skew(0.5 * dtheta);
  auto& p = sm_.covariance();
  rot_rows_.resize(3, p.cols());
  rot_rows_.noalias() = g_rot * p.middleRows<3>(kRotOffset);
  p.middleRows<3>(kRotOffset) = rot_rows_;
  rot_rows_.transpose().noalias() =
      p.middleCols<3>(kRotOffset) * g_rot.transpose();
  p.middleCols<3>(kRotOffset) = rot_rows_.transpose();
}

Eskf::DeletionStats Eskf::handle_deletion(const TrackDeletion& msg) {
  DeletionStats stats;
  for (FeatureId id : msg.ids) {
    if (sm_.has_landmark(id)) {
      sm_.marginalize(id);
      ++stats.landmarks_removed;
    } else if (sm_.has_clone(id)) {
      sm_.marginalize(id);
      ++stats.clones_removed;
    } else {
      ++stats.unknown_ids;
    }
  }
  return stats;
}

}  // namespace tvo
