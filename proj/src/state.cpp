/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "state.hpp"

namespace tvo {

StateOpStatus StateManager::initialize(const FilterState& state,
                                       const Eigen::MatrixXd& covariance) {
  const int dim = kCameraDim +
                  kLandmarkDim * static_cast<int>(state.landmark_ids.size()) +
                  kCloneDim * static_cast<int>(state.clones.size());
  if (covariance.rows() != dim || covariance.cols() != dim)
    return StateOpStatus::kDimensionMismatch;
  if (state.landmark_ids.size() != state.landmark_positions.size())
    return StateOpStatus::kDimensionMismatch;

  x_ = state;
  cov_ = covariance;
  landmark_index_.clear();
  clone_index_.clear();
  for (size_t i = 0; i < x_.landmark_ids.size(); ++i)
    landmark_index_[x_.landmark_ids[i]] = static_cast<int>(i);
  for (size_t i = 0; i < x_.clones.size(); ++i)
    clone_index_[x_.clones[i].id] = static_cast<int>(i);
  if (landmark_index_.size() != x_.landmark_ids.size() ||
      clone_index_.size() != x_.clones.size())
    return StateOpStatus::kDuplicateFeature;
  for (const auto& c : x_.clones)
    if (landmark_index_.count(c.id)) return StateOpStatus::kDuplicateFeature;
  return StateOpStatus::kOk;
}

StateOpStatus StateManager::compose(const Eigen::VectorXd& delta) {
  if (delta.size() != dim()) return StateOpStatus::kDimensionMismatch;

  x_.p += delta.segment<3>(kPosOffset);
  x_.q = geom::canonicalized(geom::exp_so3(delta.segment<3>(kRotOffset)) *
                             x_.q);
  x_.v += delta.segment<3>(kVelOffset);

  int off = kCameraDim;
  for (auto& lm : x_.landmark_positions) {
    lm += delta.segment<3>(off);
    off += kLandmarkDim;
  }
  for (auto& clone : x_.clones) {
    clone.pose.p += delta.segment<3>(off);
    clone.pose.q = geom::canonicalized(
        geom::exp_so3(delta.segment<3>(off + 3)) * clone.pose.q);
    off += kCloneDim;
  }
  return StateOpStatus::kOk;
}

StateOpStatus StateManager::clone_camera_pose(FeatureId id, const geom::Vec2& z,
                                              double t) {
  if (has_landmark(id) || has_clone(id))
    return StateOpStatus::kDuplicateFeature;

  const int old_dim = dim();
  insert_rows_cols(old_dim, kCloneDim);
  // C P C^T: the new rows/cols are copies of the pose rows/cols, and the new
  // diagonal block is the pose block itself.
  cov_.block(old_dim, 0, kCloneDim, old_dim) =
      cov_.block(0, 0, kCloneDim, old_dim);
  cov_.block(0, old_dim, old_dim, kCloneDim) =
      cov_.block(0, 0, old_dim, kCloneDim);
  cov_.block(old_dim, old_dim, kCloneDim, kCloneDim) =
      cov_.topLeftCorner(kCloneDim, kCloneDim);

  CloneEntry entry;
  entry.id = id;
  entry.pose = x_.pose();
  entry.first_obs = z;
  entry.first_t = t;
  clone_index_[id] = static_cast<int>(x_.clones.size());
  x_.clones.push_back(entry);
  return StateOpStatus::kOk;
}

StateOpStatus StateManager::insert_landmark(FeatureId id, const geom::Vec3& p_f,
                                            const Eigen::MatrixXd& g_x,
                                            const Eigen::MatrixXd& g_z,
                                            const Eigen::MatrixXd& r_meas) {
  if (!has_clone(id)) return StateOpStatus::kUnknownClone;
  if (has_landmark(id)) return StateOpStatus::kDuplicateFeature;
  const int old_dim = dim();
  if (g_x.rows() != kLandmarkDim || g_x.cols() != old_dim ||
      g_z.rows() != kLandmarkDim || g_z.cols() != r_meas.rows() ||
      r_meas.rows() != r_meas.cols())
    return StateOpStatus::kDimensionMismatch;

  const Eigen::MatrixXd cross = g_x * cov_;  // 3 x old_dim, old ordering
  const Eigen::Matrix3d block = cross * g_x.transpose() +
                                g_z * r_meas * g_z.transpose();

  // New landmark slot sits after the existing landmarks, before the clones.
  const int slot = kCameraDim + kLandmarkDim * landmark_count();
  insert_rows_cols(slot, kLandmarkDim);

  auto old_index = [slot](int j) { return j < slot ? j : j + kLandmarkDim; };
  for (int j = 0; j < old_dim; ++j) {
    const int col = old_index(j);
    cov_.block(slot, col, kLandmarkDim, 1) = cross.col(j);
    cov_.block(col, slot, 1, kLandmarkDim) = cross.col(j).transpose();
  }
  cov_.block(slot, slot, kLandmarkDim, kLandmarkDim) =
      0.5 * (block + block.transpose());

  landmark_index_[id] = landmark_count();
  x_.landmark_ids.push_back(id);
  x_.landmark_positions.push_back(p_f);
  return StateOpStatus::kOk;
}

StateOpStatus StateManager::marginalize(FeatureId id) {
  if (auto it = landmark_index_.find(id); it != landmark_index_.end()) {
    const int idx = it->second;
    remove_rows_cols(kCameraDim + kLandmarkDim * idx, kLandmarkDim);
    x_.landmark_ids.erase(x_.landmark_ids.begin() + idx);
    x_.landmark_positions.erase(x_.landmark_positions.begin() + idx);
    landmark_index_.erase(it);
    for (auto& [fid, i] : landmark_index_)
      if (i > idx) --i;
    return StateOpStatus::kOk;
  }
  return marginalize_clone(id);
}

StateOpStatus StateManager::marginalize_clone(FeatureId id) {
  auto it = clone_index_.find(id);
  if (it == clone_index_.end()) return StateOpStatus::kUnknownEntity;
  const int idx = it->second;
  remove_rows_cols(
      kCameraDim + kLandmarkDim * landmark_count() + kCloneDim * idx,
      kCloneDim);
  x_.clones.erase(x_.clones.begin() + idx);
  clone_index_.erase(it);
  for (auto& [fid, i] : clone_index_)
    if (i > idx) --i;
  return StateOpStatus::kOk;
}

void StateManager::insert_rows_cols(int offset, int count) {
  const int old_dim = dim();
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(old_dim + count,
                                                old_dim + count);
  grown.topLeftCorner(offset, offset) = cov_.topLeftCorner(offset, offset);
  grown.topRightCorner(offset, old_dim - offset) =
      cov_.topRightCorner(offset, old_dim - offset);
  grown.bottomLeftCorner(old_dim - offset, offset) =
      cov_.bottomLeftCorner(old_dim - offset, offset);
  grown.bottomRightCorner(old_dim - offset, old_dim - offset) =
      cov_.bottomRightCorner(old_dim - offset, old_dim - offset);
  cov_ = std::move(grown);
}

void StateManager::remove_rows_cols(int offset, int count) {
  const int old_dim = dim();
  const int tail = old_dim - offset - count;
  Eigen::MatrixXd shrunk(old_dim - count, old_dim - count);
  shrunk.topLeftCorner(offset, offset) = cov_.topLeftCorner(offset, offset);
  shrunk.topRightCorner(offset, tail) =
      cov_.block(0, offset + count, offset, tail);
  shrunk.bottomLeftCorner(tail, offset) =
      cov_.block(offset + count, 0, tail, offset);
  shrunk.bottomRightCorner(tail, tail) =
      cov_.block(offset + count, offset + count, tail, tail);
  cov_ = std::move(shrunk);
}

}  // namespace tvo
