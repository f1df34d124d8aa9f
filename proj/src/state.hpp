/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "geometry.hpp"

namespace tvo {

using FeatureId = std::int64_t;

// Error-state layout: camera block first, then landmark blocks in insertion
// order, then clone blocks in insertion order.
inline constexpr int kCameraDim = 9;
inline constexpr int kPosOffset = 0;
inline constexpr int kRotOffset = 3;
inline constexpr int kVelOffset = 6;
inline constexpr int kLandmarkDim = 3;
inline constexpr int kCloneDim = 6;

// Camera pose saved when a feature was first observed, kept until the
// feature is triangulated or dropped.
struct CloneEntry {
  FeatureId id = 0;
  geom::Pose pose;
  geom::Vec2 first_obs = geom::Vec2::Zero();
  double first_t = 0.0;
};

// Nominal state: camera position/orientation/velocity, mapped landmarks and
// pose clones. Landmark and clone id sets are disjoint.
struct FilterState {
  geom::Vec3 p = geom::Vec3::Zero();
  geom::Quat q = geom::Quat::Identity();
  geom::Vec3 v = geom::Vec3::Zero();
  std::vector<FeatureId> landmark_ids;           // layout order
  std::vector<geom::Vec3> landmark_positions;    // parallel to landmark_ids
  std::vector<CloneEntry> clones;                // layout order

  geom::Pose pose() const { return {p, q}; }
};

enum class StateOpStatus {
  kOk,
  kDuplicateFeature,
  kUnknownClone,
  kUnknownEntity,
  kDimensionMismatch,
};

// Owns the nominal state and the dense error covariance; the single mutation
// point for composition, stochastic cloning, landmark insertion and
// marginalization. Single-writer: callers serialize access.
class StateManager {
 public:
  StateManager() : cov_(Eigen::MatrixXd::Zero(kCameraDim, kCameraDim)) {}

  const FilterState& state() const { return x_; }
  FilterState& state() { return x_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  Eigen::MatrixXd& covariance() { return cov_; }

  int dim() const { return static_cast<int>(cov_.rows()); }
  int landmark_count() const {
    return static_cast<int>(x_.landmark_ids.size());
  }
  int clone_count() const { return static_cast<int>(x_.clones.size()); }

  bool has_landmark(FeatureId id) const {
    return landmark_index_.count(id) > 0;
  }
  bool has_clone(FeatureId id) const { return clone_index_.count(id) > 0; }

  // Error-state offsets. Valid only while the entity exists.
  int landmark_offset(FeatureId id) const {
    return kCameraDim + kLandmarkDim * landmark_index_.at(id);
  }
  int clone_offset(FeatureId id) const {
    return kCameraDim + kLandmarkDim * landmark_count() +
           kCloneDim * clone_index_.at(id);
  }

  const geom::Vec3& landmark(FeatureId id) const {
    return x_.landmark_positions[landmark_index_.at(id)];
  }
  geom::Vec3& landmark(FeatureId id) {
    return x_.landmark_positions[landmark_index_.at(id)];
  }
  const CloneEntry& clone(FeatureId id) const {
    return x_.clones[clone_index_.at(id)];
  }

  // Replaces nominal state and covariance wholesale (bootstrap seeding).
  StateOpStatus initialize(const FilterState& state,
                           const Eigen::MatrixXd& covariance);

  // x <- x (+) delta: additive on positions and velocity, left quaternion
  // perturbation on every pose-valued block.
  StateOpStatus compose(const Eigen::VectorXd& delta);

  // Stochastic cloning: appends a copy of the current 6-DoF pose block.
  // Covariance becomes C P C^T with C stacking identity over the pose
  // selection, so the clone block and cross rows are exact copies.
  StateOpStatus clone_camera_pose(FeatureId id, const geom::Vec2& z, double t);

  // Appends landmark p_f with covariance
  //   [ P          P G_x^T                    ]
  //   [ G_x P      G_x P G_x^T + G_z R G_z^T  ]
  // inserted at the landmark tail (before clones). g_x is 3 x dim(); g_z and
  // r_meas cover the pixel measurements that entered triangulation.
  StateOpStatus insert_landmark(FeatureId id, const geom::Vec3& p_f,
                                const Eigen::MatrixXd& g_x,
                                const Eigen::MatrixXd& g_z,
                                const Eigen::MatrixXd& r_meas);

  // Removes the landmark's or clone's rows and columns; remaining blocks are
  // untouched. Landmark and clone ids are disjoint except transiently between
  // insert_landmark and the clone removal, where marginalize_clone
  // disambiguates.
  StateOpStatus marginalize(FeatureId id);
  StateOpStatus marginalize_clone(FeatureId id);

  void resymmetrize() { cov_ = ((cov_ + cov_.transpose()) * 0.5).eval(); }

 private:
  void insert_rows_cols(int offset, int count);
  void remove_rows_cols(int offset, int count);

  FilterState x_;
  Eigen::MatrixXd cov_;
  std::unordered_map<FeatureId, int> landmark_index_;
  std::unordered_map<FeatureId, int> clone_index_;
};

}  // namespace tvo
