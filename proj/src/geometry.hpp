/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

namespace tvo::geom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Quat = Eigen::Quaterniond;

// Camera-frame depths at or below this are treated as behind the camera.
inline constexpr double kDepthFloor = 1e-6;

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
           cx < width && cy >= 0.0 && cy < height;
  }
  bool contains(const Vec2& px) const {
    return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 && px.y() < height;
  }
  // Pixel -> normalized image coordinates ((u-cx)/fx, (v-cy)/fy).
  Vec2 normalized(const Vec2& px) const {
    return {(px.x() - cx) / fx, (px.y() - cy) / fy};
  }
  Vec2 to_pixel(const Vec2& normalized_xy) const {
    return {fx * normalized_xy.x() + cx, fy * normalized_xy.y() + cy};
  }
};

// Camera-to-global pose: q rotates camera-frame vectors into the global
// frame, p is the camera position expressed in the global frame. A global
// point X maps into the camera frame as R(q)^T (X - p).
struct Pose {
  Vec3 p = Vec3::Zero();
  Quat q = Quat::Identity();

  Mat3 rotation() const { return q.toRotationMatrix(); }
};

Mat3 skew(const Vec3& v);

// Unit norm with w >= 0 (the double cover is collapsed on output).
Quat canonicalized(const Quat& q);

// Quaternion of the rotation by angle |r| about axis r/|r|. Continuous at
// r = 0 via series expansion.
Quat exp_so3(const Vec3& r);

// Minimal rotation vector, |log_so3(q)| <= pi. Inverse of exp_so3 up to the
// quaternion sign.
Vec3 log_so3(const Quat& q);

// Pinhole projection of a global landmark. Empty when the camera-frame depth
// is at or below kDepthFloor.
std::optional<Vec2> project(const CameraIntrinsics& intr, const Pose& pose,
                            const Vec3& landmark);

// Jacobians of the pixel measurement w.r.t. the error-state blocks. The
// orientation error is a global (left) rotation-vector perturbation,
// q_true = exp_so3(dtheta) * q.
struct ProjectionJacobians {
  Mat23 h_pos;  // camera position error
  Mat23 h_rot;  // camera orientation error
  Mat23 h_lm;   // landmark position error
};
std::optional<ProjectionJacobians> projection_jacobians(
    const CameraIntrinsics& intr, const Pose& pose, const Vec3& landmark);

// Unit ray from the camera center through the pixel, in the global frame.
Vec3 bearing_ray(const CameraIntrinsics& intr, const Pose& pose,
                 const Vec2& px);

enum class TriangulationStatus { kOk, kInsufficientParallax, kNegativeDepth };

struct TriangulationResult {
  TriangulationStatus status = TriangulationStatus::kInsufficientParallax;
  Vec3 point = Vec3::Zero();

  bool ok() const { return status == TriangulationStatus::kOk; }
};

// Midpoint of the common perpendicular between the two bearing rays.
// Requires the ray angle to exceed min_parallax_rad and positive depth in
// both views.
TriangulationResult triangulate_two_view(const Pose& pose_a,
                                         const Pose& pose_b, const Vec2& z_a,
                                         const Vec2& z_b,
                                         const CameraIntrinsics& intr,
                                         double min_parallax_rad = 1e-5);

// Correspondence in normalized image coordinates, first view -> second view.
using NormalizedPair = std::pair<Vec2, Vec2>;

enum class HomographyStatus { kOk, kDegenerateConfiguration };

struct HomographyEstimate {
  HomographyStatus status = HomographyStatus::kDegenerateConfiguration;
  Mat3 h = Mat3::Identity();

  bool ok() const { return status == HomographyStatus::kOk; }
};

// DLT with Hartley normalization over >= 4 correspondences in normalized
// image coordinates. The result is scaled so its middle singular value is 1.
HomographyEstimate estimate_homography(const std::vector<NormalizedPair>& pairs);

enum class DecompositionStatus { kOk, kNoValidSolution, kPureRotation };

// Planar motion hypothesis x2 ~ (R + t n^T / d) x1 with d > 0. rotation and
// translation map first-view coordinates into the second view; translation is
// unit norm (scale is unobservable), t_over_d = |t|/d preserves the
// reconstruction H ~ R + t_over_d * translation * normal^T. normal points from
// the first camera toward the plane (n^T x > 0 for visible points).
struct HomographyMotion {
  DecompositionStatus status = DecompositionStatus::kNoValidSolution;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double t_over_d = 0.0;

  bool ok() const { return status == DecompositionStatus::kOk; }
};

// Analytic SVD-based candidate enumeration with cheirality disambiguation.
// Among candidates for which every correspondence has positive depth in both
// views, returns the one whose plane faces the first camera most directly.
HomographyMotion decompose_homography(const Mat3& h,
                                      const std::vector<NormalizedPair>& pairs);

struct Sim3 {
  double scale = 1.0;
  Quat q = Quat::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return scale * (q * x) + t; }
  Sim3 inverse() const {
    Sim3 inv;
    inv.scale = 1.0 / scale;
    inv.q = q.conjugate();
    inv.t = -(inv.q * t) / scale;
    return inv;
  }
};

enum class AlignmentStatus { kOk, kDegenerateConfiguration };

struct Sim3Estimate {
  AlignmentStatus status = AlignmentStatus::kDegenerateConfiguration;
  Sim3 transform;

  bool ok() const { return status == AlignmentStatus::kOk; }
};

// Least-squares similarity transform minimizing
// sum_i |ref_i - (s R est_i + t)|^2 over >= 3 non-collinear point pairs.
// allow_collinear admits rank-1 clouds (straight-line trajectories): the
// roll about the line is then arbitrary but position residuals stay
// well-defined.
Sim3Estimate umeyama_sim3(const std::vector<Vec3>& est,
                          const std::vector<Vec3>& ref,
                          bool allow_collinear = false);

}  // namespace tvo::geom
