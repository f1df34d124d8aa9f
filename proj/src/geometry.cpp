/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "geometry.hpp"

#include <algorithm>
#include <cmath>

namespace tvo::geom {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Quat canonicalized(const Quat& q) {
  Quat out = q.normalized();
  if (out.w() < 0.0) out.coeffs() = -out.coeffs();
  return out;
}

Quat exp_so3(const Vec3& r) {
  const double angle = r.norm();
  double half_sinc;  // sin(angle/2) / angle
  if (angle < 1e-8) {
    half_sinc = 0.5 - angle * angle / 48.0;
  } else {
    half_sinc = std::sin(0.5 * angle) / angle;
  }
  Quat q(std::cos(0.5 * angle), half_sinc * r.x(), half_sinc * r.y(),
         half_sinc * r.z());
  return canonicalized(q);
}

Vec3 log_so3(const Quat& q) {
  const Quat qc = canonicalized(q);
  const Vec3 vec(qc.x(), qc.y(), qc.z());
  const double s = vec.norm();
  if (s < 1e-12) {
    // Small-angle: q ~ (1, r/2).
    return 2.0 * vec;
  }
  const double angle = 2.0 * std::atan2(s, qc.w());
  return (angle / s) * vec;
}

std::optional<Vec2> project(const CameraIntrinsics& intr, const Pose& pose,
                            const Vec3& landmark) {
  const Vec3 pc = pose.q.conjugate() * (landmark - pose.p);
  if (pc.z() <= kDepthFloor) return std::nullopt;
  return Vec2(intr.fx * pc.x() / pc.z() + intr.cx,
              intr.fy * pc.y() / pc.z() + intr.cy);
}

std::optional<ProjectionJacobians> projection_jacobians(
    const CameraIntrinsics& intr, const Pose& pose, const Vec3& landmark) {
  const Mat3 rot_t = pose.rotation().transpose();
  const Vec3 pc = rot_t * (landmark - pose.p);
  if (pc.z() <= kDepthFloor) return std::nullopt;

  const double inv_z = 1.0 / pc.z();
  Mat23 d_pixel;  // d(pixel)/d(camera-frame point)
  d_pixel << intr.fx * inv_z, 0.0, -intr.fx * pc.x() * inv_z * inv_z,
      0.0, intr.fy * inv_z, -intr.fy * pc.y() * inv_z * inv_z;

  // Camera-frame point under the error state:
  //   pc = R^T (I - [dtheta]x) (p_f + df - p - dp)
  ProjectionJacobians jac;
  jac.h_lm = d_pixel * rot_t;
  jac.h_pos = -jac.h_lm;
  jac.h_rot = d_pixel * rot_t * skew(landmark - pose.p);
  return jac;
}

Vec3 bearing_ray(const CameraIntrinsics& intr, const Pose& pose,
                 const Vec2& px) {
  const Vec2 n = intr.normalized(px);
  const Vec3 cam_ray(n.x(), n.y(), 1.0);
  return (pose.q * cam_ray).normalized();
}

TriangulationResult triangulate_two_view(const Pose& pose_a,
                                         const Pose& pose_b, const Vec2& z_a,
                                         const Vec2& z_b,
                                         const CameraIntrinsics& intr,
                                         double min_parallax_rad) {
  TriangulationResult result;
  const Vec3 d1 = bearing_ray(intr, pose_a, z_a);
  const Vec3 d2 = bearing_ray(intr, pose_b, z_b);

  const double parallax = std::atan2(d1.cross(d2).norm(), d1.dot(d2));
  if (parallax < min_parallax_rad) {
    result.status = TriangulationStatus::kInsufficientParallax;
    return result;
  }

  // Midpoint of the common perpendicular between the rays
  // o1 + s d1 and o2 + t d2 (unit directions).
  const Vec3 w = pose_a.p - pose_b.p;
  const double b = d1.dot(d2);
  const double d = d1.dot(w);
  const double e = d2.dot(w);
  const double denom = 1.0 - b * b;
  const double s = (b * e - d) / denom;
  const double t = (e - b * d) / denom;
  const Vec3 point = 0.5 * (pose_a.p + s * d1 + pose_b.p + t * d2);

  const double depth_a = (pose_a.q.conjugate() * (point - pose_a.p)).z();
  const double depth_b = (pose_b.q.conjugate() * (point - pose_b.p)).z();
  if (depth_a <= kDepthFloor || depth_b <= kDepthFloor) {
    result.status = TriangulationStatus::kNegativeDepth;
    return result;
  }

  result.status = TriangulationStatus::kOk;
  result.point = point;
  return result;
}

namespace {

// Hartley conditioning: centroid at the origin, mean distance sqrt(2).
Mat3 conditioning_transform(const std::vector<NormalizedPair>& pairs,
                            bool second) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& pr : pairs) centroid += second ? pr.second : pr.first;
  centroid /= static_cast<double>(pairs.size());

  double mean_dist = 0.0;
  for (const auto& pr : pairs)
    mean_dist += ((second ? pr.second : pr.first) - centroid).norm();
  mean_dist /= static_cast<double>(pairs.size());

  const double scale = mean_dist > 1e-15 ? std::sqrt(2.0) / mean_dist : 1.0;
  Mat3 t = Mat3::Identity();
  t(0, 0) = scale;
  t(1, 1) = scale;
  t(0, 2) = -scale * centroid.x();
  t(1, 2) = -scale * centroid.y();
  return t;
}

}  // namespace

HomographyEstimate estimate_homography(
    const std::vector<NormalizedPair>& pairs) {
  HomographyEstimate result;
  if (pairs.size() < 4) return result;

  const Mat3 t_a = conditioning_transform(pairs, false);
  const Mat3 t_b = conditioning_transform(pairs, true);

  Eigen::MatrixXd design(2 * pairs.size(), 9);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const Vec3 a = t_a * Vec3(pairs[i].first.x(), pairs[i].first.y(), 1.0);
    const Vec3 b = t_b * Vec3(pairs[i].second.x(), pairs[i].second.y(), 1.0);
    design.row(2 * i) << -a.x(), -a.y(), -1.0, 0.0, 0.0, 0.0, b.x() * a.x(),
        b.x() * a.y(), b.x();
    design.row(2 * i + 1) << 0.0, 0.0, 0.0, -a.x(), -a.y(), -1.0,
        b.y() * a.x(), b.y() * a.y(), b.y();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A unique solution needs rank 8; collinear or repeated points drop it.
  if (sv(7) < 1e-9 * sv(0)) return result;

  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 h_cond;
  h_cond << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Mat3 homography = t_b.inverse() * h_cond * t_a;

  Eigen::JacobiSVD<Mat3> hsvd(homography);
  const double mid = hsvd.singularValues()(1);
  if (mid < 1e-15) return result;
  homography /= mid;

  result.status = HomographyStatus::kOk;
  result.h = homography;
  return result;
}

namespace {

struct MotionCandidate {
  Mat3 rotation;
  Vec3 t_over_d;  // t / d, d > 0
  Vec3 normal;
};

// Faugeras-style enumeration from the SVD of H (middle singular value 1).
std::vector<MotionCandidate> enumerate_candidates(const Mat3& h) {
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double d1 = svd.singularValues()(0);
  const double d2 = svd.singularValues()(1);
  const double d3 = svd.singularValues()(2);
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  const double s = u.determinant() * v.determinant();

  std::vector<MotionCandidate> candidates;
  if (d1 - d3 < 1e-9 * d2) return candidates;  // pure rotation, no plane

  const double x1 = std::sqrt(std::max(0.0, (d1 * d1 - d2 * d2) /
                                                (d1 * d1 - d3 * d3)));
  const double x3 = std::sqrt(std::max(0.0, (d2 * d2 - d3 * d3) /
                                                (d1 * d1 - d3 * d3)));
  const double signs[2] = {1.0, -1.0};

  // d' = +d2: rotation about the y axis of the SVD frame.
  {
    const double sin_theta = (d1 - d3) * x1 * x3 / d2;
    const double cos_theta = (d1 * x3 * x3 + d3 * x1 * x1) / d2;
    for (double e1 : signs) {
      for (double e3 : signs) {
        Mat3 rp = Mat3::Identity();
        rp(0, 0) = cos_theta;
        rp(0, 2) = -sin_theta * e1 * e3;
        rp(2, 0) = sin_theta * e1 * e3;
        rp(2, 2) = cos_theta;
        const Vec3 np(e1 * x1, 0.0, e3 * x3);
        const Vec3 tp = (d1 - d3) * Vec3(e1 * x1, 0.0, -e3 * x3);
        MotionCandidate c;
        c.rotation = s * u * rp * v.transpose();
        c.normal = v * np;
        c.t_over_d = (u * tp) / d2;
        candidates.push_back(c);
      }
    }
  }
  // d' = -d2: rotated by pi about the plane axis.
  {
    const double sin_phi = (d1 + d3) * x1 * x3 / d2;
    const double cos_phi = (d3 * x1 * x1 - d1 * x3 * x3) / d2;
    for (double e1 : signs) {
      for (double e3 : signs) {
        Mat3 rp = Mat3::Zero();
        rp(0, 0) = cos_phi;
        rp(0, 2) = sin_phi * e1 * e3;
        rp(1, 1) = -1.0;
        rp(2, 0) = sin_phi * e1 * e3;
        rp(2, 2) = -cos_phi;
        const Vec3 np(e1 * x1, 0.0, e3 * x3);
        const Vec3 tp = (d1 + d3) * Vec3(e1 * x1, 0.0, e3 * x3);
        MotionCandidate c;
        c.rotation = s * u * rp * v.transpose();
        c.normal = v * np;
        c.t_over_d = (u * tp) / d2;
        candidates.push_back(c);
      }
    }
  }
  return candidates;
}

}  // namespace

HomographyMotion decompose_homography(
    const Mat3& h, const std::vector<NormalizedPair>& pairs) {
  HomographyMotion result;

  Eigen::JacobiSVD<Mat3> svd(h);
  const double d1 = svd.singularValues()(0);
  const double d2 = svd.singularValues()(1);
  const double d3 = svd.singularValues()(2);
  if (d2 < 1e-15) return result;
  if ((d1 - d3) / d2 < 1e-7) {
    // H is a scaled rotation; the translation direction is undefined.
    result.status = DecompositionStatus::kPureRotation;
    return result;
  }

  const auto candidates = enumerate_candidates(h / d2);

  double best_facing = -1.0;
  bool found = false;
  for (const auto& cand : candidates) {
    // Plane n^T X = d with d > 0 in the first view; a visible point
    // X = lambda * x_tilde needs n^T x_tilde > 0, and its image in the
    // second view lambda * (R + t n^T / d) x_tilde needs positive depth.
    const Mat3 h_cand =
        cand.rotation + cand.t_over_d * cand.normal.transpose();
    bool all_in_front = true;
    double facing = 0.0;
    for (const auto& pr : pairs) {
      const Vec3 x1(pr.first.x(), pr.first.y(), 1.0);
      const double side = cand.normal.dot(x1);
      const double depth2 = h_cand.row(2).dot(x1);
      if (side <= 0.0 || depth2 <= 0.0) {
        all_in_front = false;
        break;
      }
      facing += side / x1.norm();
    }
    if (!all_in_front) continue;
    if (facing > best_facing) {
      best_facing = facing;
      result.status = DecompositionStatus::kOk;
      result.rotation = cand.rotation;
      result.t_over_d = cand.t_over_d.norm();
      result.translation = cand.t_over_d.norm() > 1e-15
                               ? Vec3(cand.t_over_d.normalized())
                               : Vec3::Zero();
      result.normal = cand.normal;
      found = true;
    }
  }
  if (!found) result.status = DecompositionStatus::kNoValidSolution;
  return result;
}

Sim3Estimate umeyama_sim3(const std::vector<Vec3>& est,
                          const std::vector<Vec3>& ref,
                          bool allow_collinear) {
  Sim3Estimate result;
  if (est.size() != ref.size() || est.size() < 3) return result;
  const double n = static_cast<double>(est.size());

  Vec3 mu_est = Vec3::Zero();
  Vec3 mu_ref = Vec3::Zero();
  for (size_t i = 0; i < est.size(); ++i) {
    mu_est += est[i];
    mu_ref += ref[i];
  }
  mu_est /= n;
  mu_ref /= n;

  Mat3 sigma = Mat3::Zero();
  double var_est = 0.0;
  for (size_t i = 0; i < est.size(); ++i) {
    const Vec3 de = est[i] - mu_est;
    const Vec3 dr = ref[i] - mu_ref;
    sigma += dr * de.transpose();
    var_est += de.squaredNorm();
  }
  sigma /= n;
  var_est /= n;
  if (var_est < 1e-18) return result;

  Eigen::JacobiSVD<Mat3> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 d = svd.singularValues();
  // Collinear clouds leave the rotation about the line unconstrained.
  if (!allow_collinear && d(1) < 1e-9 * std::max(d(0), 1e-300)) return result;

  Vec3 s_diag = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0)
    s_diag.z() = -1.0;

  const Mat3 rot =
      svd.matrixU() * s_diag.asDiagonal() * svd.matrixV().transpose();
  const double scale = d.dot(s_diag) / var_est;

  result.status = AlignmentStatus::kOk;
  result.transform.scale = scale;
  result.transform.q = canonicalized(Quat(rot));
  result.transform.t = mu_ref - scale * (rot * mu_est);
  return result;
}

}  // namespace tvo::geom
