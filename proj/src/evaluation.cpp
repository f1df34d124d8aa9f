/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace tvo::eval {

Association associate(const Trajectory& est, const Trajectory& ref,
                      double max_dt) {
  Association out;
  if (est.empty() || ref.empty()) return out;

  // Estimates in time order each take the nearest still-unused reference
  // sample within the window. Scanning outward from the insertion point
  // visits candidates in increasing |dt| on each side, so the first unused
  // hit per side is that side's best; ties go to the earlier sample.
  const int n_ref = static_cast<int>(ref.size());
  std::vector<bool> used(ref.size(), false);
  for (int i = 0; i < static_cast<int>(est.size()); ++i) {
    const double t = est.samples[i].t;
    int right = static_cast<int>(
        std::lower_bound(ref.samples.begin(), ref.samples.end(), t,
                         [](const Trajectory::Sample& s, double value) {
                           return s.t < value;
                         }) -
        ref.samples.begin());
    int left = right - 1;
    while (left >= 0 && used[left] && t - ref.samples[left].t <= max_dt)
      --left;
    while (right < n_ref && used[right] && ref.samples[right].t - t <= max_dt)
      ++right;

    const double left_dt =
        left >= 0 ? t - ref.samples[left].t : std::nan("");
    const double right_dt =
        right < n_ref ? ref.samples[right].t - t : std::nan("");
    int best = -1;
    if (left >= 0 && !used[left] && left_dt <= max_dt &&
        (!(right < n_ref) || used[right] || right_dt > max_dt ||
         left_dt <= right_dt)) {
      best = left;
    } else if (right < n_ref && !used[right] && right_dt <= max_dt) {
      best = right;
    }
    if (best >= 0) {
      used[best] = true;
      out.pairs.emplace_back(i, best);
    }
  }
  if (!out.pairs.empty()) out.status = EvalStatus::kOk;
  return out;
}

ApeResult ape_sim3(const Trajectory& est, const Trajectory& ref,
                   double max_dt) {
  ApeResult out;
  const auto assoc = associate(est, ref, max_dt);
  if (!assoc.ok()) return out;

  std::vector<geom::Vec3> est_pts, ref_pts;
  est_pts.reserve(assoc.pairs.size());
  ref_pts.reserve(assoc.pairs.size());
  for (const auto& [ei, ri] : assoc.pairs) {
    est_pts.push_back(est.samples[ei].pose.p);
    ref_pts.push_back(ref.samples[ri].pose.p);
  }

  // Straight-line trajectories are legitimate; the alignment's roll about
  // the line is arbitrary but does not move on-line positions.
  const auto alignment =
      geom::umeyama_sim3(est_pts, ref_pts, /*allow_collinear=*/true);
  if (!alignment.ok()) {
    out.status = EvalStatus::kDegenerateConfiguration;
    return out;
  }

  auto& rep = out.report;
  rep.alignment = alignment.transform;
  rep.matched = static_cast<int>(assoc.pairs.size());
  rep.residuals.reserve(assoc.pairs.size());
  rep.residual_times.reserve(assoc.pairs.size());

  double sum = 0.0;
  double sum_sq = 0.0;
  for (size_t i = 0; i < est_pts.size(); ++i) {
    const double r = (ref_pts[i] - alignment.transform.apply(est_pts[i])).norm();
    rep.residuals.push_back(r);
    rep.residual_times.push_back(est.samples[assoc.pairs[i].first].t);
    sum += r;
    sum_sq += r * r;
    rep.max = std::max(rep.max, r);
  }
  const double n = static_cast<double>(rep.residuals.size());
  rep.mean = sum / n;
  rep.rmse = std::sqrt(sum_sq / n);

  std::vector<double> sorted = rep.residuals;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  rep.median = sorted[sorted.size() / 2];

  out.status = EvalStatus::kOk;
  return out;
}

double chi_square_quantile(double dof, double probability) {
  // Wilson-Hilferty: chi2_p(k) ~ k (1 - 2/(9k) + z_p sqrt(2/(9k)))^3.
  // Inverse normal CDF via Acklam's rational approximation.
  const double p = std::clamp(probability, 1e-12, 1.0 - 1e-12);
  auto inv_normal = [](double q) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (q < p_low) {
      const double u = std::sqrt(-2.0 * std::log(q));
      x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u +
           c[5]) /
          ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (q <= 1.0 - p_low) {
      const double u = q - 0.5;
      const double r = u * u;
      x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
           a[5]) *
          u /
          (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
      const double u = std::sqrt(-2.0 * std::log(1.0 - q));
      x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u +
            c[5]) /
          ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    return x;
  };
  const double z = inv_normal(p);
  const double k = dof;
  const double term = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * term * term * term;
}

NeesResult nees(const Trajectory& est, const std::vector<Mat6>& est_pose_cov,
                const Trajectory& ref, double max_dt) {
  NeesResult out;
  if (est_pose_cov.size() != est.size()) {
    out.status = EvalStatus::kSingularCovariance;
    return out;
  }
  const auto ape = ape_sim3(est, ref, max_dt);
  if (!ape.ok()) {
    out.status = ape.status;
    return out;
  }
  const auto assoc = associate(est, ref, max_dt);
  const geom::Sim3& sim = ape.report.alignment;
  const geom::Mat3 r_align = sim.q.toRotationMatrix();

  double sum = 0.0;
  for (const auto& [ei, ri] : assoc.pairs) {
    const auto& est_pose = est.samples[ei].pose;
    const auto& ref_pose = ref.samples[ri].pose;

    const geom::Vec3 e_pos = ref_pose.p - sim.apply(est_pose.p);
    const geom::Quat aligned_q =
        geom::canonicalized(sim.q * est_pose.q);
    const geom::Vec3 e_rot =
        geom::log_so3(ref_pose.q * aligned_q.conjugate());

    // Transform the covariance through the alignment: positions scale and
    // rotate, orientations only rotate.
    Mat6 tf = Mat6::Zero();
    tf.topLeftCorner<3, 3>() = sim.scale * r_align;
    tf.bottomRightCorner<3, 3>() = r_align;
    const Mat6 cov = tf * est_pose_cov[ei] * tf.transpose();

    Eigen::Matrix<double, 6, 1> e;
    e << e_pos, e_rot;
    const Eigen::LDLT<Mat6> ldlt(cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        !(ldlt.vectorD().minCoeff() > 0.0)) {
      out.status = EvalStatus::kSingularCovariance;
      return out;
    }
    const double value = e.dot(ldlt.solve(e));
    out.per_sample.push_back(value);
    sum += value;
  }

  out.matched = static_cast<int>(out.per_sample.size());
  out.mean = sum / static_cast<double>(out.matched);
  const double n = static_cast<double>(out.matched);
  out.lower95 = chi_square_quantile(6.0 * n, 0.025) / n;
  out.upper95 = chi_square_quantile(6.0 * n, 0.975) / n;
  out.status = EvalStatus::kOk;
  return out;
}

}  // namespace tvo::eval
