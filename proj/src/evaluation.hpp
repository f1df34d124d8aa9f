/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <utility>
#include <vector>

#include "trajectory.hpp"

namespace tvo::eval {

using Mat6 = Eigen::Matrix<double, 6, 6>;

enum class EvalStatus {
  kOk,
  kNoOverlap,
  kDegenerateConfiguration,
  kSingularCovariance,
};

struct Association {
  EvalStatus status = EvalStatus::kNoOverlap;
  std::vector<std::pair<int, int>> pairs;  // (est index, ref index)

  bool ok() const { return status == EvalStatus::kOk; }
};

// Nearest-neighbor timestamp matching with |dt| <= max_dt; each reference
// sample is used at most once, estimates matched in time order.
Association associate(const Trajectory& est, const Trajectory& ref,
                      double max_dt);

struct ApeReport {
  double mean = 0.0;
  double rmse = 0.0;
  double median = 0.0;
  double max = 0.0;
  int matched = 0;
  geom::Sim3 alignment;  // maps est into ref
  std::vector<double> residual_times;
  std::vector<double> residuals;  // meters, per matched sample
};

struct ApeResult {
  EvalStatus status = EvalStatus::kNoOverlap;
  ApeReport report;

  bool ok() const { return status == EvalStatus::kOk; }
};

// Sim(3) Umeyama alignment of associated positions, then translational
// residual statistics of the aligned estimate against the reference.
ApeResult ape_sim3(const Trajectory& est, const Trajectory& ref,
                   double max_dt);

struct NeesResult {
  EvalStatus status = EvalStatus::kNoOverlap;
  double mean = 0.0;
  // 95% band for the mean of a chi-square(6) sample of this size; a
  // consistent filter lands inside. Errors are measured after Sim(3)
  // alignment, which biases the statistic optimistic.
  double lower95 = 0.0;
  double upper95 = 0.0;
  int matched = 0;
  std::vector<double> per_sample;

  bool ok() const { return status == EvalStatus::kOk; }
};

// Normalized estimation error squared over the 6-DoF pose error,
// e^T P^-1 e, with the estimate gauge-aligned via Sim(3) first.
// est_pose_cov holds the pose covariance per estimate sample
// (position block first, then orientation).
NeesResult nees(const Trajectory& est, const std::vector<Mat6>& est_pose_cov,
                const Trajectory& ref, double max_dt);

// Chi-square quantile via the Wilson-Hilferty approximation.
double chi_square_quantile(double dof, double probability);

}  // namespace tvo::eval
