/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "evaluation.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

using namespace tvo;

namespace {

Trajectory trajectory_from(const std::vector<double>& times,
                           const std::vector<geom::Vec3>& positions) {
  Trajectory out;
  for (size_t i = 0; i < times.size(); ++i) {
    Trajectory::Sample s;
    s.t = times[i];
    s.pose.p = positions[i];
    out.samples.push_back(s);
  }
  return out;
}

// Brute-force reference for associate: for each estimate in order, the
// nearest not-yet-used reference sample within the window.
std::vector<std::pair<int, int>> brute_force_associate(const Trajectory& est,
                                                       const Trajectory& ref,
                                                       double max_dt) {
  std::vector<std::pair<int, int>> pairs;
  std::vector<bool> used(ref.size(), false);
  for (int i = 0; i < static_cast<int>(est.size()); ++i) {
    int best = -1;
    double best_dt = max_dt;
    for (int j = 0; j < static_cast<int>(ref.size()); ++j) {
      if (used[j]) continue;
      const double dt = std::abs(est.samples[i].t - ref.samples[j].t);
      if (dt < best_dt || (best < 0 && dt <= best_dt)) {
        best = j;
        best_dt = dt;
      }
    }
    if (best >= 0) {
      pairs.emplace_back(i, best);
      used[best] = true;
    }
  }
  return pairs;
}

}  // namespace

TEST_CASE("identical timestamp sets associate one to one") {
  std::vector<double> t{0.0, 0.1, 0.2, 0.3};
  std::vector<geom::Vec3> p(4, geom::Vec3::Zero());
  const auto est = trajectory_from(t, p);
  const auto assoc = eval::associate(est, est, 0.01);
  REQUIRE(assoc.ok());
  REQUIRE(assoc.pairs.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(assoc.pairs[i].first == i);
    CHECK(assoc.pairs[i].second == i);
  }
}

TEST_CASE("estimates beyond the window produce no overlap") {
  std::vector<geom::Vec3> p(3, geom::Vec3::Zero());
  const auto est = trajectory_from({10.0, 10.1, 10.2}, p);
  const auto ref = trajectory_from({0.0, 0.1, 0.2}, p);
  CHECK(eval::associate(est, ref, 0.05).status == eval::EvalStatus::kNoOverlap);
}

TEST_CASE("association equals the brute-force assignment on jittered stamps") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> jitter(-0.004, 0.004);
  std::vector<double> ref_t, est_t;
  for (int i = 0; i < 60; ++i) ref_t.push_back(0.01 * i);
  for (int i = 0; i < 40; ++i) est_t.push_back(0.013 * i + jitter(rng));
  std::sort(est_t.begin(), est_t.end());
  // associate() requires strictly increasing stamps.
  est_t.erase(std::unique(est_t.begin(), est_t.end()), est_t.end());

  std::vector<geom::Vec3> ref_p(ref_t.size(), geom::Vec3::Zero());
  std::vector<geom::Vec3> est_p(est_t.size(), geom::Vec3::Zero());
  const auto est = trajectory_from(est_t, est_p);
  const auto ref = trajectory_from(ref_t, ref_p);

  const auto assoc = eval::associate(est, ref, 0.005);
  const auto expected = brute_force_associate(est, ref, 0.005);
  REQUIRE(assoc.ok());
  CHECK(assoc.pairs == expected);
}

TEST_CASE("shrinking the window never increases the match count") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  std::vector<double> ref_t, est_t;
  for (int i = 0; i < 50; ++i) ref_t.push_back(0.02 * i);
  for (int i = 0; i < 50; ++i) est_t.push_back(0.02 * i + jitter(rng));
  std::sort(est_t.begin(), est_t.end());
  est_t.erase(std::unique(est_t.begin(), est_t.end()), est_t.end());
  std::vector<geom::Vec3> p(ref_t.size(), geom::Vec3::Zero());
  std::vector<geom::Vec3> q(est_t.size(), geom::Vec3::Zero());
  const auto est = trajectory_from(est_t, q);
  const auto ref = trajectory_from(ref_t, p);

  size_t last = std::numeric_limits<size_t>::max();
  for (double window : {0.02, 0.01, 0.005, 0.002, 0.001}) {
    const auto assoc = eval::associate(est, ref, window);
    CHECK(assoc.pairs.size() <= last);
    last = assoc.pairs.size();
  }
}

TEST_CASE("APE of a trajectory against itself is zero") {
  std::vector<double> t{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<geom::Vec3> p{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 1},
                            {0, 0, 2}};
  const auto traj = trajectory_from(t, p);
  const auto res = eval::ape_sim3(traj, traj, 0.01);
  REQUIRE(res.ok());
  CHECK(res.report.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(res.report.rmse == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(res.report.max == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(res.report.alignment.scale == doctest::Approx(1.0));
}

TEST_CASE("Sim(3) alignment absorbs a similarity transform exactly") {
  std::vector<double> t{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<geom::Vec3> ref_p{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 1},
                                {0, 0, 2}};
  geom::Sim3 distort;
  distort.scale = 2.0;
  distort.q = geom::exp_so3(geom::Vec3(0.2, -0.4, 0.6));
  distort.t = geom::Vec3(5, -3, 1);
  std::vector<geom::Vec3> est_p;
  for (const auto& p : ref_p) est_p.push_back(distort.apply(p));

  const auto res = eval::ape_sim3(trajectory_from(t, est_p),
                                  trajectory_from(t, ref_p), 0.01);
  REQUIRE(res.ok());
  CHECK(res.report.mean < 1e-12);
  CHECK(res.report.max < 1e-12);
  CHECK(res.report.alignment.scale == doctest::Approx(0.5));
}

TEST_CASE("four-point closed-form oracle") {
  // ref on a unit square, est pushed out of plane with alternating sign.
  // Optimal alignment: R = I, t = 0, s = 1/1.01; every residual equals
  // sqrt((1-s)^2 + (0.1 s)^2).
  std::vector<double> t{0.0, 0.1, 0.2, 0.3};
  std::vector<geom::Vec3> ref_p{{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}};
  std::vector<geom::Vec3> est_p;
  for (int i = 0; i < 4; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    est_p.push_back(ref_p[i] + geom::Vec3(0.0, 0.0, 0.1 * sign));
  }
  const double s = 1.0 / 1.01;
  const double expected =
      std::sqrt((1.0 - s) * (1.0 - s) + 0.01 * s * s);

  const auto res = eval::ape_sim3(trajectory_from(t, est_p),
                                  trajectory_from(t, ref_p), 0.01);
  REQUIRE(res.ok());
  CHECK(res.report.alignment.scale == doctest::Approx(s).epsilon(1e-12));
  CHECK(res.report.mean == doctest::Approx(expected).epsilon(1e-12));
  CHECK(res.report.rmse == doctest::Approx(expected).epsilon(1e-12));
  CHECK(res.report.median == doctest::Approx(expected).epsilon(1e-12));
  CHECK(res.report.max == doctest::Approx(expected).epsilon(1e-12));
  CHECK(res.report.matched == 4);
}

TEST_CASE("rmse^2 equals the mean of squared residuals") {
  std::mt19937 rng(7);
  std::normal_distribution<double> g(0.0, 0.2);
  std::vector<double> t;
  std::vector<geom::Vec3> ref_p, est_p;
  for (int i = 0; i < 50; ++i) {
    t.push_back(0.1 * i);
    const geom::Vec3 p(std::sin(0.3 * i), std::cos(0.2 * i), 0.1 * i);
    ref_p.push_back(p);
    est_p.push_back(p + geom::Vec3(g(rng), g(rng), g(rng)));
  }
  const auto res = eval::ape_sim3(trajectory_from(t, est_p),
                                  trajectory_from(t, ref_p), 0.01);
  REQUIRE(res.ok());
  double mean_sq = 0.0;
  for (double r : res.report.residuals) {
    CHECK(r >= 0.0);
    mean_sq += r * r;
  }
  mean_sq /= res.report.residuals.size();
  CHECK(res.report.rmse * res.report.rmse ==
        doctest::Approx(mean_sq).epsilon(1e-12));
  CHECK(res.report.max >= res.report.rmse);
  CHECK(res.report.max >= res.report.median);
}

TEST_CASE("APE is invariant under a Sim(3) pre-transform of the estimate") {
  std::mt19937 rng(11);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> t;
  std::vector<geom::Vec3> ref_p, est_p;
  for (int i = 0; i < 40; ++i) {
    t.push_back(0.05 * i);
    const geom::Vec3 p(0.5 * i, std::sin(0.4 * i), std::cos(0.3 * i));
    ref_p.push_back(p);
    est_p.push_back(p + geom::Vec3(g(rng), g(rng), g(rng)));
  }
  const auto base = eval::ape_sim3(trajectory_from(t, est_p),
                                   trajectory_from(t, ref_p), 0.01);
  REQUIRE(base.ok());

  geom::Sim3 pre;
  pre.scale = 3.0;
  pre.q = geom::exp_so3(geom::Vec3(-0.3, 0.2, 0.9));
  pre.t = geom::Vec3(10, 20, -5);
  std::vector<geom::Vec3> est_pre;
  for (const auto& p : est_p) est_pre.push_back(pre.apply(p));
  const auto moved = eval::ape_sim3(trajectory_from(t, est_pre),
                                    trajectory_from(t, ref_p), 0.01);
  REQUIRE(moved.ok());
  CHECK(moved.report.mean == doctest::Approx(base.report.mean).epsilon(1e-9));
  CHECK(moved.report.rmse == doctest::Approx(base.report.rmse).epsilon(1e-9));
  CHECK(moved.report.max == doctest::Approx(base.report.max).epsilon(1e-9));
}

TEST_CASE("NEES is zero for a perfect estimate") {
  std::vector<double> t{0.0, 0.1, 0.2, 0.3};
  std::vector<geom::Vec3> p{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 1}};
  const auto traj = trajectory_from(t, p);
  std::vector<eval::Mat6> covs(4, eval::Mat6::Identity());
  const auto res = eval::nees(traj, covs, traj, 0.01);
  REQUIRE(res.ok());
  CHECK(res.mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("one-sigma errors along each axis give NEES = 6") {
  // Direct definition check: e = sigma in every coordinate of a diagonal P.
  eval::Mat6 cov = eval::Mat6::Zero();
  Eigen::Matrix<double, 6, 1> sigma;
  sigma << 0.1, 0.2, 0.3, 0.01, 0.02, 0.03;
  for (int i = 0; i < 6; ++i) cov(i, i) = sigma(i) * sigma(i);

  // Single-sample trajectory pair is degenerate for Sim(3); use the raw
  // quadratic form by constructing a well-spread trajectory whose errors
  // are exactly one sigma in the frame where alignment is identity.
  // Alignment over many samples with zero-mean structured errors stays
  // near identity only approximately, so pin it with exact zeros on all
  // but one sample and check that sample's contribution analytically
  // instead: e^T P^-1 e with e = sigma gives exactly 6.
  Eigen::Matrix<double, 6, 1> e = sigma;
  const double nees_value = e.dot(cov.inverse() * e);
  CHECK(nees_value == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("a consistent estimator's NEES stays inside the chi-square band") {
  // 500 pose samples drawn exactly from the reported covariance; the mean
  // NEES of a chi-square(6) sample of this size lands in [5.2, 6.9] (the
  // Sim(3) gauge alignment absorbs a few DoF and biases it slightly low).
  std::mt19937 rng(13);
  std::normal_distribution<double> g(0.0, 1.0);

  eval::Mat6 cov = eval::Mat6::Zero();
  Eigen::Matrix<double, 6, 1> sigma;
  sigma << 0.05, 0.05, 0.05, 0.005, 0.005, 0.005;
  for (int i = 0; i < 6; ++i) cov(i, i) = sigma(i) * sigma(i);

  Trajectory ref, est;
  std::vector<eval::Mat6> covs;
  for (int i = 0; i < 500; ++i) {
    Trajectory::Sample truth;
    truth.t = 0.1 * i;
    // Spread-out, non-collinear truth so the alignment is well-determined.
    truth.pose.p = geom::Vec3(10.0 * std::sin(0.05 * i),
                              10.0 * std::cos(0.07 * i), 0.5 * i);
    truth.pose.q = geom::exp_so3(geom::Vec3(0.0, 0.001 * i, 0.0));
    ref.samples.push_back(truth);

    Trajectory::Sample noisy = truth;
    noisy.pose.p += geom::Vec3(sigma(0) * g(rng), sigma(1) * g(rng),
                               sigma(2) * g(rng));
    noisy.pose.q = geom::canonicalized(
        geom::exp_so3(geom::Vec3(sigma(3) * g(rng), sigma(4) * g(rng),
                                 sigma(5) * g(rng))) *
        truth.pose.q);
    est.samples.push_back(noisy);
    covs.push_back(cov);
  }

  const auto res = eval::nees(est, covs, ref, 0.01);
  REQUIRE(res.ok());
  CHECK(res.matched == 500);
  CHECK(res.mean > 5.2);
  CHECK(res.mean < 6.9);
  // The quoted band in the report brackets 6 as well.
  CHECK(res.lower95 < 6.0);
  CHECK(res.upper95 > 6.0);
}

TEST_CASE("singular covariance is reported") {
  std::vector<double> t{0.0, 0.1, 0.2, 0.3};
  std::vector<geom::Vec3> p{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 1}};
  const auto traj = trajectory_from(t, p);
  std::vector<eval::Mat6> covs(4, eval::Mat6::Zero());  // singular
  const auto res = eval::nees(traj, covs, traj, 0.01);
  CHECK(res.status == eval::EvalStatus::kSingularCovariance);
}

TEST_CASE("chi-square quantiles bracket the mean") {
  CHECK(eval::chi_square_quantile(6.0, 0.5) == doctest::Approx(5.35).epsilon(0.01));
  CHECK(eval::chi_square_quantile(6.0, 0.975) ==
        doctest::Approx(14.45).epsilon(0.01));
  CHECK(eval::chi_square_quantile(6.0, 0.025) ==
        doctest::Approx(1.24).epsilon(0.02));
}
