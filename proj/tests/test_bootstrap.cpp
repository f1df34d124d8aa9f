/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "bootstrap.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

using namespace tvo;

namespace {

const geom::CameraIntrinsics kIntr{200.0, 200.0, 120.0, 90.0, 240, 180};

// Fronto-parallel plane z = depth with a feature grid that stays in view
// for small lateral camera motion.
std::vector<geom::Vec3> plane_grid(int count, double depth, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(-0.9, 0.9);
  std::uniform_real_distribution<double> uy(-0.6, 0.6);
  std::vector<geom::Vec3> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i)
    points.emplace_back(ux(rng), uy(rng), depth);
  return points;
}

// One update per feature, all at the same timestamp (a burst), projected
// from the given pose, with optional pixel noise.
void push_burst(Bootstrap& bootstrap, const std::vector<geom::Vec3>& points,
                const geom::Pose& pose, double t, double sigma,
                std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (size_t i = 0; i < points.size(); ++i) {
    const auto px = geom::project(kIntr, pose, points[i]);
    REQUIRE(px);
    TrackUpdate msg;
    msg.t = t;
    msg.id = static_cast<FeatureId>(i + 1);
    msg.u = px->x() + sigma * g(rng);
    msg.v = px->y() + sigma * g(rng);
    bootstrap.accumulate(msg);
  }
}

BootstrapConfig config_for(int n) {
  BootstrapConfig cfg;
  cfg.reference_size = n;
  cfg.min_displacement_px = 5.0;
  cfg.min_correspondences = 8;
  return cfg;
}

}  // namespace

TEST_CASE("the reference set freezes after N distinct features") {
  NoiseConfig noise;
  Bootstrap bootstrap(config_for(20), kIntr, noise);
  const auto points = plane_grid(25, 2.0, 3);
  std::mt19937 rng(5);

  geom::Pose origin;
  for (int i = 0; i < 19; ++i) {
    const auto px = geom::project(kIntr, origin, points[i]);
    bootstrap.accumulate({0.0, static_cast<FeatureId>(i + 1), px->x(), px->y()});
    CHECK(bootstrap.phase() == BootstrapPhase::kCollecting);
  }
  const auto px = geom::project(kIntr, origin, points[19]);
  CHECK(bootstrap.accumulate({0.0, 20, px->x(), px->y()}) ==
        BootstrapPhase::kReferenceFrozen);
  CHECK(bootstrap.reference_count() == 20);

  // A non-reference id after the freeze is ignored.
  bootstrap.accumulate({0.1, 999, 100.0, 80.0});
  CHECK(bootstrap.reference_count() == 20);
  CHECK(bootstrap.current_set().count(999) == 0);
}

TEST_CASE("the track smoother cuts the variance of stationary features") {
  // Stationary truth, 1 px noise, 50 updates at 50 Hz: the smoothed position
  // variance must drop below half the raw measurement variance.
  std::mt19937 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  const geom::Vec2 truth(100.0, 80.0);
  const double sigma = 1.0;

  double raw_sq = 0.0;
  double smoothed_sq = 0.0;
  const int trials = 300;
  for (int trial = 0; trial < trials; ++trial) {
    TrackSmoother smoother(truth + sigma * geom::Vec2(g(rng), g(rng)), 0.0,
                           sigma, 50.0);
    geom::Vec2 last_raw = geom::Vec2::Zero();
    for (int k = 1; k <= 50; ++k) {
      const geom::Vec2 z = truth + sigma * geom::Vec2(g(rng), g(rng));
      smoother.update(z, 0.02 * k);
      last_raw = z;
    }
    raw_sq += (last_raw - truth).squaredNorm();
    smoothed_sq += (smoother.position() - truth).squaredNorm();

    const Eigen::Matrix4d& cov = smoother.covariance();
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(cov)
              .eigenvalues()
              .minCoeff() >= -1e-9 * cov.trace());
  }
  CHECK(smoothed_sq / raw_sq < 0.5);
}

TEST_CASE("noise-free planar motion initializes within 1e-6") {
  NoiseConfig noise;
  noise.sigma_px = 0.0;  // declared noise-free
  auto cfg = config_for(20);
  Bootstrap bootstrap(cfg, kIntr, noise);
  Eskf filter(kIntr, noise);

  const double depth = 2.0;
  const auto points = plane_grid(20, depth, 11);
  std::mt19937 rng(13);

  geom::Pose ref_pose;  // identity: the global frame
  push_burst(bootstrap, points, ref_pose, 0.0, 0.0, rng);
  REQUIRE(bootstrap.phase() == BootstrapPhase::kReferenceFrozen);
  CHECK(!bootstrap.try_initialize(filter).has_value());  // no parallax yet

  geom::Pose cur_pose;
  cur_pose.p = geom::Vec3(0.12, 0.02, 0.0);  // lateral, ~12 px displacement
  push_burst(bootstrap, points, cur_pose, 0.5, 0.0, rng);

  const auto event = bootstrap.try_initialize(filter);
  REQUIRE(event.has_value());
  CHECK(bootstrap.phase() == BootstrapPhase::kInitialized);
  CHECK(event->t == 0.5);
  CHECK(event->landmark_count == 20);

  // Identity true rotation: recovered rotation within 1e-6 rad.
  CHECK(geom::log_so3(filter.states().state().q).norm() < 1e-6);

  // Scale-free seeding: |p| = 1 by the unit-baseline convention, along the
  // true direction.
  const geom::Vec3 direction = cur_pose.p.normalized();
  CHECK(filter.states().state().p.norm() == doctest::Approx(1.0));
  CHECK((filter.states().state().p.normalized() - direction).norm() < 1e-6);

  // Landmarks match the truth after Sim(3) alignment, relative to scene
  // scale.
  std::vector<geom::Vec3> est, truth;
  for (FeatureId id : filter.states().state().landmark_ids) {
    est.push_back(filter.states().landmark(id));
    truth.push_back(points[id - 1]);
  }
  const auto align = geom::umeyama_sim3(est, truth);
  REQUIRE(align.ok());
  double rmse = 0.0;
  for (size_t i = 0; i < est.size(); ++i)
    rmse += (truth[i] - align.transform.apply(est[i])).squaredNorm();
  rmse = std::sqrt(rmse / est.size());
  CHECK(rmse / depth < 1e-6);

  // The seeded state satisfies the state invariants.
  CHECK(filter.states().dim() == 9 + 3 * 20);
  const auto& p = filter.states().covariance();
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p)
            .eigenvalues()
            .minCoeff() >= -1e-9 * p.trace());
}

TEST_CASE("zero camera motion stays NotReady on the parallax gate") {
  NoiseConfig noise;
  Bootstrap bootstrap(config_for(12), kIntr, noise);
  Eskf filter(kIntr, noise);
  const auto points = plane_grid(12, 2.0, 17);
  std::mt19937 rng(19);

  geom::Pose pose;
  for (int burst = 0; burst < 5; ++burst)
    push_burst(bootstrap, points, pose, 0.1 * burst, 0.0, rng);
  CHECK(!bootstrap.try_initialize(filter).has_value());
  CHECK(bootstrap.diagnostic() == "parallax gate");
  CHECK(bootstrap.phase() == BootstrapPhase::kReferenceFrozen);
}

TEST_CASE("noisy initialization lands within 5% of scene depth") {
  NoiseConfig noise;
  noise.sigma_px = 1.0;
  auto cfg = config_for(30);
  Bootstrap bootstrap(cfg, kIntr, noise);
  Eskf filter(kIntr, noise);

  const double depth = 2.0;
  const auto points = plane_grid(30, depth, 23);
  std::mt19937 rng(29);

  // Camera slides sideways over ten bursts; the smoother sees each feature
  // ten times before the displacement gate opens. The final 0.3 m baseline
  // gives ~30 px of disparity at this depth.
  for (int k = 0; k <= 10; ++k) {
    geom::Pose pose;
    pose.p = geom::Vec3(0.03 * k, 0.0, 0.0);
    push_burst(bootstrap, points, pose, 0.05 * k, 1.0, rng);
  }
  const auto event = bootstrap.try_initialize(filter);
  REQUIRE(event.has_value());
  REQUIRE(event->landmark_count >= cfg.min_correspondences);

  std::vector<geom::Vec3> est, truth;
  for (FeatureId id : filter.states().state().landmark_ids) {
    est.push_back(filter.states().landmark(id));
    truth.push_back(points[id - 1]);
  }
  const auto align = geom::umeyama_sim3(est, truth);
  REQUIRE(align.ok());
  double rmse = 0.0;
  for (size_t i = 0; i < est.size(); ++i)
    rmse += (truth[i] - align.transform.apply(est[i])).squaredNorm();
  rmse = std::sqrt(rmse / est.size());
  CHECK(rmse / depth < 0.05);
}

TEST_CASE("deletions below the minimum re-seed the reference set") {
  NoiseConfig noise;
  auto cfg = config_for(10);
  Bootstrap bootstrap(cfg, kIntr, noise);
  const auto points = plane_grid(10, 2.0, 31);
  std::mt19937 rng(37);
  push_burst(bootstrap, points, geom::Pose{}, 0.0, 0.0, rng);
  REQUIRE(bootstrap.phase() == BootstrapPhase::kReferenceFrozen);

  TrackDeletion del;
  del.t = 0.1;
  del.ids = {1, 2};
  bootstrap.handle_deletion(del);
  // 8 survivors, exactly the minimum: still frozen.
  CHECK(bootstrap.phase() == BootstrapPhase::kReferenceFrozen);

  TrackDeletion del2;
  del2.t = 0.2;
  del2.ids = {3};
  bootstrap.handle_deletion(del2);
  // 7 survivors < min_correspondences = 8: start over.
  CHECK(bootstrap.phase() == BootstrapPhase::kCollecting);
  CHECK(bootstrap.reference_count() == 0);
}

TEST_CASE("initialization is invariant to the true scene scale") {
  // Scaling the scene and the motion together leaves all pixels unchanged,
  // so the seeded state is bitwise identical.
  NoiseConfig noise;
  noise.sigma_px = 0.0;
  const auto points = plane_grid(15, 2.0, 41);

  auto run_at_scale = [&](double c) {
    Bootstrap bootstrap(config_for(15), kIntr, noise);
    Eskf filter(kIntr, noise);
    std::mt19937 rng(43);
    std::vector<geom::Vec3> scaled;
    for (const auto& p : points) scaled.push_back(c * p);
    push_burst(bootstrap, scaled, geom::Pose{}, 0.0, 0.0, rng);
    geom::Pose moved;
    moved.p = c * geom::Vec3(0.1, 0.0, 0.0);
    push_burst(bootstrap, scaled, moved, 0.4, 0.0, rng);
    REQUIRE(bootstrap.try_initialize(filter).has_value());
    return filter.states().state();
  };

  const FilterState a = run_at_scale(1.0);
  const FilterState b = run_at_scale(3.0);
  CHECK((a.p - b.p).norm() < 1e-12);
  CHECK(std::abs(a.q.dot(b.q)) == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(a.landmark_positions.size() == b.landmark_positions.size());
  for (size_t i = 0; i < a.landmark_positions.size(); ++i)
    CHECK((a.landmark_positions[i] - b.landmark_positions[i]).norm() < 1e-9);
}
