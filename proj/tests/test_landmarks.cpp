/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "landmarks.hpp"

#include <cmath>

#include <doctest.h>

using namespace tvo;

namespace {

const geom::CameraIntrinsics kIntr{200.0, 200.0, 120.0, 90.0, 240, 180};

Eskf fresh_filter() {
  NoiseConfig noise;
  Eskf filter(kIntr, noise);
  filter.states().covariance() =
      0.01 * Eigen::MatrixXd::Identity(9, 9);
  return filter;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m)
      .eigenvalues()
      .minCoeff();
}

}  // namespace

TEST_CASE("registering a feature clones the pose and starts a pending entry") {
  auto filter = fresh_filter();
  LandmarkPipeline pipeline(1.0 * M_PI / 180.0);

  TrackUpdate msg{0.1, 7, 130.0, 95.0};
  REQUIRE(pipeline.register_feature(filter, msg) == StateOpStatus::kOk);
  CHECK(pipeline.has_pending(7));
  CHECK(filter.states().dim() == 15);  // grew by 6
  CHECK(filter.states().has_clone(7));
  const auto* pf = pipeline.pending(7);
  REQUIRE(pf);
  CHECK(pf->obs_count == 1);
  CHECK(pf->first_obs == geom::Vec2(130.0, 95.0));

  CHECK(pipeline.register_feature(filter, msg) ==
        StateOpStatus::kDuplicateFeature);
}

TEST_CASE("fifty new features grow the covariance to 9 + 300") {
  auto filter = fresh_filter();
  LandmarkPipeline pipeline(1.0 * M_PI / 180.0);
  for (int i = 1; i <= 50; ++i) {
    TrackUpdate msg{0.01 * i, i, 100.0 + i, 80.0};
    REQUIRE(pipeline.register_feature(filter, msg) == StateOpStatus::kOk);
  }
  CHECK(filter.states().dim() == 9 + 50 * kCloneDim);
  CHECK(pipeline.pending_count() == 50);
}

TEST_CASE("parallax is zero for identical poses and pixels") {
  const geom::Pose pose;
  CHECK(parallax_of(pose, geom::Vec2(50, 60), pose, geom::Vec2(50, 60),
                    kIntr) == doctest::Approx(0.0));
}

TEST_CASE("parallax matches the analytic ray angle under viewpoint change") {
  // Point on the first camera's optical axis at depth 2; second camera off
  // to the side looking at it with 90 degrees between the rays.
  const geom::Vec3 point(0.0, 0.0, 2.0);
  geom::Pose pose_a;
  geom::Pose pose_b;
  pose_b.p = geom::Vec3(2.0, 0.0, 2.0);
  pose_b.q = geom::exp_so3(geom::Vec3(0.0, -M_PI / 2.0, 0.0));

  const auto z_a = geom::project(kIntr, pose_a, point);
  const auto z_b = geom::project(kIntr, pose_b, point);
  REQUIRE(z_a);
  REQUIRE(z_b);
  const double angle = parallax_of(pose_a, *z_a, pose_b, *z_b, kIntr);
  CHECK(angle == doctest::Approx(M_PI / 2.0).epsilon(1e-9));
}

TEST_CASE("pure rotation yields no parallax despite large pixel motion") {
  const geom::Vec3 point(0.5, 0.2, 3.0);
  geom::Pose pose_a;
  geom::Pose pose_b;
  pose_b.q = geom::exp_so3(geom::Vec3(0.0, 0.15, 0.0));  // same center

  const auto z_a = geom::project(kIntr, pose_a, point);
  const auto z_b = geom::project(kIntr, pose_b, point);
  REQUIRE(z_a);
  REQUIRE(z_b);
  CHECK((*z_a - *z_b).norm() > 10.0);  // large pixel displacement
  CHECK(parallax_of(pose_a, *z_a, pose_b, *z_b, kIntr) < 1e-9);
}

TEST_CASE("below-threshold observations stay pending") {
  auto filter = fresh_filter();
  LandmarkPipeline pipeline(1.0 * M_PI / 180.0);
  TrackUpdate first{0.0, 3, 130.0, 95.0};
  REQUIRE(pipeline.register_feature(filter, first) == StateOpStatus::kOk);
  const int dim_before = filter.states().dim();

  // No camera motion: zero parallax.
  TrackUpdate second{0.1, 3, 130.4, 95.1};
  CHECK(pipeline.try_triangulate(filter, second) ==
        TriangulateOutcome::kStillPending);
  CHECK(filter.states().dim() == dim_before);
  CHECK(pipeline.pending(3)->obs_count == 2);
  CHECK(pipeline.pending(3)->latest_obs == geom::Vec2(130.4, 95.1));
}

TEST_CASE("sufficient parallax triangulates within 1e-6 of the truth") {
  auto filter = fresh_filter();
  LandmarkPipeline pipeline(1.0 * M_PI / 180.0);

  const geom::Vec3 truth(0.3, -0.2, 3.0);
  const auto z0 = geom::project(kIntr, filter.states().state().pose(), truth);
  REQUIRE(z0);
  TrackUpdate first{0.0, 4, z0->x(), z0->y()};
  REQUIRE(pipeline.register_feature(filter, first) == StateOpStatus::kOk);

  // Move the camera sideways: ~5 degrees of parallax at 3 m depth.
  filter.states().state().p = geom::Vec3(0.26, 0.0, 0.0);
  const auto z1 = geom::project(kIntr, filter.states().state().pose(), truth);
  REQUIRE(z1);
  TrackUpdate second{0.5, 4, z1->x(), z1->y()};
  CHECK(pipeline.try_triangulate(filter, second) ==
        TriangulateOutcome::kInserted);

  REQUIRE(filter.states().has_landmark(4));
  CHECK(!filter.states().has_clone(4));
  CHECK(!pipeline.has_pending(4));
  CHECK(filter.states().dim() == 12);
  CHECK((filter.states().landmark(4) - truth).norm() < 1e-6);

  const auto& p = filter.states().covariance();
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(min_eigenvalue(p) >= -1e-9 * p.trace());
}

TEST_CASE("cheirality failure rejects and drops the feature") {
  auto filter = fresh_filter();
  LandmarkPipeline pipeline(1.0 * M_PI / 180.0);

  TrackUpdate first{0.0, 9, 120.0, 90.0};
  REQUIRE(pipeline.register_feature(filter, first) == StateOpStatus::kOk);

  // Move and pick a pixel whose rays diverge (intersection behind).
  filter.states().state().p = geom::Vec3(0.4, 0.0, 0.0);
  TrackUpdate second{0.5, 9, 160.0, 90.0};
  CHECK(pipeline.try_triangulate(filter, second) ==
        TriangulateOutcome::kRejected);
  CHECK(!pipeline.has_pending(9));
  CHECK(!filter.states().has_clone(9));
  CHECK(filter.states().dim() == 9);
}

TEST_CASE("finite-difference jacobians are step-size stable") {
  geom::Pose pose_a;
  geom::Pose pose_b;
  pose_b.p = geom::Vec3(0.3, 0.05, 0.0);
  pose_b.q = geom::exp_so3(geom::Vec3(0.01, -0.02, 0.005));
  const geom::Vec3 truth(0.2, 0.1, 2.5);
  const auto z_a = geom::project(kIntr, pose_a, truth);
  const auto z_b = geom::project(kIntr, pose_b, truth);
  REQUIRE(z_a);
  REQUIRE(z_b);

  // Two independent step choices must agree to 1e-3 relative.
  const auto coarse = triangulation_jacobians(pose_a, pose_b, *z_a, *z_b,
                                              kIntr, 1e-5, 1e-3);
  const auto fine = triangulation_jacobians(pose_a, pose_b, *z_a, *z_b, kIntr,
                                            1e-7, 1e-5);
  REQUIRE(coarse);
  REQUIRE(fine);

  auto rel = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() /
           std::max(1.0, b.cwiseAbs().maxCoeff());
  };
  CHECK(rel(coarse->d_pose_a, fine->d_pose_a) < 1e-3);
  CHECK(rel(coarse->d_pose_b, fine->d_pose_b) < 1e-3);
  CHECK(rel(coarse->d_z_a, fine->d_z_a) < 1e-3);
  CHECK(rel(coarse->d_z_b, fine->d_z_b) < 1e-3);
}

TEST_CASE("a feature id lives in exactly one registry at all times") {
  auto filter = fresh_filter();
  LandmarkPipeline pipeline(1.0 * M_PI / 180.0);

  const geom::Vec3 truth(-0.2, 0.15, 2.0);
  const auto z0 = geom::project(kIntr, filter.states().state().pose(), truth);
  TrackUpdate first{0.0, 11, z0->x(), z0->y()};
  REQUIRE(pipeline.register_feature(filter, first) == StateOpStatus::kOk);
  CHECK((pipeline.has_pending(11) && !filter.states().has_landmark(11)));
  // Covariance dimension tracks 9 + 3 mapped + 6 pending.
  CHECK(filter.states().dim() == 9 + 6 * pipeline.pending_count());

  filter.states().state().p = geom::Vec3(0.25, 0.0, 0.0);
  const auto z1 = geom::project(kIntr, filter.states().state().pose(), truth);
  TrackUpdate second{0.4, 11, z1->x(), z1->y()};
  REQUIRE(pipeline.try_triangulate(filter, second) ==
          TriangulateOutcome::kInserted);
  CHECK((!pipeline.has_pending(11) && filter.states().has_landmark(11)));
  CHECK(filter.states().dim() ==
        9 + 3 * filter.states().landmark_count() +
            6 * pipeline.pending_count());

  pipeline.remove(filter, 11);  // deletion path: landmark handled by Eskf
  filter.states().marginalize(11);
  CHECK((!pipeline.has_pending(11) && !filter.states().has_landmark(11)));
}
