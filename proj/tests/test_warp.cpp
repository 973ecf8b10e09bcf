#include <random>

#include "doctest.h"
#include "poselift/eval.hpp"
#include "poselift/geometry.hpp"
#include "poselift/warp.hpp"
#include "support/test_util.hpp"

using namespace poselift;

namespace {

ExemplarLibrary small_library(std::mt19937_64& rng, const SkeletonPtr& skel,
                              int count) {
  std::vector<PoseRecord> records;
  CameraModel cam;
  cam.focal = 1150.0;
  cam.principal_point = {500.0, 500.0};
  for (int i = 0; i < count; ++i) {
    records.push_back(PoseRecord{testutil::random_pose(rng, skel), cam,
                                 "", ""});
  }
  return build_library(records);
}

}  // namespace

TEST_SUITE("warp") {

TEST_CASE("depths equal to the focal length give scale one and X* = (x, y, f)") {
  auto skel = testutil::chain_skeleton(4);
  const double f = 1000.0;
  const Pose3D pose = make_pose3d(skel, {{120.0, -40.0, f},
                                         {-80.0, 90.0, f},
                                         {10.0, 20.0, f},
                                         {-30.0, -60.0, f}});
  CameraModel cam;
  cam.focal = f;
  const Pose2D query = project(pose, cam);  // pp = (0,0)
  const WarpedPose warped = warp_exemplar(pose, cam, query);
  CHECK(warped.scale_s == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t j = 0; j < pose.joints.size(); ++j) {
    CHECK(warped.pose3d_star.joints[j].x() ==
          doctest::Approx(query.joints[j].x()).epsilon(1e-12));
    CHECK(warped.pose3d_star.joints[j].y() ==
          doctest::Approx(query.joints[j].y()).epsilon(1e-12));
    CHECK(warped.pose3d_star.joints[j].z() == f);
  }
}

TEST_CASE("warp preserves exemplar depths exactly and keeps depth order") {
  std::mt19937_64 rng(1);
  auto skel = testutil::chain_skeleton(12);
  const Pose3D pose = testutil::random_pose(rng, skel);
  CameraModel cam;
  cam.focal = 1150.0;
  cam.principal_point = {480.0, 520.0};
  const Pose2D query = testutil::random_pose2d(rng, skel);
  const WarpedPose warped = warp_exemplar(pose, cam, query);
  for (std::size_t j = 0; j < pose.joints.size(); ++j) {
    CHECK(warped.pose3d_star.joints[j].z() == pose.joints[j].z());
  }
}

TEST_CASE("weak-perspective limit: warp approaches the exemplar at flat depth") {
  std::mt19937_64 rng(2);
  auto skel = testutil::chain_skeleton(10);
  CameraModel cam;
  cam.focal = 1000.0;
  const double mean_depth = 100.0 * cam.focal;
  std::vector<Eigen::Vector3d> joints;
  for (int j = 0; j < 10; ++j) {
    joints.emplace_back(testutil::uniform(rng, -900, 900),
                        testutil::uniform(rng, -900, 900),
                        mean_depth +
                            testutil::uniform(rng, -0.01, 0.01) * mean_depth);
  }
  const Pose3D pose = make_pose3d(skel, joints);
  const Pose2D query = project(pose, cam);
  const WarpedPose warped = warp_exemplar(pose, cam, query);
  double diameter = 0.0;
  for (const auto& a : pose.joints) {
    for (const auto& b : pose.joints) {
      diameter = std::max(diameter, (a - b).norm());
    }
  }
  for (std::size_t j = 0; j < joints.size(); ++j) {
    CHECK((warped.pose3d_star.joints[j] - pose.joints[j]).norm() <
          0.01 * diameter);
  }
}

TEST_CASE("doubling exemplar depths doubles the scale and the XY output") {
  std::mt19937_64 rng(3);
  auto skel = testutil::chain_skeleton(6);
  const Pose3D pose = testutil::random_pose(rng, skel);
  CameraModel cam;
  cam.focal = 1100.0;
  cam.principal_point = {300.0, 200.0};
  const Pose2D query = testutil::random_pose2d(rng, skel);

  std::vector<Eigen::Vector3d> doubled;
  for (const auto& j : pose.joints) {
    doubled.emplace_back(j.x(), j.y(), 2.0 * j.z());
  }
  const WarpedPose a = warp_exemplar(pose, cam, query);
  const WarpedPose b = warp_exemplar(make_pose3d(skel, doubled), cam, query);
  CHECK(b.scale_s == doctest::Approx(2.0 * a.scale_s).epsilon(1e-12));
  for (std::size_t j = 0; j < pose.joints.size(); ++j) {
    CHECK(b.pose3d_star.joints[j].x() ==
          doctest::Approx(2.0 * a.pose3d_star.joints[j].x()).epsilon(1e-12));
    CHECK(b.pose3d_star.joints[j].y() ==
          doctest::Approx(2.0 * a.pose3d_star.joints[j].y()).epsilon(1e-12));
  }
}

TEST_CASE("warp output reprojects onto the camera-centered query exactly") {
  std::mt19937_64 rng(4);
  auto skel = testutil::chain_skeleton(9);
  const Pose3D pose = testutil::random_pose(rng, skel);
  CameraModel cam;
  cam.focal = 1150.0;
  cam.principal_point = {500.0, 500.0};
  const Pose2D query = testutil::random_pose2d(rng, skel, 300.0);
  const WarpedPose warped = warp_exemplar(pose, cam, query);
  // Weak-perspective projection with scale s: x = f * X / mean(Z).
  double mean_depth = 0.0;
  for (const auto& j : warped.pose3d_star.joints) mean_depth += j.z();
  mean_depth /= static_cast<double>(warped.pose3d_star.joints.size());
  for (std::size_t j = 0; j < query.joints.size(); ++j) {
    const double px =
        cam.focal * warped.pose3d_star.joints[j].x() / mean_depth;
    const double py =
        cam.focal * warped.pose3d_star.joints[j].y() / mean_depth;
    CHECK(px == doctest::Approx(query.joints[j].x() -
                                cam.principal_point.x()).epsilon(1e-9));
    CHECK(py == doctest::Approx(query.joints[j].y() -
                                cam.principal_point.y()).epsilon(1e-9));
  }
}

TEST_CASE("constant-depth exemplar with its exact projection round-trips") {
  auto skel = testutil::chain_skeleton(5);
  const double depth = 4200.0;
  std::vector<Eigen::Vector3d> joints;
  for (int j = 0; j < 5; ++j) {
    joints.emplace_back(-400.0 + 200.0 * j, 100.0 * (j % 3) - 100.0, depth);
  }
  const Pose3D pose = make_pose3d(skel, joints);
  CameraModel cam;
  cam.focal = 1234.0;
  cam.principal_point = {640.0, 360.0};
  const Pose2D query = project(pose, cam);
  const WarpedPose warped = warp_exemplar(pose, cam, query);
  for (std::size_t j = 0; j < joints.size(); ++j) {
    CHECK((warped.pose3d_star.joints[j] - pose.joints[j]).norm() < 1e-9);
  }
}

TEST_CASE("warp rejects non-positive depths and mismatched skeletons") {
  auto skel = testutil::chain_skeleton(2);
  CameraModel cam;
  const Pose3D behind = make_pose3d(skel, {{0.0, 0.0, 100.0},
                                           {0.0, 0.0, -10.0}});
  std::mt19937_64 rng(5);
  const Pose2D query = testutil::random_pose2d(rng, skel);
  CHECK_THROWS_AS(warp_exemplar(behind, cam, query), NonPositiveDepth);
  const Pose2D other = testutil::random_pose2d(rng, testutil::chain_skeleton(3));
  const Pose3D ok = make_pose3d(skel, {{0.0, 0.0, 100.0}, {10.0, 0.0, 90.0}});
  CHECK_THROWS_AS(warp_exemplar(ok, cam, other), SkeletonMismatch);
}

TEST_CASE("lift with an exact library query returns that exemplar unchanged") {
  std::mt19937_64 rng(6);
  auto skel = testutil::chain_skeleton(17);
  const auto lib = small_library(rng, skel, 40);
  const Pose2D query = lib.entries()[3].projection;

  const LiftResult plain = lift(lib, query, MatchConfig{}, RefineConfig{},
                                /*use_refine=*/false, /*use_warp=*/false);
  CHECK(plain.exemplar_id == 3);
  CHECK(!plain.warped.has_value());
  CHECK(plain.residual_px2 == doctest::Approx(0.0));
  // Identity extrinsics: the unwarped output is the library pose itself.
  for (std::size_t j = 0; j < plain.unwarped.joints.size(); ++j) {
    CHECK((plain.unwarped.joints[j] -
           lib.entries()[3].pose3d.joints[j]).norm() < 1e-12);
  }

  const LiftResult warped = lift(lib, query, MatchConfig{}, RefineConfig{},
                                 false, /*use_warp=*/true);
  REQUIRE(warped.warped.has_value());
  CHECK(warped.warped->source_exemplar_id == 3);
  for (std::size_t j = 0; j < warped.warped->pose3d_star.joints.size(); ++j) {
    CHECK(warped.warped->pose3d_star.joints[j].z() ==
          lib.entries()[3].pose3d.joints[j].z());
  }
}

TEST_CASE("lift with refinement reports the refined camera and residual") {
  std::mt19937_64 rng(7);
  auto skel = testutil::chain_skeleton(17);
  const auto lib = small_library(rng, skel, 60);
  // Query: entry 5 seen from a slightly rotated camera.
  CameraModel cam_rot = lib.entries()[5].camera;
  cam_rot.rotation =
      rodrigues(Eigen::Vector3d(0.0, 2.0 * M_PI / 180.0, 0.0)) *
      cam_rot.rotation;
  const Pose2D query = project(lib.entries()[5].pose3d, cam_rot);

  const LiftResult result = lift(lib, query, MatchConfig{}, RefineConfig{},
                                 /*use_refine=*/true, /*use_warp=*/true);
  CHECK(result.refined);
  CHECK(result.residual_px2 < 1e-6);
  CHECK(result.exemplar_id == 5);
  // The unwarped output follows the refined extrinsics.
  const Pose3D expected =
      apply_extrinsics(lib.entries()[5].pose3d, result.camera);
  for (std::size_t j = 0; j < expected.joints.size(); ++j) {
    CHECK((result.unwarped.joints[j] - expected.joints[j]).norm() < 1e-12);
  }
}

TEST_CASE("warped lift beats unwarped lift on noisy queries on average") {
  std::mt19937_64 rng(8);
  auto skel = testutil::chain_skeleton(17);
  const auto lib = small_library(rng, skel, 400);
  CameraModel cam = lib.entries()[0].camera;

  double sum_warped = 0.0;
  double sum_unwarped = 0.0;
  const EvalProtocol p1{ProtocolMode::P1_Rigid, true};
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    const Pose3D gt = testutil::random_pose(rng, skel);
    Pose2D query = project(gt, cam);
    for (auto& j : query.joints) {
      j.x() += 5.0 * testutil::uniform(rng, -1.0, 1.0);
      j.y() += 5.0 * testutil::uniform(rng, -1.0, 1.0);
    }
    const LiftResult result = lift(lib, query, MatchConfig{}, RefineConfig{},
                                   true, true);
    sum_unwarped += mpjpe(result.unwarped, gt, p1);
    sum_warped += mpjpe(result.warped->pose3d_star, gt, p1);
  }
  CHECK(sum_warped < sum_unwarped);
}

}  // TEST_SUITE
