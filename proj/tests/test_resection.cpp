#include <random>

#include "doctest.h"
#include "poselift/geometry.hpp"
#include "poselift/matcher.hpp"
#include "poselift/resection.hpp"
#include "support/test_util.hpp"

using namespace poselift;

namespace {

CameraModel perturb(std::mt19937_64& rng, const CameraModel& cam,
                    double max_angle_rad, double max_shift_mm) {
  CameraModel out = cam;
  Eigen::Vector3d axis(testutil::uniform(rng, -1, 1),
                       testutil::uniform(rng, -1, 1),
                       testutil::uniform(rng, -1, 1));
  axis.normalize();
  out.rotation =
      rodrigues(axis * testutil::uniform(rng, 0, max_angle_rad)) * cam.rotation;
  out.translation += Eigen::Vector3d(testutil::uniform(rng, -1, 1),
                                     testutil::uniform(rng, -1, 1),
                                     testutil::uniform(rng, -1, 1))
                         .normalized() *
                     testutil::uniform(rng, 0, max_shift_mm);
  return out;
}

}  // namespace

TEST_SUITE("resection") {

TEST_CASE("analytic jacobian matches central finite differences") {
  std::mt19937_64 rng(1);
  auto skel = testutil::chain_skeleton(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Pose3D pose = testutil::random_pose(rng, skel);
    const CameraModel cam = testutil::random_camera(rng);
    const Pose2D target = project(testutil::random_pose(rng, skel),
                                  testutil::random_camera(rng));

    const Eigen::MatrixXd analytic = projection_jacobian(pose, cam);

    Eigen::MatrixXd numeric(analytic.rows(), 6);
    const double h_rot = 1e-7;
    const double h_trans = 1e-4;
    for (int p = 0; p < 6; ++p) {
      const double h = p < 3 ? h_rot : h_trans;
      CameraModel plus = cam;
      CameraModel minus = cam;
      if (p < 3) {
        Eigen::Vector3d delta = Eigen::Vector3d::Zero();
        delta(p) = h;
        plus.rotation = rodrigues(delta) * cam.rotation;
        minus.rotation = rodrigues(-delta) * cam.rotation;
      } else {
        plus.translation(p - 3) += h;
        minus.translation(p - 3) -= h;
      }
      numeric.col(p) = (projection_residuals(pose, plus, target) -
                        projection_residuals(pose, minus, target)) /
                       (2.0 * h);
    }
    const double scale = analytic.norm();
    CHECK((analytic - numeric).norm() <= 1e-5 * scale);
  }
}

TEST_CASE("already-optimal target terminates immediately with zero error") {
  std::mt19937_64 rng(2);
  auto skel = testutil::chain_skeleton(11);
  const Pose3D pose = testutil::random_pose(rng, skel);
  const CameraModel cam = testutil::random_camera(rng);
  const Pose2D target = project(pose, cam);
  const RefinedCandidate rc = resection(pose, target, cam, RefineConfig{});
  CHECK(rc.error_before == doctest::Approx(0.0));
  CHECK(rc.error_after == doctest::Approx(0.0));
  CHECK(rc.iterations_used <= 2);
  CHECK(!rc.singular);
}

TEST_CASE("recovers a ground-truth camera from a perturbed initialization") {
  std::mt19937_64 rng(3);
  auto skel = testutil::chain_skeleton(17);
  int recovered = 0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    const Pose3D pose = testutil::random_pose(rng, skel);
    const CameraModel cam_true = testutil::random_camera(rng);
    const Pose2D target = project(pose, cam_true);
    const CameraModel init = perturb(rng, cam_true, 2.0 * M_PI / 180.0, 20.0);

    const RefinedCandidate rc = resection(pose, target, init, RefineConfig{});
    CHECK(rc.error_after <= rc.error_before + 1e-9);
    if (rc.error_after < 1e-6) {
      ++recovered;
      CHECK(rotation_geodesic_angle(rc.camera_star.rotation,
                                    cam_true.rotation) < 1e-3);
      CHECK((rc.camera_star.translation - cam_true.translation).norm() < 1e-3);
    }
  }
  CHECK(recovered == trials);
}

TEST_CASE("error never worsens on random pose-target pairs") {
  std::mt19937_64 rng(4);
  auto skel = testutil::chain_skeleton(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose3D pose = testutil::random_pose(rng, skel);
    const CameraModel init = testutil::random_camera(rng);
    // Target unrelated to the pose: a genuinely non-zero-residual problem.
    const Pose2D target = project(testutil::random_pose(rng, skel),
                                  testutil::random_camera(rng));
    const RefinedCandidate rc = resection(pose, target, init, RefineConfig{});
    CHECK(rc.error_after <= rc.error_before + 1e-9);
  }
}

TEST_CASE("degenerate geometry returns the init camera with a singular flag") {
  auto skel = testutil::chain_skeleton(4);
  // All joints coincide: the jacobian cannot constrain rotation.
  const Pose3D pose = make_pose3d(
      skel, {{0.0, 0.0, 5000.0}, {0.0, 0.0, 5000.0}, {0.0, 0.0, 5000.0},
             {0.0, 0.0, 5000.0}});
  CameraModel cam;
  cam.focal = 1000.0;
  const Pose2D target =
      make_pose2d(skel, {{10.0, 0.0}, {0.0, 10.0}, {-10.0, 0.0}, {0.0, -10.0}});
  const RefinedCandidate rc = resection(pose, target, cam, RefineConfig{});
  CHECK(rc.singular);
  CHECK(rc.error_after == rc.error_before);
  CHECK(rc.camera_star.rotation == cam.rotation);
  CHECK(rc.camera_star.translation == cam.translation);
}

TEST_CASE("resection respects config validation") {
  std::mt19937_64 rng(5);
  auto skel = testutil::chain_skeleton(4);
  const Pose3D pose = testutil::random_pose(rng, skel);
  const CameraModel cam = testutil::random_camera(rng);
  const Pose2D target = project(pose, cam);
  RefineConfig bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(resection(pose, target, cam, bad), ConfigInvalid);
}

TEST_CASE("refine_shortlist can reorder candidates when refinement fixes one") {
  auto skel = testutil::chain_skeleton(4);
  CameraModel cam;
  cam.focal = 1000.0;
  const Pose3D pose_a = make_pose3d(skel, {{-200.0, -200.0, 4800.0},
                                           {200.0, -210.0, 5100.0},
                                           {180.0, 220.0, 4900.0},
                                           {-150.0, 260.0, 5200.0}});
  // Entry b is entry a seen from a slightly rotated camera; entry a's own
  // projection is distorted so it cannot reach zero.
  const Eigen::Matrix3d r_small =
      rodrigues(Eigen::Vector3d(0.0, 4.0 * M_PI / 180.0, 0.0));
  CameraModel cam_rot = cam;
  cam_rot.rotation = r_small;

  // The query is pose_a's projection under cam_rot.
  const Pose2D query = project(pose_a, cam_rot);

  // Entry 0: a pose whose straight projection is close to the query but that
  // cannot be fixed by a camera move (different shape).
  std::vector<Eigen::Vector2d> near_query;
  for (const auto& j : query.joints) {
    near_query.push_back(j + Eigen::Vector2d(3.0, -2.0));
  }
  std::vector<Eigen::Vector3d> shape0;
  for (std::size_t j = 0; j < near_query.size(); ++j) {
    const double depth = 5000.0 + 40.0 * static_cast<double>(j);
    shape0.emplace_back(near_query[j].x() * depth / cam.focal,
                        near_query[j].y() * depth / cam.focal, depth);
  }
  // Perturb one joint in 3D so no rigid camera motion can zero the residual.
  shape0[2] += Eigen::Vector3d(120.0, -90.0, 300.0);

  std::vector<PoseRecord> records;
  records.push_back(PoseRecord{make_pose3d(skel, shape0), cam, "", ""});
  records.push_back(PoseRecord{pose_a, cam, "", ""});
  const auto lib = build_library(records);

  MatchConfig mcfg;
  mcfg.k = 2;
  const MatchResult shortlist = match(lib, query, mcfg);
  // Sanity: before refinement, entry 0 should win on raw error.
  REQUIRE(shortlist.candidates.size() == 2);
  REQUIRE(shortlist.candidates[0].first == 0);

  const auto refined = refine_shortlist(lib, query, shortlist, RefineConfig{});
  REQUIRE(refined.size() == 2);
  CHECK(refined[0].exemplar_id == 1);  // the rotatable exemplar overtakes
  CHECK(refined[0].error_after < 1e-6);
  CHECK(refined[0].error_after <= refined[1].error_after);
}

TEST_CASE("refine_shortlist of size one preserves the candidate") {
  std::mt19937_64 rng(6);
  auto skel = testutil::chain_skeleton(8);
  std::vector<PoseRecord> records;
  records.push_back(PoseRecord{testutil::random_pose(rng, skel),
                               testutil::random_camera(rng), "", ""});
  const auto lib = build_library(records);
  MatchConfig mcfg;
  mcfg.k = 1;
  const Pose2D query = project(testutil::random_pose(rng, skel),
                               testutil::random_camera(rng));
  const auto shortlist = match(lib, query, mcfg);
  const auto refined = refine_shortlist(lib, query, shortlist, RefineConfig{});
  REQUIRE(refined.size() == 1);
  CHECK(refined[0].exemplar_id == 0);
  CHECK(refined[0].error_after <= refined[0].error_before + 1e-9);
}

TEST_CASE("the best refined error dominates the best unrefined error") {
  std::mt19937_64 rng(7);
  auto skel = testutil::chain_skeleton(12);
  std::vector<PoseRecord> records;
  for (int i = 0; i < 40; ++i) {
    records.push_back(PoseRecord{testutil::random_pose(rng, skel),
                                 testutil::random_camera(rng), "", ""});
  }
  const auto lib = build_library(records);
  MatchConfig mcfg;
  mcfg.k = 10;
  for (int trial = 0; trial < 10; ++trial) {
    const Pose2D query = project(testutil::random_pose(rng, skel),
                                 testutil::random_camera(rng));
    const auto shortlist = match(lib, query, mcfg);
    const auto refined = refine_shortlist(lib, query, shortlist, RefineConfig{});
    CHECK(refined.front().error_after <=
          shortlist.candidates.front().second + 1e-9);
    for (std::size_t i = 1; i < refined.size(); ++i) {
      CHECK(refined[i - 1].error_after <= refined[i].error_after);
    }
  }
}

}  // TEST_SUITE
