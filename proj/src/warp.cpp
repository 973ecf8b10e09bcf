#include "poselift/warp.hpp"

#include <chrono>

#include "poselift/geometry.hpp"

namespace poselift {

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

WarpedPose warp_exemplar(const Pose3D& exemplar_pose, const CameraModel& cam,
                         const Pose2D& query) {
  if (!same_skeleton(exemplar_pose.skeleton, query.skeleton)) {
    throw SkeletonMismatch("warp_exemplar: skeletons differ");
  }
  const Pose3D aligned = apply_extrinsics(exemplar_pose, cam);
  double depth_sum = 0.0;
  for (std::size_t j = 0; j < aligned.joints.size(); ++j) {
    if (!(aligned.joints[j].z() > 0)) {
      throw NonPositiveDepth(static_cast<int>(j));
    }
    depth_sum += aligned.joints[j].z();
  }
  const double mean_depth =
      depth_sum / static_cast<double>(aligned.joints.size());
  const double s = mean_depth / cam.focal;

  std::vector<Eigen::Vector3d> joints;
  joints.reserve(aligned.joints.size());
  for (std::size_t j = 0; j < aligned.joints.size(); ++j) {
    const Eigen::Vector2d centered =
        query.joints[j] - cam.principal_point;
    joints.emplace_back(s * centered.x(), s * centered.y(),
                        aligned.joints[j].z());
  }
  WarpedPose out;
  out.pose3d_star = Pose3D{exemplar_pose.skeleton, std::move(joints)};
  out.scale_s = s;
  return out;
}

LiftResult lift(const ExemplarLibrary& lib, const Pose2D& query,
                const MatchConfig& match_cfg, const RefineConfig& refine_cfg,
                bool use_refine, bool use_warp, LiftTimings* timings) {
  auto t0 = std::chrono::steady_clock::now();
  const MatchResult shortlist = match(lib, query, match_cfg);
  if (timings) timings->match_ms = ms_since(t0);

  std::int64_t chosen_id = shortlist.candidates.front().first;
  CameraModel chosen_cam =
      lib.entries()[static_cast<std::size_t>(chosen_id)].camera;
  bool refined = false;

  if (use_refine) {
    t0 = std::chrono::steady_clock::now();
    const std::vector<RefinedCandidate> refined_list =
        refine_shortlist(lib, query, shortlist, refine_cfg);
    if (timings) timings->refine_ms = ms_since(t0);
    chosen_id = refined_list.front().exemplar_id;
    chosen_cam = refined_list.front().camera_star;
    refined = true;
  }

  const Exemplar& chosen = lib.entries()[static_cast<std::size_t>(chosen_id)];
  LiftResult result;
  result.exemplar_id = chosen_id;
  result.camera = chosen_cam;
  result.refined = refined;
  result.unwarped = apply_extrinsics(chosen.pose3d, chosen_cam);
  result.residual_px2 =
      reprojection_error(project(chosen.pose3d, chosen_cam), query);

  if (use_warp) {
    t0 = std::chrono::steady_clock::now();
    WarpedPose warped = warp_exemplar(chosen.pose3d, chosen_cam, query);
    warped.source_exemplar_id = chosen_id;
    result.warped = std::move(warped);
    if (timings) timings->warp_ms = ms_since(t0);
  }
  return result;
}

}  // namespace poselift
