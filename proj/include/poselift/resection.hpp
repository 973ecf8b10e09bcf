#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "poselift/library.hpp"
#include "poselift/matcher.hpp"
#include "poselift/types.hpp"

namespace poselift {

struct RefineConfig {
  int max_iterations = 50;
  double residual_tolerance = 1e-6;  // px^2 improvement below which we stop
  double damping_init = 1e-3;
};

struct RefinedCandidate {
  std::int64_t exemplar_id = -1;
  CameraModel camera_star;
  double error_before = 0.0;  // px^2 against the target
  double error_after = 0.0;
  int iterations_used = 0;
  bool singular = false;  // normal equations were rank-deficient at the start
};

// Stacked pixel residuals of project(pose, cam) - target, 2N values.
Eigen::VectorXd projection_residuals(const Pose3D& pose, const CameraModel& cam,
                                     const Pose2D& target);

// Analytic Jacobian of the stacked residuals w.r.t. the six extrinsic
// parameters (axis-angle increment applied on the left of R, then
// translation), evaluated at the current camera. 2N x 6.
Eigen::MatrixXd projection_jacobian(const Pose3D& pose, const CameraModel& cam);

// Re-optimizes rotation and translation to minimize squared reprojection
// error against the target; intrinsics stay fixed. Levenberg-damped
// Gauss-Newton: rejected steps multiply the damping by 10, accepted steps
// divide it by 10. Never returns a camera worse than the input.
RefinedCandidate resection(const Pose3D& pose3d, const Pose2D& target,
                           const CameraModel& init_cam,
                           const RefineConfig& cfg = {});

// Runs resection on every shortlist candidate independently (in parallel)
// and re-sorts ascending by error_after, ties by id. Candidates whose
// refinement fails keep their unrefined camera and error.
std::vector<RefinedCandidate> refine_shortlist(const ExemplarLibrary& lib,
                                               const Pose2D& query,
                                               const MatchResult& shortlist,
                                               const RefineConfig& cfg = {});

}  // namespace poselift
