#pragma once

#include <cstdint>
#include <optional>

#include "poselift/library.hpp"
#include "poselift/matcher.hpp"
#include "poselift/resection.hpp"
#include "poselift/types.hpp"

namespace poselift {

// Weak-perspective warp of an exemplar onto a query.
struct WarpedPose {
  Pose3D pose3d_star;
  double scale_s = 0.0;  // mm per pixel
  std::int64_t source_exemplar_id = -1;
};

// Aligns the exemplar into the camera frame with cam's extrinsics, then
// replaces (X, Y) with the scaled camera-centered query pixels:
//   s = mean(Z) / f,   joint j = (s*(x_j - cx), s*(y_j - cy), Z_j).
// Depths are copied from the exemplar untouched.
WarpedPose warp_exemplar(const Pose3D& exemplar_pose, const CameraModel& cam,
                         const Pose2D& query);

// End-to-end lifting result for one query.
struct LiftResult {
  std::int64_t exemplar_id = -1;
  CameraModel camera;             // refined when refinement ran
  Pose3D unwarped;                // exemplar pose in the camera frame
  std::optional<WarpedPose> warped;
  double residual_px2 = 0.0;      // perspective reprojection error vs query
  bool refined = false;
};

// Wall-clock of the lift stages, for reporting only.
struct LiftTimings {
  double match_ms = 0.0;
  double refine_ms = 0.0;
  double warp_ms = 0.0;
};

// match -> optional refine_shortlist -> top candidate -> optional warp.
LiftResult lift(const ExemplarLibrary& lib, const Pose2D& query,
                const MatchConfig& match_cfg, const RefineConfig& refine_cfg,
                bool use_refine, bool use_warp,
                LiftTimings* timings = nullptr);

}  // namespace poselift
