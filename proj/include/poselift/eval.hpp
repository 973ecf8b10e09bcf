#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poselift/library.hpp"
#include "poselift/types.hpp"

namespace poselift {

enum class ProtocolMode {
  P1_Rigid,        // rigid alignment (rotation + translation) before MPJPE
  P2_RootCentered, // both poses root-centered, no rotation or scale
  RigidPlusScale,  // rigid alignment including isotropic scale
};

struct EvalProtocol {
  ProtocolMode mode = ProtocolMode::P1_Rigid;
  bool include_root_in_mpjpe = true;
};

struct ProcrustesResult {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
  double scale = 1.0;
  Pose3D aligned;  // transform applied to the source
};

// Closed-form similarity (or rigid, scale = 1) transform minimizing
// sum_j ||s R src_j + t - tgt_j||^2, via SVD of the centered cross-covariance
// with the determinant-sign correction. Throws DegenerateConfiguration when
// the joints are collinear or coincident (two smallest singular values below
// 1e-9 of the largest).
ProcrustesResult procrustes_align(const Pose3D& source, const Pose3D& target,
                                  bool with_scale);

// Mean per-joint position error in millimeters under the given protocol.
// Alignment is always pred -> gt.
double mpjpe(const Pose3D& pred, const Pose3D& gt, const EvalProtocol& protocol);

// Per-joint distances after protocol alignment (N values); the mean over
// included joints is mpjpe.
std::vector<double> per_joint_errors(const Pose3D& pred, const Pose3D& gt,
                                     const EvalProtocol& protocol);

struct EvalQuery {
  Pose2D query;
  Pose3D gt;
  std::string activity;
};

struct EvalReport {
  std::map<std::string, double> per_activity_mean;  // mm
  double overall_mean = 0.0;    // mm
  double overall_median = 0.0;  // mm, median of per-query MPJPE values
  std::vector<double> per_joint_mean;  // mm, N values
  std::int64_t count = 0;   // queries evaluated
  std::int64_t failed = 0;  // queries excluded because lifting/eval threw
};

using LiftFn = std::function<Pose3D(const EvalQuery&)>;

// Applies lift_fn to every query (in parallel; aggregation is order
// independent), computes MPJPE, and aggregates. Per-query failures are
// counted and excluded, never imputed.
EvalReport evaluate(const LiftFn& lift_fn, std::span<const EvalQuery> queries,
                    const EvalProtocol& protocol);

// Weak-perspective warp with ground-truth depths: s = mean(Z_gt)/f,
// output joint = (s*(x - cx), s*(y - cy), Z_gt).
Pose3D upper_bound_gt_depth(const Pose2D& query, const Pose3D& gt,
                            const CameraModel& cam);

// Exhaustive argmin over exemplars of rigid-aligned MPJPE against gt;
// ties go to the lower id.
std::int64_t oracle_best_exemplar(const ExemplarLibrary& lib, const Pose3D& gt,
                                  const EvalProtocol& protocol);

nlohmann::json report_to_json(const EvalReport& report);
// Paper-style table: activities as columns, Avg. and Median last.
std::string report_to_csv(const EvalReport& report);

}  // namespace poselift
