#pragma once

#include <Eigen/Core>

#include "poselift/types.hpp"

namespace poselift {

// Rigid transform into the camera frame: q = R*p + t for every joint.
Pose3D apply_extrinsics(const Pose3D& pose, const CameraModel& cam);

// Full perspective projection. Throws NonPositiveDepth if any joint has
// camera-frame depth z' <= 0.
Pose2D project(const Pose3D& pose, const CameraModel& cam);

// Sum over joints of squared pixel distance, ||a_j - b_j||^2.
// Throws SkeletonMismatch when the two poses disagree on the skeleton.
double reprojection_error(const Pose2D& a, const Pose2D& b);

// Rodrigues formula: rotation matrix for an axis-angle vector.
Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis_angle);

// Nearest orthonormal matrix with det +1 (polar factor via SVD).
Eigen::Matrix3d polar_orthonormalize(const Eigen::Matrix3d& m);

// Geodesic distance between two rotations, radians.
double rotation_geodesic_angle(const Eigen::Matrix3d& a,
                               const Eigen::Matrix3d& b);

}  // namespace poselift
