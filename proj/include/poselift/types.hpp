#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "poselift/errors.hpp"

namespace poselift {

// Joint hierarchy shared by every pose of a dataset. Immutable once built.
struct Skeleton {
  int joint_count = 0;
  std::vector<std::string> joint_names;
  int root_index = 0;
  std::vector<std::pair<int, int>> edges;  // (parent, child), spanning tree

  bool operator==(const Skeleton& other) const = default;
};

using SkeletonPtr = std::shared_ptr<const Skeleton>;

// Validates invariants (unique names, spanning tree rooted at root_index)
// and returns an immutable shared skeleton.
SkeletonPtr make_skeleton(std::vector<std::string> joint_names, int root_index,
                          std::vector<std::pair<int, int>> edges);

// Edge indices ordered so every parent joint precedes its children.
std::vector<int> topological_edge_order(const Skeleton& skeleton);

inline bool same_skeleton(const SkeletonPtr& a, const SkeletonPtr& b) {
  return a == b || (a && b && *a == *b);
}

// 3D pose in millimeters, camera coordinate frame.
struct Pose3D {
  SkeletonPtr skeleton;
  std::vector<Eigen::Vector3d> joints;

  int joint_count() const { return static_cast<int>(joints.size()); }
  const Eigen::Vector3d& root() const {
    return joints[static_cast<std::size_t>(skeleton->root_index)];
  }
  Eigen::Vector3d centroid() const;
};

// 2D pose in image pixels.
struct Pose2D {
  SkeletonPtr skeleton;
  std::vector<Eigen::Vector2d> joints;

  int joint_count() const { return static_cast<int>(joints.size()); }
  const Eigen::Vector2d& root() const {
    return joints[static_cast<std::size_t>(skeleton->root_index)];
  }
};

// Throw unless joint coordinates are finite and counts match the skeleton.
Pose3D make_pose3d(SkeletonPtr skeleton, std::vector<Eigen::Vector3d> joints);
Pose2D make_pose2d(SkeletonPtr skeleton, std::vector<Eigen::Vector2d> joints);

// Pinhole camera: intrinsics (focal, principal point) plus a rigid extrinsic
// transform taking library coordinates into the camera frame.
struct CameraModel {
  double focal = 1.0;                                      // pixels
  Eigen::Vector2d principal_point{0.0, 0.0};               // pixels
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // orthonormal, det +1
  Eigen::Vector3d translation{0.0, 0.0, 0.0};              // millimeters

  // Throws ConfigInvalid if focal <= 0 or rotation is not a proper rotation
  // (tolerance 1e-9 on R^T R - I and det R - 1).
  void validate() const;
};

}  // namespace poselift
