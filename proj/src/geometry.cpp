#include "poselift/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace poselift {

Pose3D apply_extrinsics(const Pose3D& pose, const CameraModel& cam) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(pose.joints.size());
  for (const auto& p : pose.joints) {
    out.emplace_back(cam.rotation * p + cam.translation);
  }
  return Pose3D{pose.skeleton, std::move(out)};
}

Pose2D project(const Pose3D& pose, const CameraModel& cam) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(pose.joints.size());
  for (std::size_t j = 0; j < pose.joints.size(); ++j) {
    const Eigen::Vector3d q = cam.rotation * pose.joints[j] + cam.translation;
    if (!(q.z() > 0)) throw NonPositiveDepth(static_cast<int>(j));
    out.emplace_back(cam.focal * q.x() / q.z() + cam.principal_point.x(),
                     cam.focal * q.y() / q.z() + cam.principal_point.y());
  }
  return Pose2D{pose.skeleton, std::move(out)};
}

double reprojection_error(const Pose2D& a, const Pose2D& b) {
  if (!same_skeleton(a.skeleton, b.skeleton)) {
    throw SkeletonMismatch("reprojection_error: poses use different skeletons");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < a.joints.size(); ++j) {
    sum += (a.joints[j] - b.joints[j]).squaredNorm();
  }
  return sum;
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis_angle) {
  const double theta = axis_angle.norm();
  if (theta < 1e-12) {
    // Second-order expansion keeps tiny updates accurate.
    Eigen::Matrix3d k;
    k << 0, -axis_angle.z(), axis_angle.y(),
         axis_angle.z(), 0, -axis_angle.x(),
         -axis_angle.y(), axis_angle.x(), 0;
    return Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
  }
  const Eigen::Vector3d axis = axis_angle / theta;
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(),
       axis.z(), 0, -axis.x(),
       -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(theta) * k +
         (1.0 - std::cos(theta)) * k * k;
}

Eigen::Matrix3d polar_orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

double rotation_geodesic_angle(const Eigen::Matrix3d& a,
                               const Eigen::Matrix3d& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace poselift
