#include "poselift/resection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "poselift/geometry.hpp"
#include "poselift/parallel.hpp"

namespace poselift {

namespace {

constexpr double kDampingMax = 1e12;
constexpr double kDampingMin = 1e-15;
constexpr double kSingularRatio = 1e-12;
constexpr int kOrthonormalizeEvery = 10;

double squared_error_or_inf(const Pose3D& pose, const CameraModel& cam,
                            const Pose2D& target) {
  double sum = 0.0;
  for (std::size_t j = 0; j < pose.joints.size(); ++j) {
    const Eigen::Vector3d q = cam.rotation * pose.joints[j] + cam.translation;
    if (!(q.z() > 0)) return std::numeric_limits<double>::infinity();
    const double rx =
        cam.focal * q.x() / q.z() + cam.principal_point.x() - target.joints[j].x();
    const double ry =
        cam.focal * q.y() / q.z() + cam.principal_point.y() - target.joints[j].y();
    sum += rx * rx + ry * ry;
  }
  return sum;
}

}  // namespace

Eigen::VectorXd projection_residuals(const Pose3D& pose,
                                     const CameraModel& cam,
                                     const Pose2D& target) {
  const int n = pose.joint_count();
  Eigen::VectorXd r(2 * n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d q =
        cam.rotation * pose.joints[static_cast<std::size_t>(j)] + cam.translation;
    if (!(q.z() > 0)) throw NonPositiveDepth(j);
    r(2 * j) = cam.focal * q.x() / q.z() + cam.principal_point.x() -
               target.joints[static_cast<std::size_t>(j)].x();
    r(2 * j + 1) = cam.focal * q.y() / q.z() + cam.principal_point.y() -
                   target.joints[static_cast<std::size_t>(j)].y();
  }
  return r;
}

Eigen::MatrixXd projection_jacobian(const Pose3D& pose,
                                    const CameraModel& cam) {
  const int n = pose.joint_count();
  Eigen::MatrixXd jac(2 * n, 6);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d v =
        cam.rotation * pose.joints[static_cast<std::size_t>(j)];
    const Eigen::Vector3d q = v + cam.translation;
    if (!(q.z() > 0)) throw NonPositiveDepth(j);
    const double inv_z = 1.0 / q.z();
    // d(pixel)/d(camera-frame point)
    Eigen::Matrix<double, 2, 3> dp;
    dp << cam.focal * inv_z, 0.0, -cam.focal * q.x() * inv_z * inv_z,
        0.0, cam.focal * inv_z, -cam.focal * q.y() * inv_z * inv_z;
    // d(camera-frame point)/d(axis-angle increment) at zero: -[v]_x
    Eigen::Matrix3d dv;
    dv << 0.0, v.z(), -v.y(),
        -v.z(), 0.0, v.x(),
        v.y(), -v.x(), 0.0;
    jac.block<2, 3>(2 * j, 0) = dp * dv;
    jac.block<2, 3>(2 * j, 3) = dp;  // d/d(translation) is identity upstream
  }
  return jac;
}

RefinedCandidate resection(const Pose3D& pose3d, const Pose2D& target,
                           const CameraModel& init_cam,
                           const RefineConfig& cfg) {
  if (!same_skeleton(pose3d.skeleton, target.skeleton)) {
    throw SkeletonMismatch("resection: pose and target skeletons differ");
  }
  if (cfg.max_iterations < 1 || !(cfg.residual_tolerance > 0) ||
      !(cfg.damping_init > 0)) {
    throw ConfigInvalid("resection: bad RefineConfig");
  }

  RefinedCandidate out;
  out.camera_star = init_cam;
  out.error_before = squared_error_or_inf(pose3d, init_cam, target);
  if (!std::isfinite(out.error_before)) {
    // Precondition: the initial camera must see every joint.
    throw NonPositiveDepth(0);
  }
  out.error_after = out.error_before;

  CameraModel cam = init_cam;
  double err = out.error_before;
  double damping = cfg.damping_init;
  int accepted = 0;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const Eigen::VectorXd residuals = projection_residuals(pose3d, cam, target);
    const Eigen::MatrixXd jac = projection_jacobian(pose3d, cam);
    const Eigen::Matrix<double, 6, 6> normal = jac.transpose() * jac;
    const Eigen::Matrix<double, 6, 1> gradient = jac.transpose() * residuals;

    if (iter == 0) {
      const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(normal);
      const auto& sv = svd.singularValues();
      if (!(sv(0) > 0) || sv(5) < kSingularRatio * sv(0)) {
        out.singular = true;
        out.iterations_used = 0;
        return out;  // init camera, error_after == error_before
      }
    }

    out.iterations_used = iter + 1;
    const Eigen::Matrix<double, 6, 1> step =
        (normal + damping * Eigen::Matrix<double, 6, 6>::Identity())
            .ldlt()
            .solve(-gradient);
    if (!step.allFinite()) break;

    CameraModel trial = cam;
    trial.rotation = rodrigues(step.head<3>()) * cam.rotation;
    trial.translation = cam.translation + step.tail<3>();
    const double trial_err = squared_error_or_inf(pose3d, trial, target);

    if (trial_err < err) {
      // Accepted step; tighten damping.
      if (++accepted % kOrthonormalizeEvery == 0) {
        trial.rotation = polar_orthonormalize(trial.rotation);
      }
      const double improvement = err - trial_err;
      cam = trial;
      err = trial_err;
      damping = std::max(damping / 10.0, kDampingMin);
      if (improvement < cfg.residual_tolerance) break;
    } else {
      // Rejected (including steps that push joints behind the camera).
      damping *= 10.0;
      if (damping > kDampingMax) break;
    }
  }

  out.camera_star = cam;
  out.error_after = err;
  return out;
}

std::vector<RefinedCandidate> refine_shortlist(const ExemplarLibrary& lib,
                                               const Pose2D& query,
                                               const MatchResult& shortlist,
                                               const RefineConfig& cfg) {
  if (shortlist.candidates.empty()) {
    throw EmptyInput("refine_shortlist: empty shortlist");
  }
  std::vector<RefinedCandidate> refined(shortlist.candidates.size());
  parallel_for(static_cast<std::int64_t>(shortlist.candidates.size()),
               [&](std::int64_t i) {
                 const auto [id, match_err] =
                     shortlist.candidates[static_cast<std::size_t>(i)];
                 const Exemplar& e = lib.entries()[static_cast<std::size_t>(id)];
                 RefinedCandidate rc;
                 try {
                   rc = resection(e.pose3d, query, e.camera, cfg);
                 } catch (const Error&) {
                   // Failed refinement keeps the unrefined camera and error.
                   rc.camera_star = e.camera;
                   rc.error_before = match_err;
                   rc.error_after = match_err;
                 }
                 rc.exemplar_id = id;
                 refined[static_cast<std::size_t>(i)] = std::move(rc);
               });
  std::sort(refined.begin(), refined.end(),
            [](const RefinedCandidate& a, const RefinedCandidate& b) {
              if (a.error_after != b.error_after) {
                return a.error_after < b.error_after;
              }
              return a.exemplar_id < b.exemplar_id;
            });
  return refined;
}

}  // namespace poselift
