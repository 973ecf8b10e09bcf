#include "poselift/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "poselift/geometry.hpp"
#include "poselift/parallel.hpp"

namespace poselift {

ProcrustesResult procrustes_align(const Pose3D& source, const Pose3D& target,
                                  bool with_scale) {
  if (!same_skeleton(source.skeleton, target.skeleton)) {
    throw SkeletonMismatch("procrustes_align: skeletons differ");
  }
  const std::size_t n = source.joints.size();
  if (n < 3) {
    throw DegenerateConfiguration("procrustes_align: need at least 3 joints");
  }

  Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d tgt_mean = Eigen::Vector3d::Zero();
  for (std::size_t j = 0; j < n; ++j) {
    src_mean += source.joints[j];
    tgt_mean += target.joints[j];
  }
  src_mean /= static_cast<double>(n);
  tgt_mean /= static_cast<double>(n);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double src_var = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::Vector3d a = source.joints[j] - src_mean;
    const Eigen::Vector3d b = target.joints[j] - tgt_mean;
    cov += b * a.transpose();
    src_var += a.squaredNorm();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d& sv = svd.singularValues();
  if (!(sv(0) > 0) || (sv(1) < 1e-9 * sv(0) && sv(2) < 1e-9 * sv(0))) {
    throw DegenerateConfiguration(
        "procrustes_align: joints are collinear or coincident");
  }

  Eigen::Matrix3d sign = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) {
    sign(2, 2) = -1.0;
  }
  const Eigen::Matrix3d rotation =
      svd.matrixU() * sign * svd.matrixV().transpose();

  double scale = 1.0;
  if (with_scale) {
    if (!(src_var > 0)) {
      throw DegenerateConfiguration("procrustes_align: source has no spread");
    }
    scale = (sv(0) + sv(1) + sign(2, 2) * sv(2)) / src_var;
  }
  const Eigen::Vector3d translation = tgt_mean - scale * rotation * src_mean;

  std::vector<Eigen::Vector3d> aligned;
  aligned.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    aligned.emplace_back(scale * rotation * source.joints[j] + translation);
  }
  return ProcrustesResult{rotation, translation, scale,
                          Pose3D{source.skeleton, std::move(aligned)}};
}

std::vector<double> per_joint_errors(const Pose3D& pred, const Pose3D& gt,
                                     const EvalProtocol& protocol) {
  if (!same_skeleton(pred.skeleton, gt.skeleton)) {
    throw SkeletonMismatch("mpjpe: skeletons differ");
  }
  const std::size_t n = pred.joints.size();
  std::vector<double> errors(n);
  if (protocol.mode == ProtocolMode::P2_RootCentered) {
    const Eigen::Vector3d pred_root = pred.root();
    const Eigen::Vector3d gt_root = gt.root();
    for (std::size_t j = 0; j < n; ++j) {
      errors[j] =
          ((pred.joints[j] - pred_root) - (gt.joints[j] - gt_root)).norm();
    }
  } else {
    const bool with_scale = protocol.mode == ProtocolMode::RigidPlusScale;
    const ProcrustesResult res = procrustes_align(pred, gt, with_scale);
    for (std::size_t j = 0; j < n; ++j) {
      errors[j] = (res.aligned.joints[j] - gt.joints[j]).norm();
    }
  }
  return errors;
}

double mpjpe(const Pose3D& pred, const Pose3D& gt,
             const EvalProtocol& protocol) {
  const std::vector<double> errors = per_joint_errors(pred, gt, protocol);
  const int root = pred.skeleton->root_index;
  double sum = 0.0;
  int counted = 0;
  for (std::size_t j = 0; j < errors.size(); ++j) {
    if (!protocol.include_root_in_mpjpe && static_cast<int>(j) == root) {
      continue;
    }
    sum += errors[j];
    ++counted;
  }
  return sum / static_cast<double>(counted);
}

EvalReport evaluate(const LiftFn& lift_fn, std::span<const EvalQuery> queries,
                    const EvalProtocol& protocol) {
  if (queries.empty()) throw EmptyInput("evaluate: no queries");
  const std::int64_t total = static_cast<std::int64_t>(queries.size());
  const std::size_t n_joints =
      queries[0].gt.joints.size();

  struct PerQuery {
    double mpjpe = 0.0;
    std::vector<double> joint_errors;
    bool ok = false;
  };
  std::vector<PerQuery> rows(static_cast<std::size_t>(total));

  parallel_for(total, [&](std::int64_t i) {
    const EvalQuery& q = queries[static_cast<std::size_t>(i)];
    PerQuery& row = rows[static_cast<std::size_t>(i)];
    try {
      const Pose3D pred = lift_fn(q);
      row.joint_errors = per_joint_errors(pred, q.gt, protocol);
      const int root = q.gt.skeleton->root_index;
      double sum = 0.0;
      int counted = 0;
      for (std::size_t j = 0; j < row.joint_errors.size(); ++j) {
        if (!protocol.include_root_in_mpjpe && static_cast<int>(j) == root) {
          continue;
        }
        sum += row.joint_errors[j];
        ++counted;
      }
      row.mpjpe = sum / static_cast<double>(counted);
      row.ok = true;
    } catch (const Error&) {
      row.ok = false;
    }
  });

  EvalReport report;
  report.per_joint_mean.assign(n_joints, 0.0);

  // Aggregate sequentially in query order so the report is identical at any
  // worker count.
  std::vector<double> query_errors;
  query_errors.reserve(rows.size());
  std::map<std::string, std::vector<double>> by_activity;
  std::vector<std::vector<double>> joint_columns(
      n_joints);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PerQuery& row = rows[i];
    if (!row.ok) {
      ++report.failed;
      continue;
    }
    query_errors.push_back(row.mpjpe);
    by_activity[queries[i].activity].push_back(row.mpjpe);
    for (std::size_t j = 0; j < n_joints; ++j) {
      joint_columns[j].push_back(row.joint_errors[j]);
    }
  }
  report.count = static_cast<std::int64_t>(query_errors.size());
  if (report.count == 0) {
    throw EmptyInput("evaluate: every query failed");
  }

  report.overall_mean =
      pairwise_sum(query_errors.data(),
                   static_cast<std::int64_t>(query_errors.size())) /
      static_cast<double>(query_errors.size());
  std::vector<double> sorted = query_errors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  report.overall_median = (m % 2 == 1)
                              ? sorted[m / 2]
                              : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  for (const auto& [activity, values] : by_activity) {
    report.per_activity_mean[activity] =
        pairwise_sum(values.data(), static_cast<std::int64_t>(values.size())) /
        static_cast<double>(values.size());
  }
  for (std::size_t j = 0; j < n_joints; ++j) {
    report.per_joint_mean[j] =
        pairwise_sum(joint_columns[j].data(),
                     static_cast<std::int64_t>(joint_columns[j].size())) /
        static_cast<double>(joint_columns[j].size());
  }
  return report;
}

Pose3D upper_bound_gt_depth(const Pose2D& query, const Pose3D& gt,
                            const CameraModel& cam) {
  if (!same_skeleton(query.skeleton, gt.skeleton)) {
    throw SkeletonMismatch("upper_bound_gt_depth: skeletons differ");
  }
  double depth_sum = 0.0;
  for (std::size_t j = 0; j < gt.joints.size(); ++j) {
    if (!(gt.joints[j].z() > 0)) throw NonPositiveDepth(static_cast<int>(j));
    depth_sum += gt.joints[j].z();
  }
  const double s =
      depth_sum / static_cast<double>(gt.joints.size()) / cam.focal;
  std::vector<Eigen::Vector3d> joints;
  joints.reserve(gt.joints.size());
  for (std::size_t j = 0; j < gt.joints.size(); ++j) {
    const Eigen::Vector2d centered = query.joints[j] - cam.principal_point;
    joints.emplace_back(s * centered.x(), s * centered.y(), gt.joints[j].z());
  }
  return Pose3D{gt.skeleton, std::move(joints)};
}

std::int64_t oracle_best_exemplar(const ExemplarLibrary& lib, const Pose3D& gt,
                                  const EvalProtocol& protocol) {
  if (lib.size() == 0) throw EmptyLibrary();
  const std::int64_t n = static_cast<std::int64_t>(lib.size());
  std::vector<double> errors(static_cast<std::size_t>(n));
  parallel_for(n, [&](std::int64_t i) {
    try {
      errors[static_cast<std::size_t>(i)] =
          mpjpe(lib.entries()[static_cast<std::size_t>(i)].pose3d, gt,
                protocol);
    } catch (const Error&) {
      errors[static_cast<std::size_t>(i)] =
          std::numeric_limits<double>::infinity();
    }
  });
  std::int64_t best = 0;
  for (std::int64_t i = 1; i < n; ++i) {
    if (errors[static_cast<std::size_t>(i)] <
        errors[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }
  return best;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["count"] = report.count;
  j["failed"] = report.failed;
  j["overall_mean_mm"] = report.overall_mean;
  j["overall_median_mm"] = report.overall_median;
  j["per_activity_mean_mm"] = report.per_activity_mean;
  j["per_joint_mean_mm"] = report.per_joint_mean;
  return j;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [activity, value] : report.per_activity_mean) {
    out << (activity.empty() ? "(unlabeled)" : activity) << ",";
  }
  out << "Avg.,Median\n";
  for (const auto& [activity, value] : report.per_activity_mean) {
    out << value << ",";
  }
  out << report.overall_mean << "," << report.overall_median << "\n";
  return out.str();
}

}  // namespace poselift
