#include "poselift/synth.hpp"

#include <cmath>

#include "poselift/geometry.hpp"
#include "poselift/io.hpp"
#include "poselift/rng.hpp"

namespace poselift {

namespace {

void check_config(const SynthConfig& cfg) {
  if (!cfg.skeleton) throw ConfigInvalid("synth: missing skeleton");
  if (cfg.bones.size() != cfg.skeleton->edges.size()) {
    throw ConfigInvalid("synth: need one rig entry per skeleton edge");
  }
  for (const auto& b : cfg.bones) {
    if (!(b.bone_length_mm > 0)) throw ConfigInvalid("synth: bone length <= 0");
    if (b.angle_min_rad > b.angle_max_rad) {
      throw ConfigInvalid("synth: angle range inverted");
    }
    if (!(b.rest_direction.norm() > 1e-9)) {
      throw ConfigInvalid("synth: zero rest direction");
    }
  }
  if (cfg.pose_count <= 0) throw ConfigInvalid("synth: pose_count <= 0");
  if (cfg.query_count < 0 || cfg.query_count >= cfg.pose_count) {
    throw ConfigInvalid("synth: query_count must be in [0, pose_count)");
  }
  if (!(cfg.min_distance_mm > 0) ||
      cfg.max_distance_mm < cfg.min_distance_mm) {
    throw ConfigInvalid("synth: bad subject distance range");
  }
  if (cfg.noise_sigma_2d_px < 0) throw ConfigInvalid("synth: negative noise");
  if (cfg.regimes.empty()) throw ConfigInvalid("synth: need >= 1 regime");
  cfg.camera.validate();
}

Eigen::Vector3d random_unit_axis(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

Pose3D sample_pose(const SynthConfig& cfg, Rng& rng, double angle_scale) {
  const Skeleton& skel = *cfg.skeleton;
  const std::vector<int> order = topological_edge_order(skel);

  // Whole-body placement and orientation.
  const Eigen::Vector3d root_pos(
      rng.uniform(-cfg.lateral_jitter_mm, cfg.lateral_jitter_mm),
      rng.uniform(-cfg.vertical_jitter_mm, cfg.vertical_jitter_mm),
      rng.uniform(cfg.min_distance_mm, cfg.max_distance_mm));
  const double yaw = rng.uniform(-cfg.yaw_range_rad, cfg.yaw_range_rad);
  const double pitch = rng.uniform(-cfg.pitch_range_rad, cfg.pitch_range_rad);
  const Eigen::Matrix3d body_rot =
      rodrigues(Eigen::Vector3d(0.0, yaw, 0.0)) *
      rodrigues(Eigen::Vector3d(pitch, 0.0, 0.0));

  std::vector<Eigen::Vector3d> joints(
      static_cast<std::size_t>(skel.joint_count), Eigen::Vector3d::Zero());
  std::vector<Eigen::Matrix3d> frames(
      static_cast<std::size_t>(skel.joint_count), body_rot);
  joints[static_cast<std::size_t>(skel.root_index)] = root_pos;

  for (int e : order) {
    const auto& [parent, child] = skel.edges[static_cast<std::size_t>(e)];
    const EdgeRig& rig = cfg.bones[static_cast<std::size_t>(e)];
    const Eigen::Vector3d axis = random_unit_axis(rng);
    const double angle =
        rng.uniform(rig.angle_min_rad, rig.angle_max_rad) * angle_scale;
    const Eigen::Matrix3d local = rodrigues(axis * angle);
    const Eigen::Matrix3d frame =
        frames[static_cast<std::size_t>(parent)] * local;
    frames[static_cast<std::size_t>(child)] = frame;
    joints[static_cast<std::size_t>(child)] =
        joints[static_cast<std::size_t>(parent)] +
        frame * (rig.rest_direction.normalized() * rig.bone_length_mm);
  }
  return Pose3D{cfg.skeleton, std::move(joints)};
}

SynthOutput generate(const SynthConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);

  std::vector<Pose3D> poses;
  std::vector<std::string> activities;
  poses.reserve(static_cast<std::size_t>(cfg.pose_count));
  activities.reserve(static_cast<std::size_t>(cfg.pose_count));
  for (std::int64_t i = 0; i < cfg.pose_count; ++i) {
    const ActivityRegime& regime =
        cfg.regimes[rng.bounded(cfg.regimes.size())];
    // Resample on the rare draw that puts a joint behind the camera.
    Pose3D pose = sample_pose(cfg, rng, regime.angle_scale);
    int attempts = 0;
    while (true) {
      bool ok = true;
      for (const auto& p : pose.joints) {
        if (!((cfg.camera.rotation * p + cfg.camera.translation).z() > 0)) {
          ok = false;
          break;
        }
      }
      if (ok) break;
      if (++attempts > 100) {
        throw ConfigInvalid("synth: camera keeps seeing joints behind it");
      }
      pose = sample_pose(cfg, rng, regime.angle_scale);
    }
    poses.push_back(std::move(pose));
    activities.push_back(regime.name);
  }

  const std::int64_t library_count = cfg.pose_count - cfg.query_count;
  std::vector<PoseRecord> records;
  records.reserve(static_cast<std::size_t>(library_count));
  for (std::int64_t i = 0; i < library_count; ++i) {
    records.push_back(PoseRecord{poses[static_cast<std::size_t>(i)],
                                 cfg.camera,
                                 activities[static_cast<std::size_t>(i)],
                                 "synth"});
  }
  nlohmann::json metadata;
  metadata["source"] = "synth";
  metadata["seed"] = cfg.seed;
  metadata["pose_count"] = cfg.pose_count;
  metadata["query_count"] = cfg.query_count;
  metadata["noise_sigma_2d_px"] = cfg.noise_sigma_2d_px;

  SynthOutput out{build_library(records, std::move(metadata)), {}};
  out.queries.reserve(static_cast<std::size_t>(cfg.query_count));
  for (std::int64_t i = library_count; i < cfg.pose_count; ++i) {
    const Pose3D& pose = poses[static_cast<std::size_t>(i)];
    Pose2D proj = project(pose, cfg.camera);
    for (auto& joint : proj.joints) {
      if (cfg.noise_sigma_2d_px > 0) {
        joint.x() += cfg.noise_sigma_2d_px * rng.gaussian();
        joint.y() += cfg.noise_sigma_2d_px * rng.gaussian();
      }
    }
    out.queries.push_back(EvalQuery{
        std::move(proj), apply_extrinsics(pose, cfg.camera),
        activities[static_cast<std::size_t>(i)]});
  }
  return out;
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  try {
    SynthConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.skeleton = skeleton_from_json(j.at("skeleton"));
    for (const auto& b : j.at("bones")) {
      EdgeRig rig;
      rig.bone_length_mm = b.at("length_mm").get<double>();
      rig.angle_min_rad = b.at("angle_min_rad").get<double>();
      rig.angle_max_rad = b.at("angle_max_rad").get<double>();
      const auto dir = b.at("rest_direction").get<std::vector<double>>();
      if (dir.size() != 3) throw FormatError("rest_direction needs 3 values");
      rig.rest_direction = {dir[0], dir[1], dir[2]};
      cfg.bones.push_back(rig);
    }
    cfg.camera = camera_from_json(j.at("camera"));
    const auto dist = j.at("subject_distance_mm").get<std::vector<double>>();
    if (dist.size() != 2) throw FormatError("subject_distance_mm needs 2 values");
    cfg.min_distance_mm = dist[0];
    cfg.max_distance_mm = dist[1];
    cfg.pose_count = j.at("pose_count").get<std::int64_t>();
    cfg.query_count = j.at("query_count").get<std::int64_t>();
    cfg.noise_sigma_2d_px = j.value("noise_sigma_2d_px", 0.0);
    for (const auto& r : j.at("regimes")) {
      cfg.regimes.push_back(ActivityRegime{r.at("name").get<std::string>(),
                                           r.at("angle_scale").get<double>()});
    }
    if (j.contains("placement")) {
      const auto& p = j.at("placement");
      cfg.lateral_jitter_mm = p.value("lateral_jitter_mm", cfg.lateral_jitter_mm);
      cfg.vertical_jitter_mm =
          p.value("vertical_jitter_mm", cfg.vertical_jitter_mm);
      cfg.yaw_range_rad = p.value("yaw_range_rad", cfg.yaw_range_rad);
      cfg.pitch_range_rad = p.value("pitch_range_rad", cfg.pitch_range_rad);
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad synth config: ") + e.what());
  }
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  return synth_config_from_json(load_json(path));
}

SynthFilePaths write_synth_files(const SynthOutput& out,
                                 const CameraModel& camera,
                                 const std::filesystem::path& out_dir,
                                 const std::string& prefix) {
  std::filesystem::create_directories(out_dir);
  SynthFilePaths paths{
      out_dir / (prefix + "_poses.csv"), out_dir / (prefix + "_camera.json"),
      out_dir / (prefix + "_queries.csv"), out_dir / (prefix + "_gt.csv")};

  std::vector<LabeledPose3D> poses;
  poses.reserve(out.library.size());
  for (const auto& e : out.library.entries()) {
    poses.push_back(LabeledPose3D{e.id, e.activity, e.subject, e.pose3d});
  }
  write_pose3d_csv(paths.poses_csv, poses);
  write_json(paths.camera_json, camera_to_json(camera));

  std::vector<LabeledPose2D> queries;
  std::vector<LabeledPose3D> gt;
  queries.reserve(out.queries.size());
  gt.reserve(out.queries.size());
  for (std::size_t i = 0; i < out.queries.size(); ++i) {
    const EvalQuery& q = out.queries[i];
    queries.push_back(LabeledPose2D{static_cast<std::int64_t>(i), q.activity,
                                    "synth", q.query});
    gt.push_back(LabeledPose3D{static_cast<std::int64_t>(i), q.activity,
                               "synth", q.gt});
  }
  write_pose2d_csv(paths.queries_csv, queries);
  write_pose3d_csv(paths.gt_csv, gt);
  return paths;
}

}  // namespace poselift
