#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poselift/eval.hpp"
#include "poselift/library.hpp"
#include "poselift/types.hpp"

namespace poselift {

// Per-edge rig data for the forward-kinematic sampler. rest_direction is a
// unit vector in the body frame; the sampled pose rotates it about a random
// axis by an angle drawn from [angle_min, angle_max], composed down the tree.
struct EdgeRig {
  double bone_length_mm = 0.0;
  double angle_min_rad = 0.0;
  double angle_max_rad = 0.0;
  Eigen::Vector3d rest_direction{0.0, -1.0, 0.0};
};

// Named articulation regime; its scale multiplies every sampled joint angle,
// and the regime name becomes the pose's activity label.
struct ActivityRegime {
  std::string name;
  double angle_scale = 1.0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  SkeletonPtr skeleton;
  std::vector<EdgeRig> bones;  // parallel to skeleton->edges
  CameraModel camera;
  double min_distance_mm = 4500.0;
  double max_distance_mm = 5500.0;
  std::int64_t pose_count = 0;   // total; the last query_count are held out
  std::int64_t query_count = 0;
  double noise_sigma_2d_px = 0.0;
  std::vector<ActivityRegime> regimes;
  double lateral_jitter_mm = 300.0;
  double vertical_jitter_mm = 150.0;
  double yaw_range_rad = 3.141592653589793;
  double pitch_range_rad = 0.15;
};

struct SynthOutput {
  ExemplarLibrary library;
  std::vector<EvalQuery> queries;  // held out, disjoint from the library
};

// Deterministic forward-kinematic sampling: pose_count poses from the rig,
// split into a library and query_count held-out queries. Query 2D poses are
// exact projections plus Gaussian pixel noise of noise_sigma_2d_px; each
// query's ground truth is the pose in the camera frame.
SynthOutput generate(const SynthConfig& cfg);

// Single forward-kinematic sample (exposed for tests).
Pose3D sample_pose(const SynthConfig& cfg, class Rng& rng, double angle_scale);

// Reads a rig/camera/count description; see configs/ for the schema.
SynthConfig synth_config_from_json(const nlohmann::json& j);
SynthConfig load_synth_config(const std::filesystem::path& path);

// Writes the generated set in the ingestion formats: <prefix>_poses.csv,
// <prefix>_camera.json, <prefix>_queries.csv, <prefix>_gt.csv.
struct SynthFilePaths {
  std::filesystem::path poses_csv;
  std::filesystem::path camera_json;
  std::filesystem::path queries_csv;
  std::filesystem::path gt_csv;
};
SynthFilePaths write_synth_files(const SynthOutput& out,
                                 const CameraModel& camera,
                                 const std::filesystem::path& out_dir,
                                 const std::string& prefix);

}  // namespace poselift
