#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poselift/eval.hpp"
#include "poselift/types.hpp"

namespace poselift {

// {"joint_names": [...], "root_index": i, "edges": [[parent, child], ...]}
SkeletonPtr skeleton_from_json(const nlohmann::json& j);
nlohmann::json skeleton_to_json(const Skeleton& skeleton);
SkeletonPtr load_skeleton(const std::filesystem::path& path);

// {"focal": f, "cx": ..., "cy": ..., "R": [9 row-major], "t": [3]}
CameraModel camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const CameraModel& cam);
CameraModel load_camera(const std::filesystem::path& path);

// Labeled 3D pose row as ingested from CSV.
struct LabeledPose3D {
  std::int64_t id = 0;
  std::string activity;
  std::string subject;
  Pose3D pose;
};

struct LabeledPose2D {
  std::int64_t id = 0;
  std::string activity;
  std::string subject;
  Pose2D pose;
};

// CSV with a header row; columns id,activity,subject,J0x,J0y,J0z,... in
// millimeters. Throws FormatError with the offending row number.
std::vector<LabeledPose3D> read_pose3d_csv(const std::filesystem::path& path,
                                           const SkeletonPtr& skeleton);
void write_pose3d_csv(const std::filesystem::path& path,
                      const std::vector<LabeledPose3D>& rows);

// Same layout with two columns per joint (pixels).
std::vector<LabeledPose2D> read_pose2d_csv(const std::filesystem::path& path,
                                           const SkeletonPtr& skeleton);
void write_pose2d_csv(const std::filesystem::path& path,
                      const std::vector<LabeledPose2D>& rows);

nlohmann::json load_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace poselift
