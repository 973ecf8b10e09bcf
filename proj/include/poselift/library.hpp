#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poselift/types.hpp"

namespace poselift {

// One library entry: a 3D pose paired with the camera that produced its
// cached 2D projection.
struct Exemplar {
  std::int64_t id = 0;
  Pose3D pose3d;
  CameraModel camera;
  Pose2D projection;  // cached project(pose3d, camera)
  std::string activity;  // empty = unlabeled
  std::string subject;   // empty = unlabeled
};

// Input tuple for building a library.
struct PoseRecord {
  Pose3D pose;
  CameraModel camera;
  std::string activity;
  std::string subject;
};

// Immutable after construction; entries carry dense ids 0..size-1 and share
// one skeleton. A packed single-precision copy of the projections backs the
// matcher's scan.
class ExemplarLibrary {
 public:
  ExemplarLibrary(SkeletonPtr skeleton, std::vector<Exemplar> entries,
                  nlohmann::json metadata);

  const SkeletonPtr& skeleton() const { return skeleton_; }
  const std::vector<Exemplar>& entries() const { return entries_; }
  const nlohmann::json& metadata() const { return metadata_; }
  std::size_t size() const { return entries_.size(); }

  // count * 2N floats, entry-major then joint-major (x, y).
  std::span<const float> packed_projections() const {
    return packed_projections_;
  }

 private:
  SkeletonPtr skeleton_;
  std::vector<Exemplar> entries_;
  nlohmann::json metadata_;
  std::vector<float> packed_projections_;
};

// Precomputes projections and assigns dense ids, preserving input order.
// Throws EmptyInput, SkeletonMismatch, or NonPositiveDepth from projection.
ExemplarLibrary build_library(const std::vector<PoseRecord>& records,
                              nlohmann::json metadata = nlohmann::json::object());

// One virtual view emitted by augment_cameras. pose_index points back into
// the input sequence so callers can carry labels through.
struct VirtualView {
  std::size_t pose_index;
  CameraModel camera;
};

struct AugmentResult {
  std::vector<VirtualView> views;  // pose-major, then azimuth order
  std::int64_t skipped_views = 0;  // views dropped for non-positive depth
};

// For each pose and azimuth, composes base_cam with a rotation about the
// vertical (y) axis through the pose centroid; the centroid keeps its
// camera-frame position, so its depth and image point are unchanged. Views
// that would put a joint behind the camera are skipped and counted.
AugmentResult augment_cameras(std::span<const Pose3D> poses,
                              const CameraModel& base_cam,
                              std::span<const double> azimuths);

// Uniform subset without replacement, max(1, floor(fraction * size)) entries,
// reproducible from seed; ids re-densified in original order. fraction 1.0
// returns the identical entry set.
ExemplarLibrary subsample(const ExemplarLibrary& lib, double fraction,
                          std::uint64_t seed);

// Binary "PLIB" v1: little-endian, 20-byte fixed header (magic, version u32,
// N u32, count u64), skeleton block, fixed-stride records, trailing string
// table for labels, then metadata JSON.
void save_library(const ExemplarLibrary& lib, const std::filesystem::path& path);

// Loads and revalidates every cached projection against project() to 1e-6 px.
// Throws IoError, FormatVersionMismatch, or CorruptProjectionCache.
ExemplarLibrary load_library(const std::filesystem::path& path);

// FNV-1a over the packed geometry; identifies a library in run manifests.
std::uint64_t library_content_hash(const ExemplarLibrary& lib);

}  // namespace poselift
