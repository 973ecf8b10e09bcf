#include "poselift/library.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

#include "poselift/geometry.hpp"
#include "poselift/parallel.hpp"
#include "poselift/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "PLIB i/o assumes a little-endian host");

namespace poselift {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'I', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kNoLabel = 0xFFFFFFFFu;
constexpr double kProjectionTolerancePx = 1e-6;

std::vector<float> pack_projections(const std::vector<Exemplar>& entries,
                                    int joint_count) {
  std::vector<float> packed(entries.size() * 2 *
                            static_cast<std::size_t>(joint_count));
  std::size_t at = 0;
  for (const auto& e : entries) {
    for (const auto& j : e.projection.joints) {
      packed[at++] = static_cast<float>(j.x());
      packed[at++] = static_cast<float>(j.y());
    }
  }
  return packed;
}

}  // namespace

ExemplarLibrary::ExemplarLibrary(SkeletonPtr skeleton,
                                 std::vector<Exemplar> entries,
                                 nlohmann::json metadata)
    : skeleton_(std::move(skeleton)),
      entries_(std::move(entries)),
      metadata_(std::move(metadata)) {
  if (!skeleton_) throw ConfigInvalid("library needs a skeleton");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id != static_cast<std::int64_t>(i)) {
      throw ConfigInvalid("library ids must be dense 0..len-1");
    }
    if (!same_skeleton(entries_[i].pose3d.skeleton, skeleton_) ||
        !same_skeleton(entries_[i].projection.skeleton, skeleton_)) {
      throw SkeletonMismatch("library entry " + std::to_string(i) +
                             " uses a different skeleton");
    }
  }
  packed_projections_ = pack_projections(entries_, skeleton_->joint_count);
}

ExemplarLibrary build_library(const std::vector<PoseRecord>& records,
                              nlohmann::json metadata) {
  if (records.empty()) throw EmptyInput("build_library: no poses");
  const SkeletonPtr skeleton = records.front().pose.skeleton;
  std::vector<Exemplar> entries(records.size());
  // Projection caching is embarrassingly parallel; output order is fixed by
  // the input index, so thread count cannot change the result.
  parallel_for(static_cast<std::int64_t>(records.size()),
               [&](std::int64_t i) {
                 const auto& rec = records[static_cast<std::size_t>(i)];
                 if (!same_skeleton(rec.pose.skeleton, skeleton)) {
                   throw SkeletonMismatch("build_library: pose " +
                                          std::to_string(i) +
                                          " uses a different skeleton");
                 }
                 rec.camera.validate();
                 Exemplar e;
                 e.id = i;
                 e.pose3d = rec.pose;
                 e.camera = rec.camera;
                 e.projection = project(rec.pose, rec.camera);
                 e.activity = rec.activity;
                 e.subject = rec.subject;
                 entries[static_cast<std::size_t>(i)] = std::move(e);
               });
  if (!metadata.contains("count")) {
    metadata["count"] = entries.size();
  }
  return ExemplarLibrary(skeleton, std::move(entries), std::move(metadata));
}

AugmentResult augment_cameras(std::span<const Pose3D> poses,
                              const CameraModel& base_cam,
                              std::span<const double> azimuths) {
  base_cam.validate();
  for (double a : azimuths) {
    if (!std::isfinite(a)) throw ConfigInvalid("azimuth must be finite");
  }
  AugmentResult result;
  result.views.reserve(poses.size() * azimuths.size());
  for (std::size_t pi = 0; pi < poses.size(); ++pi) {
    const Pose3D& pose = poses[pi];
    const Eigen::Vector3d c = pose.centroid();
    for (double theta : azimuths) {
      // Orbit about the vertical axis through the centroid:
      //   q = R0 * (Ry(theta) * (p - c) + c) + t0
      // folded into extrinsics R' = R0 Ry, t' = R0 (I - Ry) c + t0.
      const Eigen::Matrix3d ry =
          rodrigues(Eigen::Vector3d(0.0, theta, 0.0));
      CameraModel cam = base_cam;
      cam.rotation = base_cam.rotation * ry;
      cam.translation =
          base_cam.rotation * (c - ry * c) + base_cam.translation;
      bool behind = false;
      for (const auto& p : pose.joints) {
        const double depth = (cam.rotation * p + cam.translation).z();
        if (!(depth > 0)) {
          behind = true;
          break;
        }
      }
      if (behind) {
        ++result.skipped_views;
        continue;
      }
      result.views.push_back(VirtualView{pi, cam});
    }
  }
  return result;
}

ExemplarLibrary subsample(const ExemplarLibrary& lib, double fraction,
                          std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw ConfigInvalid("subsample fraction must be in (0, 1]");
  }
  const std::size_t n = lib.size();
  nlohmann::json meta = lib.metadata();
  meta["subsample"] = {{"fraction", fraction}, {"seed", seed},
                       {"parent_count", n}};
  if (fraction == 1.0) {
    std::vector<Exemplar> copy = lib.entries();
    return ExemplarLibrary(lib.skeleton(), std::move(copy), std::move(meta));
  }
  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
  // Partial Fisher-Yates over an index array, then ascending order so the
  // subset preserves the parent library's ordering.
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(count);
  std::sort(indices.begin(), indices.end());
  std::vector<Exemplar> picked;
  picked.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Exemplar e = lib.entries()[indices[k]];
    e.id = static_cast<std::int64_t>(k);
    picked.push_back(std::move(e));
  }
  meta["count"] = count;
  return ExemplarLibrary(lib.skeleton(), std::move(picked), std::move(meta));
}

namespace {

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }
  void raw(const void* data, std::size_t bytes) {
    out_.write(static_cast<const char*>(data),
               static_cast<std::streamsize>(bytes));
  }
  template <typename T>
  void value(T v) {
    raw(&v, sizeof(T));
  }
  void str16(const std::string& s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw IoError("string too long for PLIB string field");
    }
    value<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
    raw(s.data(), s.size());
  }
  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw IoError("write failed for " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) throw IoError("cannot open " + path_ + " for reading");
  }
  void raw(void* data, std::size_t bytes) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (in_.gcount() != static_cast<std::streamsize>(bytes)) {
      throw IoError("unexpected end of file in " + path_);
    }
  }
  template <typename T>
  T value() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  std::string str16() {
    const auto len = value<std::uint16_t>();
    std::string s(len, '\0');
    raw(s.data(), len);
    return s;
  }

 private:
  std::ifstream in_;
  std::string path_;
};

std::uint32_t label_index(std::map<std::string, std::uint32_t>& table,
                          std::vector<std::string>& order,
                          const std::string& label) {
  if (label.empty()) return kNoLabel;
  auto [it, inserted] = table.try_emplace(
      label, static_cast<std::uint32_t>(order.size()));
  if (inserted) order.push_back(label);
  return it->second;
}

}  // namespace

void save_library(const ExemplarLibrary& lib,
                  const std::filesystem::path& path) {
  const Skeleton& skel = *lib.skeleton();
  Writer w(path);
  w.raw(kMagic, 4);
  w.value<std::uint32_t>(kVersion);
  w.value<std::uint32_t>(static_cast<std::uint32_t>(skel.joint_count));
  w.value<std::uint64_t>(lib.size());

  w.value<std::uint32_t>(static_cast<std::uint32_t>(skel.root_index));
  w.value<std::uint32_t>(static_cast<std::uint32_t>(skel.edges.size()));
  for (const auto& [p, c] : skel.edges) {
    w.value<std::uint32_t>(static_cast<std::uint32_t>(p));
    w.value<std::uint32_t>(static_cast<std::uint32_t>(c));
  }
  for (const auto& name : skel.joint_names) w.str16(name);

  std::map<std::string, std::uint32_t> label_table;
  std::vector<std::string> labels;
  for (const auto& e : lib.entries()) {
    w.value<double>(e.camera.focal);
    w.value<double>(e.camera.principal_point.x());
    w.value<double>(e.camera.principal_point.y());
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) w.value<double>(e.camera.rotation(r, c));
    }
    for (int r = 0; r < 3; ++r) w.value<double>(e.camera.translation(r));
    for (const auto& j : e.pose3d.joints) {
      w.value<double>(j.x());
      w.value<double>(j.y());
      w.value<double>(j.z());
    }
    for (const auto& j : e.projection.joints) {
      w.value<double>(j.x());
      w.value<double>(j.y());
    }
    w.value<std::uint32_t>(label_index(label_table, labels, e.activity));
    w.value<std::uint32_t>(label_index(label_table, labels, e.subject));
  }

  w.value<std::uint32_t>(static_cast<std::uint32_t>(labels.size()));
  for (const auto& s : labels) w.str16(s);

  const std::string meta = lib.metadata().dump();
  w.value<std::uint32_t>(static_cast<std::uint32_t>(meta.size()));
  w.raw(meta.data(), meta.size());
  w.finish(path);
}

ExemplarLibrary load_library(const std::filesystem::path& path) {
  Reader r(path);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatVersionMismatch(path.string() + ": not a PLIB file");
  }
  const auto version = r.value<std::uint32_t>();
  if (version != kVersion) {
    throw FormatVersionMismatch(path.string() + ": unsupported PLIB version " +
                                std::to_string(version));
  }
  const auto joint_count = r.value<std::uint32_t>();
  const auto count = r.value<std::uint64_t>();

  const auto root_index = r.value<std::uint32_t>();
  const auto edge_count = r.value<std::uint32_t>();
  std::vector<std::pair<int, int>> edges;
  edges.reserve(edge_count);
  for (std::uint32_t e = 0; e < edge_count; ++e) {
    const auto p = r.value<std::uint32_t>();
    const auto c = r.value<std::uint32_t>();
    edges.emplace_back(static_cast<int>(p), static_cast<int>(c));
  }
  std::vector<std::string> names;
  names.reserve(joint_count);
  for (std::uint32_t j = 0; j < joint_count; ++j) names.push_back(r.str16());
  SkeletonPtr skeleton = make_skeleton(std::move(names),
                                       static_cast<int>(root_index),
                                       std::move(edges));

  std::vector<Exemplar> entries;
  entries.reserve(count);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> label_refs;
  label_refs.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Exemplar e;
    e.id = static_cast<std::int64_t>(i);
    e.camera.focal = r.value<double>();
    e.camera.principal_point.x() = r.value<double>();
    e.camera.principal_point.y() = r.value<double>();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        e.camera.rotation(row, col) = r.value<double>();
      }
    }
    for (int row = 0; row < 3; ++row) e.camera.translation(row) = r.value<double>();
    std::vector<Eigen::Vector3d> joints3(joint_count);
    for (auto& j : joints3) {
      j.x() = r.value<double>();
      j.y() = r.value<double>();
      j.z() = r.value<double>();
    }
    std::vector<Eigen::Vector2d> joints2(joint_count);
    for (auto& j : joints2) {
      j.x() = r.value<double>();
      j.y() = r.value<double>();
    }
    e.pose3d = Pose3D{skeleton, std::move(joints3)};
    e.projection = Pose2D{skeleton, std::move(joints2)};
    label_refs.emplace_back(r.value<std::uint32_t>(), r.value<std::uint32_t>());
    entries.push_back(std::move(e));
  }

  const auto label_count = r.value<std::uint32_t>();
  std::vector<std::string> labels;
  labels.reserve(label_count);
  for (std::uint32_t i = 0; i < label_count; ++i) labels.push_back(r.str16());
  auto resolve = [&](std::uint32_t idx) -> std::string {
    if (idx == kNoLabel) return {};
    if (idx >= labels.size()) {
      throw FormatError(path.string() + ": label index out of range");
    }
    return labels[idx];
  };
  for (std::uint64_t i = 0; i < count; ++i) {
    entries[i].activity = resolve(label_refs[i].first);
    entries[i].subject = resolve(label_refs[i].second);
  }

  const auto meta_len = r.value<std::uint32_t>();
  std::string meta_str(meta_len, '\0');
  r.raw(meta_str.data(), meta_len);
  nlohmann::json metadata;
  try {
    metadata = nlohmann::json::parse(meta_str);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad metadata JSON: " + e.what());
  }

  // Revalidate the cached projections before trusting them.
  std::atomic<std::int64_t> bad_entry{-1};
  parallel_for(static_cast<std::int64_t>(entries.size()), [&](std::int64_t i) {
    const Exemplar& e = entries[static_cast<std::size_t>(i)];
    const Pose2D reproj = project(e.pose3d, e.camera);
    for (std::size_t j = 0; j < reproj.joints.size(); ++j) {
      if ((reproj.joints[j] - e.projection.joints[j]).cwiseAbs().maxCoeff() >
          kProjectionTolerancePx) {
        bad_entry.store(i, std::memory_order_relaxed);
        return;
      }
    }
  });
  if (bad_entry.load() >= 0) {
    throw CorruptProjectionCache(
        path.string() + ": cached projection of entry " +
        std::to_string(bad_entry.load()) + " disagrees with reprojection");
  }

  return ExemplarLibrary(skeleton, std::move(entries), std::move(metadata));
}

std::uint64_t library_content_hash(const ExemplarLibrary& lib) {
  std::uint64_t h = 1469598103934665603ull;  // FNV offset basis
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t n = lib.size();
  mix(&n, sizeof(n));
  for (const auto& e : lib.entries()) {
    for (const auto& j : e.pose3d.joints) mix(j.data(), 3 * sizeof(double));
    mix(&e.camera.focal, sizeof(double));
    mix(e.camera.rotation.data(), 9 * sizeof(double));
    mix(e.camera.translation.data(), 3 * sizeof(double));
  }
  return h;
}

}  // namespace poselift
