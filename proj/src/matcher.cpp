#include "poselift/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "poselift/geometry.hpp"
#include "poselift/parallel.hpp"

namespace poselift {

namespace {

struct ScanHit {
  float dist;
  std::int64_t id;
};

// Total order: smaller distance first, then smaller id.
inline bool better(const ScanHit& a, const ScanHit& b) {
  if (a.dist != b.dist) return a.dist < b.dist;
  return a.id < b.id;
}

// Fixed-capacity worst-on-top heap of the k best hits seen so far.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { hits_.reserve(k); }

  void offer(const ScanHit& hit) {
    if (hits_.size() < k_) {
      hits_.push_back(hit);
      std::push_heap(hits_.begin(), hits_.end(), better);
      return;
    }
    if (better(hit, hits_.front())) {
      std::pop_heap(hits_.begin(), hits_.end(), better);
      hits_.back() = hit;
      std::push_heap(hits_.begin(), hits_.end(), better);
    }
  }

  std::vector<ScanHit>& hits() { return hits_; }

 private:
  std::size_t k_;
  std::vector<ScanHit> hits_;
};

// Squared distance between the packed entry projection and the query, in
// single precision. With RootCenterScale the entry is normalized on the fly.
float scan_distance(const float* entry, const float* query, int n,
                    int root_index, Normalization mode) {
  if (mode == Normalization::None) {
    float sum = 0.0f;
    for (int j = 0; j < 2 * n; ++j) {
      const float d = entry[j] - query[j];
      sum += d * d;
    }
    return sum;
  }
  const float rx = entry[2 * root_index];
  const float ry = entry[2 * root_index + 1];
  float radial = 0.0f;
  for (int j = 0; j < n; ++j) {
    const float dx = entry[2 * j] - rx;
    const float dy = entry[2 * j + 1] - ry;
    radial += std::sqrt(dx * dx + dy * dy);
  }
  const float scale = radial / static_cast<float>(n);
  if (!(scale > 1e-6f)) return std::numeric_limits<float>::infinity();
  const float inv = 1.0f / scale;
  float sum = 0.0f;
  for (int j = 0; j < n; ++j) {
    const float dx = (entry[2 * j] - rx) * inv - query[2 * j];
    const float dy = (entry[2 * j + 1] - ry) * inv - query[2 * j + 1];
    sum += dx * dx + dy * dy;
  }
  return sum;
}

}  // namespace

Pose2D normalize(const Pose2D& pose, Normalization mode) {
  if (mode == Normalization::None) return pose;
  const Eigen::Vector2d root = pose.root();
  double radial = 0.0;
  for (const auto& j : pose.joints) radial += (j - root).norm();
  const double scale = radial / static_cast<double>(pose.joints.size());
  if (!(scale > 1e-6)) throw DegenerateScale(scale);
  std::vector<Eigen::Vector2d> out;
  out.reserve(pose.joints.size());
  for (const auto& j : pose.joints) out.emplace_back((j - root) / scale);
  return Pose2D{pose.skeleton, std::move(out)};
}

MatchResult match(const ExemplarLibrary& lib, const Pose2D& query,
                  const MatchConfig& cfg) {
  if (lib.size() == 0) throw EmptyLibrary();
  if (!same_skeleton(query.skeleton, lib.skeleton())) {
    throw SkeletonMismatch("match: query skeleton differs from library");
  }
  if (cfg.k < 1) throw ConfigInvalid("match: k must be >= 1");

  const int n = lib.skeleton()->joint_count;
  const int root_index = lib.skeleton()->root_index;
  const Pose2D query_norm = normalize(query, cfg.normalization);
  std::vector<float> qf(2 * static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    qf[2 * j] = static_cast<float>(query_norm.joints[j].x());
    qf[2 * j + 1] = static_cast<float>(query_norm.joints[j].y());
  }

  const std::size_t k =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.k), lib.size());
  const std::span<const float> packed = lib.packed_projections();

  const int shards = worker_threads();
  std::vector<std::vector<ScanHit>> shard_hits(
      static_cast<std::size_t>(std::max(shards, 1)));
  parallel_chunks(static_cast<std::int64_t>(lib.size()),
                  [&](int shard, std::int64_t begin, std::int64_t end) {
                    TopK top(k);
                    const float* q = qf.data();
                    for (std::int64_t i = begin; i < end; ++i) {
                      const float* entry =
                          packed.data() + static_cast<std::size_t>(i) * 2 *
                                              static_cast<std::size_t>(n);
                      top.offer({scan_distance(entry, q, n, root_index,
                                               cfg.normalization),
                                 i});
                    }
                    shard_hits[static_cast<std::size_t>(shard)] =
                        std::move(top.hits());
                  });

  // The union of per-shard top-k contains the global float top-k; cutting on
  // the same total order reproduces the single-shard result exactly, so the
  // shortlist set is independent of the shard count.
  std::vector<ScanHit> merged;
  for (auto& hits : shard_hits) {
    merged.insert(merged.end(), hits.begin(), hits.end());
  }
  std::sort(merged.begin(), merged.end(), better);
  if (merged.size() > k) merged.resize(k);

  // Rescore the shortlist in double precision; this yields the reported
  // errors and the final ordering.
  MatchResult result;
  result.candidates.reserve(merged.size());
  for (const ScanHit& hit : merged) {
    const Exemplar& e = lib.entries()[static_cast<std::size_t>(hit.id)];
    const double err = reprojection_error(
        normalize(e.projection, cfg.normalization), query_norm);
    result.candidates.emplace_back(hit.id, err);
  }
  std::sort(result.candidates.begin(), result.candidates.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second < b.second;
              return a.first < b.first;
            });
  return result;
}

std::vector<double> posterior_weights(const MatchResult& result,
                                      double sigma) {
  if (result.candidates.empty()) {
    throw EmptyInput("posterior_weights: empty shortlist");
  }
  if (!(sigma > 0)) throw ConfigInvalid("posterior_weights: sigma must be > 0");
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  double min_err = result.candidates.front().second;
  for (const auto& [id, err] : result.candidates) {
    min_err = std::min(min_err, err);
  }
  std::vector<double> weights;
  weights.reserve(result.candidates.size());
  double total = 0.0;
  for (const auto& [id, err] : result.candidates) {
    const double w = std::exp(-(err - min_err) * inv_sigma2);
    weights.push_back(w);
    total += w;
  }
  for (double& w : weights) w /= total;
  return weights;
}

}  // namespace poselift
