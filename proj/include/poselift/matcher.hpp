#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "poselift/library.hpp"
#include "poselift/types.hpp"

namespace poselift {

enum class Normalization { None, RootCenterScale };

struct MatchConfig {
  int k = 10;           // shortlist size
  double sigma = 10.0;  // pixels; only used for posterior weights
  Normalization normalization = Normalization::None;
};

struct MatchResult {
  // (exemplar id, squared pixel error), ascending by error, ties by id.
  std::vector<std::pair<std::int64_t, double>> candidates;
  std::optional<std::vector<double>> weights;
};

// None: identity. RootCenterScale: subtract the root joint, divide by the
// mean joint-to-root distance; throws DegenerateScale below 1e-6 px.
Pose2D normalize(const Pose2D& pose, Normalization mode);

// The k exemplars minimizing reprojection error between normalized cached
// projections and the normalized query. The scan runs in single precision
// across worker shards; the shortlist is rescored in double precision, which
// fixes the reported errors and the final order. Results do not depend on
// the worker count.
MatchResult match(const ExemplarLibrary& lib, const Pose2D& query,
                  const MatchConfig& cfg);

// Softmax over the shortlist, w_i proportional to exp(-e_i / sigma^2),
// computed with a max shift. Throws EmptyInput on an empty result.
std::vector<double> posterior_weights(const MatchResult& result, double sigma);

}  // namespace poselift
