#pragma once

#include <cstdint>
#include <vector>

#include "cagnet/geometry.hpp"

namespace cagnet {

// ROI set with mandatory per-region features plus one whole-image feature,
// all of the same dimension.
struct RegionFeatureSet {
  std::vector<ScoredRegion> regions;
  FeatureVector global_feature;

  std::size_t feature_dim() const { return global_feature.size(); }
  void validate() const;  // throws std::invalid_argument on violations
};

// Softmax similarity weights of one target over selected neighbors. Weights
// are positive and sum to 1 (tolerance 1e-9); neighbor order matches the
// input order but the result is exactly invariant to permutations of it.
struct NeighborGraph {
  std::size_t target_index = 0;
  std::vector<std::size_t> neighbor_indices;
  std::vector<double> weights;
};

enum class NeighborSelection { Nearest, Random };

// weights_j = exp(F_i . F_j) / sum_j exp(F_i . F_j), max-subtracted, summed
// in ascending neighbor-index order. Throws on an empty neighbor list.
NeighborGraph neighbor_weights(std::size_t target,
                               const std::vector<std::size_t>& neighbors,
                               const RegionFeatureSet& set);

// Similarity-graph aggregate sum_j w_j F_j over the selected neighbor subset:
// top-k IoU for Nearest, a seeded uniform sample without replacement for
// Random. Throws when the set has no neighbor for the target.
FeatureVector neighbor_feature(std::size_t target, const RegionFeatureSet& set,
                               std::size_t k, NeighborSelection selection,
                               std::uint64_t seed = 0);

enum class PoolMode { Avg, Max };

// Elementwise mean/max over the k nearest neighbor features.
FeatureVector pooled_neighbor_feature(std::size_t target,
                                      const RegionFeatureSet& set, std::size_t k,
                                      PoolMode mode);

// Selected neighbor indices for the configured front-end, in the order the
// aggregation sees them (descending IoU for Nearest).
std::vector<std::size_t> select_neighbors(std::size_t target,
                                          const RegionFeatureSet& set,
                                          std::size_t k, NeighborSelection selection,
                                          std::uint64_t seed = 0);

}  // namespace cagnet
