#include "cagnet/context.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cagnet/kernels.hpp"
#include "cagnet/rng.hpp"

namespace cagnet {

void RegionFeatureSet::validate() const {
  if (regions.empty()) throw std::invalid_argument("feature set: no regions");
  const std::size_t d = global_feature.size();
  if (d == 0) throw std::invalid_argument("feature set: empty global feature");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (!regions[i].feature || regions[i].feature->size() != d) {
      throw std::invalid_argument("feature set: region " + std::to_string(i) +
                                  " missing feature or dimension mismatch");
    }
  }
}

NeighborGraph neighbor_weights(std::size_t target,
                               const std::vector<std::size_t>& neighbors,
                               const RegionFeatureSet& set) {
  if (neighbors.empty()) throw std::invalid_argument("no neighbors");
  const FeatureVector& ft = *set.regions.at(target).feature;
  const std::size_t d = ft.size();

  NeighborGraph graph;
  graph.target_index = target;
  graph.neighbor_indices = neighbors;
  graph.weights.resize(neighbors.size());

  std::vector<double> dots(neighbors.size());
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const std::size_t idx = neighbors[j];
    if (idx == target) throw std::invalid_argument("neighbor list contains target");
    dots[j] = kernels::dot(ft.data(), set.regions.at(idx).feature->data(), d);
  }

  const double m = *std::max_element(dots.begin(), dots.end());
  // Accumulate the normalizer in ascending region-index order so the result
  // does not depend on how the caller ordered the neighbor list.
  std::vector<std::size_t> canon(neighbors.size());
  std::iota(canon.begin(), canon.end(), 0);
  std::sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
    return neighbors[a] < neighbors[b];
  });
  double sum = 0.0;
  for (std::size_t j : canon) sum += std::exp(dots[j] - m);
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    graph.weights[j] = std::exp(dots[j] - m) / sum;
  }
  return graph;
}

std::vector<std::size_t> select_neighbors(std::size_t target,
                                          const RegionFeatureSet& set,
                                          std::size_t k, NeighborSelection selection,
                                          std::uint64_t seed) {
  if (set.regions.size() < 2) throw std::invalid_argument("no neighbors");
  if (k == 0) throw std::invalid_argument("k must be >= 1");

  std::vector<std::size_t> pool_index;  // region index per pool entry
  std::vector<ScoredRegion> pool;
  for (std::size_t i = 0; i < set.regions.size(); ++i) {
    if (i == target) continue;
    pool_index.push_back(i);
    pool.push_back(set.regions[i]);
  }

  if (selection == NeighborSelection::Nearest) {
    std::vector<std::size_t> hits =
        top_k_neighbors(set.regions.at(target), pool, k);
    std::vector<std::size_t> out;
    out.reserve(hits.size());
    for (std::size_t h : hits) out.push_back(pool_index[h]);
    return out;
  }

  // Seeded uniform sample without replacement.
  Rng rng(seed);
  rng.shuffle(pool_index);
  if (pool_index.size() > k) pool_index.resize(k);
  return pool_index;
}

FeatureVector neighbor_feature(std::size_t target, const RegionFeatureSet& set,
                               std::size_t k, NeighborSelection selection,
                               std::uint64_t seed) {
  const std::vector<std::size_t> chosen =
      select_neighbors(target, set, k, selection, seed);
  NeighborGraph graph = neighbor_weights(target, chosen, set);

  // Fixed ascending-index accumulation, same reason as the normalizer.
  std::vector<std::size_t> canon(chosen.size());
  std::iota(canon.begin(), canon.end(), 0);
  std::sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
    return chosen[a] < chosen[b];
  });

  FeatureVector out(set.feature_dim(), 0.0);
  for (std::size_t j : canon) {
    kernels::axpy(graph.weights[j], set.regions[chosen[j]].feature->data(),
                  out.data(), out.size());
  }
  return out;
}

FeatureVector pooled_neighbor_feature(std::size_t target,
                                      const RegionFeatureSet& set, std::size_t k,
                                      PoolMode mode) {
  const std::vector<std::size_t> chosen =
      select_neighbors(target, set, k, NeighborSelection::Nearest);
  const std::size_t d = set.feature_dim();
  FeatureVector out(d, mode == PoolMode::Max ? -INFINITY : 0.0);
  for (std::size_t idx : chosen) {
    const FeatureVector& f = *set.regions[idx].feature;
    for (std::size_t j = 0; j < d; ++j) {
      if (mode == PoolMode::Max) {
        out[j] = std::max(out[j], f[j]);
      } else {
        out[j] += f[j];
      }
    }
  }
  if (mode == PoolMode::Avg) {
    for (double& v : out) v /= static_cast<double>(chosen.size());
  }
  return out;
}

}  // namespace cagnet
