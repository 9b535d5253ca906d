#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cagnet {

using Tokens = std::vector<std::string>;
using FeatureVector = std::vector<double>;

// Continuous box convention: area = (x2-x1)*(y2-y1), no +1.
struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double area() const { return (x2 - x1) * (y2 - y1); }
  bool valid() const;
};

struct ScoredRegion {
  BBox box;
  double confidence = 1.0;
  std::optional<Tokens> caption;
  std::optional<FeatureVector> feature;
};

// Intersection over union; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

// Greedy NMS in descending confidence (ties by input index). A box is
// suppressed when its IoU with an already-kept box is >= threshold. Returns
// surviving input indices in descending-confidence order, at most max_keep.
std::vector<std::size_t> nms_indices(const std::vector<ScoredRegion>& regions,
                                     double iou_threshold, std::size_t max_keep);

std::vector<ScoredRegion> nms(const std::vector<ScoredRegion>& regions,
                              double iou_threshold, std::size_t max_keep);

// Indices of the k pool regions with highest IoU to the target, descending,
// ties by lower index. Zero-overlap regions are eligible. Returns the whole
// pool (sorted) when it has fewer than k entries.
std::vector<std::size_t> top_k_neighbors(const ScoredRegion& target,
                                         const std::vector<ScoredRegion>& pool,
                                         std::size_t k);

}  // namespace cagnet
