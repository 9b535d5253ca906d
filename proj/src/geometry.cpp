#include "cagnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cagnet {

bool BBox::valid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
         std::isfinite(y2) && x2 > x1 && y2 > y1;
}

double iou(const BBox& a, const BBox& b) {
  const double ix1 = std::max(a.x1, b.x1);
  const double iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2);
  const double iy2 = std::min(a.y2, b.y2);
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

std::vector<std::size_t> nms_indices(const std::vector<ScoredRegion>& regions,
                                     double iou_threshold, std::size_t max_keep) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("nms: iou_threshold must be in (0,1]");
  }
  std::vector<std::size_t> order(regions.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (regions[a].confidence != regions[b].confidence) {
      return regions[a].confidence > regions[b].confidence;
    }
    return a < b;
  });

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    if (kept.size() >= max_keep) break;
    bool suppressed = false;
    for (std::size_t k : kept) {
      if (iou(regions[idx].box, regions[k].box) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

std::vector<ScoredRegion> nms(const std::vector<ScoredRegion>& regions,
                              double iou_threshold, std::size_t max_keep) {
  std::vector<ScoredRegion> out;
  for (std::size_t idx : nms_indices(regions, iou_threshold, max_keep)) {
    out.push_back(regions[idx]);
  }
  return out;
}

std::vector<std::size_t> top_k_neighbors(const ScoredRegion& target,
                                         const std::vector<ScoredRegion>& pool,
                                         std::size_t k) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> overlap(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    overlap[i] = iou(target.box, pool[i].box);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (overlap[a] != overlap[b]) return overlap[a] > overlap[b];
    return a < b;
  });
  if (order.size() > k) order.resize(k);
  return order;
}

}  // namespace cagnet
