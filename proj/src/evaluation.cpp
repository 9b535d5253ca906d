#include "cagnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cagnet {

namespace {

const Tokens kEmptyTokens;

const Tokens& caption_of(const ScoredRegion& r) {
  return r.caption ? *r.caption : kEmptyTokens;
}

std::vector<std::size_t> confidence_order(const std::vector<ScoredRegion>& regions) {
  std::vector<std::size_t> order(regions.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (regions[a].confidence != regions[b].confidence) {
      return regions[a].confidence > regions[b].confidence;
    }
    return a < b;
  });
  return order;
}

// Pairwise IoU and METEOR for one image, computed once and reused by all
// grid cells.
struct MatchTable {
  std::vector<std::vector<double>> iou_pg;     // [pred][gt]
  std::vector<std::vector<double>> meteor_pg;  // [pred][gt]
  std::vector<std::size_t> pred_order;         // descending confidence
};

MatchTable build_table(const std::vector<ScoredRegion>& preds,
                       const std::vector<ScoredRegion>& gts,
                       const MeteorParams& meteor) {
  MatchTable t;
  t.iou_pg.assign(preds.size(), std::vector<double>(gts.size(), 0.0));
  t.meteor_pg.assign(preds.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      t.iou_pg[p][g] = iou(preds[p].box, gts[g].box);
      t.meteor_pg[p][g] =
          meteor_lite(caption_of(preds[p]), {caption_of(gts[g])}, meteor);
    }
  }
  t.pred_order = confidence_order(preds);
  return t;
}

// Greedy TP/FP labels for one image at one cell, in descending-confidence order.
std::vector<char> greedy_match(const MatchTable& t, std::size_t n_gt,
                               double t_iou, double t_meteor) {
  std::vector<char> tp(t.pred_order.size(), 0);
  std::vector<bool> gt_used(n_gt, false);
  for (std::size_t rank = 0; rank < t.pred_order.size(); ++rank) {
    const std::size_t p = t.pred_order[rank];
    double best_iou = -1.0;
    std::size_t best_g = n_gt;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (gt_used[g]) continue;
      if (t.iou_pg[p][g] < t_iou || t.meteor_pg[p][g] < t_meteor) continue;
      if (t.iou_pg[p][g] > best_iou) {
        best_iou = t.iou_pg[p][g];
        best_g = g;
      }
    }
    if (best_g < n_gt) {
      gt_used[best_g] = true;
      tp[rank] = 1;
    }
  }
  return tp;
}

// All-points AP: area under the monotone precision envelope.
double ap_from_ranked(const std::vector<char>& tp_ranked, std::size_t n_gt) {
  if (n_gt == 0) throw std::invalid_argument("average_precision: no ground truths");
  if (tp_ranked.empty()) return 0.0;
  const std::size_t n = tp_ranked.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp_cum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp_cum += tp_ranked[i];
    precision[i] = static_cast<double>(tp_cum) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp_cum) / static_cast<double>(n_gt);
  }
  // precision envelope, right to left
  for (std::size_t i = n - 1; i-- > 0;) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

}  // namespace

double average_precision(const std::vector<ScoredRegion>& predictions,
                         const std::vector<ScoredRegion>& ground_truths,
                         double t_iou, double t_meteor,
                         const MeteorParams& meteor) {
  if (ground_truths.empty()) {
    throw std::invalid_argument("average_precision: no ground truths");
  }
  if (predictions.empty()) return 0.0;
  MatchTable t = build_table(predictions, ground_truths, meteor);
  return ap_from_ranked(greedy_match(t, ground_truths.size(), t_iou, t_meteor),
                        ground_truths.size());
}

EvalReport dense_map(const RegionsByImage& predictions,
                     const RegionsByImage& ground_truths, const EvalGrid& grid,
                     const EvalProtocol& protocol, const MeteorParams& meteor) {
  std::vector<std::string> missing;
  for (const auto& [key, _] : predictions) {
    if (!ground_truths.count(key)) missing.push_back(key);
  }
  if (!missing.empty()) {
    std::string msg = "dense_map: predictions for unknown images:";
    for (const std::string& k : missing) msg += " " + k;
    throw std::invalid_argument(msg);
  }

  // Protocol: NMS 0.7, keep top-n, NMS 0.3.
  RegionsByImage filtered;
  std::size_t n_preds = 0, n_gts = 0;
  for (const auto& [key, preds] : predictions) {
    std::vector<ScoredRegion> stage =
        nms(preds, protocol.first_nms_iou, protocol.keep_top);
    filtered[key] = nms(stage, protocol.second_nms_iou, stage.size());
    n_preds += filtered[key].size();
  }
  for (const auto& [key, gts] : ground_truths) n_gts += gts.size();

  struct ImageData {
    std::string key;
    const std::vector<ScoredRegion>* preds;
    MatchTable table;
    std::size_t n_gt;
  };
  std::vector<ImageData> images;
  for (const auto& [key, preds] : filtered) {
    const auto& gts = ground_truths.at(key);
    images.push_back({key, &preds, build_table(preds, gts, meteor), gts.size()});
  }

  EvalReport report;
  report.num_predictions = n_preds;
  report.num_ground_truths = n_gts;
  report.ap.assign(grid.iou_thresholds.size(),
                   std::vector<double>(grid.meteor_thresholds.size(), 0.0));

  struct Det {
    double confidence;
    std::size_t image;  // index into `images` (map order, deterministic)
    std::size_t rank;   // per-image confidence rank
    char tp;
  };

  for (std::size_t ti = 0; ti < grid.iou_thresholds.size(); ++ti) {
    for (std::size_t tm = 0; tm < grid.meteor_thresholds.size(); ++tm) {
      std::vector<Det> dets;
      for (std::size_t im = 0; im < images.size(); ++im) {
        const ImageData& img = images[im];
        std::vector<char> tp = greedy_match(img.table, img.n_gt,
                                            grid.iou_thresholds[ti],
                                            grid.meteor_thresholds[tm]);
        for (std::size_t rank = 0; rank < tp.size(); ++rank) {
          const std::size_t p = img.table.pred_order[rank];
          dets.push_back({(*img.preds)[p].confidence, im, rank, tp[rank]});
        }
      }
      std::sort(dets.begin(), dets.end(), [](const Det& a, const Det& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.image != b.image) return a.image < b.image;
        return a.rank < b.rank;
      });
      std::vector<char> tp_ranked(dets.size());
      for (std::size_t i = 0; i < dets.size(); ++i) tp_ranked[i] = dets[i].tp;
      report.ap[ti][tm] = n_gts == 0
                              ? 0.0
                              : (dets.empty() ? 0.0 : ap_from_ranked(tp_ranked, n_gts));
    }
  }

  double sum = 0.0;
  for (const auto& row : report.ap) {
    for (double v : row) sum += v;
  }
  report.map = sum / static_cast<double>(grid.iou_thresholds.size() *
                                         grid.meteor_thresholds.size());
  report.language_meteor = language_meteor(filtered, ground_truths, meteor);
  return report;
}

double language_meteor(const RegionsByImage& predictions,
                       const RegionsByImage& ground_truths,
                       const MeteorParams& meteor) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& [key, preds] : predictions) {
    auto it = ground_truths.find(key);
    if (it == ground_truths.end()) {
      throw std::invalid_argument("language_meteor: no ground truth for image " + key);
    }
    std::vector<Tokens> bag;
    for (const ScoredRegion& gt : it->second) bag.push_back(caption_of(gt));
    for (const ScoredRegion& pred : preds) {
      total += meteor_lite(caption_of(pred), bag, meteor);
      ++count;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

std::string format_report_table(const EvalReport& report, const EvalGrid& grid) {
  std::ostringstream os;
  os << "AP by (IoU, METEOR) cell\n";
  os << "IoU\\MET ";
  for (double tm : grid.meteor_thresholds) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%7.2f", tm);
    os << buf;
  }
  os << "\n";
  for (std::size_t ti = 0; ti < grid.iou_thresholds.size(); ++ti) {
    char head[16];
    std::snprintf(head, sizeof(head), "%7.2f ", grid.iou_thresholds[ti]);
    os << head;
    for (double v : report.ap[ti]) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%7.4f", v);
      os << buf;
    }
    os << "\n";
  }
  char tail[128];
  std::snprintf(tail, sizeof(tail),
                "mAP %.6f | language METEOR %.6f | %zu predictions / %zu ground truths\n",
                report.map, report.language_meteor, report.num_predictions,
                report.num_ground_truths);
  os << tail;
  return os.str();
}

}  // namespace cagnet
