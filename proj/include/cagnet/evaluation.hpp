#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "cagnet/geometry.hpp"
#include "cagnet/meteor.hpp"

namespace cagnet {

// Joint localization/language threshold lattice. AP is computed per cell and
// the 30 cells average into the final score.
struct EvalGrid {
  std::vector<double> iou_thresholds = {0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<double> meteor_thresholds = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25};
};

// Prediction filtering applied before scoring: NMS, confidence top-n, then a
// second NMS round.
struct EvalProtocol {
  double first_nms_iou = 0.7;
  std::size_t keep_top = 300;
  double second_nms_iou = 0.3;
};

struct EvalReport {
  std::vector<std::vector<double>> ap;  // [iou][meteor]
  double map = 0.0;
  double language_meteor = 0.0;
  std::size_t num_predictions = 0;
  std::size_t num_ground_truths = 0;
};

using RegionsByImage = std::map<std::string, std::vector<ScoredRegion>>;

// AP of one cell on a single image set already filtered by the protocol.
// Greedy matching in descending confidence (ties by input index): a
// prediction claims the unmatched GT with highest IoU among those passing
// both gates. Throws when ground_truths is empty; returns 0 without
// predictions.
double average_precision(const std::vector<ScoredRegion>& predictions,
                         const std::vector<ScoredRegion>& ground_truths,
                         double t_iou, double t_meteor,
                         const MeteorParams& meteor = {});

// Full grid over multi-image inputs. Detections pool across images into one
// ranked list per cell (ties: confidence, then image key, then index).
// Throws when predictions name an image absent from ground_truths.
EvalReport dense_map(const RegionsByImage& predictions,
                     const RegionsByImage& ground_truths,
                     const EvalGrid& grid = {}, const EvalProtocol& protocol = {},
                     const MeteorParams& meteor = {});

// Localization-free language score: per prediction, METEOR against the bag of
// all GT captions of its image; mean over predictions.
double language_meteor(const RegionsByImage& predictions,
                       const RegionsByImage& ground_truths,
                       const MeteorParams& meteor = {});

std::string format_report_table(const EvalReport& report, const EvalGrid& grid);

}  // namespace cagnet
