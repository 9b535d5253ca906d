#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cagnet/context.hpp"
#include "cagnet/evaluation.hpp"
#include "cagnet/geometry.hpp"

namespace cagnet {

// Labeled localization proposal for the auxiliary box/classifier losses.
struct Proposal {
  BBox box;
  FeatureVector feature;
  int label = 0;                       // 1 foreground, 0 background
  std::optional<std::array<double, 4>> delta;  // regression target, positives only
};

struct DatasetRecord {
  std::string image_id;
  double width = 0, height = 0;
  FeatureVector global_feature;
  std::vector<ScoredRegion> regions;  // captions + features mandatory
  std::vector<Proposal> proposals;

  RegionFeatureSet feature_set() const;
};

struct Dataset {
  std::vector<DatasetRecord> records;
  std::size_t feature_dim = 0;
  std::size_t dropped_captions = 0;  // regions dropped by the length filter
};

// JSONL loader. Validates boxes against the image extent, feature dimensions,
// and confidence range; lowercases caption tokens; drops regions whose
// caption has more than max_caption_words tokens. Malformed lines raise with
// their line number, invariant violations with a field path. A leading
// header object ({"format": ...}) is skipped.
Dataset load_dataset(const std::string& path, std::size_t max_caption_words = 10);

// Writes records one JSON object per line after a header carrying the format
// version and optional config notes.
void save_dataset(const std::string& path, const Dataset& dataset,
                  const std::map<std::string, std::string>& header_config = {});

// Predictions file: one image per line with {image_id, regions:[{box,
// confidence, caption}]}; captions are space-joined strings on disk.
RegionsByImage load_predictions(const std::string& path);
void save_predictions(const std::string& path, const RegionsByImage& predictions,
                      const std::map<std::string, std::string>& header_config = {});

// All ground-truth regions keyed by image, for the evaluator.
RegionsByImage ground_truth_by_image(const Dataset& dataset);

std::vector<Tokens> all_captions(const Dataset& dataset);

}  // namespace cagnet
