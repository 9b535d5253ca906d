#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cagnet/caption_model.hpp"
#include "cagnet/synthetic.hpp"

namespace cagnet {

// Line-oriented `key = value` run configuration. Unknown keys are rejected;
// every run can echo the fully resolved set.
struct RunConfig {
  // model
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t max_len = 10;
  std::string fusion = "adaptive2";
  int stages = 2;
  std::string frontend = "graph";
  std::size_t k = 2;
  std::string neighbor_selection = "nearest";
  bool softmax_gates = true;
  bool mean_pool_attrs = false;
  std::string coarse_attrs = "a2";  // a2 | a1 | topk | none
  std::string fine_attrs = "a1";
  std::size_t topk_attrs = 50;

  // training
  double lr = 0.001;
  std::size_t epochs = 10;
  double alpha = 0.1;
  double beta = 0.1;
  double gamma = 0.01;
  std::size_t vocab_cap = 10000;
  std::optional<std::uint64_t> seed;

  // synthetic world
  std::size_t world_images = 500;
  std::size_t world_regions = 4;
  std::size_t world_feature_dim = 16;
  std::size_t world_objects = 10;
  std::size_t world_attributes = 5;
  std::size_t world_context = 5;
  double world_noise = 0.0;
  double world_image_size = 64.0;
  std::size_t world_proposals = 8;

  // attribute pipeline
  double lch_threshold = 0.85;

  // file paths
  std::string dataset_path;
  std::string eval_dataset_path;
  std::string lexicon_path;
  std::string lemmas_path;
  std::string taxonomy_path;
  std::string checkpoint_path;
  std::string predictions_path;
  std::string out_dir = ".";

  static RunConfig load(const std::string& path);
  // Applies one `key=value` override (CLI flags take precedence over files).
  void set(const std::string& key, const std::string& value);
  // Canonical resolved form, sorted by key.
  std::vector<std::pair<std::string, std::string>> resolved() const;
  std::string resolved_string() const;

  CaptionModelConfig model_config(std::size_t feature_dim, std::size_t vocab_size,
                                  std::size_t coarse_attr_count,
                                  std::size_t fine_attr_count) const;
  WorldSpec world_spec(std::uint64_t seed) const;
};

}  // namespace cagnet
