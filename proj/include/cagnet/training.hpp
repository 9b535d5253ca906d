#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cagnet/attributes.hpp"
#include "cagnet/caption_model.hpp"
#include "cagnet/dataset.hpp"
#include "cagnet/synthetic.hpp"
#include "cagnet/vocab.hpp"

namespace cagnet {

struct LossWeights {
  double alpha = 0.1;  // bbox
  double beta = 0.1;   // classifier
  double gamma = 0.01; // attributes
};

// L = sent + alpha*bbox + beta*cls + gamma*attr. Components must be finite
// and non-negative.
double total_loss(double sent, double bbox, double cls, double attr,
                  const LossWeights& w);

// Per-coordinate 0.5*x^2 for |x|<1 else |x|-0.5, summed. grad (optional)
// receives d/d(pred).
double smooth_l1(std::span<const double> pred, std::span<const double> target,
                 std::vector<double>* grad = nullptr);

// Network structure variants.
enum class Variant { L, LG, LGN, CAGNet };
Variant variant_from_string(const std::string& s);
std::string variant_name(Variant v);

// Per-stage attribute supervision source.
enum class AttrSet { None, A2, A1, TopK };
AttrSet attr_set_from_string(const std::string& s);
std::string attr_set_name(AttrSet a);

// Lexicon/lemma/taxonomy inputs for hierarchical supervision.
struct AttributeResources {
  PosLexicon lexicon;
  LemmaTable lemmas;
  Taxonomy taxonomy;
};

struct TrainConfig {
  double lr = 0.001;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  LossWeights weights;
  std::size_t vocab_cap = 10000;

  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t max_len = 10;
  nn::FusionMode fusion = nn::FusionMode::Adaptive2;
  NeighborFrontend frontend = NeighborFrontend::Graph;
  std::size_t k = 2;
  NeighborSelection selection = NeighborSelection::Nearest;
  bool softmax_gates = true;
  bool mean_pool_attrs = false;

  AttrSet coarse_attrs = AttrSet::A2;  // CAG-Net variant only
  AttrSet fine_attrs = AttrSet::A1;
  std::size_t topk_attrs = 50;
  double lch_threshold = 0.85;
};

// Box-regression and foreground/background heads driven by the labeled
// proposals; they exist so the full loss is exercised end to end.
struct AuxHeads {
  Parameter box_W, box_b;  // {4, d}, {4}
  Parameter cls_W, cls_b;  // {2, d}, {2}
  std::vector<Parameter*> all();
};

struct EpochLoss {
  double sent = 0, bbox = 0, cls = 0, attr = 0, total = 0;
};

struct TrainResult {
  CaptionModelParams model;
  AuxHeads aux;
  Vocabulary vocab;
  std::vector<EpochLoss> log;
  std::vector<std::string> coarse_attr_names, fine_attr_names;
  Variant variant = Variant::CAGNet;
  std::uint64_t seed = 0;

  std::vector<Parameter*> all_params();
};

// SGD over seeded-shuffled images. Loss per image: mean region sentence CE
// + alpha*bbox + beta*cls + gamma*(mean region attribute BCE). Throws on a
// non-finite loss with epoch/image diagnostics.
TrainResult train(const Dataset& dataset, const TrainConfig& config, Variant variant,
                  const AttributeResources* attrs = nullptr);

// Per-region model inputs under the configured neighbor front-end.
struct RegionContext {
  FeatureVector local, neighboring, global;
  std::vector<double> fc_concat;  // k*d concat for the learned front-end
};
RegionContext region_context(const DatasetRecord& record, std::size_t region,
                             const CaptionModelConfig& config,
                             const CaptionModelParams* params,
                             std::uint64_t selection_seed);

// Greedy captions for every region, using the dataset boxes as proposals.
RegionsByImage predict_captions(const Dataset& dataset, const TrainResult& result);

// Fraction of regions whose decoded third token matches the ground-truth
// context token.
double context_token_accuracy(const Dataset& dataset, const TrainResult& result);

void save_loss_log(const std::string& path, const std::vector<EpochLoss>& log,
                   const std::vector<std::string>& header = {});

// Checkpoint + vocabulary round trip. The checkpoint metadata carries the
// model configuration, so loading needs no external config.
void save_train_result(const std::string& checkpoint_path,
                       const std::string& vocab_path, TrainResult& result,
                       const std::vector<std::string>& extra_metadata = {});
TrainResult load_train_result(const std::string& checkpoint_path,
                              const std::string& vocab_path);

}  // namespace cagnet
