#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cagnet/context.hpp"
#include "cagnet/nn.hpp"
#include "cagnet/vocab.hpp"

namespace cagnet {

enum class NeighborFrontend { Graph, Fc, Avg, Max };
NeighborFrontend frontend_from_string(const std::string& s);
std::string frontend_name(NeighborFrontend f);

// Two-stage, three-branch caption generator. stages=1 is the single
// contextual integrator; stages=2 stacks a refined stage on top of the coarse
// one. Branch toggles produce the local-only and local+global variants.
struct CaptionModelConfig {
  std::size_t feature_dim = 32;  // d
  std::size_t embed_dim = 32;    // E
  std::size_t hidden_dim = 32;   // H
  std::size_t max_len = 10;      // T
  nn::FusionMode fusion = nn::FusionMode::Adaptive2;
  int stages = 2;
  bool use_neighbor = true;
  bool use_global = true;
  NeighborFrontend frontend = NeighborFrontend::Graph;
  std::size_t k = 2;
  NeighborSelection selection = NeighborSelection::Nearest;
  bool softmax_gates = true;
  bool mean_pool_attrs = false;  // default: elementwise max over timesteps

  std::size_t vocab_size = 0;
  std::size_t coarse_attr_count = 0;  // 0 = no coarse head
  std::size_t fine_attr_count = 0;    // 0 = no fine head

  std::size_t branch_count() const {
    return 1 + (use_neighbor ? 1 : 0) + (use_global ? 1 : 0);
  }
  void validate() const;
};

// One LSTM branch. The coarse stage projects concat(prev-token embedding,
// branch feature) to the LSTM input; refined-stage branches consume H-sized
// coarse outputs directly.
struct BranchParams {
  std::optional<Parameter> Wp, bp;
  nn::LSTMParams lstm;
};

struct StageParams {
  std::vector<BranchParams> branches;  // local, [neighboring], [global]
  nn::FusionParams fusion;
};

struct CaptionModelParams {
  CaptionModelConfig config;
  Parameter embedding;  // {V, E}
  std::vector<StageParams> stages;
  Parameter dec_W, dec_b;  // word decoder {V, H}, {V}
  // Intermediate supervision head at the coarse fused output (2-stage only)
  // and the fine head at the final fused output.
  std::optional<Parameter> attr_coarse_W, attr_coarse_b;
  std::optional<Parameter> attr_fine_W, attr_fine_b;
  // Learned neighbor front-end: {d, k*d}, {d} (frontend == Fc).
  std::optional<Parameter> fc_W, fc_b;

  std::vector<Parameter*> all();
  void zero_grads();
};

CaptionModelParams make_caption_model(const CaptionModelConfig& config,
                                      std::uint64_t seed);

struct TrainLosses {
  double sentence = 0.0;
  double coarse_attr = 0.0;
  double fine_attr = 0.0;
};

struct FeatureGrads {
  FeatureVector local, neighboring, global;
};

// Gradient weights applied to the loss components during backward (the
// returned losses stay raw); lets a caller optimize weighted sums directly.
struct LossScales {
  double sentence = 1.0;
  double coarse = 1.0;
  double fine = 1.0;
};

// Teacher-forced unroll over `caption` (token ids ending in EOS, length <= T).
// Sentence loss is the per-step mean cross entropy; attribute logits pool
// over timesteps before the BCE. Throws on malformed captions/targets.
TrainLosses forward_train(const FeatureVector& local, const FeatureVector& neighboring,
                          const FeatureVector& global,
                          const std::vector<std::size_t>& caption,
                          const std::vector<double>& a2_target,
                          const std::vector<double>& a1_target,
                          const CaptionModelParams& params);

// forward_train plus gradient accumulation into the parameter set. When
// feature_grads is non-null it receives d(loss)/d(input features).
TrainLosses forward_backward(const FeatureVector& local, const FeatureVector& neighboring,
                             const FeatureVector& global,
                             const std::vector<std::size_t>& caption,
                             const std::vector<double>& a2_target,
                             const std::vector<double>& a1_target,
                             CaptionModelParams& params,
                             FeatureGrads* feature_grads = nullptr,
                             const LossScales& scales = {});

// Structural-regression support: run a 2-stage parameter set with the refined
// stage skipped, which must reproduce the single-stage wiring exactly.
TrainLosses forward_train_coarse_only(const FeatureVector& local,
                                      const FeatureVector& neighboring,
                                      const FeatureVector& global,
                                      const std::vector<std::size_t>& caption,
                                      const std::vector<double>& a1_target,
                                      const CaptionModelParams& params);
std::vector<std::size_t> decode_greedy_coarse_only(const FeatureVector& local,
                                                   const FeatureVector& neighboring,
                                                   const FeatureVector& global,
                                                   const CaptionModelParams& params);

// Beam-1 decoding: argmax per step (ties to the lower token id), SOS fed
// first, stops at EOS or after T tokens. Returns token ids without specials.
std::vector<std::size_t> decode_greedy(const FeatureVector& local,
                                       const FeatureVector& neighboring,
                                       const FeatureVector& global,
                                       const CaptionModelParams& params);

struct AttributeProbs {
  std::vector<double> a2;
  std::vector<double> a1;
};

// Sigmoid of the pooled per-stage attribute logits along the greedy unroll.
AttributeProbs attribute_predict(const FeatureVector& local,
                                 const FeatureVector& neighboring,
                                 const FeatureVector& global,
                                 const CaptionModelParams& params);

// Learned front-end over the concatenation of the k IoU-sorted neighbor
// features (padded with zeros when fewer neighbors exist).
FeatureVector fc_frontend(const CaptionModelParams& params,
                          const std::vector<double>& concat_features);
void fc_frontend_backward(CaptionModelParams& params,
                          const std::vector<double>& concat_features,
                          const FeatureVector& d_neighboring);

}  // namespace cagnet
