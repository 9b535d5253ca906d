#include "cagnet/caption_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cagnet/kernels.hpp"

namespace cagnet {

NeighborFrontend frontend_from_string(const std::string& s) {
  if (s == "graph") return NeighborFrontend::Graph;
  if (s == "fc") return NeighborFrontend::Fc;
  if (s == "avg") return NeighborFrontend::Avg;
  if (s == "max") return NeighborFrontend::Max;
  throw std::invalid_argument("unknown neighbor frontend: " + s);
}

std::string frontend_name(NeighborFrontend f) {
  switch (f) {
    case NeighborFrontend::Graph: return "graph";
    case NeighborFrontend::Fc: return "fc";
    case NeighborFrontend::Avg: return "avg";
    case NeighborFrontend::Max: return "max";
  }
  return "?";
}

void CaptionModelConfig::validate() const {
  if (max_len < 1) throw std::invalid_argument("config: max_len must be >= 1");
  if (stages != 1 && stages != 2) throw std::invalid_argument("config: stages must be 1 or 2");
  if (vocab_size < 3) throw std::invalid_argument("config: vocabulary too small");
  if (feature_dim == 0 || embed_dim == 0 || hidden_dim == 0) {
    throw std::invalid_argument("config: zero dimension");
  }
  if (k == 0) throw std::invalid_argument("config: k must be >= 1");
}

std::vector<Parameter*> CaptionModelParams::all() {
  std::vector<Parameter*> out;
  out.push_back(&embedding);
  for (StageParams& stage : stages) {
    for (BranchParams& b : stage.branches) {
      if (b.Wp) out.push_back(&*b.Wp);
      if (b.bp) out.push_back(&*b.bp);
      out.push_back(&b.lstm.Wx);
      out.push_back(&b.lstm.Wh);
      out.push_back(&b.lstm.b);
    }
    stage.fusion.collect(out, config.fusion);
  }
  out.push_back(&dec_W);
  out.push_back(&dec_b);
  if (attr_coarse_W) out.push_back(&*attr_coarse_W);
  if (attr_coarse_b) out.push_back(&*attr_coarse_b);
  if (attr_fine_W) out.push_back(&*attr_fine_W);
  if (attr_fine_b) out.push_back(&*attr_fine_b);
  if (fc_W) out.push_back(&*fc_W);
  if (fc_b) out.push_back(&*fc_b);
  return out;
}

void CaptionModelParams::zero_grads() {
  for (Parameter* p : all()) p->zero_grad();
}

CaptionModelParams make_caption_model(const CaptionModelConfig& config,
                                      std::uint64_t seed) {
  config.validate();
  CaptionModelParams p;
  p.config = config;
  const std::size_t d = config.feature_dim, E = config.embed_dim,
                    H = config.hidden_dim, V = config.vocab_size;
  const std::size_t B = config.branch_count();
  static const char* kBranchNames[] = {"local", "nbr", "glob"};

  p.embedding = Parameter("embed", {V, E});
  for (int s = 0; s < config.stages; ++s) {
    StageParams stage;
    const std::string sp = s == 0 ? "coarse" : "refined";
    for (std::size_t b = 0; b < 3; ++b) {
      if (b == 1 && !config.use_neighbor) continue;
      if (b == 2 && !config.use_global) continue;
      BranchParams bp;
      const std::string prefix = sp + "." + kBranchNames[b];
      if (s == 0) {
        bp.Wp = Parameter(prefix + ".proj.W", {H, E + d});
        bp.bp = Parameter(prefix + ".proj.b", {H});
        bp.lstm = nn::LSTMParams(prefix + ".lstm", H, H);
      } else {
        bp.lstm = nn::LSTMParams(prefix + ".lstm", H, H);
      }
      stage.branches.push_back(std::move(bp));
    }
    stage.fusion = nn::FusionParams(sp + ".fusion", B, H, config.fusion,
                                    config.softmax_gates);
    p.stages.push_back(std::move(stage));
  }
  p.dec_W = Parameter("decoder.W", {V, H});
  p.dec_b = Parameter("decoder.b", {V});
  if (config.stages == 2 && config.coarse_attr_count > 0) {
    p.attr_coarse_W = Parameter("attr_coarse.W", {config.coarse_attr_count, H});
    p.attr_coarse_b = Parameter("attr_coarse.b", {config.coarse_attr_count});
  }
  if (config.fine_attr_count > 0) {
    p.attr_fine_W = Parameter("attr_fine.W", {config.fine_attr_count, H});
    p.attr_fine_b = Parameter("attr_fine.b", {config.fine_attr_count});
  }
  if (config.frontend == NeighborFrontend::Fc) {
    p.fc_W = Parameter("frontend_fc.W", {d, config.k * d});
    p.fc_b = Parameter("frontend_fc.b", {d});
  }

  Rng rng(seed);
  for (Parameter* param : p.all()) {
    if (param->name.find(".gate") != std::string::npos) continue;  // ctor default
    if (param->name == "embed") {
      param->init_uniform(rng, 0.1);
    } else if (param->value.shape.size() == 2) {
      param->init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(
                                   std::max<std::size_t>(1, param->value.shape[1]))));
    }
    // biases stay zero
  }
  return p;
}

namespace {

Tensor embed_row(const Parameter& emb, std::size_t token) {
  const std::size_t E = emb.value.shape[1];
  Tensor e({E});
  std::copy_n(emb.value.data() + token * E, E, e.data());
  return e;
}

struct StageStepCache {
  std::vector<nn::LSTMCache> lstm;  // per branch
  nn::FusionCache fusion;
  Tensor fused;
};

struct StepCache {
  std::size_t prev_token = 0;
  std::vector<Tensor> concat_in;  // coarse concat(e, f_b) per branch
  std::vector<StageStepCache> stage;
  Tensor word_logits;
  std::vector<double> a2_logits, a1_logits;
};

struct StepOutput {
  Tensor fused_coarse;
  Tensor fused_final;
};

using ModelStates = std::vector<std::vector<nn::LSTMState>>;  // [stage][branch]

ModelStates initial_states(const CaptionModelParams& p, int eff_stages) {
  ModelStates s(eff_stages);
  for (int st = 0; st < eff_stages; ++st) {
    s[st].assign(p.config.branch_count(), nn::LSTMState(p.config.hidden_dim));
  }
  return s;
}

StepOutput run_step(const CaptionModelParams& p, int eff_stages,
                    const std::vector<const FeatureVector*>& feats,
                    std::size_t prev_token, ModelStates& states, StepCache* cache) {
  const CaptionModelConfig& cfg = p.config;
  const std::size_t B = cfg.branch_count();
  const std::size_t E = cfg.embed_dim, d = cfg.feature_dim, H = cfg.hidden_dim;

  if (cache) {
    cache->prev_token = prev_token;
    cache->concat_in.resize(B);
    cache->stage.resize(eff_stages);
    for (int s = 0; s < eff_stages; ++s) cache->stage[s].lstm.resize(B);
  }

  const Tensor e = embed_row(p.embedding, prev_token);

  // Coarse stage: every branch sees (embedding, own feature).
  std::vector<Tensor> h0(B);
  for (std::size_t b = 0; b < B; ++b) {
    Tensor x({E + d});
    std::copy(e.values.begin(), e.values.end(), x.values.begin());
    std::copy(feats[b]->begin(), feats[b]->end(), x.values.begin() + E);
    const BranchParams& bp = p.stages[0].branches[b];
    Tensor u = nn::linear(x, *bp.Wp, *bp.bp);
    nn::LSTMCache* lc = cache ? &cache->stage[0].lstm[b] : nullptr;
    states[0][b] = nn::lstm_step(u.values, states[0][b], bp.lstm, lc);
    h0[b] = Tensor({H});
    h0[b].values = states[0][b].h;
    if (cache) cache->concat_in[b] = std::move(x);
  }
  StepOutput out;
  out.fused_coarse = nn::adaptive_fuse(std::span<const Tensor>(h0.data(), B),
                                       p.stages[0].fusion, cfg.fusion,
                                       cache ? &cache->stage[0].fusion : nullptr);
  if (cache) cache->stage[0].fused = out.fused_coarse;

  if (eff_stages == 2) {
    // Refined stage: local takes the coarse fusion, the context branches take
    // their own coarse outputs.
    std::vector<Tensor> h1(B);
    for (std::size_t b = 0; b < B; ++b) {
      const Tensor& input = (b == 0) ? out.fused_coarse : h0[b];
      const BranchParams& bp = p.stages[1].branches[b];
      nn::LSTMCache* lc = cache ? &cache->stage[1].lstm[b] : nullptr;
      states[1][b] = nn::lstm_step(input.values, states[1][b], bp.lstm, lc);
      h1[b] = Tensor({H});
      h1[b].values = states[1][b].h;
    }
    out.fused_final = nn::adaptive_fuse(std::span<const Tensor>(h1.data(), B),
                                        p.stages[1].fusion, cfg.fusion,
                                        cache ? &cache->stage[1].fusion : nullptr);
    if (cache) cache->stage[1].fused = out.fused_final;
  } else {
    out.fused_final = out.fused_coarse;
  }
  return out;
}

std::vector<double> head_logits(const Tensor& h, const Parameter& W, const Parameter& b) {
  return nn::linear(h, W, b).values;
}

struct PooledLogits {
  std::vector<double> pooled;
  std::vector<std::size_t> argmax_step;
};

PooledLogits pool_logits(const std::vector<StepCache>& steps, bool fine, bool mean_pool) {
  PooledLogits out;
  const std::vector<double>& first = fine ? steps[0].a1_logits : steps[0].a2_logits;
  const std::size_t n = first.size();
  out.pooled = first;
  out.argmax_step.assign(n, 0);
  for (std::size_t t = 1; t < steps.size(); ++t) {
    const std::vector<double>& logits = fine ? steps[t].a1_logits : steps[t].a2_logits;
    for (std::size_t j = 0; j < n; ++j) {
      if (mean_pool) {
        out.pooled[j] += logits[j];
      } else if (logits[j] > out.pooled[j]) {
        out.pooled[j] = logits[j];
        out.argmax_step[j] = t;
      }
    }
  }
  if (mean_pool) {
    for (double& v : out.pooled) v /= static_cast<double>(steps.size());
  }
  return out;
}

struct ForwardRun {
  std::vector<StepCache> steps;
  TrainLosses losses;
  PooledLogits a2_pool, a1_pool;
  bool coarse_head = false, fine_head = false;
};

void check_inputs(const CaptionModelParams& p, const FeatureVector& local,
                  const FeatureVector& neighboring, const FeatureVector& global,
                  const std::vector<std::size_t>& caption) {
  const CaptionModelConfig& cfg = p.config;
  if (local.size() != cfg.feature_dim ||
      (cfg.use_neighbor && neighboring.size() != cfg.feature_dim) ||
      (cfg.use_global && global.size() != cfg.feature_dim)) {
    throw std::invalid_argument("forward: feature dimension mismatch");
  }
  if (caption.empty()) throw std::invalid_argument("forward: empty caption");
  if (caption.size() > cfg.max_len) {
    throw std::invalid_argument("forward: caption longer than max_len");
  }
  if (caption.back() != 1) throw std::invalid_argument("forward: caption must end with <eos>");
  for (std::size_t id : caption) {
    if (id >= cfg.vocab_size) {
      throw std::invalid_argument("forward: unknown token id " + std::to_string(id));
    }
  }
}

std::vector<const FeatureVector*> active_features(const CaptionModelConfig& cfg,
                                                  const FeatureVector& local,
                                                  const FeatureVector& neighboring,
                                                  const FeatureVector& global) {
  std::vector<const FeatureVector*> feats = {&local};
  if (cfg.use_neighbor) feats.push_back(&neighboring);
  if (cfg.use_global) feats.push_back(&global);
  return feats;
}

ForwardRun forward_pass(const CaptionModelParams& p, int eff_stages,
                        const FeatureVector& local, const FeatureVector& neighboring,
                        const FeatureVector& global,
                        const std::vector<std::size_t>& caption,
                        const std::vector<double>& a2_target,
                        const std::vector<double>& a1_target) {
  const CaptionModelConfig& cfg = p.config;
  check_inputs(p, local, neighboring, global, caption);

  ForwardRun run;
  run.coarse_head = eff_stages == 2 && p.attr_coarse_W.has_value();
  run.fine_head = p.attr_fine_W.has_value();
  if (run.coarse_head ? a2_target.size() != p.attr_coarse_W->value.shape[0]
                      : !a2_target.empty()) {
    throw std::invalid_argument("forward: coarse attribute target size mismatch");
  }
  if (run.fine_head ? a1_target.size() != p.attr_fine_W->value.shape[0]
                    : !a1_target.empty()) {
    throw std::invalid_argument("forward: fine attribute target size mismatch");
  }

  const auto feats = active_features(cfg, local, neighboring, global);
  ModelStates states = initial_states(p, eff_stages);
  const std::size_t steps = caption.size();
  run.steps.resize(steps);

  double sent = 0.0;
  std::size_t prev = 0;  // <sos>
  for (std::size_t t = 0; t < steps; ++t) {
    StepCache& sc = run.steps[t];
    StepOutput out = run_step(p, eff_stages, feats, prev, states, &sc);
    sc.word_logits = nn::linear(out.fused_final, p.dec_W, p.dec_b);
    sent += nn::softmax_cross_entropy(sc.word_logits, caption[t]);
    if (run.coarse_head) {
      sc.a2_logits = head_logits(out.fused_coarse, *p.attr_coarse_W, *p.attr_coarse_b);
    }
    if (run.fine_head) {
      sc.a1_logits = head_logits(out.fused_final, *p.attr_fine_W, *p.attr_fine_b);
    }
    prev = caption[t];
  }
  run.losses.sentence = sent / static_cast<double>(steps);

  if (run.coarse_head) {
    run.a2_pool = pool_logits(run.steps, false, cfg.mean_pool_attrs);
    Tensor pooled({run.a2_pool.pooled.size()});
    pooled.values = run.a2_pool.pooled;
    run.losses.coarse_attr = nn::binary_cross_entropy(pooled, a2_target);
  }
  if (run.fine_head) {
    run.a1_pool = pool_logits(run.steps, true, cfg.mean_pool_attrs);
    Tensor pooled({run.a1_pool.pooled.size()});
    pooled.values = run.a1_pool.pooled;
    run.losses.fine_attr = nn::binary_cross_entropy(pooled, a1_target);
  }
  return run;
}

void backward_pass(CaptionModelParams& p, int eff_stages, ForwardRun& run,
                   const std::vector<std::size_t>& caption,
                   const std::vector<double>& a2_target,
                   const std::vector<double>& a1_target,
                   FeatureGrads* feature_grads, const LossScales& scales) {
  const CaptionModelConfig& cfg = p.config;
  const std::size_t B = cfg.branch_count();
  const std::size_t H = cfg.hidden_dim, E = cfg.embed_dim, d = cfg.feature_dim;
  const std::size_t steps = run.steps.size();
  const double inv_steps = 1.0 / static_cast<double>(steps);

  // Pooled-attribute gradients, routed per step below.
  std::vector<double> d_a2_pool, d_a1_pool;
  if (run.coarse_head) {
    Tensor pooled({run.a2_pool.pooled.size()}), dpooled;
    pooled.values = run.a2_pool.pooled;
    nn::binary_cross_entropy(pooled, a2_target, &dpooled);
    d_a2_pool = dpooled.values;
    for (double& v : d_a2_pool) v *= scales.coarse;
  }
  if (run.fine_head) {
    Tensor pooled({run.a1_pool.pooled.size()}), dpooled;
    pooled.values = run.a1_pool.pooled;
    nn::binary_cross_entropy(pooled, a1_target, &dpooled);
    d_a1_pool = dpooled.values;
    for (double& v : d_a1_pool) v *= scales.fine;
  }
  auto step_attr_grad = [&](const PooledLogits& pool, const std::vector<double>& dpool,
                            std::size_t t) {
    Tensor g({dpool.size()});
    if (cfg.mean_pool_attrs) {
      for (std::size_t j = 0; j < dpool.size(); ++j) g[j] = dpool[j] * inv_steps;
    } else {
      for (std::size_t j = 0; j < dpool.size(); ++j) {
        if (pool.argmax_step[j] == t) g[j] = dpool[j];
      }
    }
    return g;
  };

  // Recurrent gradient carriers.
  std::vector<std::vector<std::vector<double>>> dh(eff_stages), dc(eff_stages);
  for (int s = 0; s < eff_stages; ++s) {
    dh[s].assign(B, std::vector<double>(H, 0.0));
    dc[s].assign(B, std::vector<double>(H, 0.0));
  }
  std::vector<FeatureVector> dfeat(B, FeatureVector(d, 0.0));

  for (std::size_t t = steps; t-- > 0;) {
    StepCache& sc = run.steps[t];

    Tensor dfinal({H});
    {
      Tensor dlogits;
      nn::softmax_cross_entropy(sc.word_logits, caption[t], &dlogits);
      for (double& v : dlogits.values) v *= inv_steps * scales.sentence;
      const Tensor& final_fused = sc.stage[eff_stages - 1].fused;
      dfinal = nn::linear_backward(final_fused, p.dec_W, p.dec_b, dlogits);
      if (run.fine_head) {
        Tensor da1 = step_attr_grad(run.a1_pool, d_a1_pool, t);
        Tensor extra = nn::linear_backward(final_fused, *p.attr_fine_W,
                                           *p.attr_fine_b, da1);
        kernels::axpy(1.0, extra.data(), dfinal.data(), H);
      }
    }

    Tensor dfused0({H});
    std::vector<std::vector<double>> dh0_extra(B, std::vector<double>(H, 0.0));
    if (eff_stages == 2) {
      std::vector<Tensor> dinputs1(B, Tensor({H}));
      nn::adaptive_fuse_backward(sc.stage[1].fusion, p.stages[1].fusion, cfg.fusion,
                                 dfinal, dinputs1);
      for (std::size_t b = 0; b < B; ++b) {
        std::vector<double> dh1(H), dc1(H);
        for (std::size_t j = 0; j < H; ++j) {
          dh1[j] = dinputs1[b][j] + dh[1][b][j];
          dc1[j] = dc[1][b][j];
        }
        std::vector<double> dx(H, 0.0), dhp(H, 0.0), dcp(H, 0.0);
        nn::lstm_backward(sc.stage[1].lstm[b], p.stages[1].branches[b].lstm, dh1, dc1,
                          dx, dhp, dcp);
        dh[1][b] = std::move(dhp);
        dc[1][b] = std::move(dcp);
        if (b == 0) {
          kernels::axpy(1.0, dx.data(), dfused0.data(), H);
        } else {
          kernels::axpy(1.0, dx.data(), dh0_extra[b].data(), H);
        }
      }
      if (run.coarse_head) {
        Tensor da2 = step_attr_grad(run.a2_pool, d_a2_pool, t);
        Tensor extra = nn::linear_backward(sc.stage[0].fused, *p.attr_coarse_W,
                                           *p.attr_coarse_b, da2);
        kernels::axpy(1.0, extra.data(), dfused0.data(), H);
      }
    } else {
      dfused0 = dfinal;
    }

    std::vector<Tensor> dinputs0(B, Tensor({H}));
    nn::adaptive_fuse_backward(sc.stage[0].fusion, p.stages[0].fusion, cfg.fusion,
                               dfused0, dinputs0);
    for (std::size_t b = 0; b < B; ++b) {
      std::vector<double> dh0(H), dc0(H);
      for (std::size_t j = 0; j < H; ++j) {
        dh0[j] = dinputs0[b][j] + dh0_extra[b][j] + dh[0][b][j];
        dc0[j] = dc[0][b][j];
      }
      std::vector<double> du(H, 0.0), dhp(H, 0.0), dcp(H, 0.0);
      BranchParams& bp = p.stages[0].branches[b];
      nn::lstm_backward(sc.stage[0].lstm[b], bp.lstm, dh0, dc0, du, dhp, dcp);
      dh[0][b] = std::move(dhp);
      dc[0][b] = std::move(dcp);
      Tensor du_t({H});
      du_t.values = std::move(du);
      Tensor dconcat = nn::linear_backward(sc.concat_in[b], *bp.Wp, *bp.bp, du_t);
      // split into embedding and feature gradients
      kernels::axpy(1.0, dconcat.data(),
                    p.embedding.grad.data() + sc.prev_token * E, E);
      kernels::axpy(1.0, dconcat.data() + E, dfeat[b].data(), d);
    }
  }

  if (feature_grads) {
    feature_grads->local = dfeat[0];
    std::size_t slot = 1;
    feature_grads->neighboring.assign(d, 0.0);
    feature_grads->global.assign(d, 0.0);
    if (cfg.use_neighbor) feature_grads->neighboring = dfeat[slot++];
    if (cfg.use_global) feature_grads->global = dfeat[slot];
  }
}

}  // namespace

TrainLosses forward_train(const FeatureVector& local, const FeatureVector& neighboring,
                          const FeatureVector& global,
                          const std::vector<std::size_t>& caption,
                          const std::vector<double>& a2_target,
                          const std::vector<double>& a1_target,
                          const CaptionModelParams& params) {
  return forward_pass(params, params.config.stages, local, neighboring, global,
                      caption, a2_target, a1_target)
      .losses;
}

TrainLosses forward_backward(const FeatureVector& local, const FeatureVector& neighboring,
                             const FeatureVector& global,
                             const std::vector<std::size_t>& caption,
                             const std::vector<double>& a2_target,
                             const std::vector<double>& a1_target,
                             CaptionModelParams& params, FeatureGrads* feature_grads,
                             const LossScales& scales) {
  ForwardRun run = forward_pass(params, params.config.stages, local, neighboring,
                                global, caption, a2_target, a1_target);
  backward_pass(params, params.config.stages, run, caption, a2_target, a1_target,
                feature_grads, scales);
  return run.losses;
}

TrainLosses forward_train_coarse_only(const FeatureVector& local,
                                      const FeatureVector& neighboring,
                                      const FeatureVector& global,
                                      const std::vector<std::size_t>& caption,
                                      const std::vector<double>& a1_target,
                                      const CaptionModelParams& params) {
  return forward_pass(params, 1, local, neighboring, global, caption, {}, a1_target)
      .losses;
}

namespace {

std::vector<std::size_t> greedy_unroll(const FeatureVector& local,
                                       const FeatureVector& neighboring,
                                       const FeatureVector& global,
                                       const CaptionModelParams& p, int eff_stages,
                                       std::vector<StepCache>* caches) {
  const CaptionModelConfig& cfg = p.config;
  const auto feats = active_features(cfg, local, neighboring, global);
  ModelStates states = initial_states(p, eff_stages);

  std::vector<std::size_t> tokens;
  std::size_t prev = 0;  // <sos>
  for (std::size_t t = 0; t < cfg.max_len; ++t) {
    StepCache sc;
    StepOutput out = run_step(p, eff_stages, feats, prev,
                              states, caches ? &sc : nullptr);
    Tensor logits = nn::linear(out.fused_final, p.dec_W, p.dec_b);
    std::size_t best = 0;
    for (std::size_t v = 1; v < logits.size(); ++v) {
      if (logits[v] > logits[best]) best = v;  // ties keep the lower id
    }
    if (caches) {
      if (eff_stages == 2 && p.attr_coarse_W) {
        sc.a2_logits = head_logits(out.fused_coarse, *p.attr_coarse_W, *p.attr_coarse_b);
      }
      if (p.attr_fine_W) {
        sc.a1_logits = head_logits(out.fused_final, *p.attr_fine_W, *p.attr_fine_b);
      }
      caches->push_back(std::move(sc));
    }
    if (best == 1) break;  // <eos>
    tokens.push_back(best);
    prev = best;
  }
  return tokens;
}

}  // namespace

std::vector<std::size_t> decode_greedy(const FeatureVector& local,
                                       const FeatureVector& neighboring,
                                       const FeatureVector& global,
                                       const CaptionModelParams& params) {
  return greedy_unroll(local, neighboring, global, params, params.config.stages,
                       nullptr);
}

std::vector<std::size_t> decode_greedy_coarse_only(const FeatureVector& local,
                                                   const FeatureVector& neighboring,
                                                   const FeatureVector& global,
                                                   const CaptionModelParams& params) {
  return greedy_unroll(local, neighboring, global, params, 1, nullptr);
}

AttributeProbs attribute_predict(const FeatureVector& local,
                                 const FeatureVector& neighboring,
                                 const FeatureVector& global,
                                 const CaptionModelParams& params) {
  std::vector<StepCache> caches;
  greedy_unroll(local, neighboring, global, params, params.config.stages, &caches);
  AttributeProbs probs;
  const bool coarse = params.config.stages == 2 && params.attr_coarse_W.has_value();
  const bool fine = params.attr_fine_W.has_value();
  if (coarse) {
    PooledLogits pool = pool_logits(caches, false, params.config.mean_pool_attrs);
    probs.a2.resize(pool.pooled.size());
    for (std::size_t j = 0; j < pool.pooled.size(); ++j) {
      probs.a2[j] = nn::sigmoid(pool.pooled[j]);
    }
  }
  if (fine) {
    PooledLogits pool = pool_logits(caches, true, params.config.mean_pool_attrs);
    probs.a1.resize(pool.pooled.size());
    for (std::size_t j = 0; j < pool.pooled.size(); ++j) {
      probs.a1[j] = nn::sigmoid(pool.pooled[j]);
    }
  }
  return probs;
}

FeatureVector fc_frontend(const CaptionModelParams& params,
                          const std::vector<double>& concat_features) {
  if (!params.fc_W) throw std::logic_error("fc_frontend: model has no fc front-end");
  Tensor x({concat_features.size()});
  x.values = concat_features;
  return nn::linear(x, *params.fc_W, *params.fc_b).values;
}

void fc_frontend_backward(CaptionModelParams& params,
                          const std::vector<double>& concat_features,
                          const FeatureVector& d_neighboring) {
  Tensor x({concat_features.size()});
  x.values = concat_features;
  Tensor dy({d_neighboring.size()});
  dy.values = d_neighboring;
  nn::linear_backward(x, *params.fc_W, *params.fc_b, dy);
}

}  // namespace cagnet
