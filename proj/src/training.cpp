#include "cagnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "cagnet/checkpoint.hpp"
#include "cagnet/kernels.hpp"

namespace cagnet {

double total_loss(double sent, double bbox, double cls, double attr,
                  const LossWeights& w) {
  const double comps[] = {sent, bbox, cls, attr};
  for (double c : comps) {
    if (!std::isfinite(c)) throw std::invalid_argument("total_loss: non-finite component");
    if (c < 0.0) throw std::invalid_argument("total_loss: negative component");
  }
  if (w.alpha < 0 || w.beta < 0 || w.gamma < 0) {
    throw std::invalid_argument("total_loss: negative weight");
  }
  return sent + w.alpha * bbox + w.beta * cls + w.gamma * attr;
}

double smooth_l1(std::span<const double> pred, std::span<const double> target,
                 std::vector<double>* grad) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument("smooth_l1: length mismatch");
  }
  if (grad) grad->assign(pred.size(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double x = pred[i] - target[i];
    if (std::fabs(x) < 1.0) {
      loss += 0.5 * x * x;
      if (grad) (*grad)[i] = x;
    } else {
      loss += std::fabs(x) - 0.5;
      if (grad) (*grad)[i] = x > 0 ? 1.0 : -1.0;
    }
  }
  return loss;
}

Variant variant_from_string(const std::string& s) {
  if (s == "L") return Variant::L;
  if (s == "L+G") return Variant::LG;
  if (s == "L+G+N") return Variant::LGN;
  if (s == "CAG-Net") return Variant::CAGNet;
  throw std::invalid_argument("unknown variant: " + s +
                              " (expected L, L+G, L+G+N, CAG-Net)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::L: return "L";
    case Variant::LG: return "L+G";
    case Variant::LGN: return "L+G+N";
    case Variant::CAGNet: return "CAG-Net";
  }
  return "?";
}

AttrSet attr_set_from_string(const std::string& s) {
  if (s == "none" || s == "-") return AttrSet::None;
  if (s == "a2") return AttrSet::A2;
  if (s == "a1") return AttrSet::A1;
  if (s == "topk" || s == "1k") return AttrSet::TopK;
  throw std::invalid_argument("unknown attribute set: " + s);
}

std::string attr_set_name(AttrSet a) {
  switch (a) {
    case AttrSet::None: return "-";
    case AttrSet::A2: return "a2";
    case AttrSet::A1: return "a1";
    case AttrSet::TopK: return "topk";
  }
  return "?";
}

std::vector<Parameter*> AuxHeads::all() {
  return {&box_W, &box_b, &cls_W, &cls_b};
}

std::vector<Parameter*> TrainResult::all_params() {
  std::vector<Parameter*> out = model.all();
  for (Parameter* p : aux.all()) out.push_back(p);
  return out;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t image, std::uint64_t region) {
  std::uint64_t x = seed ^ (image * 0x9E3779B97F4A7C15ull) ^ (region + 1);
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDull;
  x ^= x >> 33;
  return x;
}

// Caption ids capped to the unroll budget (a max_len-word caption loses its
// last word to the <eos> slot).
std::vector<std::size_t> encode_capped(const Vocabulary& vocab, const Tokens& caption,
                                       std::size_t max_len) {
  std::vector<std::size_t> ids = vocab.encode(caption);
  if (ids.size() > max_len) {
    ids.resize(max_len);
    ids.back() = vocab.eos();
  }
  return ids;
}

struct AttrTargets {
  std::vector<std::string> names;
  // [record][region] -> binary vector
  std::vector<std::vector<std::vector<double>>> targets;
};

AttrTargets build_attr_targets(const Dataset& dataset, AttrSet set,
                               const AttributeResources* res,
                               const AttributeVocabulary* av, std::size_t topk) {
  AttrTargets out;
  if (set == AttrSet::None) return out;

  if (set == AttrSet::TopK) {
    std::map<std::string, std::size_t> counts;
    for (const DatasetRecord& rec : dataset.records) {
      for (const ScoredRegion& r : rec.regions) {
        for (const std::string& tok : *r.caption) ++counts[tok];
      }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    std::map<std::string, std::size_t> index;
    for (const auto& [word, _] : ranked) {
      if (out.names.size() >= topk) break;
      index[word] = out.names.size();
      out.names.push_back(word);
    }
    for (const DatasetRecord& rec : dataset.records) {
      std::vector<std::vector<double>> per_region;
      for (const ScoredRegion& r : rec.regions) {
        std::vector<double> t(out.names.size(), 0.0);
        for (const std::string& tok : *r.caption) {
          auto it = index.find(tok);
          if (it != index.end()) t[it->second] = 1.0;
        }
        per_region.push_back(std::move(t));
      }
      out.targets.push_back(std::move(per_region));
    }
    return out;
  }

  if (!res || !av) {
    throw std::invalid_argument("attribute supervision '" + attr_set_name(set) +
                                "' requires lexicon/lemma/taxonomy resources");
  }
  if (set == AttrSet::A2) {
    for (const CoarseCluster& c : av->a2) {
      out.names.push_back(std::string(pos_group_name(c.group)) + ":" + c.name);
    }
  } else {
    for (const auto& e : av->a1) {
      out.names.push_back(std::string(pos_group_name(e.group)) + ":" + e.lemma);
    }
  }
  for (const DatasetRecord& rec : dataset.records) {
    std::vector<std::vector<double>> per_region;
    for (const ScoredRegion& r : rec.regions) {
      AttributeTargets t = encode_targets(*r.caption, *av, res->lexicon, res->lemmas);
      per_region.push_back(set == AttrSet::A2 ? std::move(t.a2) : std::move(t.a1));
    }
    out.targets.push_back(std::move(per_region));
  }
  return out;
}

}  // namespace

RegionContext region_context(const DatasetRecord& record, std::size_t region,
                             const CaptionModelConfig& config,
                             const CaptionModelParams* params,
                             std::uint64_t selection_seed) {
  RegionContext ctx;
  ctx.local = *record.regions[region].feature;
  ctx.global = record.global_feature;
  const std::size_t d = ctx.local.size();
  ctx.neighboring.assign(d, 0.0);
  if (!config.use_neighbor || record.regions.size() < 2) return ctx;

  RegionFeatureSet set = record.feature_set();
  switch (config.frontend) {
    case NeighborFrontend::Graph:
      ctx.neighboring =
          neighbor_feature(region, set, config.k, config.selection, selection_seed);
      break;
    case NeighborFrontend::Avg:
      ctx.neighboring = pooled_neighbor_feature(region, set, config.k, PoolMode::Avg);
      break;
    case NeighborFrontend::Max:
      ctx.neighboring = pooled_neighbor_feature(region, set, config.k, PoolMode::Max);
      break;
    case NeighborFrontend::Fc: {
      const std::vector<std::size_t> chosen =
          select_neighbors(region, set, config.k, config.selection, selection_seed);
      ctx.fc_concat.assign(config.k * d, 0.0);
      for (std::size_t i = 0; i < chosen.size(); ++i) {
        const FeatureVector& f = *set.regions[chosen[i]].feature;
        std::copy(f.begin(), f.end(), ctx.fc_concat.begin() + i * d);
      }
      if (params) ctx.neighboring = fc_frontend(*params, ctx.fc_concat);
      break;
    }
  }
  return ctx;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, Variant variant,
                  const AttributeResources* attrs) {
  if (dataset.records.empty()) throw std::invalid_argument("train: empty dataset");

  TrainResult result;
  result.variant = variant;
  result.seed = config.seed;
  result.vocab = Vocabulary::build(all_captions(dataset), config.vocab_cap);

  const bool cagnet = variant == Variant::CAGNet;
  const AttrSet coarse_set = cagnet ? config.coarse_attrs : AttrSet::None;
  const AttrSet fine_set = cagnet ? config.fine_attrs : AttrSet::None;

  AttributeVocabulary av;
  const bool needs_av = (coarse_set == AttrSet::A2 || coarse_set == AttrSet::A1 ||
                         fine_set == AttrSet::A2 || fine_set == AttrSet::A1);
  if (needs_av) {
    if (!attrs) {
      throw std::invalid_argument("train: hierarchical attributes need resources");
    }
    av = build_attribute_vocabulary(all_captions(dataset), attrs->lexicon,
                                    attrs->lemmas, attrs->taxonomy,
                                    config.lch_threshold);
  }
  AttrTargets coarse_targets =
      build_attr_targets(dataset, coarse_set, attrs, &av, config.topk_attrs);
  AttrTargets fine_targets =
      build_attr_targets(dataset, fine_set, attrs, &av, config.topk_attrs);
  result.coarse_attr_names = coarse_targets.names;
  result.fine_attr_names = fine_targets.names;

  CaptionModelConfig mc;
  mc.feature_dim = dataset.feature_dim;
  mc.embed_dim = config.embed_dim;
  mc.hidden_dim = config.hidden_dim;
  mc.max_len = config.max_len;
  mc.fusion = config.fusion;
  mc.stages = cagnet ? 2 : 1;
  mc.use_neighbor = variant == Variant::LGN || cagnet;
  mc.use_global = variant != Variant::L;
  mc.frontend = config.frontend;
  mc.k = config.k;
  mc.selection = config.selection;
  mc.softmax_gates = config.softmax_gates;
  mc.mean_pool_attrs = config.mean_pool_attrs;
  mc.vocab_size = result.vocab.size();
  mc.coarse_attr_count = coarse_targets.names.size();
  mc.fine_attr_count = fine_targets.names.size();

  result.model = make_caption_model(mc, config.seed);
  {
    Rng aux_rng(config.seed + 0x5deece66dull);
    result.aux.box_W = Parameter("aux.box.W", {4, mc.feature_dim});
    result.aux.box_b = Parameter("aux.box.b", {4});
    result.aux.cls_W = Parameter("aux.cls.W", {2, mc.feature_dim});
    result.aux.cls_b = Parameter("aux.cls.b", {2});
    const double s = 1.0 / std::sqrt(static_cast<double>(mc.feature_dim));
    result.aux.box_W.init_uniform(aux_rng, s);
    result.aux.cls_W.init_uniform(aux_rng, s);
  }
  const std::vector<Parameter*> params = result.all_params();

  // Precompute encodings, targets and static front-end features.
  struct RegionData {
    std::vector<std::size_t> caption;
    std::vector<double> a2, a1;
    RegionContext ctx;
  };
  std::vector<std::vector<RegionData>> data(dataset.records.size());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const DatasetRecord& rec = dataset.records[i];
    for (std::size_t r = 0; r < rec.regions.size(); ++r) {
      RegionData rd;
      rd.caption = encode_capped(result.vocab, *rec.regions[r].caption, mc.max_len);
      if (!coarse_targets.targets.empty()) rd.a2 = coarse_targets.targets[i][r];
      if (!fine_targets.targets.empty()) rd.a1 = fine_targets.targets[i][r];
      rd.ctx = region_context(rec, r, mc, nullptr, mix_seed(config.seed, i, r));
      data[i].push_back(std::move(rd));
    }
  }

  Rng shuffle_rng(config.seed ^ 0xC0FFEEull);
  std::vector<std::size_t> order(dataset.records.size());
  std::iota(order.begin(), order.end(), 0);

  const bool learned_frontend = mc.use_neighbor && mc.frontend == NeighborFrontend::Fc;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    EpochLoss ep;
    std::size_t images_used = 0;
    for (std::size_t img : order) {
      const DatasetRecord& rec = dataset.records[img];
      if (rec.regions.empty()) continue;
      ++images_used;
      for (Parameter* p : params) p->zero_grad();

      const double inv_r = 1.0 / static_cast<double>(rec.regions.size());
      double sent = 0.0, attr = 0.0;
      LossScales scales{inv_r, config.weights.gamma * inv_r,
                        config.weights.gamma * inv_r};
      for (std::size_t r = 0; r < rec.regions.size(); ++r) {
        RegionData& rd = data[img][r];
        FeatureGrads fg;
        if (learned_frontend) {
          rd.ctx.neighboring = fc_frontend(result.model, rd.ctx.fc_concat);
        }
        TrainLosses losses = forward_backward(
            rd.ctx.local, rd.ctx.neighboring, rd.ctx.global, rd.caption, rd.a2,
            rd.a1, result.model, learned_frontend ? &fg : nullptr, scales);
        if (learned_frontend) {
          fc_frontend_backward(result.model, rd.ctx.fc_concat, fg.neighboring);
        }
        sent += losses.sentence;
        attr += losses.coarse_attr + losses.fine_attr;
      }
      sent *= inv_r;
      attr *= inv_r;

      // Auxiliary localization losses over the labeled proposals.
      double bbox = 0.0, cls = 0.0;
      std::size_t n_pos = 0;
      for (const Proposal& prop : rec.proposals) {
        if (prop.label == 1 && prop.delta) ++n_pos;
      }
      if (!rec.proposals.empty()) {
        const double cls_scale =
            config.weights.beta / static_cast<double>(rec.proposals.size());
        const double box_scale =
            n_pos > 0 ? config.weights.alpha / static_cast<double>(n_pos) : 0.0;
        for (const Proposal& prop : rec.proposals) {
          Tensor feat({prop.feature.size()});
          feat.values = prop.feature;
          Tensor cls_logits = nn::linear(feat, result.aux.cls_W, result.aux.cls_b);
          Tensor dcls;
          cls += nn::softmax_cross_entropy(cls_logits,
                                           static_cast<std::size_t>(prop.label), &dcls);
          for (double& v : dcls.values) v *= cls_scale;
          nn::linear_backward(feat, result.aux.cls_W, result.aux.cls_b, dcls);

          if (prop.label == 1 && prop.delta) {
            Tensor pred = nn::linear(feat, result.aux.box_W, result.aux.box_b);
            std::vector<double> grad;
            bbox += smooth_l1(pred.values,
                              std::span<const double>(prop.delta->data(), 4), &grad);
            Tensor dbox({4});
            for (std::size_t i = 0; i < 4; ++i) dbox[i] = grad[i] * box_scale;
            nn::linear_backward(feat, result.aux.box_W, result.aux.box_b, dbox);
          }
        }
        cls /= static_cast<double>(rec.proposals.size());
        if (n_pos > 0) bbox /= static_cast<double>(n_pos);
      }

      const double img_total = total_loss(sent, bbox, cls, attr, config.weights);
      if (!std::isfinite(img_total)) {
        throw std::runtime_error("train: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", image " + rec.image_id);
      }
      nn::sgd_step(params, config.lr);

      ep.sent += sent;
      ep.bbox += bbox;
      ep.cls += cls;
      ep.attr += attr;
    }
    if (images_used == 0) throw std::runtime_error("train: no usable images");
    const double inv = 1.0 / static_cast<double>(images_used);
    ep.sent *= inv;
    ep.bbox *= inv;
    ep.cls *= inv;
    ep.attr *= inv;
    ep.total = total_loss(ep.sent, ep.bbox, ep.cls, ep.attr, config.weights);
    result.log.push_back(ep);
  }
  return result;
}

RegionsByImage predict_captions(const Dataset& dataset, const TrainResult& result) {
  RegionsByImage preds;
  const CaptionModelConfig& mc = result.model.config;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const DatasetRecord& rec = dataset.records[i];
    std::vector<ScoredRegion> out;
    for (std::size_t r = 0; r < rec.regions.size(); ++r) {
      RegionContext ctx = region_context(rec, r, mc, &result.model,
                                         mix_seed(result.seed, i, r));
      std::vector<std::size_t> ids =
          decode_greedy(ctx.local, ctx.neighboring, ctx.global, result.model);
      ScoredRegion pred;
      pred.box = rec.regions[r].box;
      pred.confidence = rec.regions[r].confidence;
      pred.caption = result.vocab.decode(ids);
      out.push_back(std::move(pred));
    }
    preds[rec.image_id] = std::move(out);
  }
  return preds;
}

double context_token_accuracy(const Dataset& dataset, const TrainResult& result) {
  RegionsByImage preds = predict_captions(dataset, result);
  std::size_t hits = 0, total = 0;
  for (const DatasetRecord& rec : dataset.records) {
    const std::vector<ScoredRegion>& out = preds.at(rec.image_id);
    for (std::size_t r = 0; r < rec.regions.size(); ++r) {
      const Tokens& gt = *rec.regions[r].caption;
      if (gt.size() < 3) continue;
      ++total;
      const Tokens& hyp = *out[r].caption;
      if (hyp.size() >= 3 && hyp[2] == gt[2]) ++hits;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

void save_train_result(const std::string& checkpoint_path,
                       const std::string& vocab_path, TrainResult& result,
                       const std::vector<std::string>& extra_metadata) {
  const CaptionModelConfig& mc = result.model.config;
  std::vector<std::string> meta = {
      "variant=" + variant_name(result.variant),
      "seed=" + std::to_string(result.seed),
      "feature_dim=" + std::to_string(mc.feature_dim),
      "embed_dim=" + std::to_string(mc.embed_dim),
      "hidden_dim=" + std::to_string(mc.hidden_dim),
      "max_len=" + std::to_string(mc.max_len),
      "fusion=" + nn::fusion_mode_name(mc.fusion),
      "stages=" + std::to_string(mc.stages),
      "use_neighbor=" + std::to_string(mc.use_neighbor ? 1 : 0),
      "use_global=" + std::to_string(mc.use_global ? 1 : 0),
      "frontend=" + frontend_name(mc.frontend),
      "k=" + std::to_string(mc.k),
      "selection=" + std::string(mc.selection == NeighborSelection::Random
                                     ? "random"
                                     : "nearest"),
      "softmax_gates=" + std::to_string(mc.softmax_gates ? 1 : 0),
      "mean_pool_attrs=" + std::to_string(mc.mean_pool_attrs ? 1 : 0),
      "vocab_size=" + std::to_string(mc.vocab_size),
      "coarse_attr_count=" + std::to_string(mc.coarse_attr_count),
      "fine_attr_count=" + std::to_string(mc.fine_attr_count),
  };
  meta.insert(meta.end(), extra_metadata.begin(), extra_metadata.end());
  const std::vector<Parameter*> params = result.all_params();
  save_checkpoint(checkpoint_path, params, meta);
  result.vocab.save(vocab_path);
}

TrainResult load_train_result(const std::string& checkpoint_path,
                              const std::string& vocab_path) {
  // First pass: read metadata only, to size the parameter set.
  std::ifstream probe(checkpoint_path);
  if (!probe) throw std::runtime_error("cannot read checkpoint: " + checkpoint_path);
  std::map<std::string, std::string> meta;
  std::string line;
  std::getline(probe, line);  // magic, validated by load_checkpoint
  while (std::getline(probe, line)) {
    if (line.rfind("# ", 0) != 0) break;
    const std::string kv = line.substr(2);
    const std::size_t eq = kv.find('=');
    if (eq != std::string::npos) meta[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  probe.close();
  auto need = [&](const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) {
      throw std::runtime_error("checkpoint missing metadata key: " + key);
    }
    return it->second;
  };

  TrainResult result;
  result.vocab = Vocabulary::load(vocab_path);
  result.variant = variant_from_string(need("variant"));
  result.seed = std::stoull(need("seed"));

  CaptionModelConfig mc;
  mc.feature_dim = std::stoull(need("feature_dim"));
  mc.embed_dim = std::stoull(need("embed_dim"));
  mc.hidden_dim = std::stoull(need("hidden_dim"));
  mc.max_len = std::stoull(need("max_len"));
  mc.fusion = nn::fusion_mode_from_string(need("fusion"));
  mc.stages = std::stoi(need("stages"));
  mc.use_neighbor = need("use_neighbor") == "1";
  mc.use_global = need("use_global") == "1";
  mc.frontend = frontend_from_string(need("frontend"));
  mc.k = std::stoull(need("k"));
  mc.selection = need("selection") == "random" ? NeighborSelection::Random
                                               : NeighborSelection::Nearest;
  mc.softmax_gates = need("softmax_gates") == "1";
  mc.mean_pool_attrs = need("mean_pool_attrs") == "1";
  mc.vocab_size = std::stoull(need("vocab_size"));
  mc.coarse_attr_count = std::stoull(need("coarse_attr_count"));
  mc.fine_attr_count = std::stoull(need("fine_attr_count"));
  if (mc.vocab_size != result.vocab.size()) {
    throw std::runtime_error("checkpoint/vocabulary size mismatch");
  }

  result.model = make_caption_model(mc, 0);
  result.aux.box_W = Parameter("aux.box.W", {4, mc.feature_dim});
  result.aux.box_b = Parameter("aux.box.b", {4});
  result.aux.cls_W = Parameter("aux.cls.W", {2, mc.feature_dim});
  result.aux.cls_b = Parameter("aux.cls.b", {2});
  const std::vector<Parameter*> params = result.all_params();
  load_checkpoint(checkpoint_path, params);
  return result;
}

void save_loss_log(const std::string& path, const std::vector<EpochLoss>& log,
                   const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss log: " + path);
  out << "# cagnet.losslog.v1\n";
  for (const std::string& h : header) out << "# " << h << "\n";
  out << "epoch,sent,bbox,cls,attr,total\n";
  char buf[256];
  for (std::size_t e = 0; e < log.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", e,
                  log[e].sent, log[e].bbox, log[e].cls, log[e].attr, log[e].total);
    out << buf;
  }
}

}  // namespace cagnet
