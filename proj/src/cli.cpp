#include "cagnet/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "cagnet/evaluation.hpp"
#include "cagnet/training.hpp"

namespace cagnet::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<std::string> config_header(const RunConfig& config) {
  std::vector<std::string> lines;
  for (const auto& [k, v] : config.resolved()) lines.push_back(k + " = " + v);
  return lines;
}

std::uint64_t require_seed(const RunConfig& config) {
  if (!config.seed) throw std::runtime_error("--seed is required for this command");
  return *config.seed;
}

AttributeResources load_resources(const RunConfig& config) {
  if (config.lexicon_path.empty() || config.lemmas_path.empty() ||
      config.taxonomy_path.empty()) {
    throw std::runtime_error("lexicon/lemmas/taxonomy paths are required");
  }
  AttributeResources res;
  res.lexicon = PosLexicon::load(config.lexicon_path);
  res.lemmas = LemmaTable::load(config.lemmas_path);
  res.taxonomy = Taxonomy::load(config.taxonomy_path);
  return res;
}

TrainConfig train_config(const RunConfig& config) {
  TrainConfig tc;
  tc.lr = config.lr;
  tc.epochs = config.epochs;
  tc.seed = require_seed(config);
  tc.weights = {config.alpha, config.beta, config.gamma};
  tc.vocab_cap = config.vocab_cap;
  tc.embed_dim = config.embed_dim;
  tc.hidden_dim = config.hidden_dim;
  tc.max_len = config.max_len;
  tc.fusion = nn::fusion_mode_from_string(config.fusion);
  tc.frontend = frontend_from_string(config.frontend);
  tc.k = config.k;
  tc.selection = config.neighbor_selection == "random" ? NeighborSelection::Random
                                                       : NeighborSelection::Nearest;
  tc.softmax_gates = config.softmax_gates;
  tc.mean_pool_attrs = config.mean_pool_attrs;
  tc.coarse_attrs = attr_set_from_string(config.coarse_attrs);
  tc.fine_attrs = attr_set_from_string(config.fine_attrs);
  tc.topk_attrs = config.topk_attrs;
  tc.lch_threshold = config.lch_threshold;
  return tc;
}

bool needs_attr_resources(const TrainConfig& tc, Variant variant) {
  if (variant != Variant::CAGNet) return false;
  auto hier = [](AttrSet s) { return s == AttrSet::A2 || s == AttrSet::A1; };
  return hier(tc.coarse_attrs) || hier(tc.fine_attrs);
}

EvalReport evaluate_checkpoint(const RunConfig& config, const Dataset& dataset,
                               const TrainResult& result, RegionsByImage* preds_out) {
  RegionsByImage preds = predict_captions(dataset, result);
  EvalReport report = dense_map(preds, ground_truth_by_image(dataset));
  if (preds_out) *preds_out = std::move(preds);
  (void)config;
  return report;
}

void write_report(const RunConfig& config, const EvalReport& report,
                  const std::string& json_path, const std::string& text_path) {
  const EvalGrid grid;
  ordered_json j;
  j["format"] = "cagnet.evalreport.v1";
  for (const auto& [k, v] : config.resolved()) j["config"][k] = v;
  j["iou_thresholds"] = grid.iou_thresholds;
  j["meteor_thresholds"] = grid.meteor_thresholds;
  j["ap"] = report.ap;
  j["map"] = report.map;
  j["language_meteor"] = report.language_meteor;
  j["num_predictions"] = report.num_predictions;
  j["num_ground_truths"] = report.num_ground_truths;
  std::ofstream jf(json_path);
  if (!jf) throw std::runtime_error("cannot write report: " + json_path);
  jf << j.dump(2) << "\n";
  std::ofstream tf(text_path);
  if (!tf) throw std::runtime_error("cannot write report: " + text_path);
  tf << format_report_table(report, grid);
}

struct TableWriter {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string text() const {
    std::vector<std::size_t> width(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) width[c] = columns[c].size();
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        width[c] = std::max(width[c], row[c].size());
      }
    }
    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& row) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        os << std::left << std::setw(static_cast<int>(width[c]) + 2) << row[c];
      }
      os << "\n";
    };
    emit(columns);
    for (const auto& row : rows) emit(row);
    return os.str();
  }

  std::string csv() const {
    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& row) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) os << ",";
        os << row[c];
      }
      os << "\n";
    };
    emit(columns);
    for (const auto& row : rows) emit(row);
    return os.str();
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

int gen_world(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const std::uint64_t seed = require_seed(config);
    World world = generate_world(config.world_spec(seed));
    fs::create_directories(config.out_dir);
    std::map<std::string, std::string> header;
    for (const auto& [k, v] : config.resolved()) header[k] = v;
    save_dataset((fs::path(config.out_dir) / "dataset.jsonl").string(), world.dataset,
                 header);
    world.lexicon.save((fs::path(config.out_dir) / "lexicon.tsv").string());
    world.lemmas.save((fs::path(config.out_dir) / "lemmas.tsv").string());
    world.taxonomy.save((fs::path(config.out_dir) / "taxonomy.tsv").string());
    out << "generated " << world.dataset.records.size() << " images x "
        << config.world_regions << " regions into " << config.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "gen-world: " << e.what() << "\n";
    return 1;
  }
}

int attrs_build(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.dataset_path.empty()) throw std::runtime_error("dataset path required");
    Dataset dataset = load_dataset(config.dataset_path, config.max_len);
    AttributeResources res = load_resources(config);
    AttributeVocabulary vocab =
        build_attribute_vocabulary(all_captions(dataset), res.lexicon, res.lemmas,
                                   res.taxonomy, config.lch_threshold);
    fs::create_directories(config.out_dir);
    const auto header = config_header(config);
    vocab.save((fs::path(config.out_dir) / "attributes_a1.txt").string(),
               (fs::path(config.out_dir) / "attributes_a2.txt").string(), header);

    std::ofstream tf(fs::path(config.out_dir) / "attribute_targets.jsonl");
    if (!tf) throw std::runtime_error("cannot write attribute targets");
    ordered_json hdr;
    hdr["format"] = "cagnet.attrtargets.v1";
    for (const auto& [k, v] : config.resolved()) hdr["config"][k] = v;
    tf << hdr.dump() << "\n";
    for (const DatasetRecord& rec : dataset.records) {
      ordered_json j;
      j["image_id"] = rec.image_id;
      j["a2"] = ordered_json::array();
      j["a1"] = ordered_json::array();
      for (const ScoredRegion& r : rec.regions) {
        AttributeTargets t = encode_targets(*r.caption, vocab, res.lexicon, res.lemmas);
        j["a2"].push_back(t.a2);
        j["a1"].push_back(t.a1);
      }
      tf << j.dump() << "\n";
    }
    out << "A1 attributes: " << vocab.a1.size() << "\n";
    out << "A2 clusters:   " << vocab.a2.size() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "attrs-build: " << e.what() << "\n";
    return 1;
  }
}

int train_cmd(const RunConfig& config, const std::string& variant_str, std::ostream& out,
              std::ostream& err) {
  try {
    if (config.dataset_path.empty()) throw std::runtime_error("dataset path required");
    const Variant variant = variant_from_string(variant_str);
    Dataset dataset = load_dataset(config.dataset_path, config.max_len);
    TrainConfig tc = train_config(config);

    AttributeResources res;
    const AttributeResources* res_ptr = nullptr;
    if (needs_attr_resources(tc, variant)) {
      res = load_resources(config);
      res_ptr = &res;
    }
    TrainResult result = train(dataset, tc, variant, res_ptr);

    fs::create_directories(config.out_dir);
    std::vector<std::string> meta;
    for (const auto& [k, v] : config.resolved()) meta.push_back("run." + k + "=" + v);
    save_train_result((fs::path(config.out_dir) / "checkpoint.txt").string(),
                      (fs::path(config.out_dir) / "vocab.txt").string(), result, meta);
    save_loss_log((fs::path(config.out_dir) / "loss.csv").string(), result.log,
                  config_header(config));
    const EpochLoss& last = result.log.back();
    out << "trained " << variant_name(variant) << " for " << tc.epochs
        << " epochs; final losses: sent " << last.sent << " bbox " << last.bbox
        << " cls " << last.cls << " attr " << last.attr << " total " << last.total
        << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "train: " << e.what() << "\n";
    return 1;
  }
}

int eval_cmd(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.dataset_path.empty()) throw std::runtime_error("dataset path required");
    Dataset dataset = load_dataset(config.dataset_path, config.max_len);

    EvalReport report;
    if (!config.predictions_path.empty()) {
      RegionsByImage preds = load_predictions(config.predictions_path);
      report = dense_map(preds, ground_truth_by_image(dataset));
    } else if (!config.checkpoint_path.empty()) {
      const fs::path vocab_path =
          fs::path(config.checkpoint_path).parent_path() / "vocab.txt";
      TrainResult result =
          load_train_result(config.checkpoint_path, vocab_path.string());
      RegionsByImage preds;
      report = evaluate_checkpoint(config, dataset, result, &preds);
      fs::create_directories(config.out_dir);
      std::map<std::string, std::string> header;
      for (const auto& [k, v] : config.resolved()) header[k] = v;
      save_predictions((fs::path(config.out_dir) / "predictions.jsonl").string(),
                       preds, header);
    } else {
      throw std::runtime_error("need --predictions or --checkpoint");
    }

    fs::create_directories(config.out_dir);
    write_report(config, report, (fs::path(config.out_dir) / "report.json").string(),
                 (fs::path(config.out_dir) / "report.txt").string());
    out << format_report_table(report, EvalGrid{});
    return 0;
  } catch (const std::exception& e) {
    err << "eval: " << e.what() << "\n";
    return 1;
  }
}

int demo_context(const RunConfig& config, const std::string& image_id,
                 std::size_t region, const std::vector<std::string>& checkpoints,
                 std::ostream& out, std::ostream& err) {
  try {
    if (config.dataset_path.empty()) throw std::runtime_error("dataset path required");
    Dataset dataset = load_dataset(config.dataset_path, config.max_len);
    const DatasetRecord* rec = nullptr;
    for (const DatasetRecord& r : dataset.records) {
      if (r.image_id == image_id) rec = &r;
    }
    if (!rec) throw std::runtime_error("image not found: " + image_id);
    if (region >= rec->regions.size()) {
      throw std::runtime_error("region index out of range (image has " +
                               std::to_string(rec->regions.size()) + " regions)");
    }

    RegionFeatureSet set = rec->feature_set();
    const std::vector<std::size_t> neighbors =
        select_neighbors(region, set, config.k, NeighborSelection::Nearest);
    NeighborGraph graph = neighbor_weights(region, neighbors, set);

    const ScoredRegion& target = rec->regions[region];
    char buf[256];
    std::snprintf(buf, sizeof(buf), "target region %zu box [%.1f %.1f %.1f %.1f]",
                  region, target.box.x1, target.box.y1, target.box.x2, target.box.y2);
    out << buf << "\n";
    if (target.caption) {
      out << "ground truth:";
      for (const std::string& t : *target.caption) out << " " << t;
      out << "\n";
    }
    out << "top-" << config.k << " neighbors (IoU, similarity weight):\n";
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      const ScoredRegion& nb = rec->regions[neighbors[i]];
      std::snprintf(buf, sizeof(buf),
                    "  region %zu box [%.1f %.1f %.1f %.1f] iou %.4f weight %.4f",
                    neighbors[i], nb.box.x1, nb.box.y1, nb.box.x2, nb.box.y2,
                    iou(target.box, nb.box), graph.weights[i]);
      out << buf << "\n";
    }

    for (const std::string& spec : checkpoints) {
      const std::size_t eq = spec.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error("checkpoint spec must be name=path: " + spec);
      }
      const std::string name = spec.substr(0, eq), path = spec.substr(eq + 1);
      const fs::path vocab_path = fs::path(path).parent_path() / "vocab.txt";
      TrainResult result = load_train_result(path, vocab_path.string());
      std::size_t idx = 0;
      for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        if (dataset.records[i].image_id == image_id) idx = i;
      }
      RegionContext ctx =
          region_context(*rec, region, result.model.config, &result.model,
                         result.seed ^ idx);
      Tokens caption = result.vocab.decode(
          decode_greedy(ctx.local, ctx.neighboring, ctx.global, result.model));
      out << name << ":";
      for (const std::string& t : caption) out << " " << t;
      out << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    err << "demo-context: " << e.what() << "\n";
    return 1;
  }
}

int ablate(const RunConfig& config, const std::string& sweep,
           const std::vector<std::uint64_t>& seeds, std::ostream& out,
           std::ostream& err) {
  try {
    if (config.dataset_path.empty()) throw std::runtime_error("dataset path required");
    if (seeds.empty()) throw std::runtime_error("at least one seed required");
    Dataset train_set = load_dataset(config.dataset_path, config.max_len);
    Dataset eval_set = config.eval_dataset_path.empty()
                           ? train_set
                           : load_dataset(config.eval_dataset_path, config.max_len);

    AttributeResources res;
    const AttributeResources* res_ptr = nullptr;
    if (!config.lexicon_path.empty()) {
      res = load_resources(config);
      res_ptr = &res;
    }

    struct Cell {
      std::string label;
      TrainConfig tc;
      Variant variant;
    };
    std::vector<Cell> cells;
    RunConfig base_rc = config;
    base_rc.seed = seeds[0];
    const TrainConfig base = train_config(base_rc);

    if (sweep == "variants") {
      for (Variant v : {Variant::L, Variant::LG, Variant::LGN, Variant::CAGNet}) {
        cells.push_back({variant_name(v), base, v});
      }
    } else if (sweep == "attrs") {
      auto with_sets = [&](AttrSet c, AttrSet f, const std::string& label) {
        TrainConfig tc = base;
        tc.coarse_attrs = c;
        tc.fine_attrs = f;
        cells.push_back({label, tc, Variant::CAGNet});
      };
      with_sets(AttrSet::A2, AttrSet::A1, "(A2,A1)");
      with_sets(AttrSet::A1, AttrSet::A1, "(A1,A1)");
      with_sets(AttrSet::A2, AttrSet::A2, "(A2,A2)");
      with_sets(AttrSet::TopK, AttrSet::TopK, "(topk,topk)");
      with_sets(AttrSet::None, AttrSet::None, "(-,-)");
      cells.push_back({"CCI", base, Variant::LGN});
    } else if (sweep == "frontend") {
      auto with_frontend = [&](NeighborFrontend f, NeighborSelection sel,
                               const std::string& label) {
        TrainConfig tc = base;
        tc.frontend = f;
        tc.selection = sel;
        cells.push_back({label, tc, Variant::LGN});
      };
      with_frontend(NeighborFrontend::Graph, NeighborSelection::Random, "random");
      with_frontend(NeighborFrontend::Graph, NeighborSelection::Nearest, "graph");
      with_frontend(NeighborFrontend::Fc, NeighborSelection::Nearest, "fc");
      with_frontend(NeighborFrontend::Avg, NeighborSelection::Nearest, "avg");
      with_frontend(NeighborFrontend::Max, NeighborSelection::Nearest, "max");
    } else if (sweep == "k") {
      for (std::size_t k = 1; k <= 3; ++k) {
        TrainConfig tc = base;
        tc.k = k;
        cells.push_back({"k=" + std::to_string(k), tc, Variant::LGN});
      }
    } else if (sweep == "fusion") {
      for (nn::FusionMode m :
           {nn::FusionMode::Sum, nn::FusionMode::Product, nn::FusionMode::Concat,
            nn::FusionMode::Adaptive1, nn::FusionMode::Adaptive2}) {
        TrainConfig tc = base;
        tc.fusion = m;
        cells.push_back({nn::fusion_mode_name(m), tc, Variant::LGN});
      }
    } else {
      throw std::runtime_error(
          "unknown sweep: " + sweep +
          " (expected variants, attrs, frontend, k, fusion)");
    }

    TableWriter table;
    table.columns = {"setting", "ctx_acc", "mAP", "lang_METEOR"};
    for (const Cell& cell : cells) {
      double acc = 0.0, map = 0.0, lang = 0.0;
      for (std::uint64_t seed : seeds) {
        TrainConfig tc = cell.tc;
        tc.seed = seed;
        TrainResult result = train(train_set, tc, cell.variant, res_ptr);
        acc += context_token_accuracy(eval_set, result);
        EvalReport report = dense_map(predict_captions(eval_set, result),
                                      ground_truth_by_image(eval_set));
        map += report.map;
        lang += report.language_meteor;
      }
      const double n = static_cast<double>(seeds.size());
      table.rows.push_back({cell.label, fmt(acc / n), fmt(map / n), fmt(lang / n)});
      out << "finished " << cell.label << " (" << seeds.size() << " seeds)\n";
    }

    fs::create_directories(config.out_dir);
    std::ofstream tf(fs::path(config.out_dir) / ("ablate_" + sweep + ".txt"));
    tf << "# sweep " << sweep << ", seeds";
    for (std::uint64_t s : seeds) tf << " " << s;
    tf << "\n" << table.text();
    std::ofstream cf(fs::path(config.out_dir) / ("ablate_" + sweep + ".csv"));
    cf << table.csv();
    out << table.text();
    return 0;
  } catch (const std::exception& e) {
    err << "ablate: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cagnet::cli
