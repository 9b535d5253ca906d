#include "cagnet/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cagnet {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

BBox parse_box(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) {
    throw std::runtime_error(where + ": box must be [x1,y1,x2,y2]");
  }
  BBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
           j[3].get<double>()};
  if (!box.valid()) throw std::runtime_error(where + ": degenerate box");
  return box;
}

Tokens parse_caption(const json& j) {
  Tokens toks;
  if (j.is_string()) {
    std::istringstream is(j.get<std::string>());
    std::string tok;
    while (is >> tok) toks.push_back(lower(tok));
  } else if (j.is_array()) {
    for (const auto& t : j) toks.push_back(lower(t.get<std::string>()));
  } else {
    throw std::runtime_error("caption must be a string or token array");
  }
  return toks;
}

json box_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

}  // namespace

RegionFeatureSet DatasetRecord::feature_set() const {
  RegionFeatureSet set;
  set.regions = regions;
  set.global_feature = global_feature;
  return set;
}

Dataset load_dataset(const std::string& path, std::size_t max_caption_words) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);

  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed JSON: " + e.what());
    }
    if (j.contains("format")) continue;  // header line
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      DatasetRecord rec;
      rec.image_id = j.at("image_id").get<std::string>();
      rec.width = j.at("width").get<double>();
      rec.height = j.at("height").get<double>();
      if (rec.width <= 0 || rec.height <= 0) {
        throw std::runtime_error("image extent must be positive");
      }
      rec.global_feature = j.at("global_feature").get<FeatureVector>();
      if (ds.feature_dim == 0) ds.feature_dim = rec.global_feature.size();
      if (rec.global_feature.size() != ds.feature_dim) {
        throw std::runtime_error("global_feature: dimension " +
                                 std::to_string(rec.global_feature.size()) +
                                 " != dataset dimension " +
                                 std::to_string(ds.feature_dim));
      }
      std::size_t ridx = 0;
      for (const auto& rj : j.at("regions")) {
        const std::string rwhere = "regions[" + std::to_string(ridx) + "]";
        ScoredRegion region;
        region.box = parse_box(rj.at("box"), rwhere);
        if (region.box.x1 < 0 || region.box.y1 < 0 || region.box.x2 > rec.width ||
            region.box.y2 > rec.height) {
          throw std::runtime_error(rwhere + ": box exceeds image extent");
        }
        region.confidence = rj.value("confidence", 1.0);
        if (region.confidence < 0.0 || region.confidence > 1.0) {
          throw std::runtime_error(rwhere + ": confidence outside [0,1]");
        }
        Tokens caption = parse_caption(rj.at("caption"));
        region.feature = rj.at("feature").get<FeatureVector>();
        if (region.feature->size() != ds.feature_dim) {
          throw std::runtime_error(rwhere + ": feature dimension mismatch");
        }
        ++ridx;
        if (caption.size() > max_caption_words) {
          ++ds.dropped_captions;
          continue;
        }
        region.caption = std::move(caption);
        rec.regions.push_back(std::move(region));
      }
      if (j.contains("proposals")) {
        std::size_t pidx = 0;
        for (const auto& pj : j.at("proposals")) {
          const std::string pwhere = "proposals[" + std::to_string(pidx++) + "]";
          Proposal prop;
          prop.box = parse_box(pj.at("box"), pwhere);
          prop.feature = pj.at("feature").get<FeatureVector>();
          if (prop.feature.size() != ds.feature_dim) {
            throw std::runtime_error(pwhere + ": feature dimension mismatch");
          }
          prop.label = pj.at("label").get<int>();
          if (prop.label != 0 && prop.label != 1) {
            throw std::runtime_error(pwhere + ": label must be 0 or 1");
          }
          if (pj.contains("delta")) {
            const auto& dj = pj.at("delta");
            if (!dj.is_array() || dj.size() != 4) {
              throw std::runtime_error(pwhere + ": delta must have 4 entries");
            }
            prop.delta = {dj[0].get<double>(), dj[1].get<double>(),
                          dj[2].get<double>(), dj[3].get<double>()};
          }
          rec.proposals.push_back(std::move(prop));
        }
      }
      ds.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  return ds;
}

void save_dataset(const std::string& path, const Dataset& dataset,
                  const std::map<std::string, std::string>& header_config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  ordered_json header;
  header["format"] = "cagnet.dataset.v1";
  for (const auto& [k, v] : header_config) header["config"][k] = v;
  out << header.dump() << "\n";
  for (const DatasetRecord& rec : dataset.records) {
    ordered_json j;
    j["image_id"] = rec.image_id;
    j["width"] = rec.width;
    j["height"] = rec.height;
    j["global_feature"] = rec.global_feature;
    j["regions"] = ordered_json::array();
    for (const ScoredRegion& r : rec.regions) {
      ordered_json rj;
      rj["box"] = box_json(r.box);
      rj["confidence"] = r.confidence;
      rj["caption"] = r.caption.value_or(Tokens{});
      rj["feature"] = *r.feature;
      j["regions"].push_back(std::move(rj));
    }
    if (!rec.proposals.empty()) {
      j["proposals"] = ordered_json::array();
      for (const Proposal& p : rec.proposals) {
        ordered_json pj;
        pj["box"] = box_json(p.box);
        pj["feature"] = p.feature;
        pj["label"] = p.label;
        if (p.delta) pj["delta"] = *p.delta;
        j["proposals"].push_back(std::move(pj));
      }
    }
    out << j.dump() << "\n";
  }
}

RegionsByImage load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions: " + path);
  RegionsByImage preds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed JSON: " + e.what());
    }
    if (j.contains("format")) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      std::vector<ScoredRegion>& regions = preds[j.at("image_id").get<std::string>()];
      for (const auto& rj : j.at("regions")) {
        ScoredRegion r;
        r.box = parse_box(rj.at("box"), "regions");
        r.confidence = rj.at("confidence").get<double>();
        r.caption = parse_caption(rj.at("caption"));
        regions.push_back(std::move(r));
      }
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  return preds;
}

void save_predictions(const std::string& path, const RegionsByImage& predictions,
                      const std::map<std::string, std::string>& header_config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write predictions: " + path);
  ordered_json header;
  header["format"] = "cagnet.predictions.v1";
  for (const auto& [k, v] : header_config) header["config"][k] = v;
  out << header.dump() << "\n";
  for (const auto& [image_id, regions] : predictions) {
    ordered_json j;
    j["image_id"] = image_id;
    j["regions"] = ordered_json::array();
    for (const ScoredRegion& r : regions) {
      ordered_json rj;
      rj["box"] = box_json(r.box);
      rj["confidence"] = r.confidence;
      std::string caption;
      if (r.caption) {
        for (std::size_t i = 0; i < r.caption->size(); ++i) {
          if (i) caption += " ";
          caption += (*r.caption)[i];
        }
      }
      rj["caption"] = caption;
      j["regions"].push_back(std::move(rj));
    }
    out << j.dump() << "\n";
  }
}

RegionsByImage ground_truth_by_image(const Dataset& dataset) {
  RegionsByImage gts;
  for (const DatasetRecord& rec : dataset.records) {
    gts[rec.image_id] = rec.regions;
  }
  return gts;
}

std::vector<Tokens> all_captions(const Dataset& dataset) {
  std::vector<Tokens> out;
  for (const DatasetRecord& rec : dataset.records) {
    for (const ScoredRegion& r : rec.regions) {
      if (r.caption) out.push_back(*r.caption);
    }
  }
  return out;
}

}  // namespace cagnet
