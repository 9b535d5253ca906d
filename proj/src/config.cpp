#include "cagnet/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace cagnet {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::size_t parse_size(const std::string& v) {
  std::size_t pos = 0;
  const unsigned long long x = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
  return x;
}

struct Entry {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> reg = [] {
    std::map<std::string, Entry> r;
    auto add_size = [&](const std::string& key, std::size_t RunConfig::*field) {
      r[key] = {[field](RunConfig& c, const std::string& v) { c.*field = parse_size(v); },
                [field](const RunConfig& c) { return std::to_string(c.*field); }};
    };
    auto add_double = [&](const std::string& key, double RunConfig::*field) {
      r[key] = {[field](RunConfig& c, const std::string& v) { c.*field = parse_double(v); },
                [field](const RunConfig& c) { return fmt_double(c.*field); }};
    };
    auto add_bool = [&](const std::string& key, bool RunConfig::*field) {
      r[key] = {[field](RunConfig& c, const std::string& v) { c.*field = parse_bool(v); },
                [field](const RunConfig& c) { return c.*field ? "true" : "false"; }};
    };
    auto add_string = [&](const std::string& key, std::string RunConfig::*field) {
      r[key] = {[field](RunConfig& c, const std::string& v) { c.*field = v; },
                [field](const RunConfig& c) { return c.*field; }};
    };

    add_size("embed_dim", &RunConfig::embed_dim);
    add_size("hidden_dim", &RunConfig::hidden_dim);
    add_size("max_len", &RunConfig::max_len);
    add_string("fusion", &RunConfig::fusion);
    r["stages"] = {[](RunConfig& c, const std::string& v) {
                     c.stages = static_cast<int>(parse_size(v));
                   },
                   [](const RunConfig& c) { return std::to_string(c.stages); }};
    add_string("frontend", &RunConfig::frontend);
    add_size("k", &RunConfig::k);
    add_string("neighbor_selection", &RunConfig::neighbor_selection);
    add_bool("softmax_gates", &RunConfig::softmax_gates);
    add_bool("mean_pool_attrs", &RunConfig::mean_pool_attrs);
    add_string("coarse_attrs", &RunConfig::coarse_attrs);
    add_string("fine_attrs", &RunConfig::fine_attrs);
    add_size("topk_attrs", &RunConfig::topk_attrs);

    add_double("lr", &RunConfig::lr);
    add_size("epochs", &RunConfig::epochs);
    add_double("alpha", &RunConfig::alpha);
    add_double("beta", &RunConfig::beta);
    add_double("gamma", &RunConfig::gamma);
    add_size("vocab_cap", &RunConfig::vocab_cap);
    r["seed"] = {[](RunConfig& c, const std::string& v) { c.seed = parse_size(v); },
                 [](const RunConfig& c) {
                   return c.seed ? std::to_string(*c.seed) : std::string("unset");
                 }};

    add_size("world_images", &RunConfig::world_images);
    add_size("world_regions", &RunConfig::world_regions);
    add_size("world_feature_dim", &RunConfig::world_feature_dim);
    add_size("world_objects", &RunConfig::world_objects);
    add_size("world_attributes", &RunConfig::world_attributes);
    add_size("world_context", &RunConfig::world_context);
    add_double("world_noise", &RunConfig::world_noise);
    add_double("world_image_size", &RunConfig::world_image_size);
    add_size("world_proposals", &RunConfig::world_proposals);

    add_double("lch_threshold", &RunConfig::lch_threshold);

    add_string("dataset", &RunConfig::dataset_path);
    add_string("eval_dataset", &RunConfig::eval_dataset_path);
    add_string("lexicon", &RunConfig::lexicon_path);
    add_string("lemmas", &RunConfig::lemmas_path);
    add_string("taxonomy", &RunConfig::taxonomy_path);
    add_string("checkpoint", &RunConfig::checkpoint_path);
    add_string("predictions", &RunConfig::predictions_path);
    add_string("out_dir", &RunConfig::out_dir);
    return r;
  }();
  return reg;
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  RunConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    }
    try {
      config.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return config;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = registry().find(key);
  if (it == registry().end()) {
    throw std::invalid_argument("unknown config key: " + key);
  }
  it->second.set(*this, value);
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, entry] : registry()) {
    out.emplace_back(key, entry.get(*this));
  }
  return out;
}

std::string RunConfig::resolved_string() const {
  std::ostringstream os;
  for (const auto& [k, v] : resolved()) os << k << " = " << v << "\n";
  return os.str();
}

CaptionModelConfig RunConfig::model_config(std::size_t feature_dim,
                                           std::size_t vocab_size,
                                           std::size_t coarse_attr_count,
                                           std::size_t fine_attr_count) const {
  CaptionModelConfig mc;
  mc.feature_dim = feature_dim;
  mc.embed_dim = embed_dim;
  mc.hidden_dim = hidden_dim;
  mc.max_len = max_len;
  mc.fusion = nn::fusion_mode_from_string(fusion);
  mc.stages = stages;
  mc.frontend = frontend_from_string(frontend);
  mc.k = k;
  mc.selection = neighbor_selection == "random" ? NeighborSelection::Random
                                                : NeighborSelection::Nearest;
  mc.softmax_gates = softmax_gates;
  mc.mean_pool_attrs = mean_pool_attrs;
  mc.vocab_size = vocab_size;
  mc.coarse_attr_count = coarse_attr_count;
  mc.fine_attr_count = fine_attr_count;
  return mc;
}

WorldSpec RunConfig::world_spec(std::uint64_t spec_seed) const {
  WorldSpec spec;
  spec.images = world_images;
  spec.regions_per_image = world_regions;
  spec.feature_dim = world_feature_dim;
  spec.n_objects = world_objects;
  spec.n_attributes = world_attributes;
  spec.n_context = world_context;
  spec.noise = world_noise;
  spec.image_size = world_image_size;
  spec.proposals_per_image = world_proposals;
  spec.seed = spec_seed;
  return spec;
}

}  // namespace cagnet
