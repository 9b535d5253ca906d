#include "cagnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cagnet/rng.hpp"

namespace cagnet {

namespace {

struct WordTable {
  const char* word;
  const char* concept_node;
};

const WordTable kObjects[] = {
    {"cat", "animal"},    {"dog", "animal"},     {"bird", "animal"},
    {"fish", "animal"},   {"car", "vehicle"},    {"bus", "vehicle"},
    {"boat", "vehicle"},  {"truck", "vehicle"},  {"tree", "plant"},
    {"flower", "plant"},  {"chair", "furniture"}, {"table", "furniture"},
    {"sofa", "furniture"}, {"lamp", "furniture"}, {"girl", "person"},
    {"man", "person"},
};

const WordTable kAttributes[] = {
    {"red", "color"},    {"blue", "color"},  {"green", "color"},
    {"dark", "color"},   {"bright", "color"}, {"young", "age"},
    {"old", "age"},      {"small", "age"},
};

const WordTable kContext[] = {
    {"indoors", "setting"}, {"outdoors", "setting"}, {"nearby", "distance"},
    {"afar", "distance"},   {"above", "vertical"},   {"below", "vertical"},
    {"beside", "side"},     {"behind", "side"},
};

// concept -> parent edges for the built-in taxonomy
const WordTable kTree[] = {
    {"organism", "entity"},  {"artifact", "entity"},  {"quality", "entity"},
    {"location", "entity"},  {"animal", "organism"},  {"person", "organism"},
    {"plant", "organism"},   {"vehicle", "artifact"}, {"furniture", "artifact"},
    {"color", "quality"},    {"age", "quality"},      {"setting", "location"},
    {"distance", "location"}, {"vertical", "location"}, {"side", "location"},
};

Taxonomy build_taxonomy(const World& world) {
  Taxonomy tax;
  auto intern = [&](const std::string& name) {
    auto it = tax.node_index.find(name);
    if (it != tax.node_index.end()) return it->second;
    int id = static_cast<int>(tax.node_names.size());
    tax.node_names.push_back(name);
    tax.parent.push_back(-1);
    tax.node_index[name] = id;
    return id;
  };
  intern("entity");
  for (const WordTable& e : kTree) {
    int child = intern(e.word);
    tax.parent[child] = intern(e.concept_node);
  }
  auto map_words = [&](const std::vector<std::string>& words, const WordTable* table) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      tax.word_to_node[words[i]] = tax.node_index.at(table[i].concept_node);
    }
  };
  map_words(world.objects, kObjects);
  map_words(world.attributes, kAttributes);
  map_words(world.context_words, kContext);
  tax.finalize();
  return tax;
}

BBox clamp_box(BBox b, double size) {
  b.x1 = std::max(0.0, b.x1);
  b.y1 = std::max(0.0, b.y1);
  b.x2 = std::min(size, b.x2);
  b.y2 = std::min(size, b.y2);
  return b;
}

}  // namespace

void WorldSpec::validate() const {
  if (images == 0) throw std::invalid_argument("world: need at least one image");
  if (regions_per_image < 2 || regions_per_image % 2 != 0 || regions_per_image > 8) {
    throw std::invalid_argument("world: regions per image must be even and in [2,8]");
  }
  if (feature_dim == 0) throw std::invalid_argument("world: feature_dim must be >= 1");
  if (n_objects == 0 || n_objects > std::size(kObjects)) {
    throw std::invalid_argument("world: n_objects out of range");
  }
  if (n_attributes == 0 || n_attributes > std::size(kAttributes)) {
    throw std::invalid_argument("world: n_attributes out of range");
  }
  if (n_context == 0 || n_context > std::size(kContext)) {
    throw std::invalid_argument("world: n_context out of range");
  }
  if (n_objects % n_context != 0) {
    // keeps the context-token marginal exactly uniform
    throw std::invalid_argument("world: n_objects must be a multiple of n_context");
  }
  if (image_size < 64.0) throw std::invalid_argument("world: image_size must be >= 64");
  if (noise < 0.0) throw std::invalid_argument("world: negative noise");
}

World generate_world(const WorldSpec& spec) {
  spec.validate();
  World world;
  world.spec = spec;
  for (std::size_t i = 0; i < spec.n_objects; ++i) world.objects.push_back(kObjects[i].word);
  for (std::size_t i = 0; i < spec.n_attributes; ++i) {
    world.attributes.push_back(kAttributes[i].word);
  }
  for (std::size_t i = 0; i < spec.n_context; ++i) {
    world.context_words.push_back(kContext[i].word);
  }

  for (const std::string& w : world.objects) world.lexicon.tags[w] = {PosGroup::Noun};
  for (const std::string& w : world.attributes) {
    world.lexicon.tags[w] = {PosGroup::Adjective};
  }
  for (const std::string& w : world.context_words) {
    world.lexicon.tags[w] = {PosGroup::Preposition};
  }
  for (const auto& [w, _] : world.lexicon.tags) world.lemmas.lemma[w] = w;
  world.taxonomy = build_taxonomy(world);

  Rng rng(spec.seed);
  const std::size_t d = spec.feature_dim;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  // Identity embeddings; fixed per world.
  std::vector<FeatureVector> obj_embed(spec.n_objects, FeatureVector(d));
  std::vector<FeatureVector> att_embed(spec.n_attributes, FeatureVector(d));
  for (auto& v : obj_embed) {
    for (double& x : v) x = rng.gaussian() * inv_sqrt_d;
  }
  for (auto& v : att_embed) {
    for (double& x : v) x = rng.gaussian() * inv_sqrt_d;
  }

  // Pair geometry: 14x14 boxes offset by 8.4 -> IoU exactly 78.4/313.6 = 0.25.
  const double box_side = 14.0, pair_dx = 8.4;
  const double quad = spec.image_size / 2.0;
  const double qx[4] = {0.0, quad, 0.0, quad};
  const double qy[4] = {0.0, quad, quad, 0.0};

  world.dataset.feature_dim = d;
  for (std::size_t img = 0; img < spec.images; ++img) {
    DatasetRecord rec;
    rec.image_id = "img_" + std::to_string(img);
    rec.width = spec.image_size;
    rec.height = spec.image_size;

    const std::size_t R = spec.regions_per_image;
    std::vector<std::size_t> obj(R), att(R);
    for (std::size_t r = 0; r < R; ++r) {
      obj[r] = rng.index(spec.n_objects);
      att[r] = rng.index(spec.n_attributes);
    }

    for (std::size_t p = 0; p < R / 2; ++p) {
      // Common jitter keeps the pair IoU fixed.
      const double jx = rng.uniform(0.0, quad - box_side - pair_dx - 0.5);
      const double jy = rng.uniform(0.0, quad - box_side - 0.5);
      for (std::size_t s = 0; s < 2; ++s) {
        const std::size_t r = 2 * p + s;
        ScoredRegion region;
        const double x0 = qx[p % 4] + jx + (s == 1 ? pair_dx : 0.0);
        const double y0 = qy[p % 4] + jy;
        region.box = {x0, y0, x0 + box_side, y0 + box_side};
        region.confidence = 1.0;
        FeatureVector f(d);
        for (std::size_t j = 0; j < d; ++j) {
          f[j] = obj_embed[obj[r]][j] + att_embed[att[r]][j];
        }
        if (spec.noise > 0.0) {
          for (double& x : f) x += spec.noise * rng.gaussian() * inv_sqrt_d;
        }
        region.feature = std::move(f);
        rec.regions.push_back(std::move(region));
      }
    }
    // Captions need partner identities, so fill them after all boxes exist.
    for (std::size_t r = 0; r < R; ++r) {
      const std::size_t ctx = world.context_of_object(obj[partner_of(r)]);
      rec.regions[r].caption = Tokens{world.attributes[att[r]], world.objects[obj[r]],
                                      world.context_words[ctx]};
    }

    rec.global_feature.assign(d, 0.0);
    for (const ScoredRegion& region : rec.regions) {
      for (std::size_t j = 0; j < d; ++j) rec.global_feature[j] += (*region.feature)[j];
    }
    for (double& x : rec.global_feature) x /= static_cast<double>(R);

    for (std::size_t p = 0; p < spec.proposals_per_image; ++p) {
      Proposal prop;
      if (p % 2 == 0) {
        const std::size_t r = (p / 2) % R;
        const BBox& gt = rec.regions[r].box;
        const double sx = rng.uniform(-3.0, 3.0), sy = rng.uniform(-3.0, 3.0);
        const double grow = rng.uniform(-2.0, 2.0);
        prop.box = clamp_box({gt.x1 + sx - grow, gt.y1 + sy - grow,
                              gt.x2 + sx + grow, gt.y2 + sy + grow},
                             spec.image_size);
        prop.label = 1;
        const double pw = prop.box.x2 - prop.box.x1;
        const double ph = prop.box.y2 - prop.box.y1;
        prop.delta = {(gt.x1 - prop.box.x1) / pw, (gt.y1 - prop.box.y1) / ph,
                      (gt.x2 - prop.box.x2) / pw, (gt.y2 - prop.box.y2) / ph};
        prop.feature = *rec.regions[r].feature;
        for (double& x : prop.feature) x += 0.05 * rng.gaussian() * inv_sqrt_d;
      } else {
        const double w = rng.uniform(6.0, 12.0), h = rng.uniform(6.0, 12.0);
        const double x0 = rng.uniform(0.0, spec.image_size - w);
        const double y0 = rng.uniform(0.0, spec.image_size - h);
        prop.box = {x0, y0, x0 + w, y0 + h};
        prop.label = 0;
        prop.feature.assign(d, 0.0);
        for (double& x : prop.feature) x = 0.2 * rng.gaussian() * inv_sqrt_d;
      }
      rec.proposals.push_back(std::move(prop));
    }

    world.dataset.records.push_back(std::move(rec));
  }
  return world;
}

}  // namespace cagnet
