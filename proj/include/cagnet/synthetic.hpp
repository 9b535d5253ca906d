#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cagnet/attributes.hpp"
#include "cagnet/dataset.hpp"

namespace cagnet {

// Controlled contextual world. Regions come in pairs with a fixed overlap
// (IoU 0.25, below the evaluation NMS threshold and above everything else in
// the image), so the top-IoU neighbor of a region is always its partner.
// Captions read "<attribute> <object> <context>", where the context token is
// a function of the partner's object identity alone: region features encode
// only the region's own object and attribute, making the context token
// unrecoverable from the target feature.
struct WorldSpec {
  std::size_t images = 500;
  std::size_t regions_per_image = 4;  // even, in [2, 8]
  std::size_t feature_dim = 16;
  std::size_t n_objects = 10;      // multiple of n_context
  std::size_t n_attributes = 5;
  std::size_t n_context = 5;
  double noise = 0.0;
  double image_size = 64.0;
  std::size_t proposals_per_image = 8;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument on impossible specs
};

struct World {
  WorldSpec spec;
  Dataset dataset;
  std::vector<std::string> objects;
  std::vector<std::string> attributes;
  std::vector<std::string> context_words;
  PosLexicon lexicon;
  LemmaTable lemmas;
  Taxonomy taxonomy;

  // The generative rule: context token index for a partner object index.
  std::size_t context_of_object(std::size_t object_index) const {
    return object_index % spec.n_context;
  }
};

// Paired pairing rule: regions (0,1), (2,3), ...
inline std::size_t partner_of(std::size_t region_index) {
  return region_index ^ 1u;
}

World generate_world(const WorldSpec& spec);

}  // namespace cagnet
