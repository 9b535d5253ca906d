#pragma once

#include <string>
#include <vector>

#include "cagnet/geometry.hpp"

namespace cagnet {

// Classic Porter stemmer (exact + stem matching is all the scorer supports).
std::string porter_stem(const std::string& word);

struct MeteorParams {
  double alpha = 0.9;   // precision/recall balance in Fmean
  double beta = 3.0;    // fragmentation penalty exponent
  double gamma = 0.5;   // fragmentation penalty weight
  bool stemming = true;
};

struct MeteorStats {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double score = 0.0;
};

// Unigram alignment (exact pass, then stem pass; leftmost-greedy, one use per
// token), Fmean = P*R / (alpha*P + (1-alpha)*R), penalty = gamma *
// (chunks/matches)^beta, score = Fmean * (1 - penalty). Zero matches -> 0.
MeteorStats meteor_align(const Tokens& candidate, const Tokens& reference,
                         const MeteorParams& params);

// Max single-reference score over the reference list; empty candidate -> 0.
double meteor_lite(const Tokens& candidate, const std::vector<Tokens>& references,
                   const MeteorParams& params = {});

}  // namespace cagnet
