#include "cagnet/meteor.hpp"

#include <algorithm>
#include <cmath>

namespace cagnet {

namespace {

// One alignment pass: match each unmatched candidate token to the leftmost
// unmatched reference token under `equal`, scanning candidates left to right.
template <typename Eq>
void align_pass(const Tokens& cand, const Tokens& ref, std::vector<int>& cand_to_ref,
                std::vector<bool>& ref_used, Eq equal) {
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (cand_to_ref[i] >= 0) continue;
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (ref_used[j]) continue;
      if (equal(cand[i], ref[j])) {
        cand_to_ref[i] = static_cast<int>(j);
        ref_used[j] = true;
        break;
      }
    }
  }
}

}  // namespace

MeteorStats meteor_align(const Tokens& candidate, const Tokens& reference,
                         const MeteorParams& params) {
  MeteorStats stats;
  if (candidate.empty() || reference.empty()) return stats;

  std::vector<int> cand_to_ref(candidate.size(), -1);
  std::vector<bool> ref_used(reference.size(), false);

  align_pass(candidate, reference, cand_to_ref, ref_used,
             [](const std::string& a, const std::string& b) { return a == b; });
  if (params.stemming) {
    std::vector<std::string> cand_stems(candidate.size()), ref_stems(reference.size());
    for (std::size_t i = 0; i < candidate.size(); ++i) cand_stems[i] = porter_stem(candidate[i]);
    for (std::size_t j = 0; j < reference.size(); ++j) ref_stems[j] = porter_stem(reference[j]);
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (cand_to_ref[i] >= 0) continue;
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (ref_used[j]) continue;
        if (cand_stems[i] == ref_stems[j]) {
          cand_to_ref[i] = static_cast<int>(j);
          ref_used[j] = true;
          break;
        }
      }
    }
  }

  std::size_t matches = 0;
  for (int j : cand_to_ref) {
    if (j >= 0) ++matches;
  }
  if (matches == 0) return stats;

  // Chunks: runs of matches contiguous and co-ordered on both sides.
  std::size_t chunks = 0;
  int prev_ref = -2;
  bool in_chunk = false;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (cand_to_ref[i] < 0) {
      in_chunk = false;
      prev_ref = -2;
      continue;
    }
    if (!in_chunk || cand_to_ref[i] != prev_ref + 1) ++chunks;
    in_chunk = true;
    prev_ref = cand_to_ref[i];
  }

  const double m = static_cast<double>(matches);
  stats.matches = matches;
  stats.chunks = chunks;
  stats.precision = m / static_cast<double>(candidate.size());
  stats.recall = m / static_cast<double>(reference.size());
  const double fmean =
      stats.precision * stats.recall /
      (params.alpha * stats.precision + (1.0 - params.alpha) * stats.recall);
  const double penalty =
      params.gamma * std::pow(static_cast<double>(chunks) / m, params.beta);
  stats.score = fmean * (1.0 - penalty);
  return stats;
}

double meteor_lite(const Tokens& candidate, const std::vector<Tokens>& references,
                   const MeteorParams& params) {
  if (candidate.empty() || references.empty()) return 0.0;
  double best = 0.0;
  for (const Tokens& ref : references) {
    best = std::max(best, meteor_align(candidate, ref, params).score);
  }
  return best;
}

}  // namespace cagnet
