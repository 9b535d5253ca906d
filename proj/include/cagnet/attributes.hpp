#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cagnet/geometry.hpp"

namespace cagnet {

// Part-of-speech groups used for sentence itemization.
enum class PosGroup { Noun = 0, Adjective = 1, Verb = 2, Preposition = 3 };
constexpr std::size_t kPosGroupCount = 4;
const char* pos_group_name(PosGroup g);
PosGroup pos_group_from_string(const std::string& s);

// word -> set of groups, loaded from TSV `word<TAB>tag[,tag...]`.
struct PosLexicon {
  std::map<std::string, std::set<PosGroup>> tags;

  static PosLexicon load(const std::string& path);
  void save(const std::string& path) const;
};

// inflected form -> lemma, loaded from TSV `form<TAB>lemma`. Lemmas map to
// themselves.
struct LemmaTable {
  std::map<std::string, std::string> lemma;

  static LemmaTable load(const std::string& path);
  void save(const std::string& path) const;
};

// Rooted concept tree plus a word -> concept map. TSV format:
//   [tree]
//   child<TAB>parent
//   [words]
//   word<TAB>concept
struct Taxonomy {
  std::vector<std::string> node_names;
  std::vector<int> parent;                 // -1 for the root
  std::map<std::string, int> node_index;
  std::map<std::string, int> word_to_node;
  int root = -1;
  int depth = 0;  // max root-to-leaf node count

  static Taxonomy load(const std::string& path);
  void save(const std::string& path) const;
  // Builds indexes, validates single root / acyclicity, computes depth.
  void finalize();

  bool has_word(const std::string& w) const { return word_to_node.count(w) > 0; }
};

using ItemizedCaption = std::array<std::set<std::string>, kPosGroupCount>;

// Assign each token to every lexicon group it belongs to; unknown words drop.
ItemizedCaption itemize(const Tokens& caption, const PosLexicon& lexicon);

// Table hit -> lemma; miss -> the word unchanged.
std::string lemmatize(const std::string& word, const LemmaTable& table);

// Normalized Leacock-Chodorow similarity in (0,1]:
//   raw = -log(path_len / (2D)), path_len in nodes (1 for identical concepts)
//   normalized = raw / (-log(1 / (2D)))
// Throws std::invalid_argument naming any unmapped word.
double lch_similarity(const std::string& a, const std::string& b,
                      const Taxonomy& taxonomy);

struct CoarseCluster {
  std::string name;  // lexicographically smallest member
  PosGroup group = PosGroup::Noun;
  std::vector<std::string> members;  // sorted
  bool unmapped = false;             // singleton for a word outside the taxonomy
};

// Single-linkage clustering of one POS group's lemmas: connect pairs with
// normalized LCH >= threshold, clusters are the connected components.
// Unmapped words become singleton clusters. Output sorted by cluster name.
std::vector<CoarseCluster> cluster_coarse(const std::vector<std::string>& a1_words,
                                          PosGroup group, const Taxonomy& taxonomy,
                                          double threshold = 0.85);

// Hierarchical attribute vocabulary: fine entries (lemma, group) and coarse
// clusters with the fine->coarse map.
struct AttributeVocabulary {
  struct FineEntry {
    std::string lemma;
    PosGroup group;
    auto operator<=>(const FineEntry&) const = default;
  };

  std::vector<FineEntry> a1;                 // sorted by (group, lemma)
  std::vector<CoarseCluster> a2;             // sorted by (group, name)
  std::map<std::size_t, std::size_t> a1_to_a2;

  std::size_t a1_index(const std::string& lemma, PosGroup group) const;  // npos if absent

  void save(const std::string& a1_path, const std::string& a2_path,
            const std::vector<std::string>& header = {}) const;
};

// Distill the vocabulary from a caption corpus: itemize, lemmatize, cluster
// each POS group at the threshold.
AttributeVocabulary build_attribute_vocabulary(const std::vector<Tokens>& captions,
                                               const PosLexicon& lexicon,
                                               const LemmaTable& lemmas,
                                               const Taxonomy& taxonomy,
                                               double threshold = 0.85);

// Per-caption binary presence targets; a2[c] = 1 iff any member of cluster c
// appears (lemmatized, itemized).
struct AttributeTargets {
  std::vector<double> a2;
  std::vector<double> a1;
};
AttributeTargets encode_targets(const Tokens& caption, const AttributeVocabulary& vocab,
                                const PosLexicon& lexicon, const LemmaTable& lemmas);

}  // namespace cagnet
