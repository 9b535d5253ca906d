#include "cagnet/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace cagnet {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return in;
}

}  // namespace

const char* pos_group_name(PosGroup g) {
  switch (g) {
    case PosGroup::Noun: return "noun";
    case PosGroup::Adjective: return "adjective";
    case PosGroup::Verb: return "verb";
    case PosGroup::Preposition: return "preposition";
  }
  return "?";
}

PosGroup pos_group_from_string(const std::string& s) {
  if (s == "noun") return PosGroup::Noun;
  if (s == "adjective" || s == "adj") return PosGroup::Adjective;
  if (s == "verb") return PosGroup::Verb;
  if (s == "preposition" || s == "prep") return PosGroup::Preposition;
  throw std::invalid_argument("unknown POS tag: " + s);
}

PosLexicon PosLexicon::load(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  PosLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected word<TAB>tags");
    }
    auto& entry = lex.tags[strip(cols[0])];
    for (const std::string& tag : split(cols[1], ',')) {
      entry.insert(pos_group_from_string(strip(tag)));
    }
  }
  return lex;
}

void PosLexicon::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (const auto& [word, groups] : tags) {
    out << word << "\t";
    bool first = true;
    for (PosGroup g : groups) {
      if (!first) out << ",";
      out << pos_group_name(g);
      first = false;
    }
    out << "\n";
  }
}

LemmaTable LemmaTable::load(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  LemmaTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected form<TAB>lemma");
    }
    table.lemma[strip(cols[0])] = strip(cols[1]);
  }
  // lemmas are fixed points
  std::vector<std::string> lemmas;
  for (const auto& [_, l] : table.lemma) lemmas.push_back(l);
  for (const std::string& l : lemmas) table.lemma.emplace(l, l);
  return table;
}

void LemmaTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (const auto& [form, l] : lemma) out << form << "\t" << l << "\n";
}

Taxonomy Taxonomy::load(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  Taxonomy tax;
  std::map<std::string, std::string> child_parent;
  std::map<std::string, std::string> word_concept;
  enum { None, Tree, Words } section = None;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    if (line == "[tree]") { section = Tree; continue; }
    if (line == "[words]") { section = Words; continue; }
    auto cols = split(line, '\t');
    if (cols.size() != 2 || section == None) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected [tree]/[words] sections with TAB pairs");
    }
    if (section == Tree) {
      if (child_parent.count(strip(cols[0]))) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": duplicate child " + cols[0]);
      }
      child_parent[strip(cols[0])] = strip(cols[1]);
    } else {
      word_concept[strip(cols[0])] = strip(cols[1]);
    }
  }

  auto intern = [&](const std::string& name) {
    auto it = tax.node_index.find(name);
    if (it != tax.node_index.end()) return it->second;
    int id = static_cast<int>(tax.node_names.size());
    tax.node_names.push_back(name);
    tax.parent.push_back(-1);
    tax.node_index[name] = id;
    return id;
  };
  for (const auto& [child, par] : child_parent) {
    intern(child);
    intern(par);
  }
  for (const auto& [child, par] : child_parent) {
    tax.parent[tax.node_index[child]] = tax.node_index[par];
  }
  for (const auto& [word, concept_name] : word_concept) {
    auto it = tax.node_index.find(concept_name);
    if (it == tax.node_index.end()) {
      throw std::runtime_error("taxonomy: word '" + word +
                               "' maps to unknown concept '" + concept_name + "'");
    }
    tax.word_to_node[word] = it->second;
  }
  tax.finalize();
  return tax;
}

void Taxonomy::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "[tree]\n";
  // Deterministic: children sorted by name.
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < node_names.size(); ++i) {
    if (parent[i] >= 0) edges.emplace_back(node_names[i], node_names[parent[i]]);
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& [c, p] : edges) out << c << "\t" << p << "\n";
  out << "[words]\n";
  for (const auto& [w, n] : word_to_node) out << w << "\t" << node_names[n] << "\n";
}

void Taxonomy::finalize() {
  root = -1;
  for (std::size_t i = 0; i < node_names.size(); ++i) {
    if (parent[i] < 0) {
      if (root >= 0) {
        throw std::runtime_error("taxonomy: multiple roots: " + node_names[root] +
                                 ", " + node_names[i]);
      }
      root = static_cast<int>(i);
    }
  }
  if (root < 0 && !node_names.empty()) {
    throw std::runtime_error("taxonomy: no root (cycle)");
  }
  // depth per node, with cycle detection
  std::vector<int> node_depth(node_names.size(), 0);
  depth = 0;
  for (std::size_t i = 0; i < node_names.size(); ++i) {
    int steps = 0;
    int cur = static_cast<int>(i);
    while (cur >= 0) {
      ++steps;
      if (steps > static_cast<int>(node_names.size())) {
        throw std::runtime_error("taxonomy: cycle involving " + node_names[i]);
      }
      cur = parent[cur];
    }
    node_depth[i] = steps;
    depth = std::max(depth, steps);
  }
}

ItemizedCaption itemize(const Tokens& caption, const PosLexicon& lexicon) {
  ItemizedCaption groups;
  for (const std::string& tok : caption) {
    auto it = lexicon.tags.find(tok);
    if (it == lexicon.tags.end()) continue;
    for (PosGroup g : it->second) {
      groups[static_cast<std::size_t>(g)].insert(tok);
    }
  }
  return groups;
}

std::string lemmatize(const std::string& word, const LemmaTable& table) {
  auto it = table.lemma.find(word);
  return it == table.lemma.end() ? word : it->second;
}

namespace {

int node_depth_of(const Taxonomy& tax, int node) {
  int d = 0;
  while (node >= 0) {
    ++d;
    node = tax.parent[node];
  }
  return d;
}

// Path length in nodes between two concepts in the tree.
int path_nodes(const Taxonomy& tax, int a, int b) {
  int da = node_depth_of(tax, a), db = node_depth_of(tax, b);
  int x = a, y = b;
  while (da > db) { x = tax.parent[x]; --da; }
  while (db > da) { y = tax.parent[y]; --db; }
  while (x != y) {
    x = tax.parent[x];
    y = tax.parent[y];
    --da;
  }
  const int depth_lca = da;
  return node_depth_of(tax, a) + node_depth_of(tax, b) - 2 * depth_lca + 1;
}

}  // namespace

double lch_similarity(const std::string& a, const std::string& b,
                      const Taxonomy& taxonomy) {
  auto ia = taxonomy.word_to_node.find(a);
  if (ia == taxonomy.word_to_node.end()) {
    throw std::invalid_argument("lch_similarity: word not in taxonomy: " + a);
  }
  auto ib = taxonomy.word_to_node.find(b);
  if (ib == taxonomy.word_to_node.end()) {
    throw std::invalid_argument("lch_similarity: word not in taxonomy: " + b);
  }
  const double two_d = 2.0 * taxonomy.depth;
  const int path = path_nodes(taxonomy, ia->second, ib->second);
  const double raw = -std::log(static_cast<double>(path) / two_d);
  return raw / (-std::log(1.0 / two_d));
}

std::vector<CoarseCluster> cluster_coarse(const std::vector<std::string>& a1_words,
                                          PosGroup group, const Taxonomy& taxonomy,
                                          double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    // threshold 1.0 still sensible for tests (identity only); reject outside (0,1]
    if (threshold != 1.0) throw std::invalid_argument("cluster threshold out of (0,1]");
  }
  std::vector<std::string> words = a1_words;
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());

  const std::size_t n = words.size();
  std::vector<std::size_t> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (comp[x] != x) x = comp[x] = comp[comp[x]];
    return x;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (!taxonomy.has_word(words[i])) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!taxonomy.has_word(words[j])) continue;
      if (lch_similarity(words[i], words[j], taxonomy) >= threshold) {
        comp[find(i)] = find(j);
      }
    }
  }

  std::map<std::size_t, CoarseCluster> by_root;
  for (std::size_t i = 0; i < n; ++i) {
    CoarseCluster& c = by_root[find(i)];
    c.members.push_back(words[i]);
    c.group = group;
    if (!taxonomy.has_word(words[i])) c.unmapped = true;
  }
  std::vector<CoarseCluster> clusters;
  for (auto& [_, c] : by_root) {
    std::sort(c.members.begin(), c.members.end());
    c.name = c.members.front();
    clusters.push_back(std::move(c));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const CoarseCluster& a, const CoarseCluster& b) { return a.name < b.name; });
  return clusters;
}

std::size_t AttributeVocabulary::a1_index(const std::string& lemma, PosGroup group) const {
  FineEntry key{lemma, group};
  auto it = std::lower_bound(a1.begin(), a1.end(), key,
                             [](const FineEntry& x, const FineEntry& y) {
                               if (x.group != y.group) return x.group < y.group;
                               return x.lemma < y.lemma;
                             });
  if (it != a1.end() && it->lemma == lemma && it->group == group) {
    return static_cast<std::size_t>(it - a1.begin());
  }
  return static_cast<std::size_t>(-1);
}

void AttributeVocabulary::save(const std::string& a1_path, const std::string& a2_path,
                               const std::vector<std::string>& header) const {
  std::ofstream f1(a1_path);
  if (!f1) throw std::runtime_error("cannot write: " + a1_path);
  for (const std::string& h : header) f1 << "# " << h << "\n";
  for (std::size_t i = 0; i < a1.size(); ++i) {
    f1 << a1[i].lemma << "\t" << pos_group_name(a1[i].group) << "\t";
    auto it = a1_to_a2.find(i);
    f1 << (it == a1_to_a2.end() ? "-" : a2[it->second].name) << "\n";
  }
  std::ofstream f2(a2_path);
  if (!f2) throw std::runtime_error("cannot write: " + a2_path);
  for (const std::string& h : header) f2 << "# " << h << "\n";
  for (const CoarseCluster& c : a2) {
    f2 << c.name << "\t" << pos_group_name(c.group) << "\t";
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      if (i) f2 << ",";
      f2 << c.members[i];
    }
    f2 << "\n";
  }
}

AttributeVocabulary build_attribute_vocabulary(const std::vector<Tokens>& captions,
                                               const PosLexicon& lexicon,
                                               const LemmaTable& lemmas,
                                               const Taxonomy& taxonomy,
                                               double threshold) {
  std::array<std::set<std::string>, kPosGroupCount> group_lemmas;
  for (const Tokens& caption : captions) {
    ItemizedCaption groups = itemize(caption, lexicon);
    for (std::size_t g = 0; g < kPosGroupCount; ++g) {
      for (const std::string& w : groups[g]) {
        group_lemmas[g].insert(lemmatize(w, lemmas));
      }
    }
  }

  AttributeVocabulary vocab;
  for (std::size_t g = 0; g < kPosGroupCount; ++g) {
    for (const std::string& lemma : group_lemmas[g]) {
      vocab.a1.push_back({lemma, static_cast<PosGroup>(g)});
    }
  }
  std::sort(vocab.a1.begin(), vocab.a1.end(),
            [](const AttributeVocabulary::FineEntry& x,
               const AttributeVocabulary::FineEntry& y) {
              if (x.group != y.group) return x.group < y.group;
              return x.lemma < y.lemma;
            });

  for (std::size_t g = 0; g < kPosGroupCount; ++g) {
    std::vector<std::string> words(group_lemmas[g].begin(), group_lemmas[g].end());
    if (words.empty()) continue;
    std::vector<CoarseCluster> clusters =
        cluster_coarse(words, static_cast<PosGroup>(g), taxonomy, threshold);
    for (CoarseCluster& c : clusters) {
      const std::size_t cluster_id = vocab.a2.size();
      for (const std::string& member : c.members) {
        const std::size_t a1_id = vocab.a1_index(member, static_cast<PosGroup>(g));
        if (a1_id != static_cast<std::size_t>(-1)) vocab.a1_to_a2[a1_id] = cluster_id;
      }
      vocab.a2.push_back(std::move(c));
    }
  }
  return vocab;
}

AttributeTargets encode_targets(const Tokens& caption, const AttributeVocabulary& vocab,
                                const PosLexicon& lexicon, const LemmaTable& lemmas) {
  AttributeTargets targets;
  targets.a1.assign(vocab.a1.size(), 0.0);
  targets.a2.assign(vocab.a2.size(), 0.0);
  ItemizedCaption groups = itemize(caption, lexicon);
  for (std::size_t g = 0; g < kPosGroupCount; ++g) {
    for (const std::string& w : groups[g]) {
      const std::size_t a1_id =
          vocab.a1_index(lemmatize(w, lemmas), static_cast<PosGroup>(g));
      if (a1_id == static_cast<std::size_t>(-1)) continue;
      targets.a1[a1_id] = 1.0;
      auto it = vocab.a1_to_a2.find(a1_id);
      if (it != vocab.a1_to_a2.end()) targets.a2[it->second] = 1.0;
    }
  }
  return targets;
}

}  // namespace cagnet
