#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cagnet/attributes.hpp"
#include "cagnet/rng.hpp"
#include "oracles.hpp"

using namespace cagnet;
namespace fs = std::filesystem;

namespace {

PosLexicon demo_lexicon() {
  PosLexicon lex;
  lex.tags["young"] = {PosGroup::Adjective};
  lex.tags["surfer"] = {PosGroup::Noun};
  lex.tags["standing"] = {PosGroup::Verb};
  lex.tags["on"] = {PosGroup::Preposition};
  lex.tags["girl"] = {PosGroup::Noun};
  lex.tags["man"] = {PosGroup::Noun};
  lex.tags["eating"] = {PosGroup::Verb};
  lex.tags["donut"] = {PosGroup::Noun};
  lex.tags["sidewalk"] = {PosGroup::Noun};
  lex.tags["a"] = {};  // never triggers; stays out of every group
  lex.tags.erase("a");
  return lex;
}

LemmaTable demo_lemmas() {
  LemmaTable t;
  t.lemma["talks"] = "talk";
  t.lemma["talking"] = "talk";
  t.lemma["persons"] = "person";
  t.lemma["standing"] = "stand";
  t.lemma["eating"] = "eat";
  t.lemma["talk"] = "talk";
  t.lemma["person"] = "person";
  t.lemma["stand"] = "stand";
  t.lemma["eat"] = "eat";
  return t;
}

// girl and man share the "person" concept; donut/sidewalk are distinct things.
Taxonomy demo_taxonomy() {
  Taxonomy tax;
  auto add_node = [&](const std::string& name, int parent) {
    int id = static_cast<int>(tax.node_names.size());
    tax.node_names.push_back(name);
    tax.parent.push_back(parent);
    tax.node_index[name] = id;
    return id;
  };
  const int entity = add_node("entity", -1);
  const int person = add_node("person", entity);
  const int object = add_node("object", entity);
  const int food = add_node("food", object);
  const int place = add_node("place", object);
  tax.word_to_node["girl"] = person;
  tax.word_to_node["man"] = person;
  tax.word_to_node["surfer"] = person;
  tax.word_to_node["donut"] = food;
  tax.word_to_node["sidewalk"] = place;
  tax.finalize();
  return tax;
}

Taxonomy chain_taxonomy() {
  // root - mid - {a, b}: depth 3, siblings at path length 3
  Taxonomy tax;
  tax.node_names = {"root", "mid", "a", "b"};
  tax.parent = {-1, 0, 1, 1};
  for (int i = 0; i < 4; ++i) tax.node_index[tax.node_names[i]] = i;
  tax.word_to_node["wa"] = 2;
  tax.word_to_node["wb"] = 3;
  tax.word_to_node["wmid"] = 1;
  tax.finalize();
  return tax;
}

Taxonomy random_taxonomy(Rng& rng, std::size_t n_nodes, std::size_t n_words) {
  Taxonomy tax;
  tax.node_names.push_back("n0");
  tax.parent.push_back(-1);
  tax.node_index["n0"] = 0;
  for (std::size_t i = 1; i < n_nodes; ++i) {
    const std::string name = "n" + std::to_string(i);
    tax.node_names.push_back(name);
    tax.parent.push_back(static_cast<int>(rng.index(i)));
    tax.node_index[name] = static_cast<int>(i);
  }
  for (std::size_t w = 0; w < n_words; ++w) {
    tax.word_to_node["w" + std::to_string(w)] = static_cast<int>(rng.index(n_nodes));
  }
  tax.finalize();
  return tax;
}

}  // namespace

TEST_CASE("itemize splits the worked example into the four groups") {
  PosLexicon lex = demo_lexicon();
  ItemizedCaption groups = itemize({"young", "surfer", "standing", "on"}, lex);
  CHECK(groups[(int)PosGroup::Adjective] == std::set<std::string>{"young"});
  CHECK(groups[(int)PosGroup::Noun] == std::set<std::string>{"surfer"});
  CHECK(groups[(int)PosGroup::Verb] == std::set<std::string>{"standing"});
  CHECK(groups[(int)PosGroup::Preposition] == std::set<std::string>{"on"});

  ItemizedCaption empty = itemize({}, lex);
  for (const auto& g : empty) CHECK(g.empty());
}

TEST_CASE("itemize drops unknown words and handles multi-group assignment") {
  PosLexicon lex = demo_lexicon();
  // hand-classified: girl/donut/sidewalk nouns, eating verb, a/on per lexicon
  ItemizedCaption groups =
      itemize({"girl", "eating", "a", "donut", "on", "sidewalk"}, lex);
  CHECK(groups[(int)PosGroup::Noun] ==
        std::set<std::string>{"girl", "donut", "sidewalk"});
  CHECK(groups[(int)PosGroup::Verb] == std::set<std::string>{"eating"});
  CHECK(groups[(int)PosGroup::Preposition] == std::set<std::string>{"on"});
  CHECK(groups[(int)PosGroup::Adjective].empty());

  lex.tags["light"] = {PosGroup::Noun, PosGroup::Adjective};
  ItemizedCaption multi = itemize({"light"}, lex);
  CHECK(multi[(int)PosGroup::Noun].count("light") == 1);
  CHECK(multi[(int)PosGroup::Adjective].count("light") == 1);
}

TEST_CASE("lemmatize: table hits, fixed points and misses") {
  LemmaTable t = demo_lemmas();
  CHECK(lemmatize("talks", t) == "talk");
  CHECK(lemmatize("talking", t) == "talk");
  CHECK(lemmatize("talk", t) == "talk");
  CHECK(lemmatize("persons", t) == "person");
  CHECK(lemmatize("zebra", t) == "zebra");
}

TEST_CASE("lch_similarity closed forms") {
  Taxonomy tax = chain_taxonomy();
  CHECK(lch_similarity("wa", "wa", tax) == 1.0);
  // siblings in a depth-3 tree: raw ln 2, normalized ln2/ln6
  const double want = std::log(2.0) / std::log(6.0);
  CHECK(lch_similarity("wa", "wb", tax) == doctest::Approx(want).epsilon(1e-15));
  CHECK(lch_similarity("wa", "wb", tax) ==
        lch_similarity("wb", "wa", tax));
  CHECK_THROWS_WITH_AS(lch_similarity("nope", "wa", tax),
                       "lch_similarity: word not in taxonomy: nope",
                       std::invalid_argument);
}

TEST_CASE("lch_similarity matches a BFS oracle on random taxonomies") {
  Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    Taxonomy tax = random_taxonomy(rng, 2 + rng.index(12), 8);
    const double two_d = 2.0 * tax.depth;
    for (const auto& [wa, na] : tax.word_to_node) {
      for (const auto& [wb, nb] : tax.word_to_node) {
        const int path = oracle::bfs_path_nodes(tax, na, nb);
        const double want = -std::log(path / two_d) / -std::log(1.0 / two_d);
        CHECK(lch_similarity(wa, wb, tax) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("lch_similarity is maximal only for identical concepts") {
  Taxonomy tax = chain_taxonomy();
  CHECK(lch_similarity("wa", "wmid", tax) < 1.0);
  CHECK(lch_similarity("wa", "wb", tax) < 1.0);
  CHECK(lch_similarity("wa", "wa", tax) == 1.0);
}

TEST_CASE("cluster_coarse: same-concept words merge, distinct ones stay apart") {
  Taxonomy tax = demo_taxonomy();
  auto clusters = cluster_coarse({"girl", "man", "donut", "sidewalk"},
                                 PosGroup::Noun, tax, 0.85);
  REQUIRE(clusters.size() == 3);
  // named by the lexicographically smallest member
  CHECK(clusters[0].name == "donut");
  CHECK(clusters[1].name == "girl");
  CHECK(clusters[1].members == std::vector<std::string>{"girl", "man"});
  CHECK(clusters[2].name == "sidewalk");
}

TEST_CASE("cluster_coarse at threshold 1.0 keeps distinct concepts as singletons") {
  Taxonomy tax = chain_taxonomy();
  auto clusters = cluster_coarse({"wa", "wb", "wmid"}, PosGroup::Noun, tax, 1.0);
  CHECK(clusters.size() == 3);
}

TEST_CASE("cluster_coarse matches brute-force connected components") {
  Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    Taxonomy tax = random_taxonomy(rng, 10, 10);
    std::vector<std::string> words;
    for (const auto& [w, _] : tax.word_to_node) words.push_back(w);
    const double threshold = 0.3 + 0.6 * rng.uniform();
    auto clusters = cluster_coarse(words, PosGroup::Noun, tax, threshold);

    // brute force: union-find over all pairs
    std::map<std::string, std::string> root;
    for (const auto& w : words) root[w] = w;
    std::function<std::string(std::string)> find = [&](std::string x) {
      while (root[x] != x) x = root[x];
      return x;
    };
    for (const auto& a : words) {
      for (const auto& b : words) {
        if (a < b && lch_similarity(a, b, tax) >= threshold) {
          root[find(a)] = find(b);
        }
      }
    }
    std::map<std::string, std::set<std::string>> comps;
    for (const auto& w : words) comps[find(w)].insert(w);
    CHECK(clusters.size() == comps.size());
    for (const auto& c : clusters) {
      std::set<std::string> got(c.members.begin(), c.members.end());
      CHECK(comps[find(c.name)] == got);
    }
  }
}

TEST_CASE("clustering is threshold monotone on random taxonomies") {
  Rng rng(57);
  for (int trial = 0; trial < 20; ++trial) {
    Taxonomy tax = random_taxonomy(rng, 8, 10);
    std::vector<std::string> words;
    for (const auto& [w, _] : tax.word_to_node) words.push_back(w);
    const double lo = 0.2 + 0.3 * rng.uniform();
    const double hi = lo + (0.99 - lo) * rng.uniform();
    auto coarse = cluster_coarse(words, PosGroup::Noun, tax, lo);
    auto fine = cluster_coarse(words, PosGroup::Noun, tax, hi);
    CHECK(fine.size() >= coarse.size());
    // refinement: every fine cluster lies inside one coarse cluster
    std::map<std::string, std::string> coarse_of;
    for (const auto& c : coarse) {
      for (const auto& m : c.members) coarse_of[m] = c.name;
    }
    for (const auto& f : fine) {
      for (const auto& m : f.members) {
        CHECK(coarse_of[m] == coarse_of[f.members.front()]);
      }
    }
  }
}

TEST_CASE("unmapped words become singleton clusters") {
  Taxonomy tax = demo_taxonomy();
  auto clusters = cluster_coarse({"girl", "man", "xyzzy"}, PosGroup::Noun, tax, 0.85);
  REQUIRE(clusters.size() == 2);
  bool found = false;
  for (const auto& c : clusters) {
    if (c.name == "xyzzy") {
      found = true;
      CHECK(c.unmapped);
      CHECK(c.members.size() == 1);
    }
  }
  CHECK(found);
}

TEST_CASE("encode_targets and hierarchy consistency") {
  PosLexicon lex = demo_lexicon();
  LemmaTable lemmas = demo_lemmas();
  Taxonomy tax = demo_taxonomy();
  std::vector<Tokens> corpus = {
      {"young", "surfer", "standing", "on"},
      {"girl", "eating", "a", "donut", "on", "sidewalk"},
      {"man", "standing", "on", "sidewalk"},
  };
  AttributeVocabulary vocab =
      build_attribute_vocabulary(corpus, lex, lemmas, tax, 0.85);

  // the coarse noun cluster {girl, man, surfer} exists (shared person concept)
  bool person_cluster = false;
  for (const auto& c : vocab.a2) {
    if (c.group == PosGroup::Noun && c.members.size() == 3) {
      person_cluster = true;
      CHECK(c.name == "girl");
    }
  }
  CHECK(person_cluster);

  AttributeTargets t = encode_targets({"girl", "standing", "on"}, vocab, lex, lemmas);
  const std::size_t girl_a1 = vocab.a1_index("girl", PosGroup::Noun);
  REQUIRE(girl_a1 != static_cast<std::size_t>(-1));
  CHECK(t.a1[girl_a1] == 1.0);
  CHECK(t.a2[vocab.a1_to_a2.at(girl_a1)] == 1.0);

  AttributeTargets empty = encode_targets({}, vocab, lex, lemmas);
  for (double v : empty.a1) CHECK(v == 0.0);
  for (double v : empty.a2) CHECK(v == 0.0);

  // hierarchy consistency on 1000 random captions: a2 = OR of member a1
  std::vector<std::string> all_words;
  for (const auto& [w, _] : lex.tags) all_words.push_back(w);
  Rng rng(61);
  for (int trial = 0; trial < 1000; ++trial) {
    Tokens caption;
    const std::size_t len = rng.index(8);
    for (std::size_t i = 0; i < len; ++i) {
      caption.push_back(all_words[rng.index(all_words.size())]);
    }
    AttributeTargets targets = encode_targets(caption, vocab, lex, lemmas);
    for (std::size_t c = 0; c < vocab.a2.size(); ++c) {
      double want = 0.0;
      for (std::size_t j = 0; j < vocab.a1.size(); ++j) {
        auto it = vocab.a1_to_a2.find(j);
        if (it != vocab.a1_to_a2.end() && it->second == c && targets.a1[j] == 1.0) {
          want = 1.0;
        }
      }
      CHECK(targets.a2[c] == want);
    }
  }
}

TEST_CASE("vocabulary files are byte-identical across rebuilds") {
  PosLexicon lex = demo_lexicon();
  LemmaTable lemmas = demo_lemmas();
  Taxonomy tax = demo_taxonomy();
  std::vector<Tokens> corpus = {
      {"young", "surfer", "standing", "on"},
      {"girl", "eating", "a", "donut", "on", "sidewalk"},
  };
  const fs::path dir = fs::temp_directory_path() / "cagnet_attr_test";
  fs::create_directories(dir);
  auto read = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  };
  std::string first_a1, first_a2;
  for (int round = 0; round < 2; ++round) {
    AttributeVocabulary vocab =
        build_attribute_vocabulary(corpus, lex, lemmas, tax, 0.85);
    vocab.save((dir / "a1.txt").string(), (dir / "a2.txt").string(), {"round"});
    if (round == 0) {
      first_a1 = read(dir / "a1.txt");
      first_a2 = read(dir / "a2.txt");
      CHECK(!first_a1.empty());
    } else {
      CHECK(read(dir / "a1.txt") == first_a1);
      CHECK(read(dir / "a2.txt") == first_a2);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("TSV loaders round trip and validate") {
  const fs::path dir = fs::temp_directory_path() / "cagnet_tsv_test";
  fs::create_directories(dir);

  {
    std::ofstream f(dir / "lex.tsv");
    f << "girl\tnoun\nlight\tnoun,adjective\non\tpreposition\n";
  }
  PosLexicon lex = PosLexicon::load((dir / "lex.tsv").string());
  CHECK(lex.tags.at("light").size() == 2);

  {
    std::ofstream f(dir / "lem.tsv");
    f << "talks\ttalk\npersons\tperson\n";
  }
  LemmaTable lem = LemmaTable::load((dir / "lem.tsv").string());
  CHECK(lem.lemma.at("talk") == "talk");  // fixed point added on load

  {
    std::ofstream f(dir / "tax.tsv");
    f << "[tree]\nperson\tentity\nfood\tentity\n[words]\ngirl\tperson\n"
         "man\tperson\ndonut\tfood\n";
  }
  Taxonomy tax = Taxonomy::load((dir / "tax.tsv").string());
  CHECK(tax.depth == 2);
  CHECK(lch_similarity("girl", "man", tax) == 1.0);

  {
    std::ofstream f(dir / "cycle.tsv");
    f << "[tree]\na\tb\nb\ta\n[words]\n";
  }
  CHECK_THROWS(Taxonomy::load((dir / "cycle.tsv").string()));

  fs::remove_all(dir);
}
