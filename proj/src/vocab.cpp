#include "cagnet/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace cagnet {

Vocabulary::Vocabulary() {
  add(kSos);
  add(kEos);
  add(kUnk);
}

void Vocabulary::add(const std::string& token) {
  if (index_.count(token)) {
    throw std::invalid_argument("vocabulary: duplicate token " + token);
  }
  index_[token] = tokens_.size();
  tokens_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<Tokens>& captions, std::size_t cap) {
  std::map<std::string, std::size_t> counts;
  for (const Tokens& caption : captions) {
    for (const std::string& tok : caption) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  for (const auto& [tok, _] : ranked) {
    if (vocab.size() >= cap) break;
    if (vocab.index_.count(tok)) continue;  // caption text colliding with a special
    vocab.add(tok);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
  Vocabulary vocab;
  vocab.tokens_.clear();
  vocab.index_.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.add(line);
  }
  if (vocab.size() < 3 || vocab.tokens_[0] != kSos || vocab.tokens_[1] != kEos ||
      vocab.tokens_[2] != kUnk) {
    throw std::runtime_error("vocabulary file " + path +
                             " must start with <sos>, <eos>, <unk>");
  }
  return vocab;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
  for (const std::string& tok : tokens_) out << tok << "\n";
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? unk() : it->second;
}

std::vector<std::size_t> Vocabulary::encode(const Tokens& caption) const {
  std::vector<std::size_t> ids;
  ids.reserve(caption.size() + 1);
  for (const std::string& tok : caption) ids.push_back(id(tok));
  ids.push_back(eos());
  return ids;
}

Tokens Vocabulary::decode(const std::vector<std::size_t>& ids) const {
  Tokens out;
  for (std::size_t i : ids) {
    if (i == sos() || i == eos()) continue;
    out.push_back(token(i));
  }
  return out;
}

}  // namespace cagnet
