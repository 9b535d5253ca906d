#pragma once

#include <map>
#include <string>
#include <vector>

#include "cagnet/geometry.hpp"

namespace cagnet {

// Token <-> id bijection with dense ids. Specials occupy the first three ids.
class Vocabulary {
 public:
  static constexpr const char* kSos = "<sos>";
  static constexpr const char* kEos = "<eos>";
  static constexpr const char* kUnk = "<unk>";

  Vocabulary();

  // Most frequent caption words up to `cap` total entries (specials included),
  // ties broken lexicographically.
  static Vocabulary build(const std::vector<Tokens>& captions, std::size_t cap);

  // One token per line, line number = id.
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

  std::size_t size() const { return tokens_.size(); }
  std::size_t sos() const { return 0; }
  std::size_t eos() const { return 1; }
  std::size_t unk() const { return 2; }

  std::size_t id(const std::string& token) const;  // unk id for OOV
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }

  // Token ids with OOV -> unk, EOS appended.
  std::vector<std::size_t> encode(const Tokens& caption) const;
  // Drops specials.
  Tokens decode(const std::vector<std::size_t>& ids) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t> index_;
  void add(const std::string& token);
};

}  // namespace cagnet
