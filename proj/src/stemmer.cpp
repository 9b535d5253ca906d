// Porter stemming algorithm (Porter 1980), ASCII lowercase input.

#include <string>

#include "cagnet/meteor.hpp"

namespace cagnet {

namespace {

bool is_vowel(const std::string& w, std::size_t i) {
  switch (w[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return true;
    case 'y':
      return i > 0 && !is_vowel(w, i - 1);
    default:
      return false;
  }
}

// Number of VC sequences in w[0..end).
int measure(const std::string& w, std::size_t end) {
  int m = 0;
  std::size_t i = 0;
  while (i < end && !is_vowel(w, i)) ++i;
  while (i < end) {
    while (i < end && is_vowel(w, i)) ++i;
    if (i >= end) break;
    ++m;
    while (i < end && !is_vowel(w, i)) ++i;
  }
  return m;
}

bool has_vowel(const std::string& w, std::size_t end) {
  for (std::size_t i = 0; i < end; ++i) {
    if (is_vowel(w, i)) return true;
  }
  return false;
}

bool double_consonant(const std::string& w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && !is_vowel(w, n - 1);
}

// consonant-vowel-consonant ending, last consonant not w/x/y
bool cvc(const std::string& w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  if (is_vowel(w, n - 1) || !is_vowel(w, n - 2) || is_vowel(w, n - 3)) return false;
  const char c = w[n - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, const char* suffix) {
  const std::size_t sl = std::string(suffix).size();
  return w.size() >= sl && w.compare(w.size() - sl, sl, suffix) == 0;
}

// Replace suffix when the stem measure condition holds. Returns true when the
// suffix matched (whether or not replaced).
bool replace_m(std::string& w, const char* suffix, const char* repl, int min_m) {
  if (!ends_with(w, suffix)) return false;
  const std::size_t stem_len = w.size() - std::string(suffix).size();
  if (measure(w, stem_len) > min_m) {
    w = w.substr(0, stem_len) + repl;
  }
  return true;
}

void step1ab(std::string& w) {
  // 1a: plurals
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies")) {
    w.resize(w.size() - 2);
  } else if (!ends_with(w, "ss") && ends_with(w, "s")) {
    w.resize(w.size() - 1);
  }
  // 1b: -eed / -ed / -ing
  if (ends_with(w, "eed")) {
    if (measure(w, w.size() - 3) > 0) w.resize(w.size() - 1);
  } else {
    bool hit = false;
    if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
      w.resize(w.size() - 2);
      hit = true;
    } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
      w.resize(w.size() - 3);
      hit = true;
    }
    if (hit) {
      if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w += 'e';
      } else if (double_consonant(w) && !ends_with(w, "l") && !ends_with(w, "s") &&
                 !ends_with(w, "z")) {
        w.resize(w.size() - 1);
      } else if (measure(w, w.size()) == 1 && cvc(w)) {
        w += 'e';
      }
    }
  }
}

void step1c(std::string& w) {
  if (ends_with(w, "y") && has_vowel(w, w.size() - 1)) {
    w[w.size() - 1] = 'i';
  }
}

void step2(std::string& w) {
  static const char* pairs[][2] = {
      {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
      {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
      {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
      {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
      {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},  {"biliti", "ble"}};
  for (auto& p : pairs) {
    if (replace_m(w, p[0], p[1], 0)) return;
  }
}

void step3(std::string& w) {
  static const char* pairs[][2] = {{"icate", "ic"}, {"ative", ""}, {"alize", "al"},
                                   {"iciti", "ic"}, {"ical", "ic"}, {"ful", ""},
                                   {"ness", ""}};
  for (auto& p : pairs) {
    if (replace_m(w, p[0], p[1], 0)) return;
  }
}

void step4(std::string& w) {
  static const char* suffixes[] = {"al",  "ance", "ence", "er",  "ic",  "able",
                                   "ible", "ant",  "ement", "ment", "ent"};
  for (const char* s : suffixes) {
    if (ends_with(w, s)) {
      const std::size_t stem_len = w.size() - std::string(s).size();
      if (measure(w, stem_len) > 1) w.resize(stem_len);
      return;
    }
  }
  if (ends_with(w, "ion")) {
    const std::size_t stem_len = w.size() - 3;
    if (measure(w, stem_len) > 1 && stem_len > 0 &&
        (w[stem_len - 1] == 's' || w[stem_len - 1] == 't')) {
      w.resize(stem_len);
    }
    return;
  }
  static const char* rest[] = {"ou", "ism", "ate", "iti", "ous", "ive", "ize"};
  for (const char* s : rest) {
    if (ends_with(w, s)) {
      const std::size_t stem_len = w.size() - std::string(s).size();
      if (measure(w, stem_len) > 1) w.resize(stem_len);
      return;
    }
  }
}

void step5(std::string& w) {
  if (ends_with(w, "e")) {
    const int m = measure(w, w.size() - 1);
    std::string stem = w.substr(0, w.size() - 1);
    if (m > 1 || (m == 1 && !cvc(stem))) w = stem;
  }
  if (double_consonant(w) && ends_with(w, "l") && measure(w, w.size()) > 1) {
    w.resize(w.size() - 1);
  }
}

}  // namespace

std::string porter_stem(const std::string& word) {
  if (word.size() <= 2) return word;
  std::string w = word;
  step1ab(w);
  step1c(w);
  step2(w);
  step3(w);
  step4(w);
  step5(w);
  return w;
}

}  // namespace cagnet
