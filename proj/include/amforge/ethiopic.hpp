#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "amforge/error.hpp"
#include "amforge/utf8.hpp"

namespace amforge::ethiopic {

inline constexpr char32_t kBlockFirst = 0x1200;
inline constexpr char32_t kBlockLast = 0x137F;

inline constexpr bool in_block(char32_t cp) { return cp >= kBlockFirst && cp <= kBlockLast; }

inline constexpr bool is_space(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// ASCII punctuation, general punctuation, and the Ethiopic marks U+1360-1368.
inline constexpr bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  return (cp >= 0x1360 && cp <= 0x1368) || (cp >= 0x2010 && cp <= 0x2027) ||
         (cp >= 0x2030 && cp <= 0x205E) || cp == 0xAB || cp == 0xBB;
}

// Punctuation split off into standalone tokens by word_tokenize.
inline constexpr bool is_token_punct(char32_t cp) {
  return cp == 0x1362 /* ። */ || cp == 0x1363 /* ፣ */ || cp == 0x1364 /* ፤ */ ||
         cp == 0x1365 /* ፥ */ || cp == U'?' || cp == U'!' || cp == U'.';
}

// Codepoint-to-codepoint canonicalization. No value is ever also a key, so
// applying the table once is already a fixed point.
class NormalizationTable {
 public:
  NormalizationTable() = default;

  // Homophone canonicalization: the h-family (ሐ, ኀ, ኸ series) folds onto
  // ሀ, ሠ onto ሰ, ዐ onto አ and ፀ onto ጸ, order by order. The fourth-order
  // "a" forms of the h and glottal families fold onto the first order.
  static const NormalizationTable& builtin() {
    static const NormalizationTable table = [] {
      NormalizationTable t;
      auto series = [&t](char32_t from, char32_t to, int orders) {
        for (int i = 0; i < orders; ++i) t.map_[from + i] = to + i;
      };
      series(0x1210, 0x1200, 7);  // ሐ
      series(0x1280, 0x1200, 7);  // ኀ
      series(0x12B8, 0x1200, 7);  // ኸ
      series(0x1220, 0x1230, 8);  // ሠ -> ሰ, including ሧ -> ሷ
      series(0x12D0, 0x12A0, 7);  // ዐ -> አ
      series(0x1340, 0x1338, 7);  // ፀ -> ጸ
      for (char32_t fourth : {0x1203, 0x1213, 0x1283, 0x12BB}) t.map_[fourth] = 0x1200;
      for (char32_t fourth : {0x12A3, 0x12D3}) t.map_[fourth] = 0x12A0;
      t.check();
      return t;
    }();
    return table;
  }

  // Two columns per line (from, to), each a single codepoint, separated by
  // whitespace. Blank lines and lines starting with '#' are skipped.
  static NormalizationTable parse(std::string_view text) {
    NormalizationTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream cols(line);
      std::string from, to, extra;
      if (!(cols >> from)) continue;
      if (from.front() == '#') continue;
      if (!(cols >> to) || (cols >> extra)) {
        throw DataError("normalization table line " + std::to_string(line_no) +
                        ": expected two columns");
      }
      const auto f = utf8::decode(from);
      const auto g = utf8::decode(to);
      if (f.size() != 1 || g.size() != 1) {
        throw DataError("normalization table line " + std::to_string(line_no) +
                        ": each column must be a single codepoint");
      }
      t.map_[f[0]] = g[0];
    }
    t.check();
    return t;
  }

  static NormalizationTable load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open normalization table: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  char32_t apply(char32_t cp) const {
    const auto it = map_.find(cp);
    return it == map_.end() ? cp : it->second;
  }

  std::size_t size() const { return map_.size(); }
  const std::unordered_map<char32_t, char32_t>& mapping() const { return map_; }

 private:
  void check() const {
    for (const auto& [from, to] : map_) {
      if (map_.count(to) != 0) {
        throw DataError("normalization table maps U+" + hex(from) + " to U+" + hex(to) +
                        ", which is itself a key");
      }
    }
  }

  static std::string hex(char32_t cp) {
    std::ostringstream ss;
    ss << std::uppercase << std::hex << static_cast<std::uint32_t>(cp);
    return ss.str();
  }

  std::unordered_map<char32_t, char32_t> map_;
};

// Applies the table codepoint-wise, collapses whitespace runs to one space
// and trims both ends.
inline std::string normalize(std::string_view text,
                             const NormalizationTable& table = NormalizationTable::builtin()) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::next(text, pos);
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    utf8::append(out, table.apply(cp));
  }
  return out;
}

// True iff Ethiopic codepoints make up at least `threshold` of the
// non-whitespace, non-punctuation codepoints. Empty text is never Ethiopic.
inline bool is_ethiopic(std::string_view text, double threshold = 0.5) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError("is_ethiopic threshold must lie in [0, 1]");
  }
  std::size_t total = 0;
  std::size_t ethiopic = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::next(text, pos);
    if (is_space(cp) || is_punct(cp)) continue;
    ++total;
    if (in_block(cp)) ++ethiopic;
  }
  if (total == 0) return false;
  return static_cast<double>(ethiopic) >= threshold * static_cast<double>(total);
}

inline std::vector<std::string> word_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::next(text, pos);
    if (is_space(cp)) {
      flush();
    } else if (is_token_punct(cp)) {
      flush();
      tokens.push_back(utf8::encode(cp));
    } else {
      utf8::append(current, cp);
    }
  }
  flush();
  return tokens;
}

using NgramCounts = std::map<std::string, std::size_t>;

// Character n-grams with multiplicity, whitespace removed first.
inline NgramCounts char_ngrams(std::string_view text, std::size_t n) {
  if (n == 0) throw ValidationError("char_ngrams: n must be >= 1");
  std::u32string cps;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::next(text, pos);
    if (!is_space(cp)) cps.push_back(cp);
  }
  NgramCounts counts;
  if (cps.size() < n) return counts;
  for (std::size_t i = 0; i + n <= cps.size(); ++i) {
    ++counts[utf8::encode(std::u32string_view(cps).substr(i, n))];
  }
  return counts;
}

}  // namespace amforge::ethiopic
