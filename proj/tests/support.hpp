#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "amforge/utf8.hpp"

namespace support {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("amforge_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << content;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Generators. Everything draws from a caller-owned std::mt19937_64 so each
// property test is reproducible from its seed.
using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// A random Ethiopic syllable, homophone series included.
inline char32_t syllable(Rng& rng) {
  return static_cast<char32_t>(0x1200 + pick(rng, 0x135A - 0x1200 + 1));
}

inline std::string ethiopic_word(Rng& rng, std::size_t max_len = 6) {
  std::u32string w;
  const std::size_t len = 1 + pick(rng, max_len);
  for (std::size_t i = 0; i < len; ++i) w.push_back(syllable(rng));
  return amforge::utf8::encode(w);
}

// Words separated by runs of mixed whitespace, sometimes with Ethiopic
// punctuation and leading/trailing blanks.
inline std::string messy_ethiopic(Rng& rng, std::size_t max_words = 8) {
  static const std::vector<std::string> gaps = {" ", "  ", "\t", " \n ", " "};
  static const std::vector<std::string> marks = {"።", "፣", "፤", "?", "!"};
  std::string out = pick(rng, 4) == 0 ? " " : "";
  const std::size_t words = 1 + pick(rng, max_words);
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += gaps[pick(rng, gaps.size())];
    out += ethiopic_word(rng);
    if (pick(rng, 5) == 0) out += marks[pick(rng, marks.size())];
  }
  if (pick(rng, 4) == 0) out += "\t ";
  return out;
}

inline std::string clean_ethiopic(Rng& rng, std::size_t min_words, std::size_t max_words) {
  std::string out;
  const std::size_t words = min_words + pick(rng, max_words - min_words + 1);
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += ethiopic_word(rng);
  }
  return out;
}

// Tokens from a small vocabulary so that n-gram collisions are common.
inline std::vector<std::string> token_sentence(Rng& rng, std::size_t min_len, std::size_t max_len,
                                               std::size_t vocab = 6) {
  static const std::vector<std::string> words = {"ሰላም", "ቤት", "ልጅ",  "ውሃ",  "መጽሐፍ", "ገበያ",
                                                 "ዛሬ",  "ነገ",  "አለ", "ሄደ", "መጣ",    "ትልቅ"};
  std::vector<std::string> out;
  const std::size_t len = min_len + pick(rng, max_len - min_len + 1);
  for (std::size_t i = 0; i < len; ++i) out.push_back(words[pick(rng, std::min(vocab, words.size()))]);
  return out;
}

inline std::string join(const std::vector<std::string>& toks) {
  std::string out;
  for (const auto& t : toks) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace support
