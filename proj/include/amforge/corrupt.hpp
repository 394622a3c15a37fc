#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "amforge/error.hpp"
#include "amforge/ethiopic.hpp"
#include "amforge/rng.hpp"
#include "amforge/utf8.hpp"

namespace amforge {

// Declaration order is also application order.
enum class CorruptOp : int { Insert = 0, Substitute = 1, Swap = 2, Delete = 3, WordCrop = 4 };

inline constexpr CorruptOp kAllCorruptOps[] = {CorruptOp::Insert, CorruptOp::Substitute,
                                                CorruptOp::Swap, CorruptOp::Delete,
                                                CorruptOp::WordCrop};

inline std::string_view to_string(CorruptOp op) {
  switch (op) {
    case CorruptOp::Insert: return "insert";
    case CorruptOp::Substitute: return "substitute";
    case CorruptOp::Swap: return "swap";
    case CorruptOp::Delete: return "delete";
    case CorruptOp::WordCrop: return "word-crop";
  }
  return "?";
}

inline CorruptOp parse_corrupt_op(std::string_view s) {
  for (auto op : kAllCorruptOps) {
    if (to_string(op) == s) return op;
  }
  throw ValidationError("unknown corruption op '" + std::string(s) + "'");
}

struct CorruptionSpec {
  std::set<CorruptOp> ops;
  double rate = 0.0;  // fraction of character (or word) positions touched per op
  std::uint64_t seed = 0;

  void validate() const {
    if (!(rate >= 0.0 && rate <= 1.0)) {
      throw ValidationError("corruption rate must lie in [0, 1]");
    }
    if (rate > 0.0 && ops.empty()) {
      throw ValidationError("corruption rate > 0 needs at least one op");
    }
  }
};

// Assigned Ethiopic syllables U+1200-U+135A; insert and substitute draw here.
inline const std::vector<char32_t>& ethiopic_syllables() {
  static const std::vector<char32_t> pool = [] {
    constexpr char32_t unassigned[] = {0x1249, 0x124E, 0x124F, 0x1257, 0x1259, 0x125E,
                                       0x125F, 0x1289, 0x128E, 0x128F, 0x12B1, 0x12B6,
                                       0x12B7, 0x12BF, 0x12C1, 0x12C6, 0x12C7, 0x12D7,
                                       0x1311, 0x1316, 0x1317};
    std::vector<char32_t> v;
    for (char32_t cp = 0x1200; cp <= 0x135A; ++cp) {
      if (std::find(std::begin(unassigned), std::end(unassigned), cp) == std::end(unassigned)) {
        v.push_back(cp);
      }
    }
    return v;
  }();
  return pool;
}

namespace detail {

// ceil(rate * n) clamped to [1, n]; 0 when n == 0.
inline std::size_t affected_count(double rate, std::size_t n) {
  if (n == 0) return 0;
  const double raw = std::ceil(rate * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n);
}

// k distinct indices from [0, n) via partial Fisher-Yates, in draw order.
inline std::vector<std::size_t> sample_positions(SplitMix64& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

inline char32_t draw_syllable(SplitMix64& rng) {
  const auto& pool = ethiopic_syllables();
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

inline void apply_op(std::u32string& cps, CorruptOp op, double rate, SplitMix64& rng) {
  const std::size_t n = cps.size();
  switch (op) {
    case CorruptOp::Insert: {
      auto pos = sample_positions(rng, n, affected_count(rate, n));
      std::sort(pos.rbegin(), pos.rend());
      for (auto p : pos) cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(p), draw_syllable(rng));
      break;
    }
    case CorruptOp::Substitute: {
      for (auto p : sample_positions(rng, n, affected_count(rate, n))) {
        char32_t c = draw_syllable(rng);
        while (c == cps[p]) c = draw_syllable(rng);
        cps[p] = c;
      }
      break;
    }
    case CorruptOp::Swap: {
      if (n < 2) break;
      for (auto p : sample_positions(rng, n - 1, affected_count(rate, n - 1))) {
        std::swap(cps[p], cps[p + 1]);
      }
      break;
    }
    case CorruptOp::Delete: {
      auto pos = sample_positions(rng, n, affected_count(rate, n));
      std::sort(pos.rbegin(), pos.rend());
      for (auto p : pos) cps.erase(p, 1);
      break;
    }
    case CorruptOp::WordCrop: {
      std::vector<std::pair<std::size_t, std::size_t>> words;  // [begin, end)
      for (std::size_t i = 0; i < n;) {
        if (ethiopic::is_space(cps[i])) {
          ++i;
          continue;
        }
        const std::size_t b = i;
        while (i < n && !ethiopic::is_space(cps[i])) ++i;
        words.emplace_back(b, i);
      }
      const std::size_t w = words.size();
      if (w == 0) break;
      const std::size_t k = affected_count(rate, w);
      const auto first = static_cast<std::size_t>(rng.below(w - k + 1));
      const std::size_t last = first + k - 1;
      // Take the span plus the whitespace that separated it from its
      // right neighbour (or left neighbour, at the end of the text).
      std::size_t b = words[first].first;
      std::size_t e = words[last].second;
      if (last + 1 < w) {
        e = words[last + 1].first;
      } else if (first > 0) {
        b = words[first - 1].second;
      }
      cps.erase(b, e - b);
      break;
    }
  }
}

}  // namespace detail

// Seeded character/word noise. Each selected op runs in a fixed order on its
// own substream of spec.seed. With rate > 0 the result always differs from
// the input: if the ops happen to cancel out, one extra syllable is inserted.
inline std::string corrupt_text(std::string_view text, const CorruptionSpec& spec) {
  spec.validate();
  if (spec.rate == 0.0) return std::string(text);
  if (text.empty()) throw DataError("corrupt_text: input text is empty");

  const std::u32string original = utf8::decode(text);
  std::u32string cps = original;
  for (auto op : spec.ops) {
    SplitMix64 rng(derive_key(spec.seed, {static_cast<std::uint64_t>(op)}));
    detail::apply_op(cps, op, spec.rate, rng);
  }
  if (cps == original) {
    SplitMix64 rng(derive_key(spec.seed, {0xFA11BAC4ULL}));
    const auto p = static_cast<std::size_t>(rng.below(cps.size() + 1));
    cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(p), detail::draw_syllable(rng));
  }
  return utf8::encode(cps);
}

}  // namespace amforge
