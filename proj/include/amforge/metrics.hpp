#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "amforge/error.hpp"
#include "amforge/ethiopic.hpp"

namespace amforge::metrics {

using Tokens = std::vector<std::string>;

// Text preparation shared by every metric: optional normalization, then
// word tokenization.
struct Preprocess {
  bool normalize = true;
  const ethiopic::NormalizationTable* table = nullptr;  // null: built-in table

  std::string prepare(std::string_view text) const {
    if (!normalize) return std::string(text);
    return ethiopic::normalize(text, table ? *table : ethiopic::NormalizationTable::builtin());
  }
  Tokens tokens(std::string_view text) const { return ethiopic::word_tokenize(prepare(text)); }
};

struct ScoreTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

inline double f_beta(double p, double r, double beta) {
  if (p + r == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (b2 * p + r);
}

// ---------------------------------------------------------------- labels --

struct LabelSet {
  std::string task_id;
  std::vector<std::string> labels;            // canonical surface forms
  std::map<std::string, std::string> aliases;  // alias -> canonical label

  void validate(const Preprocess& pre = {}) const {
    if (labels.empty()) throw ValidationError("label set for '" + task_id + "' is empty");
    std::set<std::string> seen;
    for (const auto& l : labels) {
      const auto norm = pre.prepare(l);
      if (norm.empty()) throw ValidationError("label set for '" + task_id + "' has a blank label");
      if (!seen.insert(norm).second) {
        throw ValidationError("labels of '" + task_id + "' collide after normalization: '" + l +
                              "'");
      }
    }
    for (const auto& [alias, target] : aliases) {
      if (std::find(labels.begin(), labels.end(), target) == labels.end()) {
        throw ValidationError("alias '" + alias + "' of '" + task_id +
                              "' points at unknown label '" + target + "'");
      }
      if (pre.prepare(alias).empty()) {
        throw ValidationError("label set for '" + task_id + "' has a blank alias");
      }
    }
  }

  // (normalized surface form, canonical label) for every label and alias.
  std::vector<std::pair<std::string, std::string>> surfaces(const Preprocess& pre) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& l : labels) out.emplace_back(pre.prepare(l), l);
    for (const auto& [alias, target] : aliases) out.emplace_back(pre.prepare(alias), target);
    return out;
  }
};

struct ClassifiedOutput {
  std::optional<std::string> verdict;  // canonical label; empty means unusable
  std::string raw;

  bool unusable() const { return !verdict.has_value(); }
};

// Exact match (after normalization) on a label or alias wins; otherwise the
// output is usable only if exactly one distinct label occurs as a substring.
inline ClassifiedOutput classify_output(std::string_view raw, const LabelSet& label_set,
                                        const Preprocess& pre = {}) {
  ClassifiedOutput out{std::nullopt, std::string(raw)};
  const auto text = pre.prepare(raw);
  const auto surfaces = label_set.surfaces(pre);
  for (const auto& [surface, label] : surfaces) {
    if (text == surface) {
      out.verdict = label;
      return out;
    }
  }
  std::set<std::string> hits;
  for (const auto& [surface, label] : surfaces) {
    if (!surface.empty() && text.find(surface) != std::string::npos) hits.insert(label);
  }
  if (hits.size() == 1) out.verdict = *hits.begin();
  return out;
}

struct ClassReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct F1Report {
  double weighted_f1 = 0.0;
  std::map<std::string, ClassReport> per_class;
  std::size_t unusable = 0;
};

// One-vs-rest F1 per gold class, averaged with gold-support weights. An
// unusable prediction is a prediction of a pseudo-class that is never gold,
// so it counts as a miss for its gold class and a false positive for none.
inline F1Report weighted_f1(const std::vector<ClassifiedOutput>& predictions,
                            const std::vector<std::string>& gold) {
  if (predictions.size() != gold.size()) {
    throw DataError("weighted_f1: " + std::to_string(predictions.size()) + " predictions vs " +
                    std::to_string(gold.size()) + " gold labels");
  }
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  };
  std::map<std::string, Counts> counts;
  F1Report report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto& g = counts[gold[i]];
    ++g.support;
    const auto& p = predictions[i];
    if (p.unusable()) {
      ++report.unusable;
      ++g.fn;
    } else if (*p.verdict == gold[i]) {
      ++g.tp;
    } else {
      ++g.fn;
      ++counts[*p.verdict].fp;
    }
  }
  double weighted = 0.0;
  for (const auto& [label, c] : counts) {
    ClassReport cr;
    cr.support = c.support;
    cr.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    cr.recall = c.support ? static_cast<double>(c.tp) / static_cast<double>(c.support) : 0.0;
    cr.f1 = f_beta(cr.precision, cr.recall, 1.0);
    weighted += cr.f1 * static_cast<double>(c.support);
    report.per_class.emplace(label, cr);
  }
  report.weighted_f1 = gold.empty() ? 0.0 : weighted / static_cast<double>(gold.size());
  return report;
}

// -------------------------------------------------------------- n-grams --

using NgramCounts = std::map<Tokens, std::size_t>;

inline NgramCounts word_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

template <typename Counts>
std::size_t clipped_overlap(const Counts& a, const Counts& b) {
  std::size_t overlap = 0;
  for (const auto& [gram, count] : a) {
    const auto it = b.find(gram);
    if (it != b.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

template <typename Counts>
std::size_t total_count(const Counts& c) {
  std::size_t n = 0;
  for (const auto& kv : c) n += kv.second;
  return n;
}

template <typename T>
std::size_t lcs_length(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// ----------------------------------------------------------------- ROUGE --

enum class RougeVariant { One, Two, L };

inline ScoreTriple rouge_tokens(const Tokens& cand, const Tokens& ref, RougeVariant variant) {
  ScoreTriple s;
  if (cand.empty() || ref.empty()) return s;
  std::size_t hits = 0, cand_total = 0, ref_total = 0;
  if (variant == RougeVariant::L) {
    hits = lcs_length(cand, ref);
    cand_total = cand.size();
    ref_total = ref.size();
  } else {
    const std::size_t n = variant == RougeVariant::One ? 1 : 2;
    const auto c = word_ngrams(cand, n);
    const auto r = word_ngrams(ref, n);
    hits = clipped_overlap(c, r);
    cand_total = total_count(c);
    ref_total = total_count(r);
  }
  s.precision = cand_total ? static_cast<double>(hits) / static_cast<double>(cand_total) : 0.0;
  s.recall = ref_total ? static_cast<double>(hits) / static_cast<double>(ref_total) : 0.0;
  s.f = f_beta(s.precision, s.recall, 1.0);
  return s;
}

// No stemming and no stopword removal.
inline ScoreTriple rouge(std::string_view candidate, std::string_view reference,
                         RougeVariant variant, const Preprocess& pre = {}) {
  return rouge_tokens(pre.tokens(candidate), pre.tokens(reference), variant);
}

// ------------------------------------------------------------------ BLEU --

inline constexpr std::size_t kBleuOrder = 4;

// Sufficient statistics; summing them over sentences is associative and
// commutative, so corpus scores can be reduced in any order.
struct BleuStats {
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  std::array<std::size_t, kBleuOrder> matches{};
  std::array<std::size_t, kBleuOrder> totals{};

  BleuStats& operator+=(const BleuStats& o) {
    cand_len += o.cand_len;
    ref_len += o.ref_len;
    for (std::size_t n = 0; n < kBleuOrder; ++n) {
      matches[n] += o.matches[n];
      totals[n] += o.totals[n];
    }
    return *this;
  }
};

inline BleuStats bleu_stats(const Tokens& cand, const Tokens& ref) {
  BleuStats s;
  s.cand_len = cand.size();
  s.ref_len = ref.size();
  for (std::size_t n = 1; n <= kBleuOrder; ++n) {
    const auto c = word_ngrams(cand, n);
    s.matches[n - 1] = clipped_overlap(c, word_ngrams(ref, n));
    s.totals[n - 1] = total_count(c);
  }
  return s;
}

// Description echoed into every report.
inline constexpr std::string_view kBleuSignature =
    "corpus;order=4;smooth=exp(n>=2);effective-order;tok=ethiopic-word";

// Corpus BLEU in [0, 100]. Orders the candidate corpus has no n-grams for
// are dropped (effective order). A zero-match order n >= 2 gets exponential
// smoothing: the k-th such order uses 1 / (2^k * total_n). Zero unigram
// matches or an empty candidate corpus score 0.
inline double bleu_from_stats(const BleuStats& s) {
  if (s.cand_len == 0 || s.matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  std::size_t order = 0;
  double smooth = 1.0;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    if (s.totals[n] == 0) break;
    ++order;
    double p;
    if (s.matches[n] > 0) {
      p = static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]);
    } else {
      smooth *= 2.0;
      p = 1.0 / (smooth * static_cast<double>(s.totals[n]));
    }
    log_sum += std::log(p);
  }
  const double bp =
      s.cand_len < s.ref_len
          ? std::exp(1.0 - static_cast<double>(s.ref_len) / static_cast<double>(s.cand_len))
          : 1.0;
  return 100.0 * bp * std::exp(log_sum / static_cast<double>(order));
}

inline double corpus_bleu(const std::vector<std::string>& candidates,
                          const std::vector<std::string>& references, const Preprocess& pre = {}) {
  if (candidates.size() != references.size()) {
    throw DataError("corpus_bleu: " + std::to_string(candidates.size()) + " candidates vs " +
                    std::to_string(references.size()) + " references");
  }
  if (candidates.empty()) throw DataError("corpus_bleu: empty corpus");
  BleuStats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    total += bleu_stats(pre.tokens(candidates[i]), pre.tokens(references[i]));
  }
  return bleu_from_stats(total);
}

// ---------------------------------------------------------------- chrF++ --

inline constexpr std::size_t kChrfCharOrder = 6;
inline constexpr std::size_t kChrfWordOrder = 2;
inline constexpr double kChrfBeta = 2.0;
inline constexpr std::string_view kChrfSignature =
    "corpus;char-order=6;word-order=2;beta=2;macro-over-effective-orders";

struct ChrfStats {
  // Per order: candidate n-grams, reference n-grams, clipped matches.
  // Orders 0..5 are characters 1..6, orders 6..7 are words 1..2.
  std::array<std::array<std::size_t, 3>, kChrfCharOrder + kChrfWordOrder> orders{};

  ChrfStats& operator+=(const ChrfStats& o) {
    for (std::size_t i = 0; i < orders.size(); ++i) {
      for (std::size_t k = 0; k < 3; ++k) orders[i][k] += o.orders[i][k];
    }
    return *this;
  }
};

inline ChrfStats chrf_stats(const std::string& cand, const std::string& ref, const Tokens& cand_tokens,
                            const Tokens& ref_tokens) {
  ChrfStats s;
  for (std::size_t n = 1; n <= kChrfCharOrder; ++n) {
    const auto c = ethiopic::char_ngrams(cand, n);
    const auto r = ethiopic::char_ngrams(ref, n);
    s.orders[n - 1] = {total_count(c), total_count(r), clipped_overlap(c, r)};
  }
  for (std::size_t n = 1; n <= kChrfWordOrder; ++n) {
    const auto c = word_ngrams(cand_tokens, n);
    const auto r = word_ngrams(ref_tokens, n);
    s.orders[kChrfCharOrder + n - 1] = {total_count(c), total_count(r), clipped_overlap(c, r)};
  }
  return s;
}

// F-beta per order from corpus-level counts, averaged over the orders where
// both sides have n-grams. No such order: 0.
inline double chrf_from_stats(const ChrfStats& s) {
  double sum = 0.0;
  std::size_t effective = 0;
  for (const auto& [hyp, ref, match] : s.orders) {
    if (hyp == 0 || ref == 0) continue;
    ++effective;
    sum += f_beta(static_cast<double>(match) / static_cast<double>(hyp),
                  static_cast<double>(match) / static_cast<double>(ref), kChrfBeta);
  }
  return effective ? 100.0 * sum / static_cast<double>(effective) : 0.0;
}

inline double chrf_pp(const std::vector<std::string>& candidates,
                      const std::vector<std::string>& references, const Preprocess& pre = {}) {
  if (candidates.size() != references.size()) {
    throw DataError("chrf_pp: " + std::to_string(candidates.size()) + " candidates vs " +
                    std::to_string(references.size()) + " references");
  }
  ChrfStats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto c = pre.prepare(candidates[i]);
    const auto r = pre.prepare(references[i]);
    total += chrf_stats(c, r, ethiopic::word_tokenize(c), ethiopic::word_tokenize(r));
  }
  return chrf_from_stats(total);
}

// ------------------------------------------------------------ WER / acc --

inline double wer_tokens(const Tokens& cand, const Tokens& ref) {
  if (ref.empty()) throw DataError("wer: reference has no tokens");
  return static_cast<double>(levenshtein(cand, ref)) / static_cast<double>(ref.size());
}

inline double wer(std::string_view candidate, std::string_view reference,
                  const Preprocess& pre = {}) {
  return wer_tokens(pre.tokens(candidate), pre.tokens(reference));
}

inline double exact_accuracy(const std::vector<std::string>& predictions,
                             const std::vector<std::string>& gold, const Preprocess& pre = {}) {
  if (predictions.size() != gold.size()) {
    throw DataError("exact_accuracy: " + std::to_string(predictions.size()) +
                    " predictions vs " + std::to_string(gold.size()) + " gold answers");
  }
  if (gold.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (pre.prepare(predictions[i]) == pre.prepare(gold[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

}  // namespace amforge::metrics
