#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "amforge/error.hpp"
#include "amforge/eval.hpp"
#include "amforge/ingest.hpp"
#include "amforge/rng.hpp"

namespace amforge::review {

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 5;

struct ReviewItem {
  std::string blind_id;
  std::string task_id;
  std::string prompt;
  std::string text;
  std::string model_id;  // hidden from raters; only written to the sealed key
  std::size_t item_index = 0;
  std::vector<std::optional<int>> ratings;  // one slot per rater
};

struct KeyEntry {
  std::string task_id;
  std::string model_id;
  std::size_t item_index = 0;

  friend bool operator==(const KeyEntry&, const KeyEntry&) = default;
};

struct ReviewKey {
  unsigned raters = 0;
  std::map<std::string, KeyEntry> entries;  // blind_id -> origin
};

struct ReviewSample {
  std::vector<ReviewItem> items;  // shuffled; order reveals nothing about models
  ReviewKey key;
};

// Samples n prompts uniformly without replacement, emits one item per
// (prompt, model) with an opaque random blind_id, and shuffles the items.
inline ReviewSample sample_for_review(std::string_view task_id,
                                      const std::vector<std::string>& prompts,
                                      const std::map<std::string, std::vector<std::string>>& outputs,
                                      std::size_t n, std::uint64_t seed, unsigned raters) {
  if (n < 1) throw ValidationError("review sample size must be >= 1");
  if (raters < 1) throw ValidationError("review needs at least one rater");
  if (outputs.empty()) throw ValidationError("review needs at least one model");
  for (const auto& [model, lines] : outputs) {
    if (lines.size() != prompts.size()) {
      throw DataError("model '" + model + "' has " + std::to_string(lines.size()) +
                      " outputs for " + std::to_string(prompts.size()) + " prompts");
    }
  }
  if (n > prompts.size()) {
    throw ValidationError("cannot sample " + std::to_string(n) + " items from " +
                          std::to_string(prompts.size()));
  }

  const std::uint64_t task_key = fnv1a64(task_id);
  SplitMix64 pick(derive_key(seed, {task_key, 0}));
  std::vector<std::size_t> idx(prompts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(idx[i], idx[i + static_cast<std::size_t>(pick.below(idx.size() - i))]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());

  ReviewSample sample;
  sample.key.raters = raters;
  SplitMix64 ids(derive_key(seed, {task_key, 1}));
  for (auto i : idx) {
    for (const auto& [model, lines] : outputs) {
      std::string id;
      do {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(ids.next()));
        id = std::string(buf).substr(0, 12);
      } while (sample.key.entries.count(id));
      sample.key.entries.emplace(id, KeyEntry{std::string(task_id), model, i});
      sample.items.push_back(ReviewItem{id, std::string(task_id), prompts[i], lines[i], model, i,
                                        std::vector<std::optional<int>>(raters)});
    }
  }
  SplitMix64 shuffle(derive_key(seed, {task_key, 2}));
  for (std::size_t i = sample.items.size(); i > 1; --i) {
    std::swap(sample.items[i - 1], sample.items[static_cast<std::size_t>(shuffle.below(i))]);
  }
  return sample;
}

// Appends `other` into `into`; blind_ids must stay unique.
inline void merge(ReviewSample& into, ReviewSample other) {
  if (into.key.raters == 0) into.key.raters = other.key.raters;
  if (into.key.raters != other.key.raters) throw ValidationError("rater counts differ");
  for (auto& [id, entry] : other.key.entries) {
    if (!into.key.entries.emplace(id, entry).second) {
      throw DataError("duplicate blind_id '" + id + "'");
    }
  }
  for (auto& item : other.items) into.items.push_back(std::move(item));
}

// Sheet for one rater (0-based): JSONL records {blind_id, task, prompt, text,
// rating: null} in a rater-specific order.
inline std::string sheet_jsonl(const ReviewSample& sample, unsigned rater, std::uint64_t seed) {
  std::vector<const ReviewItem*> order;
  for (const auto& it : sample.items) order.push_back(&it);
  SplitMix64 rng(derive_key(seed, {0x5EE7ULL, rater}));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
  }
  std::string out;
  for (const auto* it : order) {
    const auto& r = it->ratings.at(rater);
    nlohmann::json j{{"blind_id", it->blind_id},
                     {"task", it->task_id},
                     {"prompt", it->prompt},
                     {"text", it->text},
                     {"rating", r ? nlohmann::json(*r) : nlohmann::json()}};
    out += j.dump() + "\n";
  }
  return out;
}

inline std::string key_json(const ReviewKey& key) {
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [id, e] : key.entries) {
    entries[id] = {{"task", e.task_id}, {"model", e.model_id}, {"item", e.item_index}};
  }
  return nlohmann::json{{"raters", key.raters}, {"items", entries}}.dump(2) + "\n";
}

inline ReviewKey parse_key(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ReviewKey key;
    key.raters = j.at("raters").get<unsigned>();
    for (const auto& [id, e] : j.at("items").items()) {
      key.entries.emplace(id, KeyEntry{e.at("task").get<std::string>(),
                                       e.at("model").get<std::string>(),
                                       e.at("item").get<std::size_t>()});
    }
    return key;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed review key: ") + e.what());
  }
}

struct SheetRating {
  std::string blind_id;
  std::optional<int> rating;
};

// Reads rated sheet records. A null or absent rating is kept as missing;
// anything other than an integer is an error.
inline std::vector<SheetRating> parse_sheet(std::string_view text) {
  std::vector<SheetRating> out;
  std::size_t line_no = 0;
  for (const auto& line : ingest::split_lines(text)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SheetRating r{j.at("blind_id").get<std::string>(), std::nullopt};
      const auto it = j.find("rating");
      if (it != j.end() && !it->is_null()) {
        if (!it->is_number_integer()) {
          throw DataError("sheet line " + std::to_string(line_no) + ": rating must be an integer");
        }
        r.rating = it->get<int>();
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("sheet line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

struct RatingCell {
  long sum = 0;
  std::size_t count = 0;
  double mean() const { return count ? static_cast<double>(sum) / static_cast<double>(count) : 0.0; }
};

using RatingGrid = std::map<std::pair<std::string, std::string>, RatingCell>;  // (task, model)

// Unblinds ratings through the key and averages per (task, model). Every
// blind_id needs exactly key.raters ratings in range.
inline RatingGrid aggregate_ratings(const std::vector<SheetRating>& rated, const ReviewKey& key) {
  std::map<std::string, std::size_t> filled;
  std::set<std::string> missing;
  RatingGrid grid;
  for (const auto& r : rated) {
    const auto it = key.entries.find(r.blind_id);
    if (it == key.entries.end()) throw DataError("unknown blind_id '" + r.blind_id + "'");
    if (!r.rating) {
      missing.insert(r.blind_id);
      continue;
    }
    if (*r.rating < kMinRating || *r.rating > kMaxRating) {
      throw DataError("rating " + std::to_string(*r.rating) + " for '" + r.blind_id +
                      "' is outside 1-5");
    }
    ++filled[r.blind_id];
    auto& cell = grid[{it->second.task_id, it->second.model_id}];
    cell.sum += *r.rating;
    ++cell.count;
  }
  for (const auto& [id, entry] : key.entries) {
    const auto it = filled.find(id);
    if (it == filled.end() || it->second < key.raters) missing.insert(id);
    if (it != filled.end() && it->second > key.raters) {
      throw DataError("blind_id '" + id + "' has more ratings than raters");
    }
  }
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw DataError("missing ratings for blind_ids: " + ids);
  }
  return grid;
}

// Tasks x models table of mean ratings at 2 decimals.
inline std::string grid_tsv(const RatingGrid& grid) {
  std::set<std::string> tasks, models;
  for (const auto& [k, cell] : grid) {
    tasks.insert(k.first);
    models.insert(k.second);
  }
  std::string out = "task";
  for (const auto& m : models) out += "\t" + m;
  out += "\n";
  for (const auto& t : tasks) {
    out += t;
    for (const auto& m : models) {
      const auto it = grid.find({t, m});
      out += "\t" + (it == grid.end() ? std::string("-") : eval::fixed(it->second.mean(), 2));
    }
    out += "\n";
  }
  return out;
}

}  // namespace amforge::review
