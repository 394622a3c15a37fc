#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "amforge/corrupt.hpp"
#include "amforge/error.hpp"
#include "amforge/parallel.hpp"
#include "amforge/record.hpp"
#include "amforge/rng.hpp"
#include "amforge/template.hpp"

namespace amforge {

enum class Split { Train, Val, Test };

inline constexpr Split kAllSplits[] = {Split::Train, Split::Val, Split::Test};

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  for (auto split : kAllSplits) {
    if (to_string(split) == s) return split;
  }
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

struct InstructionExample {
  std::string task_id;
  std::string template_id;
  Split split = Split::Train;
  std::string instruction;
  std::string input;
  std::string output;
  LangMode lang_mode = LangMode::Amharic;
  std::size_t provenance = 0;  // source_index of the originating record

  friend bool operator==(const InstructionExample&, const InstructionExample&) = default;
};

inline nlohmann::json to_json(const InstructionExample& e) {
  return nlohmann::json{{"task", e.task_id},
                        {"template_id", e.template_id},
                        {"split", to_string(e.split)},
                        {"instruction", e.instruction},
                        {"input", e.input},
                        {"output", e.output},
                        {"lang_mode", to_string(e.lang_mode)},
                        {"provenance", e.provenance}};
}

inline InstructionExample example_from_json(const nlohmann::json& j) {
  try {
    InstructionExample e;
    e.task_id = j.at("task").get<std::string>();
    e.template_id = j.at("template_id").get<std::string>();
    e.split = parse_split(j.at("split").get<std::string>());
    e.instruction = j.at("instruction").get<std::string>();
    e.input = j.at("input").get<std::string>();
    e.output = j.at("output").get<std::string>();
    e.lang_mode = parse_lang_mode(j.at("lang_mode").get<std::string>());
    e.provenance = j.at("provenance").get<std::size_t>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed instruction example: ") + ex.what());
  } catch (const ValidationError& ex) {
    throw DataError(std::string("malformed instruction example: ") + ex.what());
  }
}

// One JSON object per line, keys sorted.
inline std::string to_jsonl(const std::vector<InstructionExample>& examples) {
  std::string out;
  for (const auto& e : examples) {
    try {
      out += to_json(e).dump();
    } catch (const nlohmann::json::type_error& ex) {
      throw DataError("example from record " + std::to_string(e.provenance) + " of task '" +
                      e.task_id + "' is not valid UTF-8: " + ex.what());
    }
    out.push_back('\n');
  }
  return out;
}

inline std::vector<InstructionExample> examples_from_jsonl(std::string_view text) {
  std::vector<InstructionExample> out;
  std::size_t line_no = 0;
  for (const auto& line : ingest::split_lines(text)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      out.push_back(example_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline constexpr std::size_t kDefaultCap = 10'000;

struct ForgePlan {
  std::string task_id;
  std::size_t cap = kDefaultCap;
  std::uint64_t seed = 0;
  Split split = Split::Train;
  std::optional<std::string> fixed_template_id;  // required for val/test only

  void validate() const {
    if (cap < 1) throw ValidationError("task '" + task_id + "': cap must be >= 1");
    if (split == Split::Train && fixed_template_id) {
      throw ValidationError("task '" + task_id + "': train split takes no fixed template");
    }
    if (split != Split::Train && !fixed_template_id) {
      throw ValidationError("task '" + task_id + "': " + std::string(to_string(split)) +
                            " split needs a fixed template");
    }
  }
};

struct ForgeOptions {
  std::string preamble = std::string(kDefaultPreamble);  // for code-mixed templates
  unsigned workers = 1;
};

namespace detail {

struct PairKey {
  std::uint64_t priority;
  std::size_t record;    // position in source_index order
  std::size_t tmpl;      // position in template_id order

  friend bool operator<(const PairKey& a, const PairKey& b) {
    return std::tie(a.priority, a.record, a.tmpl) < std::tie(b.priority, b.record, b.tmpl);
  }
};

inline InstructionExample make_example(const InstructionTemplate& t, const TaskRecord& r,
                                       const Binding& binding, Split split,
                                       std::string_view task_id, const ForgeOptions& opts) {
  auto prompt = render(t, r, binding);
  if (t.lang_mode == LangMode::CodeMixed) prompt = code_mix(std::move(prompt), opts.preamble);
  if (is_blank(prompt.output)) {
    throw DataError("record " + std::to_string(r.source_index) + " rendered an empty output");
  }
  return InstructionExample{std::string(task_id), t.template_id,        split,
                            std::move(prompt.instruction), std::move(prompt.input),
                            std::move(prompt.output), t.lang_mode,  r.source_index};
}

}  // namespace detail

// Train: the (record x template) cross product, or a uniform sample of `cap`
// pairs without replacement when it is larger. Each pair's inclusion is
// decided by a hash of (seed, source_index, template_id), so the sample does
// not depend on worker count. Val/test: one example per record, rendered
// with the fixed template. Output ordered by (source_index, template_id).
inline std::vector<InstructionExample> forge_split(std::vector<TaskRecord> records,
                                                   std::vector<InstructionTemplate> templates,
                                                   const ForgePlan& plan, const Binding& binding,
                                                   const ForgeOptions& opts = {}) {
  plan.validate();
  if (templates.empty()) {
    throw ValidationError("task '" + plan.task_id + "': no templates");
  }
  if (records.empty()) return {};

  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.source_index < b.source_index; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].source_index == records[i - 1].source_index) {
      throw DataError("task '" + plan.task_id + "': duplicate source_index " +
                      std::to_string(records[i].source_index));
    }
  }
  std::sort(templates.begin(), templates.end(),
            [](const auto& a, const auto& b) { return a.template_id < b.template_id; });

  std::vector<std::pair<std::size_t, std::size_t>> selected;  // (record, template)
  if (plan.split != Split::Train) {
    const auto it = std::find_if(templates.begin(), templates.end(), [&](const auto& t) {
      return t.template_id == *plan.fixed_template_id;
    });
    if (it == templates.end()) {
      throw ValidationError("task '" + plan.task_id + "': fixed template '" +
                            *plan.fixed_template_id + "' not found");
    }
    const auto t = static_cast<std::size_t>(it - templates.begin());
    selected.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) selected.emplace_back(r, t);
  } else if (records.size() * templates.size() <= plan.cap) {
    selected.reserve(records.size() * templates.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
      for (std::size_t t = 0; t < templates.size(); ++t) selected.emplace_back(r, t);
    }
  } else {
    std::vector<std::uint64_t> tmpl_keys;
    for (const auto& t : templates) tmpl_keys.push_back(fnv1a64(t.template_id));

    // Bottom-`cap` priorities, computed per chunk of records then merged.
    const unsigned chunks = std::max(1u, opts.workers);
    std::vector<std::vector<detail::PairKey>> partial(chunks);
    const std::size_t per_chunk = (records.size() + chunks - 1) / chunks;
    parallel_for(chunks, opts.workers, [&](std::size_t c) {
      std::priority_queue<detail::PairKey> heap;  // max-heap of the smallest keys
      const std::size_t end = std::min(records.size(), (c + 1) * per_chunk);
      for (std::size_t r = c * per_chunk; r < end; ++r) {
        for (std::size_t t = 0; t < templates.size(); ++t) {
          const detail::PairKey key{
              derive_key(plan.seed, {records[r].source_index, tmpl_keys[t]}), r, t};
          if (heap.size() < plan.cap) {
            heap.push(key);
          } else if (key < heap.top()) {
            heap.pop();
            heap.push(key);
          }
        }
      }
      auto& dst = partial[c];
      dst.reserve(heap.size());
      for (; !heap.empty(); heap.pop()) dst.push_back(heap.top());
    });
    std::vector<detail::PairKey> merged;
    for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
    std::nth_element(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(plan.cap - 1),
                     merged.end());
    merged.resize(plan.cap);
    selected.reserve(plan.cap);
    for (const auto& k : merged) selected.emplace_back(k.record, k.tmpl);
    std::sort(selected.begin(), selected.end());
  }

  std::vector<InstructionExample> out(selected.size());
  parallel_for(selected.size(), opts.workers, [&](std::size_t i) {
    const auto [r, t] = selected[i];
    out[i] = detail::make_example(templates[t], records[r], binding, plan.split, plan.task_id, opts);
  });
  return out;
}

inline constexpr double kDefaultCorruptFraction = 0.9;

// Builds {source: noisy text, target: clean text} records. A `fraction` of
// records (chosen per source_index from spec.seed) is corrupted; the rest
// are copied unchanged.
inline std::vector<TaskRecord> spell_correction_records(const std::vector<TaskRecord>& records,
                                                        const CorruptionSpec& spec,
                                                        double fraction) {
  spec.validate();
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("corruption fraction must lie in [0, 1]");
  }
  std::vector<TaskRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const std::string& clean = r.field("text");
    SplitMix64 pick(derive_key(spec.seed, {0x5E1EC7ULL, r.source_index}));
    std::string noisy = clean;
    if (spec.rate > 0.0 && pick.unit() < fraction) {
      CorruptionSpec per_record = spec;
      per_record.seed = derive_key(spec.seed, {r.source_index});
      noisy = corrupt_text(clean, per_record);
    }
    out.push_back(TaskRecord{r.task_id, {{"source", std::move(noisy)}, {"target", clean}},
                             r.source_index});
  }
  return out;
}

inline const Binding& spell_correction_binding() {
  static const Binding b{"target", "source"};
  return b;
}

// The noisy text is bound to the input and the clean original is always the
// output; capping and splitting follow forge_split.
inline std::vector<InstructionExample> forge_spell_correction(
    const std::vector<TaskRecord>& records, const CorruptionSpec& spec,
    std::vector<InstructionTemplate> templates, const ForgePlan& plan,
    double fraction = kDefaultCorruptFraction, const ForgeOptions& opts = {}) {
  return forge_split(spell_correction_records(records, spec, fraction), std::move(templates), plan,
                     spell_correction_binding(), opts);
}

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;

  std::size_t& operator[](Split s) {
    return s == Split::Train ? train : (s == Split::Val ? val : test);
  }
  std::size_t operator[](Split s) const {
    return s == Split::Train ? train : (s == Split::Val ? val : test);
  }
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

struct DatasetStats {
  std::map<std::string, SplitCounts> per_task;
  SplitCounts totals;
};

inline DatasetStats dataset_stats(const std::vector<InstructionExample>& examples) {
  DatasetStats stats;
  for (const auto& e : examples) {
    ++stats.per_task[e.task_id][e.split];
    ++stats.totals[e.split];
  }
  return stats;
}

}  // namespace amforge
