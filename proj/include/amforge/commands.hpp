#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amforge/config.hpp"
#include "amforge/corrupt.hpp"
#include "amforge/error.hpp"
#include "amforge/eval.hpp"
#include "amforge/forge.hpp"
#include "amforge/ingest.hpp"
#include "amforge/review.hpp"

namespace amforge::cmd {

namespace fs = std::filesystem;

inline void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

inline std::vector<const TaskConfig*> select_tasks(const RunConfig& cfg,
                                                   const std::vector<std::string>& filter) {
  std::vector<const TaskConfig*> out;
  if (filter.empty()) {
    for (const auto& t : cfg.tasks) out.push_back(&t);
    return out;
  }
  for (const auto& id : filter) {
    const auto* t = cfg.find(id);
    if (!t) throw ValidationError("unknown task '" + id + "'");
    out.push_back(t);
  }
  return out;
}

inline fs::path dataset_path(const RunConfig& cfg, std::string_view task, Split split) {
  return cfg.output_dir / std::string(task) / (std::string(to_string(split)) + ".jsonl");
}

// Reads one split of a task and applies relabelling and record derivation
// (spell-correction corruption happens later, in the forge).
inline std::vector<TaskRecord> ingest_split(const TaskConfig& task, Split split) {
  using ingest::SourceFormat;
  const auto spec = task.source(split);
  std::vector<TaskRecord> records;
  switch (task.format) {
    case SourceFormat::ClassificationTsv: {
      bool has_label = spec.field_map.empty();
      for (const auto& kv : spec.field_map) has_label = has_label || kv.second == "label";
      records = has_label ? ingest::read_classification(spec) : ingest::read_tsv(spec);
      break;
    }
    case SourceFormat::KeyedJsonl:
      records = ingest::read_keyed_jsonl(spec);
      break;
    case SourceFormat::ConllNer:
      records = ingest::read_conll_person_names(spec, task.none_marker);
      break;
    case SourceFormat::ParallelPair:
      records = ingest::read_parallel(spec);
      break;
    case SourceFormat::PlainTextBlocks:
      records = ingest::read_text_blocks(spec, task.derive == Derive::Completion
                                                   ? ingest::BlockMode::Completion
                                                   : ingest::BlockMode::Document);
      break;
  }
  if (!task.relabel.empty()) {
    for (auto& r : records) {
      const auto it = r.fields.find("label");
      if (it == r.fields.end()) continue;
      const auto m = task.relabel.find(it->second);
      if (m != task.relabel.end()) it->second = m->second;
    }
  }
  if (task.derive == Derive::Expansion) records = ingest::derive_expansion_records(records);
  return records;
}

struct TaskStatsRow {
  std::string task;
  std::optional<SplitCounts> source;
  std::size_t templates = 0;
  SplitCounts generated;
};

// Table with source counts, template count and generated counts per task,
// plus a Total row over the generated columns.
inline std::string stats_table(const std::vector<TaskStatsRow>& rows) {
  std::string out = "task\tsource_train\tsource_val\tsource_test\ttemplates\ttrain\tval\ttest\n";
  SplitCounts total;
  auto cell = [](const std::optional<SplitCounts>& c, Split s) {
    return c ? std::to_string((*c)[s]) : std::string("-");
  };
  for (const auto& r : rows) {
    out += r.task;
    for (auto s : kAllSplits) out += "\t" + cell(r.source, s);
    out += "\t" + std::to_string(r.templates);
    for (auto s : kAllSplits) {
      out += "\t" + std::to_string(r.generated[s]);
      total[s] += r.generated[s];
    }
    out += "\n";
  }
  out += "Total\t\t\t\t";
  for (auto s : kAllSplits) out += "\t" + std::to_string(total[s]);
  out += "\n";
  return out;
}

inline std::uint64_t split_seed(std::uint64_t seed, std::string_view task, Split split,
                                std::uint64_t salt = 0) {
  return derive_key(seed, {fnv1a64(task), static_cast<std::uint64_t>(split), salt});
}

// Validates everything first, then writes <out>/<task>/<split>.jsonl for each
// selected task and <out>/stats.tsv.
inline std::vector<TaskStatsRow> cmd_forge(const RunConfig& cfg,
                                           const std::vector<std::string>& filter = {}) {
  const auto tasks = select_tasks(cfg, filter);
  validate_files(cfg, tasks);

  const ForgeOptions opts{cfg.preamble, cfg.workers};
  std::vector<TaskStatsRow> rows;
  for (const auto* task : tasks) {
    try {
      const auto templates = load_templates(*task);
      std::string fixed = task->eval_template.value_or("");
      if (fixed.empty()) {
        fixed = std::min_element(templates.begin(), templates.end(), [](const auto& a, const auto& b) {
                  return a.template_id < b.template_id;
                })->template_id;
      }
      TaskStatsRow row{task->id, SplitCounts{}, templates.size(), {}};
      for (const auto& [split, paths] : task->splits) {
        const auto records = ingest_split(*task, split);
        (*row.source)[split] = records.size();
        ForgePlan plan{task->id, task->cap, split_seed(cfg.seed, task->id, split), split,
                       split == Split::Train ? std::nullopt : std::optional<std::string>(fixed)};
        std::vector<InstructionExample> examples;
        if (task->derive == Derive::SpellCorrection) {
          CorruptionSpec spec = task->corruption;
          spec.seed = split_seed(cfg.seed, task->id, split, 1);
          examples = forge_spell_correction(records, spec, templates, plan, task->corrupt_fraction, opts);
        } else {
          examples = forge_split(records, templates, plan, task->binding, opts);
        }
        row.generated[split] = examples.size();
        write_file(dataset_path(cfg, task->id, split), to_jsonl(examples));
      }
      rows.push_back(std::move(row));
    } catch (const ValidationError& e) {
      throw ValidationError("task '" + task->id + "': " + e.what());
    } catch (const DataError& e) {
      throw DataError("task '" + task->id + "': " + e.what());
    }
  }
  write_file(cfg.output_dir / "stats.tsv", stats_table(rows));
  return rows;
}

// Counts the dataset files already written under the output directory.
inline std::vector<TaskStatsRow> cmd_stats(const RunConfig& cfg,
                                           const std::vector<std::string>& filter = {}) {
  std::vector<TaskStatsRow> rows;
  for (const auto* task : select_tasks(cfg, filter)) {
    TaskStatsRow row{task->id, std::nullopt, load_templates(*task).size(), {}};
    for (auto split : kAllSplits) {
      const auto path = dataset_path(cfg, task->id, split);
      if (fs::exists(path)) row.generated[split] = examples_from_jsonl(ingest::read_file(path)).size();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct EvalOutcome {
  std::vector<eval::MetricReport> reports;
  std::size_t failures = 0;
};

inline std::shared_ptr<const ethiopic::NormalizationTable> load_table(const RunConfig& cfg) {
  if (!cfg.normalization_table) return nullptr;
  return std::make_shared<const ethiopic::NormalizationTable>(
      ethiopic::NormalizationTable::load(cfg.normalization_table->string()));
}

// Scores <predictions_dir>/<task>.txt against the forged gold split of every
// selected task that has an eval block. Failing tasks are reported with an
// error marker; the rest are still scored. Writes
// <out>/report_<model>.json and .tsv.
inline EvalOutcome cmd_eval(const RunConfig& cfg, const fs::path& predictions_dir,
                            const std::string& model_id,
                            const std::vector<std::string>& filter = {},
                            std::optional<std::size_t> limit_override = std::nullopt,
                            Split gold_split = Split::Test) {
  if (model_id.empty()) throw ValidationError("model id must not be empty");
  const auto table = load_table(cfg);
  EvalOutcome outcome;
  for (const auto* task : select_tasks(cfg, filter)) {
    if (!task->eval) continue;
    auto config = *task->eval;
    config.table = table;
    if (limit_override) config.limit = limit_override;
    config.validate();
    try {
      outcome.reports.push_back(eval::evaluate_task(config, predictions_dir / (task->id + ".txt"),
                                                    dataset_path(cfg, task->id, gold_split),
                                                    model_id));
    } catch (const DataError& e) {
      eval::MetricReport failed;
      failed.task_id = task->id;
      failed.model_id = model_id;
      failed.error = e.what();
      outcome.reports.push_back(std::move(failed));
      ++outcome.failures;
    }
  }
  if (outcome.reports.empty()) throw ValidationError("no task has an eval block");
  const auto stem = cfg.output_dir / ("report_" + model_id);
  write_file(stem.string() + ".json",
             eval::write_report(outcome.reports, eval::ReportFormat::Structured));
  write_file(stem.string() + ".tsv",
             eval::write_report(outcome.reports, eval::ReportFormat::Delimited));
  return outcome;
}

// Line-by-line corruption; line i uses substream (spec.seed, i). Blank
// lines pass through, and rate 0 copies the file byte for byte.
inline std::size_t cmd_corrupt(const fs::path& in, const fs::path& out, const CorruptionSpec& spec) {
  spec.validate();
  const auto text = ingest::read_file(in);
  if (spec.rate == 0.0) {
    write_file(out, text);
    return 0;
  }
  std::string result;
  result.reserve(text.size() + text.size() / 4);
  std::size_t changed = 0;
  std::size_t start = 0;
  for (std::uint64_t line_no = 0; start < text.size(); ++line_no) {
    auto end = text.find('\n', start);
    const bool has_newline = end != std::string::npos;
    if (!has_newline) end = text.size();
    std::string_view line(text.data() + start, end - start);
    const bool cr = !line.empty() && line.back() == '\r';
    if (cr) line.remove_suffix(1);
    if (is_blank(line)) {
      result.append(line);
    } else {
      CorruptionSpec per_line = spec;
      per_line.seed = derive_key(spec.seed, {line_no});
      result += corrupt_text(line, per_line);
      ++changed;
    }
    if (cr) result.push_back('\r');
    if (has_newline) result.push_back('\n');
    start = end + 1;
  }
  write_file(out, result);
  return changed;
}

inline std::string review_prompt(const InstructionExample& e) {
  return e.input.empty() ? e.instruction : e.instruction + "\n\n" + e.input;
}

// Samples n items per selected task from <model_dir>/<task>.txt outputs,
// writing <out>/sheet_rater<k>.jsonl and the sealed key to `key_path`.
inline review::ReviewSample cmd_review_sample(const RunConfig& cfg,
                                              const std::map<std::string, fs::path>& model_dirs,
                                              std::size_t n, std::uint64_t seed, unsigned raters,
                                              const fs::path& out_dir, const fs::path& key_path,
                                              const std::vector<std::string>& filter = {}) {
  if (model_dirs.empty()) throw ValidationError("review sample needs at least one --model");
  review::ReviewSample all;
  for (const auto* task : select_tasks(cfg, filter)) {
    const auto gold = eval::read_gold(dataset_path(cfg, task->id, Split::Test));
    std::vector<std::string> prompts;
    for (const auto& e : gold) prompts.push_back(review_prompt(e));
    std::map<std::string, std::vector<std::string>> outputs;
    for (const auto& [model, dir] : model_dirs) {
      outputs[model] = eval::read_predictions(dir / (task->id + ".txt"));
    }
    review::merge(all, review::sample_for_review(task->id, prompts, outputs, n, seed, raters));
  }
  for (unsigned r = 0; r < raters; ++r) {
    write_file(out_dir / ("sheet_rater" + std::to_string(r + 1) + ".jsonl"),
               review::sheet_jsonl(all, r, seed));
  }
  write_file(key_path, review::key_json(all.key));
  return all;
}

// Reads every sheet_*.jsonl in `sheets_dir` and unblinds them with the key.
inline review::RatingGrid cmd_review_aggregate(const fs::path& sheets_dir, const fs::path& key_path) {
  std::vector<fs::path> sheets;
  for (const auto& e : fs::directory_iterator(sheets_dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("sheet_", 0) == 0 && e.path().extension() == ".jsonl") {
      sheets.push_back(e.path());
    }
  }
  if (sheets.empty()) throw DataError("no sheet_*.jsonl files in " + sheets_dir.string());
  std::sort(sheets.begin(), sheets.end());
  std::vector<review::SheetRating> rated;
  for (const auto& s : sheets) {
    auto part = review::parse_sheet(ingest::read_file(s));
    rated.insert(rated.end(), part.begin(), part.end());
  }
  return review::aggregate_ratings(rated, review::parse_key(ingest::read_file(key_path)));
}

}  // namespace amforge::cmd
