#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "amforge/error.hpp"
#include "amforge/forge.hpp"
#include "amforge/ingest.hpp"
#include "amforge/metrics.hpp"

namespace amforge::eval {

inline constexpr std::string_view kMetricNames[] = {"weighted-f1", "rouge1", "rouge2", "rougeL",
                                                    "bleu",        "chrf++", "wer",    "accuracy"};

inline bool is_metric(std::string_view name) {
  return std::find(std::begin(kMetricNames), std::end(kMetricNames), name) !=
         std::end(kMetricNames);
}

struct TaskEvalConfig {
  std::string task_id;
  std::vector<std::string> metrics;
  std::optional<metrics::LabelSet> label_set;
  std::optional<std::size_t> limit;
  bool normalize = true;
  std::shared_ptr<const ethiopic::NormalizationTable> table;  // null: built-in table

  metrics::Preprocess preprocess() const { return metrics::Preprocess{normalize, table.get()}; }

  void validate() const {
    if (metrics.empty()) throw ValidationError("task '" + task_id + "': no metrics configured");
    for (const auto& m : metrics) {
      if (!is_metric(m)) throw ValidationError("task '" + task_id + "': unknown metric '" + m + "'");
    }
    const bool classification =
        std::find(metrics.begin(), metrics.end(), "weighted-f1") != metrics.end();
    if (classification && !label_set) {
      throw ValidationError("task '" + task_id + "': weighted-f1 needs a label set");
    }
    if (label_set) label_set->validate(preprocess());
    if (limit && *limit < 1) throw ValidationError("task '" + task_id + "': limit must be >= 1");
  }
};

struct MetricReport {
  std::string task_id;
  std::string model_id;
  std::map<std::string, double> metrics;
  std::size_t items = 0;
  std::optional<std::size_t> unusable;  // classification tasks only
  std::map<std::string, std::string> config;
  std::optional<std::string> error;  // set when the task could not be scored
};

// One prediction per line; the two-character sequences "\n" and "\\" inside
// a line stand for a newline and a backslash.
inline std::string unescape_prediction(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && i + 1 < line.size()) {
      if (line[i + 1] == 'n') {
        out.push_back('\n');
        ++i;
        continue;
      }
      if (line[i + 1] == '\\') {
        out.push_back('\\');
        ++i;
        continue;
      }
    }
    out.push_back(line[i]);
  }
  return out;
}

inline std::string escape_prediction(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else if (c != '\r') {
      out.push_back(c);
    }
  }
  return out;
}

inline std::vector<std::string> parse_predictions(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& line : ingest::split_lines(text)) out.push_back(unescape_prediction(line));
  return out;
}

inline std::vector<std::string> read_predictions(const std::filesystem::path& path) {
  return parse_predictions(ingest::read_file(path));
}

inline std::vector<InstructionExample> read_gold(const std::filesystem::path& path) {
  return examples_from_jsonl(ingest::read_file(path));
}

inline std::vector<std::string> gold_outputs(const std::vector<InstructionExample>& gold) {
  std::vector<std::string> out;
  out.reserve(gold.size());
  for (const auto& e : gold) out.push_back(e.output);
  return out;
}

namespace detail {

inline metrics::RougeVariant rouge_variant(std::string_view name) {
  if (name == "rouge1") return metrics::RougeVariant::One;
  if (name == "rouge2") return metrics::RougeVariant::Two;
  return metrics::RougeVariant::L;
}

// Maps a gold output to its canonical label (gold must be a label or alias).
inline std::string canonical_gold(const std::string& gold, const metrics::LabelSet& labels,
                                  const metrics::Preprocess& pre) {
  const auto norm = pre.prepare(gold);
  for (const auto& [surface, label] : labels.surfaces(pre)) {
    if (surface == norm) return label;
  }
  throw DataError("gold label '" + gold + "' is not in the label set of '" + labels.task_id + "'");
}

}  // namespace detail

// Scores aligned prediction/gold lists. `limit` truncates both sides first.
inline MetricReport evaluate_task(const TaskEvalConfig& config, std::vector<std::string> predictions,
                                  std::vector<std::string> gold, std::string_view model_id) {
  config.validate();
  if (config.limit) {
    if (predictions.size() > *config.limit) predictions.resize(*config.limit);
    if (gold.size() > *config.limit) gold.resize(*config.limit);
  }
  if (predictions.size() != gold.size()) {
    throw DataError("task '" + config.task_id + "': " + std::to_string(predictions.size()) +
                    " predictions vs " + std::to_string(gold.size()) + " gold items");
  }
  if (gold.empty()) throw DataError("task '" + config.task_id + "': no items to evaluate");

  const auto pre = config.preprocess();
  MetricReport report;
  report.task_id = config.task_id;
  report.model_id = std::string(model_id);
  report.items = gold.size();
  report.config = {{"normalize", config.normalize ? "true" : "false"},
                   {"tokenizer", "ethiopic-word"}};
  if (config.limit) report.config["limit"] = std::to_string(*config.limit);

  std::vector<metrics::Tokens> cand_tokens, ref_tokens;
  auto tokenized = [&] {
    if (cand_tokens.empty()) {
      for (std::size_t i = 0; i < gold.size(); ++i) {
        cand_tokens.push_back(pre.tokens(predictions[i]));
        ref_tokens.push_back(pre.tokens(gold[i]));
      }
    }
  };

  if (config.label_set) {
    std::vector<metrics::ClassifiedOutput> classified;
    std::vector<std::string> gold_labels;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      classified.push_back(metrics::classify_output(predictions[i], *config.label_set, pre));
      gold_labels.push_back(detail::canonical_gold(gold[i], *config.label_set, pre));
    }
    const auto f1 = metrics::weighted_f1(classified, gold_labels);
    report.unusable = f1.unusable;
    if (std::find(config.metrics.begin(), config.metrics.end(), "weighted-f1") !=
        config.metrics.end()) {
      report.metrics["weighted-f1"] = f1.weighted_f1;
    }
  }

  for (const auto& name : config.metrics) {
    if (name == "weighted-f1") continue;
    if (name == "rouge1" || name == "rouge2" || name == "rougeL") {
      tokenized();
      double sum = 0.0;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        sum += metrics::rouge_tokens(cand_tokens[i], ref_tokens[i], detail::rouge_variant(name)).f;
      }
      report.metrics[name] = sum / static_cast<double>(gold.size());
    } else if (name == "bleu") {
      tokenized();
      metrics::BleuStats stats;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        stats += metrics::bleu_stats(cand_tokens[i], ref_tokens[i]);
      }
      report.metrics[name] = metrics::bleu_from_stats(stats);
      report.config["bleu"] = std::string(metrics::kBleuSignature);
    } else if (name == "chrf++") {
      report.metrics[name] = metrics::chrf_pp(predictions, gold, pre);
      report.config["chrf++"] = std::string(metrics::kChrfSignature);
    } else if (name == "wer") {
      // Corpus WER: total word edits over total reference words.
      tokenized();
      std::size_t edits = 0, words = 0;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        edits += metrics::levenshtein(cand_tokens[i], ref_tokens[i]);
        words += ref_tokens[i].size();
      }
      if (words == 0) throw DataError("task '" + config.task_id + "': wer needs reference words");
      report.metrics[name] = static_cast<double>(edits) / static_cast<double>(words);
    } else if (name == "accuracy") {
      report.metrics[name] = metrics::exact_accuracy(predictions, gold, pre);
    }
  }
  return report;
}

inline MetricReport evaluate_task(const TaskEvalConfig& config,
                                  const std::filesystem::path& predictions_file,
                                  const std::filesystem::path& gold_file, std::string_view model_id) {
  return evaluate_task(config, read_predictions(predictions_file),
                       gold_outputs(read_gold(gold_file)), model_id);
}

// ------------------------------------------------------------- reports --

enum class ReportFormat { Structured, Delimited };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "structured" || s == "json") return ReportFormat::Structured;
  if (s == "delimited" || s == "tsv") return ReportFormat::Delimited;
  throw ValidationError("unknown report format '" + std::string(s) + "'");
}

inline double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = round_to(v, 4);
  nlohmann::json j{{"task", r.task_id},
                   {"model", r.model_id},
                   {"metrics", metrics},
                   {"items", r.items},
                   {"unusable", r.unusable ? nlohmann::json(*r.unusable) : nlohmann::json()},
                   {"config", r.config}};
  if (r.error) j["error"] = *r.error;
  return j;
}

// Deterministic: reports sorted by (task, model), keys sorted, metric values
// at 4 decimals.
inline std::string write_report(std::vector<MetricReport> reports, ReportFormat format) {
  if (reports.empty()) throw ValidationError("write_report: no reports");
  std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
    return std::tie(a.task_id, a.model_id) < std::tie(b.task_id, b.model_id);
  });
  if (format == ReportFormat::Structured) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr.dump(2) + "\n";
  }
  std::set<std::string> names;
  for (const auto& r : reports) {
    for (const auto& kv : r.metrics) names.insert(kv.first);
  }
  std::string out = "task\tmodel\titems\tunusable";
  for (const auto& n : names) out += "\t" + n;
  out += "\tstatus\n";
  for (const auto& r : reports) {
    out += r.task_id + "\t" + r.model_id + "\t" + std::to_string(r.items) + "\t" +
           (r.unusable ? std::to_string(*r.unusable) : "-");
    for (const auto& n : names) {
      const auto it = r.metrics.find(n);
      out += "\t" + (it == r.metrics.end() ? std::string("-") : fixed(it->second, 4));
    }
    out += "\t" + (r.error ? "FAILED: " + *r.error : std::string("ok")) + "\n";
  }
  return out;
}

// Tasks x models grid with "rouge1/rouge2/rougeL" F-scores (x100) per cell.
inline std::string rouge_grid(const std::vector<MetricReport>& reports) {
  std::set<std::string> tasks, models;
  std::map<std::pair<std::string, std::string>, const MetricReport*> cells;
  for (const auto& r : reports) {
    if (!r.metrics.count("rouge1") && !r.metrics.count("rouge2") && !r.metrics.count("rougeL")) {
      continue;
    }
    tasks.insert(r.task_id);
    models.insert(r.model_id);
    cells[{r.task_id, r.model_id}] = &r;
  }
  std::string out = "task";
  for (const auto& m : models) out += "\t" + m;
  out += "\n";
  auto value = [](const MetricReport& r, const char* key) {
    const auto it = r.metrics.find(key);
    return it == r.metrics.end() ? std::string("-") : fixed(100.0 * it->second, 2);
  };
  for (const auto& t : tasks) {
    out += t;
    for (const auto& m : models) {
      const auto it = cells.find({t, m});
      out += "\t";
      if (it == cells.end()) {
        out += "-";
      } else {
        const auto& r = *it->second;
        out += value(r, "rouge1") + "/" + value(r, "rouge2") + "/" + value(r, "rougeL");
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace amforge::eval
