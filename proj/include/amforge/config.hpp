#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "amforge/corrupt.hpp"
#include "amforge/error.hpp"
#include "amforge/eval.hpp"
#include "amforge/forge.hpp"
#include "amforge/ingest.hpp"
#include "amforge/template.hpp"

namespace amforge {

enum class Derive { None, Expansion, Completion, SpellCorrection };

inline Derive parse_derive(std::string_view s) {
  if (s == "none") return Derive::None;
  if (s == "expansion") return Derive::Expansion;
  if (s == "completion") return Derive::Completion;
  if (s == "spell-correction") return Derive::SpellCorrection;
  throw ValidationError("unknown derive mode '" + std::string(s) + "'");
}

struct TaskConfig {
  std::string id;
  ingest::SourceFormat format = ingest::SourceFormat::KeyedJsonl;
  std::map<Split, std::vector<std::filesystem::path>> splits;
  std::map<std::string, std::string> field_map;
  Derive derive = Derive::None;
  std::map<std::string, std::string> relabel;  // applied to the label field after ingestion
  std::string none_marker = std::string(ingest::kDefaultNoneMarker);
  std::filesystem::path templates;
  Binding binding;
  std::size_t cap = kDefaultCap;
  std::optional<std::string> eval_template;
  CorruptionSpec corruption;
  double corrupt_fraction = kDefaultCorruptFraction;
  std::optional<eval::TaskEvalConfig> eval;

  ingest::SourceSpec source(Split split) const {
    return ingest::SourceSpec{id, format, splits.at(split), field_map};
  }
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  unsigned workers = 1;
  std::string preamble = std::string(kDefaultPreamble);
  std::optional<std::filesystem::path> normalization_table;
  std::vector<TaskConfig> tasks;

  const TaskConfig* find(std::string_view id) const {
    for (const auto& t : tasks) {
      if (t.id == id) return &t;
    }
    return nullptr;
  }
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

inline std::vector<std::filesystem::path> split_paths(const nlohmann::json& j,
                                                      ingest::SourceFormat format,
                                                      const std::filesystem::path& base) {
  std::vector<std::filesystem::path> out;
  if (format == ingest::SourceFormat::ParallelPair) {
    out.push_back(resolve(base, j.at("source").get<std::string>()));
    out.push_back(resolve(base, j.at("target").get<std::string>()));
  } else if (j.is_array()) {
    for (const auto& p : j) out.push_back(resolve(base, p.get<std::string>()));
  } else {
    out.push_back(resolve(base, j.get<std::string>()));
  }
  return out;
}

inline TaskConfig parse_task(const nlohmann::json& j, const std::filesystem::path& base) {
  TaskConfig t;
  t.id = j.at("id").get<std::string>();
  if (t.id.empty()) throw ValidationError("task with an empty id");
  t.format = ingest::parse_format(j.at("format").get<std::string>());
  for (const auto& [name, paths] : j.at("splits").items()) {
    t.splits[parse_split(name)] = split_paths(paths, t.format, base);
  }
  if (t.splits.empty()) throw ValidationError("task '" + t.id + "': no splits");
  t.field_map = get_or<std::map<std::string, std::string>>(j, "field_map", {});
  t.derive = parse_derive(get_or<std::string>(j, "derive", "none"));
  t.relabel = get_or<std::map<std::string, std::string>>(j, "relabel", {});
  t.none_marker = get_or<std::string>(j, "none_marker", t.none_marker);
  t.templates = resolve(base, j.at("templates").get<std::string>());
  t.cap = get_or<std::size_t>(j, "cap", kDefaultCap);
  if (j.contains("eval_template")) t.eval_template = j.at("eval_template").get<std::string>();

  if (t.derive == Derive::SpellCorrection) {
    t.binding = spell_correction_binding();
  } else {
    const auto& b = j.at("binding");
    t.binding.output = b.at("output").get<std::string>();
    if (b.contains("input") && !b.at("input").is_null()) {
      t.binding.input = b.at("input").get<std::string>();
    }
  }
  if (!is_placeholder(t.binding.output)) {
    throw ValidationError("task '" + t.id + "': binding output '" + t.binding.output +
                          "' is not a field");
  }
  if (t.binding.input && !is_placeholder(*t.binding.input)) {
    throw ValidationError("task '" + t.id + "': binding input '" + *t.binding.input +
                          "' is not a field");
  }

  if (const auto it = j.find("corruption"); it != j.end()) {
    for (const auto& op : it->at("ops")) t.corruption.ops.insert(parse_corrupt_op(op.get<std::string>()));
    t.corruption.rate = it->at("rate").get<double>();
    t.corrupt_fraction = get_or<double>(*it, "fraction", kDefaultCorruptFraction);
    t.corruption.validate();
    if (!(t.corrupt_fraction >= 0.0 && t.corrupt_fraction <= 1.0)) {
      throw ValidationError("task '" + t.id + "': corruption fraction must lie in [0, 1]");
    }
  } else if (t.derive == Derive::SpellCorrection) {
    throw ValidationError("task '" + t.id + "': spell-correction needs a corruption block");
  }
  if (t.derive == Derive::Completion && t.format != ingest::SourceFormat::PlainTextBlocks) {
    throw ValidationError("task '" + t.id + "': completion derivation needs plain-text-blocks");
  }

  if (const auto it = j.find("eval"); it != j.end()) {
    eval::TaskEvalConfig e;
    e.task_id = t.id;
    e.metrics = it->at("metrics").get<std::vector<std::string>>();
    e.normalize = get_or<bool>(*it, "normalize", true);
    if (it->contains("limit")) e.limit = it->at("limit").get<std::size_t>();
    if (it->contains("labels")) {
      metrics::LabelSet ls;
      ls.task_id = t.id;
      ls.labels = it->at("labels").get<std::vector<std::string>>();
      ls.aliases = get_or<std::map<std::string, std::string>>(*it, "aliases", {});
      e.label_set = std::move(ls);
    }
    t.eval = std::move(e);
  }
  return t;
}

}  // namespace detail

// Parses a run config. Relative paths resolve against `base` (normally the
// config file's directory).
inline RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base) {
  RunConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    cfg.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    cfg.output_dir = detail::resolve(base, detail::get_or<std::string>(j, "output_dir", "out"));
    cfg.workers = detail::get_or<unsigned>(j, "workers", 1);
    cfg.preamble = detail::get_or<std::string>(j, "preamble", cfg.preamble);
    if (j.contains("normalization_table")) {
      cfg.normalization_table = detail::resolve(base, j.at("normalization_table").get<std::string>());
    }
    for (const auto& t : j.at("tasks")) cfg.tasks.push_back(detail::parse_task(t, base));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  std::set<std::string> ids;
  for (const auto& t : cfg.tasks) {
    if (!ids.insert(t.id).second) throw ValidationError("duplicate task id '" + t.id + "'");
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ingest::read_file(path);
  } catch (const DataError&) {
    throw ValidationError("cannot read config " + path.string());
  }
  return parse_run_config(text, path.parent_path());
}

inline std::vector<InstructionTemplate> load_templates(const TaskConfig& task) {
  std::string raw;
  try {
    raw = ingest::read_file(task.templates);
  } catch (const DataError&) {
    throw ValidationError("task '" + task.id + "': cannot read template file " +
                          task.templates.string());
  }
  auto templates = parse_templates(raw, task.id);
  if (templates.empty()) {
    throw ValidationError("task '" + task.id + "': template file has no templates for this task");
  }
  return templates;
}

// Checks that every referenced file exists and that templates parse.
inline void validate_files(const RunConfig& cfg, const std::vector<const TaskConfig*>& tasks) {
  namespace fs = std::filesystem;
  if (cfg.workers < 1) throw ValidationError("workers must be >= 1");
  if (cfg.preamble.empty()) throw ValidationError("preamble must not be empty");
  if (cfg.normalization_table && !fs::exists(*cfg.normalization_table)) {
    throw ValidationError("normalization table not found: " + cfg.normalization_table->string());
  }
  for (const auto* t : tasks) {
    if (t->cap < 1) throw ValidationError("task '" + t->id + "': cap must be >= 1");
    const auto templates = load_templates(*t);
    if (t->eval_template) {
      const bool found = std::any_of(templates.begin(), templates.end(), [&](const auto& x) {
        return x.template_id == *t->eval_template;
      });
      if (!found) {
        throw ValidationError("task '" + t->id + "': eval_template '" + *t->eval_template +
                              "' is not defined");
      }
    }
    for (const auto& [split, paths] : t->splits) {
      for (const auto& p : paths) {
        if (!fs::exists(p)) {
          throw ValidationError("task '" + t->id + "' " + std::string(to_string(split)) +
                                ": missing file " + p.string());
        }
      }
    }
    if (t->eval) t->eval->validate();
  }
}

}  // namespace amforge
