#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "amforge/error.hpp"
#include "amforge/record.hpp"

namespace amforge::ingest {

enum class SourceFormat { ClassificationTsv, KeyedJsonl, ConllNer, ParallelPair, PlainTextBlocks };

inline std::string_view to_string(SourceFormat f) {
  switch (f) {
    case SourceFormat::ClassificationTsv: return "classification-tsv";
    case SourceFormat::KeyedJsonl: return "keyed-jsonl";
    case SourceFormat::ConllNer: return "conll-ner";
    case SourceFormat::ParallelPair: return "parallel-pair";
    case SourceFormat::PlainTextBlocks: return "plain-text-blocks";
  }
  return "?";
}

inline SourceFormat parse_format(std::string_view s) {
  for (auto f : {SourceFormat::ClassificationTsv, SourceFormat::KeyedJsonl, SourceFormat::ConllNer,
                 SourceFormat::ParallelPair, SourceFormat::PlainTextBlocks}) {
    if (to_string(f) == s) return f;
  }
  throw ValidationError("unknown source format '" + std::string(s) + "'");
}

// Joins multiple PER spans in one sentence.
inline constexpr std::string_view kNameDelimiter = "፣ ";
// Default names value for sentences without a personal name.
inline constexpr std::string_view kDefaultNoneMarker =
    "ምንም የሰው ስም አልተገኘም";

struct SourceSpec {
  std::string task_id;
  SourceFormat format = SourceFormat::KeyedJsonl;
  std::vector<std::filesystem::path> paths;
  // Source column or key -> placeholder name.
  std::map<std::string, std::string> field_map;

  void validate() const {
    std::set<std::string> targets;
    for (const auto& [from, to] : field_map) {
      if (!is_placeholder(to)) {
        throw ValidationError("task '" + task_id + "': field_map target '" + to +
                              "' is not a known placeholder");
      }
      if (!targets.insert(to).second) {
        throw ValidationError("task '" + task_id + "': field_map maps two sources onto '" + to +
                              "'");
      }
    }
  }
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

inline const std::filesystem::path& single_path(const SourceSpec& s) {
  if (s.paths.size() != 1) {
    throw ValidationError("task '" + s.task_id + "': " + std::string(to_string(s.format)) +
                          " takes exactly one path");
  }
  return s.paths.front();
}

inline void require_targets(const SourceSpec& s, std::initializer_list<std::string_view> names) {
  for (auto name : names) {
    const bool found = std::any_of(s.field_map.begin(), s.field_map.end(),
                                   [&](const auto& kv) { return kv.second == name; });
    if (!found) {
      throw ValidationError("task '" + s.task_id + "': field_map must provide '" +
                            std::string(name) + "'");
    }
  }
}

inline SourceSpec with_default_map(SourceSpec s, std::initializer_list<std::string_view> names) {
  if (s.field_map.empty()) {
    for (auto n : names) s.field_map.emplace(std::string(n), std::string(n));
  }
  s.validate();
  return s;
}

}  // namespace detail

// Tab-separated file with a header row; maps every field_map column. Rows
// whose mapped values are all present but some is blank are skipped. Row
// numbers in errors are 1-based file lines (the header is row 1).
inline std::vector<TaskRecord> read_tsv(const SourceSpec& spec) {
  spec.validate();
  const auto lines = split_lines(read_file(detail::single_path(spec)));
  std::vector<TaskRecord> out;
  if (lines.empty() || is_blank(lines.front())) return out;

  const auto header = detail::split_tabs(lines.front());
  std::vector<std::pair<std::size_t, std::string>> columns;
  for (const auto& [from, to] : spec.field_map) {
    const auto it = std::find(header.begin(), header.end(), from);
    if (it == header.end()) {
      throw DataError(detail::single_path(spec).string() + ": header has no column '" + from +
                      "'");
    }
    columns.emplace_back(static_cast<std::size_t>(it - header.begin()), to);
  }

  std::size_t index = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = detail::split_tabs(lines[i]);
    TaskRecord r{spec.task_id, {}, index++};
    bool blank = false;
    for (const auto& [col, name] : columns) {
      if (col >= cols.size()) {
        throw DataError(detail::single_path(spec).string() + ": row " + std::to_string(i + 1) +
                        " is missing column '" + name + "'");
      }
      const auto value = trim(cols[col]);
      blank = blank || value.empty();
      r.fields.emplace(name, std::string(value));
    }
    if (!blank) out.push_back(std::move(r));
  }
  return out;
}

// Sentiment / topic rows with fields {text, label}; labels are kept verbatim.
inline std::vector<TaskRecord> read_classification(const SourceSpec& source) {
  const auto spec = detail::with_default_map(source, {"text", "label"});
  detail::require_targets(spec, {"text", "label"});
  return read_tsv(spec);
}

// One JSON object per line. Each field_map key must be present on every
// record; string, number and boolean values are accepted.
inline std::vector<TaskRecord> read_keyed_jsonl(const SourceSpec& spec) {
  spec.validate();
  if (spec.field_map.empty()) {
    throw ValidationError("task '" + spec.task_id + "': keyed-jsonl needs a field_map");
  }
  const auto& path = detail::single_path(spec);
  const auto lines = split_lines(read_file(path));
  std::vector<TaskRecord> out;
  std::size_t index = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw DataError(where + ": expected a JSON object");
    TaskRecord r{spec.task_id, {}, index++};
    bool blank = false;
    for (const auto& [key, name] : spec.field_map) {
      const auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) {
        throw DataError(where + ": record is missing key '" + key + "'");
      }
      std::string value;
      if (it->is_string()) {
        value = it->get<std::string>();
      } else if (it->is_number() || it->is_boolean()) {
        value = it->dump();
      } else {
        throw DataError(where + ": key '" + key + "' must be a scalar");
      }
      value = std::string(trim(value));
      blank = blank || value.empty();
      r.fields.emplace(name, std::move(value));
    }
    if (!blank) out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TaskRecord> read_qa(const SourceSpec& source) {
  const auto spec = detail::with_default_map(source, {"question", "context", "answer"});
  detail::require_targets(spec, {"question", "context", "answer"});
  return read_keyed_jsonl(spec);
}

// Token-per-line BIO file (token, then tag as the last whitespace-separated
// column). Produces one record per sentence: {text, names}.
inline std::vector<TaskRecord> read_conll_person_names(
    const SourceSpec& spec, std::string_view none_marker = kDefaultNoneMarker) {
  const auto& path = detail::single_path(spec);
  const auto lines = split_lines(read_file(path));
  std::vector<TaskRecord> out;
  std::vector<std::string> tokens;
  std::vector<std::string> names;
  std::string current;
  bool in_person = false;

  auto close_span = [&] {
    if (in_person) names.push_back(std::move(current));
    current.clear();
    in_person = false;
  };
  auto flush = [&] {
    close_span();
    if (tokens.empty()) return;
    std::string text;
    for (const auto& t : tokens) {
      if (!text.empty()) text.push_back(' ');
      text += t;
    }
    std::string joined;
    for (const auto& n : names) {
      if (!joined.empty()) joined += kNameDelimiter;
      joined += n;
    }
    if (joined.empty()) joined = std::string(none_marker);
    out.push_back(TaskRecord{spec.task_id, {{"text", text}, {"names", joined}}, out.size()});
    tokens.clear();
    names.clear();
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.rfind("-DOCSTART-", 0) == 0) continue;
    std::istringstream cols{std::string(line)};
    std::vector<std::string> parts;
    for (std::string p; cols >> p;) parts.push_back(std::move(p));
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (parts.size() < 2) throw DataError(where + ": expected token and tag columns");
    const std::string& token = parts.front();
    const std::string& tag = parts.back();
    const bool ok = tag == "O" || ((tag.rfind("B-", 0) == 0 || tag.rfind("I-", 0) == 0) &&
                                   tag.size() > 2);
    if (!ok) throw DataError(where + ": malformed BIO tag '" + tag + "'");

    tokens.push_back(token);
    const bool person = tag.size() > 2 && tag.compare(2, std::string::npos, "PER") == 0;
    if (!person) {
      close_span();
    } else if (tag[0] == 'B' || !in_person) {
      // A stray I-PER opens a new span, as in conlleval.
      close_span();
      current = token;
      in_person = true;
    } else {
      current += ' ';
      current += token;
    }
  }
  flush();
  return out;
}

// Two line-aligned files -> {source, target}. Pairs with a blank side are
// skipped; source_index stays the 0-based line number.
inline std::vector<TaskRecord> read_parallel(const SourceSpec& spec) {
  if (spec.paths.size() != 2) {
    throw ValidationError("task '" + spec.task_id + "': parallel-pair takes two paths");
  }
  auto src = split_lines(read_file(spec.paths[0]));
  auto tgt = split_lines(read_file(spec.paths[1]));
  if (src.size() != tgt.size()) {
    throw DataError("parallel files have different line counts: " + std::to_string(src.size()) +
                    " vs " + std::to_string(tgt.size()));
  }
  std::vector<TaskRecord> out;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto s = trim(src[i]);
    const auto t = trim(tgt[i]);
    if (s.empty() || t.empty()) continue;
    out.push_back(TaskRecord{spec.task_id, {{"source", std::string(s)}, {"target", std::string(t)}}, i});
  }
  return out;
}

// Splits on runs of blank lines; blocks are trimmed, empty blocks dropped.
inline std::vector<std::string> split_text_blocks(std::string_view raw) {
  std::vector<std::string> blocks;
  std::string current;
  auto flush = [&] {
    const auto t = trim(current);
    if (!t.empty()) blocks.emplace_back(t);
    current.clear();
  };
  for (const auto& line : split_lines(raw)) {
    if (is_blank(line)) {
      flush();
    } else {
      if (!current.empty()) current.push_back('\n');
      current += line;
    }
  }
  flush();
  return blocks;
}

inline std::string join_blocks(const std::vector<std::string>& blocks, std::size_t first = 0) {
  std::string out;
  for (std::size_t i = first; i < blocks.size(); ++i) {
    if (!out.empty()) out += "\n\n";
    out += blocks[i];
  }
  return out;
}

// First block becomes the prompt, the rest (re-joined with one blank line)
// the continuation. Fewer than two blocks: nothing to complete.
inline std::optional<TaskRecord> derive_completion_records(const std::vector<std::string>& blocks,
                                                           std::string task_id = {},
                                                           std::size_t source_index = 0) {
  if (blocks.size() < 2) return std::nullopt;
  return TaskRecord{std::move(task_id),
                    {{"prompt", blocks.front()}, {"continuation", join_blocks(blocks, 1)}},
                    source_index};
}

// Inverse of summarization: the summary becomes the text to expand.
inline std::vector<TaskRecord> derive_expansion_records(const std::vector<TaskRecord>& records) {
  std::vector<TaskRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.has("summary")) {
      out.push_back(TaskRecord{r.task_id, {{"text", r.field("summary")}, {"expansion", r.field("text")}},
                               r.source_index});
    } else if (r.has("expansion")) {
      out.push_back(TaskRecord{r.task_id, {{"text", r.field("expansion")}, {"summary", r.field("text")}},
                               r.source_index});
    } else {
      throw DataError("record " + std::to_string(r.source_index) +
                      " has neither 'summary' nor 'expansion' to swap");
    }
  }
  return out;
}

// Expands directories to their regular files in name order.
inline std::vector<std::filesystem::path> expand_paths(const std::vector<std::filesystem::path>& paths) {
  std::vector<std::filesystem::path> files;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> entries;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        if (e.is_regular_file()) entries.push_back(e.path());
      }
      std::sort(entries.begin(), entries.end());
      files.insert(files.end(), entries.begin(), entries.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

enum class BlockMode {
  Document,    // {title: first line, body: the rest}
  Completion,  // {prompt, continuation} via derive_completion_records
};

// One record per text file; files that cannot form a record are skipped.
// source_index is the file's position in the expanded path list.
inline std::vector<TaskRecord> read_text_blocks(const SourceSpec& spec, BlockMode mode) {
  std::vector<TaskRecord> out;
  const auto files = expand_paths(spec.paths);
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto blocks = split_text_blocks(read_file(files[i]));
    if (mode == BlockMode::Completion) {
      if (auto r = derive_completion_records(blocks, spec.task_id, i)) out.push_back(std::move(*r));
      continue;
    }
    if (blocks.empty()) continue;
    const auto text = join_blocks(blocks);
    const auto nl = text.find('\n');
    if (nl == std::string::npos) continue;
    const auto title = trim(std::string_view(text).substr(0, nl));
    const auto body = trim(std::string_view(text).substr(nl + 1));
    if (title.empty() || body.empty()) continue;
    out.push_back(TaskRecord{spec.task_id, {{"title", std::string(title)}, {"body", std::string(body)}}, i});
  }
  return out;
}

}  // namespace amforge::ingest
