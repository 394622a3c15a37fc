#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>

#include "amforge/error.hpp"

namespace amforge {

// Field names a TaskRecord may carry and a template may reference.
inline constexpr std::array<std::string_view, 14> kPlaceholderVocabulary = {
    "text",  "label",  "question", "context",      "answer",    "source", "target",
    "title", "body",   "prompt",   "continuation", "expansion", "names",  "summary"};

inline bool is_placeholder(std::string_view name) {
  return std::find(kPlaceholderVocabulary.begin(), kPlaceholderVocabulary.end(), name) !=
         kPlaceholderVocabulary.end();
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool is_blank(std::string_view s) { return trim(s).empty(); }

struct TaskRecord {
  std::string task_id;
  std::map<std::string, std::string> fields;
  std::size_t source_index = 0;

  const std::string& field(const std::string& name) const {
    const auto it = fields.find(name);
    if (it == fields.end()) {
      throw DataError("record " + std::to_string(source_index) + " of task '" + task_id +
                      "' has no field '" + name + "'");
    }
    return it->second;
  }

  bool has(const std::string& name) const { return fields.count(name) != 0; }

  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

// Throws unless the record is non-empty, uses only vocabulary names, and has
// no blank values.
inline void validate_record(const TaskRecord& r) {
  if (r.fields.empty()) {
    throw DataError("record " + std::to_string(r.source_index) + " has no fields");
  }
  for (const auto& [name, value] : r.fields) {
    if (!is_placeholder(name)) {
      throw DataError("record " + std::to_string(r.source_index) + ": '" + name +
                      "' is not a known field name");
    }
    if (is_blank(value)) {
      throw DataError("record " + std::to_string(r.source_index) + ": field '" + name +
                      "' is blank");
    }
  }
}

}  // namespace amforge
