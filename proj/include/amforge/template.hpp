#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "amforge/error.hpp"
#include "amforge/ingest.hpp"
#include "amforge/record.hpp"

namespace amforge {

inline constexpr std::string_view kDefaultPreamble =
    "Below is an instruction that describes a task. Write a response that appropriately "
    "completes the request.";

enum class LangMode { Amharic, CodeMixed };

inline std::string_view to_string(LangMode m) {
  return m == LangMode::Amharic ? "amharic" : "code-mixed";
}

inline LangMode parse_lang_mode(std::string_view s) {
  if (s == "amharic") return LangMode::Amharic;
  if (s == "code-mixed") return LangMode::CodeMixed;
  throw ValidationError("unknown lang_mode '" + std::string(s) + "'");
}

struct InstructionTemplate {
  std::string template_id;
  std::string task_id;
  std::string pattern;
  LangMode lang_mode = LangMode::Amharic;
};

struct RenderedPrompt {
  std::string instruction;
  std::string input;
  std::string output;

  friend bool operator==(const RenderedPrompt&, const RenderedPrompt&) = default;
};

// Which record fields land in the output slot and, optionally, the input slot.
struct Binding {
  std::string output;
  std::optional<std::string> input;
};

// Placeholder names in pattern order (duplicates kept). Every '{' must open
// a `{name}` placeholder; literal braces are not supported.
inline std::vector<std::string> placeholders(std::string_view pattern,
                                             std::string_view template_id = {}) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string_view::npos) {
    const auto close = pattern.find('}', pos + 1);
    if (close == std::string_view::npos) {
      throw ValidationError("template '" + std::string(template_id) +
                            "': unterminated placeholder");
    }
    std::string name(pattern.substr(pos + 1, close - pos - 1));
    if (!is_placeholder(name)) {
      throw ValidationError("template '" + std::string(template_id) + "': unknown placeholder '{" +
                            name + "}'");
    }
    names.push_back(std::move(name));
    pos = close + 1;
  }
  return names;
}

// Template file: one JSON object per line with keys
// {template_id, task_id, pattern, lang_mode}. Lines whose task_id differs
// from `task_id` belong to other tasks and are skipped.
inline std::vector<InstructionTemplate> parse_templates(std::string_view raw,
                                                        std::string_view task_id) {
  std::vector<InstructionTemplate> out;
  std::set<std::string> seen;
  const auto lines = ingest::split_lines(raw);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const std::string where = "template line " + std::to_string(i + 1);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(where + ": invalid JSON (" + e.what() + ")");
    }
    auto get = [&](const char* key) -> std::string {
      const auto it = obj.find(key);
      if (it == obj.end() || !it->is_string()) {
        throw ValidationError(where + ": missing string key '" + key + "'");
      }
      return it->get<std::string>();
    };
    if (!obj.is_object()) throw ValidationError(where + ": expected a JSON object");
    InstructionTemplate t;
    t.template_id = get("template_id");
    t.task_id = get("task_id");
    t.pattern = get("pattern");
    t.lang_mode = parse_lang_mode(obj.contains("lang_mode") ? get("lang_mode") : "amharic");
    if (t.task_id != task_id) continue;
    if (t.template_id.empty()) throw ValidationError(where + ": empty template_id");
    if (is_blank(t.pattern)) {
      throw ValidationError("template '" + t.template_id + "': empty pattern");
    }
    placeholders(t.pattern, t.template_id);
    if (!seen.insert(t.template_id).second) {
      throw ValidationError("duplicate template_id '" + t.template_id + "' in task '" +
                            std::string(task_id) + "'");
    }
    out.push_back(std::move(t));
  }
  return out;
}

// Substitutes record values into the pattern verbatim (single pass, so
// substituted values are never rescanned).
inline RenderedPrompt render(const InstructionTemplate& tmpl, const TaskRecord& record,
                             const Binding& binding) {
  auto lookup = [&](const std::string& name, const char* role) -> const std::string& {
    const auto it = record.fields.find(name);
    if (it == record.fields.end()) {
      throw DataError("template '" + tmpl.template_id + "': " + role + " '" + name +
                      "' has no value in record " + std::to_string(record.source_index));
    }
    return it->second;
  };

  RenderedPrompt out;
  const std::string_view pattern = tmpl.pattern;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    const auto open = pattern.find('{', pos);
    if (open == std::string_view::npos) {
      out.instruction.append(pattern.substr(pos));
      break;
    }
    const auto close = pattern.find('}', open + 1);
    if (close == std::string_view::npos) {
      throw ValidationError("template '" + tmpl.template_id + "': unterminated placeholder");
    }
    out.instruction.append(pattern.substr(pos, open - pos));
    out.instruction += lookup(std::string(pattern.substr(open + 1, close - open - 1)), "placeholder");
    pos = close + 1;
  }
  out.output = lookup(binding.output, "output field");
  if (binding.input) out.input = lookup(*binding.input, "input field");
  if (is_blank(out.instruction)) {
    throw DataError("template '" + tmpl.template_id + "' rendered an empty instruction");
  }
  return out;
}

// Prefixes the instruction with an English preamble line.
inline RenderedPrompt code_mix(RenderedPrompt prompt, std::string_view preamble) {
  if (preamble.empty()) throw ValidationError("code-mix preamble must not be empty");
  std::string instruction;
  instruction.reserve(preamble.size() + 1 + prompt.instruction.size());
  instruction.append(preamble);
  instruction.push_back('\n');
  instruction += prompt.instruction;
  prompt.instruction = std::move(instruction);
  return prompt;
}

}  // namespace amforge
