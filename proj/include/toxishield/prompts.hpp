// Copyright 2026 The ToxiShield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Prompt construction for the Communication Coach (subcategory
// classification) and the Reframer (detoxification).

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "toxishield/core.hpp"
#include "toxishield/error.hpp"

namespace toxishield {

// ---------------------------------------------------------------------------
// Sectioned text files
// ---------------------------------------------------------------------------

/// `[name]` or `[name argument]` opens a section; everything up to the next
/// header is its body. Lines before the first header starting with '#' are
/// comments. Leading and trailing blank lines of each body are dropped.
struct Section {
  std::string name;
  std::string argument;
  std::string body;
};

inline std::vector<Section> parse_sections(std::string_view text) {
  std::vector<Section> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> lines;
  auto flush = [&] {
    if (out.empty()) return;
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    std::size_t first = 0;
    while (first < lines.size() && trim(lines[first]).empty()) ++first;
    std::string body;
    for (std::size_t i = first; i < lines.size(); ++i) {
      if (i > first) body += '\n';
      body += lines[i];
    }
    out.back().body = std::move(body);
    lines.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (t.size() > 2 && t.front() == '[' && t.back() == ']' && t.find('[', 1) == std::string_view::npos) {
      flush();
      auto inner = trim(t.substr(1, t.size() - 2));
      const auto sp = inner.find(' ');
      Section s;
      s.name = std::string(inner.substr(0, sp));
      if (sp != std::string_view::npos) s.argument = std::string(trim(inner.substr(sp + 1)));
      out.push_back(std::move(s));
      continue;
    }
    if (out.empty()) {
      if (t.empty() || t.front() == '#') continue;
      throw ConfigError("text before the first [section] header: '" + std::string(t) + "'");
    }
    lines.push_back(line);
  }
  flush();
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Non-empty lines of a body, with any leading "- " bullet removed.
inline std::vector<std::string> body_items(std::string_view body) {
  std::vector<std::string> items;
  std::istringstream in{std::string(body)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.starts_with("- ")) t.remove_prefix(2);
    if (!t.empty()) items.emplace_back(t);
  }
  return items;
}

/// `key: value` lines of a body.
inline std::map<std::string, std::string> body_fields(std::string_view body) {
  std::map<std::string, std::string> fields;
  std::istringstream in{std::string(body)};
  std::string line, last;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon != std::string::npos && line.find_first_of(" \t") > colon) {
      last = std::string(trim(std::string_view(line).substr(0, colon)));
      fields[last] = std::string(trim(std::string_view(line).substr(colon + 1)));
    } else if (!last.empty() && !trim(line).empty()) {
      fields[last] += "\n" + std::string(trim(line));
    }
  }
  return fields;
}

/// Escapes the characters that could terminate or fake a delimiter.
inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string xml_unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '&') {
      auto rest = s.substr(i);
      if (rest.starts_with("&lt;")) { out += '<'; i += 3; continue; }
      if (rest.starts_with("&gt;")) { out += '>'; i += 3; continue; }
      if (rest.starts_with("&amp;")) { out += '&'; i += 4; continue; }
      if (rest.starts_with("&quot;")) { out += '"'; i += 5; continue; }
      if (rest.starts_with("&apos;")) { out += '\''; i += 5; continue; }
    }
    out += s[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built prompts
// ---------------------------------------------------------------------------

struct Prompt {
  std::string text;
  /// Identifiers of the sections present, in emission order.
  std::vector<std::string> sections;

  bool has(std::string_view id) const { return std::find(sections.begin(), sections.end(), id) != sections.end(); }
};

namespace detail {

class PromptWriter {
 public:
  void section(std::string_view id, std::string_view title, std::string_view body) {
    if (!p_.text.empty()) p_.text += "\n\n";
    if (!title.empty()) {
      p_.text += "### ";
      p_.text += title;
      p_.text += '\n';
    }
    p_.text += body;
    p_.sections.emplace_back(id);
  }

  void bullets(std::string_view id, std::string_view title, const std::vector<std::string>& items) {
    std::string body;
    for (const auto& item : items) {
      if (!body.empty()) body += '\n';
      body += "- " + item;
    }
    section(id, title, body);
  }

  /// The comment goes last, escaped inside <comment> tags.
  Prompt finish(std::string_view lead, std::string_view body) {
    section("comment", "", std::string(lead) + "\n<comment>\n" + xml_escape(body) + "\n</comment>");
    return std::move(p_);
  }

 private:
  Prompt p_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Communication Coach
// ---------------------------------------------------------------------------

enum class PromptStage { S1 = 1, S2, S3, S4, S5 };

inline constexpr PromptStage kDefaultStage = PromptStage::S4;

inline PromptStage stage_from_int(int s) {
  if (s < 1 || s > 5) throw ConfigError("prompt stage must be 1..5, got " + std::to_string(s));
  return static_cast<PromptStage>(s);
}

inline PromptStage stage_from_string(std::string_view s) {
  if (!s.empty() && (s.front() == 'S' || s.front() == 's')) s.remove_prefix(1);
  if (s.size() != 1 || s[0] < '1' || s[0] > '9') throw ConfigError("bad prompt stage '" + std::string(s) + "'");
  return stage_from_int(s[0] - '0');
}

struct CoachExample {
  std::string comment;
  std::string labels;  // as the model should write them, e.g. "Profanity, Insult"
  std::string rationale;
};

/// Everything the Coach prompt can draw on. Which parts are emitted is
/// decided by `stage`.
struct PromptConfig {
  PromptStage stage = kDefaultStage;
  std::string persona;
  std::string task;
  std::string guidelines;
  std::string output_format;
  std::map<Category, std::string> definitions;
  std::vector<CoachExample> examples;
  std::vector<std::string> disambiguation;
  std::vector<std::string> output_constraints;
  std::vector<std::string> sarcasm_cues;
  std::vector<std::string> profanity_terms;
  std::vector<std::string> anger_markers;
  std::vector<std::string> negative_constraints;
  std::vector<std::string> logic_rules;
  /// Expanded definitions that replace the regular ones at S5.
  std::map<Category, std::string> rare_category_cues;
  std::vector<CoachExample> rare_category_examples;

  /// Throws MissingDefinition for S2+ when a taxonomy member has no definition.
  void validate() const {
    if (persona.empty() || task.empty() || guidelines.empty() || output_format.empty())
      throw ConfigError("coach prompt needs persona, task, guidelines and output_format");
    if (stage >= PromptStage::S2)
      for (Category c : kAllCategories)
        if (!definitions.count(c) || trim(definitions.at(c)).empty())
          throw MissingDefinition("no definition for category " + std::string(canonical_name(c)));
  }

  /// Parses a coach prompt data file. Category arguments go through `taxonomy`.
  static PromptConfig parse(std::string_view text, const Taxonomy& taxonomy = Taxonomy::builtin()) {
    PromptConfig cfg;
    for (const auto& s : parse_sections(text)) {
      if (s.name == "persona") cfg.persona = s.body;
      else if (s.name == "task") cfg.task = s.body;
      else if (s.name == "guidelines") cfg.guidelines = s.body;
      else if (s.name == "output_format") cfg.output_format = s.body;
      else if (s.name == "definition") cfg.definitions[taxonomy.normalize(s.argument)] = s.body;
      else if (s.name == "rare_cue") cfg.rare_category_cues[taxonomy.normalize(s.argument)] = s.body;
      else if (s.name == "example" || s.name == "rare_example") {
        auto f = body_fields(s.body);
        CoachExample ex{f["comment"], f["category"], f["rationale"]};
        if (ex.comment.empty() || ex.labels.empty()) throw ConfigError("example needs comment: and category: fields");
        for (auto& tok : split_label_list(ex.labels)) taxonomy.normalize(tok);
        (s.name == "example" ? cfg.examples : cfg.rare_category_examples).push_back(std::move(ex));
      }
      else if (s.name == "disambiguation") cfg.disambiguation = body_items(s.body);
      else if (s.name == "output_constraints") cfg.output_constraints = body_items(s.body);
      else if (s.name == "sarcasm_cues") cfg.sarcasm_cues = body_items(s.body);
      else if (s.name == "anger_markers") cfg.anger_markers = body_items(s.body);
      else if (s.name == "negative_constraints") cfg.negative_constraints = body_items(s.body);
      else if (s.name == "logic_rules") cfg.logic_rules = body_items(s.body);
      else if (s.name == "stage") cfg.stage = stage_from_string(trim(s.body));
      else throw ConfigError("unknown coach prompt section [" + s.name + "]");
    }
    return cfg;
  }

  static PromptConfig load(const std::string& path, const Taxonomy& taxonomy = Taxonomy::builtin()) {
    return parse(read_text_file(path), taxonomy);
  }

  /// Splits a `<category>` payload on ',', ';', newlines and the word "and".
  static std::vector<std::string> split_label_list(std::string_view list) {
    std::vector<std::string> out;
    std::string cur;
    auto push = [&] {
      auto t = trim(cur);
      if (!t.empty()) out.emplace_back(t);
      cur.clear();
    };
    auto is_sep_space = [](char c) { return c == ' ' || c == '\t'; };
    for (std::size_t i = 0; i < list.size(); ++i) {
      const char c = list[i];
      if (c == ',' || c == ';' || c == '\n' || c == '\r') {
        push();
        continue;
      }
      if (is_sep_space(c) && i + 4 < list.size()) {
        auto w = list.substr(i + 1, 3);
        if ((w[0] == 'a' || w[0] == 'A') && (w[1] == 'n' || w[1] == 'N') && (w[2] == 'd' || w[2] == 'D') &&
            is_sep_space(list[i + 4])) {
          push();
          i += 4;
          continue;
        }
      }
      cur += c;
    }
    push();
    return out;
  }
};

inline std::string format_examples(const std::vector<CoachExample>& examples) {
  std::string body;
  for (const auto& ex : examples) {
    if (!body.empty()) body += "\n\n";
    body += "Comment: " + ex.comment + "\n<response> " + ex.rationale + " </response> <category> " + ex.labels +
            " </category>";
  }
  return body;
}

/// Five components in order (role, task, categories/definitions, guidelines,
/// output format) with stage-dependent additions, then the delimited comment.
inline Prompt build_coach_prompt(const TextSample& sample, const PromptConfig& cfg) {
  cfg.validate();
  const auto stage = cfg.stage;
  detail::PromptWriter w;

  w.section("role", "Role", cfg.persona);
  w.section("task", "Task", cfg.task);

  std::string names;
  for (Category c : kAllCategories) {
    if (!names.empty()) names += ", ";
    names += display_name(c);
  }
  w.section("categories", "Categories", names);

  if (stage >= PromptStage::S2) {
    std::string defs;
    for (Category c : kAllCategories) {
      const bool expanded = stage >= PromptStage::S5 && cfg.rare_category_cues.count(c);
      const auto& text = expanded ? cfg.rare_category_cues.at(c) : cfg.definitions.at(c);
      if (!defs.empty()) defs += '\n';
      defs += "- " + std::string(display_name(c)) + ": " + text;
    }
    w.section("definitions", "Definitions", defs);
    if (!cfg.examples.empty()) w.section("few_shot", "Examples", format_examples(cfg.examples));
    w.bullets("disambiguation", "Distinguishing similar categories", cfg.disambiguation);
  }
  if (stage >= PromptStage::S3) w.bullets("sarcasm_cues", "Sarcasm and irony", cfg.sarcasm_cues);
  if (stage >= PromptStage::S4) {
    std::string terms;
    for (const auto& t : cfg.profanity_terms) terms += (terms.empty() ? "" : ", ") + t;
    w.section("lexicon", "Profanity indicators", terms.empty() ? "(none configured)" : terms);
    w.bullets("anger_markers", "Anger markers", cfg.anger_markers);
  }
  if (stage >= PromptStage::S5) {
    std::string cues;
    for (const auto& [c, text] : cfg.rare_category_cues) {
      if (!cues.empty()) cues += '\n';
      cues += "- " + std::string(display_name(c)) + ": " + text;
    }
    if (!cfg.rare_category_examples.empty()) cues += "\n\n" + format_examples(cfg.rare_category_examples);
    w.section("rare_category_cues", "Rare categories", cues);
  }

  w.section("guidelines", "Guidelines", cfg.guidelines);
  if (stage >= PromptStage::S4) {
    w.bullets("negative_constraints", "Do not flag", cfg.negative_constraints);
    w.bullets("logic_rules", "Rules", cfg.logic_rules);
  }

  w.section("output_format", "Output format", cfg.output_format);
  if (stage >= PromptStage::S2) w.bullets("output_constraints", "Output constraints", cfg.output_constraints);

  return w.finish("Now classify the following comment.", sample.body);
}

inline constexpr std::string_view kCoachRetrySuffix =
    "Your previous reply was not in the required format. Reply again using exactly "
    "<response> {rationale} </response> <category> {category} </category> and nothing else.";

// ---------------------------------------------------------------------------
// Reframer
// ---------------------------------------------------------------------------

struct ReframeExample {
  std::string toxic;
  std::string detoxified;
  std::string rationale;
};

struct ReframeConfig {
  std::string instruction;
  std::vector<std::string> steps;
  std::vector<ReframeExample> examples;
  std::string output_format;

  /// Soft problems that do not prevent building a prompt.
  std::vector<std::string> validate() const {
    std::vector<std::string> warnings;
    if (examples.empty()) warnings.emplace_back("reframe prompt has no few-shot pairs");
    if (steps.empty()) warnings.emplace_back("reframe prompt has no reasoning steps");
    return warnings;
  }

  static ReframeConfig parse(std::string_view text) {
    ReframeConfig cfg;
    for (const auto& s : parse_sections(text)) {
      if (s.name == "instruction") cfg.instruction = s.body;
      else if (s.name == "steps") cfg.steps = body_items(s.body);
      else if (s.name == "output_format") cfg.output_format = s.body;
      else if (s.name == "example") {
        auto f = body_fields(s.body);
        if (f["toxic"].empty() || f["detoxified"].empty() || f["rationale"].empty())
          throw ConfigError("reframe example needs toxic:, detoxified: and rationale: fields");
        cfg.examples.push_back({f["toxic"], f["detoxified"], f["rationale"]});
      } else throw ConfigError("unknown reframe prompt section [" + s.name + "]");
    }
    if (cfg.instruction.empty() || cfg.output_format.empty())
      throw ConfigError("reframe prompt needs instruction and output_format");
    if (cfg.output_format.find("Detoxified:") == std::string::npos)
      throw ConfigError("reframe output_format must name the Detoxified: field");
    return cfg;
  }

  static ReframeConfig load(const std::string& path) { return parse(read_text_file(path)); }
};

inline Prompt build_reframe_prompt(const TextSample& sample, const ReframeConfig& cfg) {
  require_body(sample);
  detail::PromptWriter w;
  w.section("instruction", "Task", cfg.instruction);
  if (!cfg.steps.empty()) {
    std::string steps;
    for (std::size_t i = 0; i < cfg.steps.size(); ++i)
      steps += (i ? "\n" : "") + std::to_string(i + 1) + ". " + cfg.steps[i];
    w.section("steps", "Think step by step", steps);
  }
  if (!cfg.examples.empty()) {
    std::string body;
    for (const auto& ex : cfg.examples) {
      if (!body.empty()) body += "\n\n";
      body += "Comment: " + ex.toxic + "\nDetoxified: " + ex.detoxified + "; Rationale: " + ex.rationale;
    }
    w.section("few_shot", "Examples", body);
  }
  w.section("output_format", "Output format", cfg.output_format);
  return w.finish("Rewrite the following comment.", sample.body);
}

inline constexpr std::string_view kReframeRetrySuffix =
    "Your previous reply was not in the required format. Reply again using exactly "
    "Detoxified: <rewritten comment>; Rationale: <explanation of changes> and nothing else.";

}  // namespace toxishield
