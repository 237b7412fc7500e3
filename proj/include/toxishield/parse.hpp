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

// Structured-output parsing for Coach (XML tags) and Reframer
// (`Detoxified:` / `Rationale:` markers) completions, plus the renderers
// that produce the same shapes.

#include <cctype>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "toxishield/core.hpp"
#include "toxishield/error.hpp"
#include "toxishield/prompts.hpp"

namespace toxishield {

struct ClassificationResult {
  LabelSet labels;
  std::string rationale;
  std::string raw_response;
  std::size_t retry_count = 0;
  std::vector<std::string> warnings;
};

struct DetoxResult {
  std::string detoxified;
  std::string rationale;
  std::string raw_response;
  std::size_t retry_count = 0;
};

namespace detail {

inline std::optional<std::string> tag_content(const std::string& raw, std::string_view tag) {
  const std::regex re("<\\s*" + std::string(tag) + "\\s*>([\\s\\S]*?)<\\s*/\\s*" + std::string(tag) + "\\s*>",
                      std::regex::ECMAScript | std::regex::icase);
  std::smatch m;
  if (!std::regex_search(raw, m, re)) return std::nullopt;
  return m[1].str();
}

inline bool word_byte(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct MarkerHit {
  std::size_t begin;
  std::size_t end;
};

/// Finds `word:` (case-insensitive) with optional markdown emphasis around
/// the word or colon, not glued to a preceding word character.
inline std::optional<MarkerHit> find_marker(const std::string& text, std::string_view word, std::size_t from) {
  const std::regex re("[*_]{0,3}" + std::string(word) + "[*_]{0,3}[ \\t]*:[*_]{0,3}",
                      std::regex::ECMAScript | std::regex::icase);
  auto it = text.cbegin() + static_cast<std::ptrdiff_t>(from);
  std::smatch m;
  while (std::regex_search(it, text.cend(), m, re)) {
    const auto begin = static_cast<std::size_t>(m[0].first - text.cbegin());
    if (begin == 0 || !word_byte(text[begin - 1])) return MarkerHit{begin, begin + static_cast<std::size_t>(m[0].length())};
    it = m[0].first + 1;
  }
  return std::nullopt;
}

/// Drops a trailing line that holds only a list bullet.
inline std::string_view strip_dangling_bullet(std::string_view s) {
  s = trim(s);
  const auto nl = s.find_last_of('\n');
  if (nl != std::string_view::npos) {
    const auto last = trim(s.substr(nl + 1));
    if (last == "-" || last == "*" || last == "+" || last == "•") s = trim(s.substr(0, nl));
  }
  return s;
}

}  // namespace detail

/// Parses `<response>…</response>` (rationale) and `<category>…</category>`
/// (label list). Throws MalformedResponse, UnknownLabel or ConflictingLabels.
inline ClassificationResult parse_coach_response(const std::string& raw,
                                                 const Taxonomy& taxonomy = Taxonomy::builtin()) {
  auto response = detail::tag_content(raw, "response");
  auto category = detail::tag_content(raw, "category");
  if (!response) throw MalformedResponse("missing <response> element");
  if (!category) throw MalformedResponse("missing <category> element");

  ClassificationResult out;
  out.raw_response = raw;
  out.rationale = std::string(trim(xml_unescape(*response)));
  if (out.rationale.empty()) throw MalformedResponse("empty <response> rationale");

  const auto tokens = PromptConfig::split_label_list(xml_unescape(*category));
  if (tokens.empty()) throw MalformedResponse("empty <category> element");
  std::vector<Category> labels;
  for (const auto& tok : tokens) labels.push_back(taxonomy.normalize(tok));
  out.labels = LabelSet::from(labels);
  out.warnings = out.labels.validate();
  return out;
}

inline std::string render_coach_response(const LabelSet& labels, std::string_view rationale) {
  return "<response> " + xml_escape(rationale) + " </response> <category> " + xml_escape(labels.to_string(", ")) +
         " </category>";
}

/// Parses `Detoxified: …` up to `Rationale: …`. Throws MalformedResponse.
inline DetoxResult parse_reframe_response(const std::string& raw) {
  auto detox = detail::find_marker(raw, "detoxified", 0);
  if (!detox) throw MalformedResponse("missing 'Detoxified:' marker");
  auto rationale = detail::find_marker(raw, "rationale", detox->end);
  if (!rationale) throw MalformedResponse("missing 'Rationale:' marker after 'Detoxified:'");

  std::string_view body = std::string_view(raw).substr(detox->end, rationale->begin - detox->end);
  body = detail::strip_dangling_bullet(body);
  if (!body.empty() && body.back() == ';') body = trim(body.substr(0, body.size() - 1));

  DetoxResult out;
  out.raw_response = raw;
  out.detoxified = std::string(body);
  out.rationale = std::string(trim(std::string_view(raw).substr(rationale->end)));
  if (out.detoxified.empty()) throw MalformedResponse("'Detoxified:' field is empty");
  if (out.rationale.empty()) throw MalformedResponse("'Rationale:' field is empty");
  return out;
}

inline std::string render_reframe_response(std::string_view detoxified, std::string_view rationale) {
  return "Detoxified: " + std::string(detoxified) + "\nRationale: " + std::string(rationale);
}

}  // namespace toxishield
