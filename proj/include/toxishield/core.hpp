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

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "toxishield/error.hpp"
#include "toxishield/unicode.hpp"

namespace toxishield {

// ---------------------------------------------------------------------------
// Samples and scores
// ---------------------------------------------------------------------------

enum class Source { pull_request_comment, other };

inline std::string_view to_string(Source s) {
  return s == Source::pull_request_comment ? "pull_request_comment" : "other";
}

inline Source source_from_string(std::string_view s) {
  if (s == "pull_request_comment" || s == "pr") return Source::pull_request_comment;
  return Source::other;
}

/// A code-review comment with identity and source metadata.
struct TextSample {
  std::string id;
  std::string body;
  Source source = Source::pull_request_comment;
  std::map<std::string, std::string> metadata{};

  friend bool operator==(const TextSample&, const TextSample&) = default;
};

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Pipeline entry check: the body must have something besides whitespace.
inline void require_body(const TextSample& sample) {
  bool blank = true;
  for (const auto& cp : unicode::codepoints(sample.body)) {
    if (!unicode::is_space(cp.value)) {
      blank = false;
      break;
    }
  }
  if (blank) throw EmptyInput("comment body is empty after trimming (id '" + sample.id + "')");
}

/// Probability that a text is toxic. Always within [0, 1].
class ToxicityScore {
 public:
  constexpr ToxicityScore() = default;
  explicit ToxicityScore(double p) : p_(p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("toxicity score out of [0,1]: " + std::to_string(p));
  }

  constexpr double value() const noexcept { return p_; }
  friend constexpr auto operator<=>(const ToxicityScore&, const ToxicityScore&) = default;

 private:
  double p_ = 0.0;
};

enum class BinaryLabel { non_toxic = 0, toxic = 1 };

inline std::string_view to_string(BinaryLabel l) { return l == BinaryLabel::toxic ? "toxic" : "non_toxic"; }

inline BinaryLabel binary_label_from_string(std::string_view s) {
  if (s == "toxic" || s == "1") return BinaryLabel::toxic;
  if (s == "non_toxic" || s == "non-toxic" || s == "nontoxic" || s == "0") return BinaryLabel::non_toxic;
  throw InvalidArgument("not a binary label: '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

enum class Category : std::uint8_t {
  Profanity,
  Trolling,
  Insult,
  SelfDeprecation,
  Entitlement,
  IdentityAttack,
  Threat,
  Obscenity,
  Arrogance,
  Flirtation,
  ObjectDirectedToxicity,
  NonToxic,
};

inline constexpr std::size_t kCategoryCount = 12;

inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::Profanity,   Category::Trolling,       Category::Insult,    Category::SelfDeprecation,
    Category::Entitlement, Category::IdentityAttack, Category::Threat,    Category::Obscenity,
    Category::Arrogance,   Category::Flirtation,     Category::ObjectDirectedToxicity,
    Category::NonToxic,
};

inline constexpr std::size_t index_of(Category c) noexcept { return static_cast<std::size_t>(c); }

/// Identifier-style name, e.g. "SelfDeprecation".
inline constexpr std::string_view canonical_name(Category c) noexcept {
  constexpr std::array<std::string_view, kCategoryCount> names = {
      "Profanity",  "Trolling",  "Insult",    "SelfDeprecation", "Entitlement", "IdentityAttack",
      "Threat",     "Obscenity", "Arrogance", "Flirtation",      "ObjectDirectedToxicity", "NonToxic",
  };
  return names[index_of(c)];
}

/// Human-facing name used in prompts and reports, e.g. "Self-deprecation".
inline constexpr std::string_view display_name(Category c) noexcept {
  constexpr std::array<std::string_view, kCategoryCount> names = {
      "Profanity",  "Trolling",  "Insult",    "Self-deprecation", "Entitlement", "Identity Attack",
      "Threat",     "Obscenity", "Arrogance", "Flirtation",       "Object-Directed Toxicity", "Non-Toxic",
  };
  return names[index_of(c)];
}

inline constexpr bool is_toxic(Category c) noexcept { return c != Category::NonToxic; }

namespace detail {

/// Lookup key: case-folded, trimmed, wrapping quotes/emphasis and a trailing
/// period removed, spaces/hyphens/underscores dropped.
inline std::string label_key(std::string_view raw) {
  std::string folded = unicode::fold(trim(raw));
  std::string_view v = folded;
  constexpr std::string_view wrap = "\"'`*";
  while (!v.empty() && wrap.find(v.front()) != std::string_view::npos) v.remove_prefix(1);
  while (!v.empty() && (wrap.find(v.back()) != std::string_view::npos || v.back() == '.')) v.remove_suffix(1);
  v = trim(v);
  std::string key;
  key.reserve(v.size());
  for (const auto& cp : unicode::codepoints(v)) {
    if (unicode::is_space(cp.value) || cp.value == U'-' || cp.value == U'_' || cp.value == U'‐' ||
        cp.value == U'‑' || cp.value == U'–')
      continue;
    key.append(v.substr(cp.offset, cp.length));
  }
  return key;
}

}  // namespace detail

/// Built-in alias table, same format as data/taxonomy.txt.
inline constexpr std::string_view kDefaultTaxonomy = R"(# canonical = aliases
Profanity = profane, swearing, cursing
Trolling = troll, trolls
Insult = insults, insulting, personal attack
SelfDeprecation = self-deprecating, self deprecating, sd
Entitlement = entitled
IdentityAttack = identity attack, id attack, identity-based attack, identity hate
Threat = threats, threatening, threaten
Obscenity = obscene, sexual content
Arrogance = arrogant
Flirtation = flirting, flirt, flirtatious
ObjectDirectedToxicity = object-directed toxicity, object directed, od toxicity, object-directed
NonToxic = non-toxic, nontoxic, not toxic, none, clean
)";

/// Canonical names plus an alias table loaded from data. Immutable after construction.
class Taxonomy {
 public:
  /// Parses `Canonical = alias, alias, ...` lines; '#' starts a comment.
  static Taxonomy parse(std::string_view text) {
    Taxonomy t;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::string_view v = trim(line);
      if (v.empty()) continue;
      std::string_view head = v;
      std::string_view rest;
      if (auto eq = v.find_first_of("=:"); eq != std::string_view::npos) {
        head = trim(v.substr(0, eq));
        rest = v.substr(eq + 1);
      }
      auto it = t.index_.find(detail::label_key(head));
      if (it == t.index_.end() || !it->second.canonical)
        throw ConfigError("taxonomy line " + std::to_string(lineno) + ": '" + std::string(head) +
                          "' is not a canonical category");
      const Category cat = it->second.category;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        std::string_view alias = trim(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        if (alias.empty()) continue;
        t.add(detail::label_key(alias), cat, false, lineno);
      }
    }
    return t;
  }

  static Taxonomy load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open taxonomy file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  static const Taxonomy& builtin() {
    static const Taxonomy t = parse(kDefaultTaxonomy);
    return t;
  }

  /// Maps free-form model output onto the taxonomy. Throws UnknownLabel.
  Category normalize(std::string_view raw) const {
    auto it = index_.find(detail::label_key(raw));
    if (it == index_.end()) throw UnknownLabel(std::string(raw));
    return it->second.category;
  }

  std::optional<Category> try_normalize(std::string_view raw) const {
    auto it = index_.find(detail::label_key(raw));
    if (it == index_.end()) return std::nullopt;
    return it->second.category;
  }

  /// All alias keys (normalized) for a category, canonical keys included.
  std::vector<std::string> keys_for(Category c) const {
    std::vector<std::string> out;
    for (const auto& [k, e] : index_)
      if (e.category == c) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Entry {
    Category category;
    bool canonical;
  };

  Taxonomy() {
    for (Category c : kAllCategories) {
      add(detail::label_key(canonical_name(c)), c, true, 0);
      add(detail::label_key(display_name(c)), c, true, 0);
    }
  }

  void add(const std::string& key, Category c, bool canonical, std::size_t lineno) {
    if (key.empty()) return;
    auto [it, inserted] = index_.try_emplace(key, Entry{c, canonical});
    if (!inserted && it->second.category != c)
      throw ConfigError("taxonomy line " + std::to_string(lineno) + ": alias '" + key + "' already maps to " +
                        std::string(canonical_name(it->second.category)));
  }

  std::unordered_map<std::string, Entry> index_;
};

inline Category normalize_label(std::string_view raw) { return Taxonomy::builtin().normalize(raw); }

// ---------------------------------------------------------------------------
// Label sets
// ---------------------------------------------------------------------------

/// Non-empty set of categories; {NonToxic} is exclusive.
class LabelSet {
 public:
  LabelSet() = default;

  LabelSet(std::initializer_list<Category> labels) {
    for (Category c : labels) bits_.set(index_of(c));
    check();
  }

  template <typename Range>
  static LabelSet from(const Range& labels) {
    LabelSet s;
    for (Category c : labels) s.bits_.set(index_of(c));
    s.check();
    return s;
  }

  bool contains(Category c) const noexcept { return bits_.test(index_of(c)); }
  std::size_t size() const noexcept { return bits_.count(); }
  bool empty() const noexcept { return bits_.none(); }
  bool is_non_toxic() const noexcept { return contains(Category::NonToxic); }

  /// Members in taxonomy order.
  std::vector<Category> labels() const {
    std::vector<Category> out;
    for (Category c : kAllCategories)
      if (contains(c)) out.push_back(c);
    return out;
  }

  /// Soft checks. The toxic-label cap is advisory: returns warnings, never throws.
  std::vector<std::string> validate(std::size_t max_toxic = 3) const {
    std::vector<std::string> warnings;
    if (!is_non_toxic() && size() > max_toxic)
      warnings.push_back("label set has " + std::to_string(size()) + " toxic labels (cap " +
                         std::to_string(max_toxic) + ")");
    return warnings;
  }

  std::string to_string(std::string_view sep = ", ") const {
    std::string out;
    for (Category c : labels()) {
      if (!out.empty()) out.append(sep);
      out.append(display_name(c));
    }
    return out;
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  void check() const {
    if (bits_.none()) throw InvalidArgument("label set must not be empty");
    if (contains(Category::NonToxic) && bits_.count() > 1)
      throw ConflictingLabels("NonToxic cannot be combined with toxic labels: " + to_string());
  }

  std::bitset<kCategoryCount> bits_;
};

}  // namespace toxishield
