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

// WordPiece tokenization for uncased BERT-family classifiers.
//
// Pipeline: NFC -> lowercase -> whitespace/punctuation pre-split ->
// greedy longest-match-first subwords -> [CLS] ... [SEP] -> tail truncation
// -> [PAD] to a fixed length.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "toxishield/error.hpp"
#include "toxishield/unicode.hpp"

namespace toxishield {

struct SpecialTokens {
  std::string cls = "[CLS]";
  std::string sep = "[SEP]";
  std::string unk = "[UNK]";
  std::string pad = "[PAD]";
};

class Vocab {
 public:
  /// One token per entry; position is the id.
  static Vocab from_tokens(std::vector<std::string> tokens, SpecialTokens specials = {},
                           std::string continuation_prefix = "##") {
    Vocab v;
    v.tokens_ = std::move(tokens);
    v.prefix_ = std::move(continuation_prefix);
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
      auto [it, inserted] = v.ids_.emplace(v.tokens_[i], static_cast<std::int32_t>(i));
      if (!inserted) throw ConfigError("duplicate vocab token '" + v.tokens_[i] + "' at line " + std::to_string(i + 1));
    }
    auto need = [&](const std::string& tok) {
      auto it = v.ids_.find(tok);
      if (it == v.ids_.end()) throw ConfigError("vocab is missing special token " + tok);
      return it->second;
    };
    v.cls_ = need(specials.cls);
    v.sep_ = need(specials.sep);
    v.unk_ = need(specials.unk);
    v.pad_ = need(specials.pad);
    v.specials_ = std::move(specials);
    return v;
  }

  /// Standard vocab.txt: one token per line, line number (0-based) = id.
  static Vocab load(const std::string& path, SpecialTokens specials = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open vocab file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      tokens.push_back(line);
    }
    return from_tokens(std::move(tokens), std::move(specials));
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& continuation_prefix() const noexcept { return prefix_; }
  std::int32_t cls_id() const noexcept { return cls_; }
  std::int32_t sep_id() const noexcept { return sep_; }
  std::int32_t unk_id() const noexcept { return unk_; }
  std::int32_t pad_id() const noexcept { return pad_; }
  const SpecialTokens& specials() const noexcept { return specials_; }

  bool contains(const std::string& token) const { return ids_.count(token) != 0; }

  std::int32_t id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? unk_ : it->second;
  }

  const std::string& token(std::int32_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
      throw InvalidArgument("token id out of range: " + std::to_string(id));
    return tokens_[static_cast<std::size_t>(id)];
  }

 private:
  Vocab() = default;

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> ids_;
  std::string prefix_;
  SpecialTokens specials_;
  std::int32_t cls_ = 0, sep_ = 0, unk_ = 0, pad_ = 0;
};

struct TokenSequence {
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> attention_mask;
  /// Number of unmasked positions (content plus CLS/SEP).
  std::size_t length = 0;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

inline constexpr std::size_t kDefaultMaxLen = 128;

/// Words longer than this (in codepoints) go straight to [UNK], as in BERT.
inline constexpr std::size_t kMaxCharsPerWord = 100;

/// Greedy longest-match-first split of one pre-token.
inline std::vector<std::string> wordpiece_split(std::string_view word, const Vocab& vocab) {
  const auto cps = unicode::codepoints(word);
  if (cps.empty()) return {};
  if (cps.size() > kMaxCharsPerWord) return {vocab.specials().unk};

  std::vector<std::string> pieces;
  std::size_t start = 0;
  std::string candidate;
  while (start < cps.size()) {
    std::size_t end = cps.size();
    bool found = false;
    while (end > start) {
      const std::size_t b = cps[start].offset;
      const std::size_t e = cps[end - 1].offset + cps[end - 1].length;
      candidate.clear();
      if (start > 0) candidate = vocab.continuation_prefix();
      candidate.append(word.substr(b, e - b));
      if (vocab.contains(candidate)) {
        found = true;
        break;
      }
      --end;
    }
    if (!found) return {vocab.specials().unk};
    pieces.push_back(candidate);
    start = end;
  }
  return pieces;
}

/// NFC + lowercase, then split on whitespace; every other non-word codepoint
/// is its own pre-token. Control and format characters are dropped.
inline std::vector<std::string> basic_pre_tokenize(std::string_view text) {
  const std::string normalized = unicode::lowercase(unicode::nfc(text));
  std::vector<std::string> out;
  std::string current;
  for (const auto& cp : unicode::codepoints(normalized)) {
    const std::string_view bytes = std::string_view(normalized).substr(cp.offset, cp.length);
    if (unicode::is_space(cp.value)) {
      if (!current.empty()) out.push_back(std::move(current)), current.clear();
    } else if (unicode::is_control(cp.value) || cp.value == 0xFFFD) {
      continue;
    } else if (unicode::is_word_char(cp.value)) {
      current.append(bytes);
    } else {
      if (!current.empty()) out.push_back(std::move(current)), current.clear();
      out.emplace_back(bytes);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

/// Fixed-length encoding. Throws EmptyInput for blank text and
/// InvalidArgument when max_len < 3.
inline TokenSequence tokenize(std::string_view text, const Vocab& vocab, std::size_t max_len = kDefaultMaxLen) {
  if (max_len < 3) throw InvalidArgument("max_len must be at least 3, got " + std::to_string(max_len));
  bool blank = true;
  for (const auto& cp : unicode::codepoints(text))
    if (!unicode::is_space(cp.value)) {
      blank = false;
      break;
    }
  if (blank) throw EmptyInput("cannot tokenize empty text");

  const std::size_t content_cap = max_len - 2;
  TokenSequence seq;
  seq.ids.reserve(max_len);
  seq.ids.push_back(vocab.cls_id());
  for (const auto& word : basic_pre_tokenize(text)) {
    for (const auto& piece : wordpiece_split(word, vocab)) {
      if (seq.ids.size() - 1 == content_cap) break;
      seq.ids.push_back(vocab.id(piece));
    }
    if (seq.ids.size() - 1 == content_cap) break;
  }
  seq.ids.push_back(vocab.sep_id());
  seq.length = seq.ids.size();
  seq.attention_mask.assign(seq.length, 1);
  seq.ids.resize(max_len, vocab.pad_id());
  seq.attention_mask.resize(max_len, 0);
  return seq;
}

/// Content ids (between CLS and SEP) rejoined into words; continuation
/// pieces are glued to the previous piece.
inline std::vector<std::string> detokenize(const TokenSequence& seq, const Vocab& vocab) {
  std::vector<std::string> words;
  const auto& prefix = vocab.continuation_prefix();
  for (std::size_t i = 1; i + 1 < seq.length; ++i) {
    const std::string& tok = vocab.token(seq.ids[i]);
    if (!words.empty() && tok.size() > prefix.size() && tok.compare(0, prefix.size(), prefix) == 0)
      words.back().append(tok, prefix.size());
    else
      words.push_back(tok);
  }
  return words;
}

}  // namespace toxishield
