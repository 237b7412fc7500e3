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

// Binary toxicity filter: a serialized sequence classifier or a
// deterministic lexicon surrogate, followed by threshold gating.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toxishield/core.hpp"
#include "toxishield/error.hpp"
#include "toxishield/tokenizer.hpp"
#include "toxishield/unicode.hpp"

namespace toxishield {

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

/// Case-folded word sequence; '_' counts as a word character so identifiers
/// such as `is_disgusting_for` stay whole.
inline std::vector<std::string> lexicon_words(std::string_view text) {
  const std::string folded = unicode::fold(text);
  std::vector<std::string> words;
  std::string cur;
  for (const auto& cp : unicode::codepoints(folded)) {
    if (unicode::is_word_char(cp.value) || cp.value == U'_') {
      cur.append(std::string_view(folded).substr(cp.offset, cp.length));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

struct AngerPattern {
  std::string name;
  std::string source;
  std::regex re;
};

inline constexpr std::string_view kDefaultAngerPatterns = R"(# name = ECMAScript regex, matched against the raw text
shouting = \b[A-Z]{4,}(?:\s+[A-Z]{4,})+\b
repeated_exclamation = !{2,}
repeated_question = \?{2,}
interrobang = \?!|!\?
)";

class Lexicon {
 public:
  Lexicon() = default;

  /// Terms are folded; multi-word terms match consecutive words.
  Lexicon(const std::vector<std::string>& terms, std::vector<AngerPattern> anger)
      : anger_(std::move(anger)) {
    for (const auto& t : terms) add_term(t);
  }

  static Lexicon with_default_anger(const std::vector<std::string>& terms) {
    return Lexicon(terms, parse_anger_patterns(kDefaultAngerPatterns));
  }

  /// One term per line, '#' comments.
  static std::vector<std::string> parse_terms(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      auto v = trim(line);
      if (!v.empty()) out.emplace_back(v);
    }
    return out;
  }

  static std::vector<AngerPattern> parse_anger_patterns(std::string_view text) {
    std::vector<AngerPattern> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto v = trim(line);
      if (v.empty() || v.front() == '#') continue;
      auto eq = v.find('=');
      if (eq == std::string_view::npos) throw ConfigError("anger pattern line " + std::to_string(lineno) + " has no '='");
      std::string name(trim(v.substr(0, eq)));
      std::string src(trim(v.substr(eq + 1)));
      try {
        out.push_back({name, src, std::regex(src, std::regex::ECMAScript)});
      } catch (const std::regex_error& e) {
        throw ConfigError("anger pattern '" + name + "': " + e.what());
      }
    }
    return out;
  }

  static Lexicon load(const std::string& terms_path, const std::string& anger_path = {}) {
    auto slurp = [](const std::string& p) {
      std::ifstream in(p);
      if (!in) throw ConfigError("cannot open " + p);
      std::stringstream buf;
      buf << in.rdbuf();
      return buf.str();
    };
    auto terms = parse_terms(slurp(terms_path));
    auto anger = parse_anger_patterns(anger_path.empty() ? std::string(kDefaultAngerPatterns) : slurp(anger_path));
    return Lexicon(terms, std::move(anger));
  }

  void add_term(std::string_view term) {
    auto words = lexicon_words(term);
    if (words.empty()) return;
    std::string key;
    for (const auto& w : words) key += (key.empty() ? "" : " ") + w;
    terms_.insert(key);
    max_words_ = std::max(max_words_, words.size());
  }

  bool empty() const noexcept { return terms_.empty(); }
  std::size_t term_count() const noexcept { return terms_.size(); }
  const std::set<std::string>& terms() const noexcept { return terms_; }
  const std::vector<AngerPattern>& anger_patterns() const noexcept { return anger_; }

  /// Distinct terms found on word boundaries.
  std::set<std::string> profanity_hits(std::string_view text) const {
    std::set<std::string> hits;
    if (terms_.empty()) return hits;
    const auto words = lexicon_words(text);
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::string key;
      for (std::size_t n = 0; n < max_words_ && i + n < words.size(); ++n) {
        if (n) key += ' ';
        key += words[i + n];
        if (terms_.count(key)) hits.insert(key);
      }
    }
    return hits;
  }

  /// Names of the anger patterns that fire at least once.
  std::set<std::string> anger_hits(std::string_view text) const {
    std::set<std::string> hits;
    const std::string s(text);
    for (const auto& p : anger_)
      if (std::regex_search(s, p.re)) hits.insert(p.name);
    return hits;
  }

 private:
  std::set<std::string> terms_;
  std::size_t max_words_ = 0;
  std::vector<AngerPattern> anger_;
};

/// p = 1 - 0.1^h * 0.7^a, with h profanity hits and a anger-pattern hits.
inline double lexicon_probability(std::size_t profanity_hits, std::size_t anger_hits) {
  const double p = 1.0 - std::pow(0.1, static_cast<double>(profanity_hits)) *
                             std::pow(0.7, static_cast<double>(anger_hits));
  return std::clamp(p, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Serialized classifier
// ---------------------------------------------------------------------------

/// Anything that maps a fixed-length token sequence to class logits.
class SequenceClassifier {
 public:
  virtual ~SequenceClassifier() = default;
  virtual std::vector<float> logits(const TokenSequence& seq) const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual const std::string& model_id() const = 0;
};

enum class TensorType : std::uint32_t { f32 = 0, int8 = 1 };

/// Bag-of-subwords graph: masked mean of embedding rows, then a dense head.
///
/// File layout (little endian):
///   "TXSMODEL" u32 version=1 u32 dtype u32 vocab u32 dim u32 outputs
///   u32 id_len, id bytes
///   embedding[vocab*dim], weight[dim*outputs], bias[outputs]
/// Each int8 tensor is prefixed by f32 scale and i32 zero point and stores
/// real = scale * (q - zero_point).
class EmbeddingBagClassifier final : public SequenceClassifier {
 public:
  static constexpr std::string_view kMagic = "TXSMODEL";
  static constexpr std::uint32_t kVersion = 1;

  EmbeddingBagClassifier(std::string id, std::size_t vocab, std::size_t dim, std::size_t outputs,
                         std::vector<float> embedding, std::vector<float> weight, std::vector<float> bias)
      : id_(std::move(id)),
        vocab_(vocab),
        dim_(dim),
        outputs_(outputs),
        embedding_(std::move(embedding)),
        weight_(std::move(weight)),
        bias_(std::move(bias)) {
    if (embedding_.size() != vocab_ * dim_ || weight_.size() != dim_ * outputs_ || bias_.size() != outputs_)
      throw ShapeError("tensor sizes do not match declared shape");
  }

  static std::shared_ptr<const EmbeddingBagClassifier> load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelLoadError("cannot open model file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(bytes, path);
  }

  static std::shared_ptr<const EmbeddingBagClassifier> parse(std::string_view bytes, const std::string& origin = "<memory>") {
    Reader r{bytes, 0, origin};
    if (r.take(kMagic.size()) != kMagic) throw ModelLoadError(origin + ": bad magic");
    if (r.u32() != kVersion) throw ModelLoadError(origin + ": unsupported version");
    const auto dtype = r.u32();
    if (dtype > 1) throw ModelLoadError(origin + ": unknown tensor type " + std::to_string(dtype));
    const std::size_t vocab = r.u32(), dim = r.u32(), outputs = r.u32();
    if (vocab == 0 || dim == 0) throw ModelLoadError(origin + ": empty tensor shape");
    if (outputs != 2) throw ShapeError(origin + ": classifier head has " + std::to_string(outputs) + " outputs, expected 2");
    std::string id(r.take(r.u32()));
    const auto type = static_cast<TensorType>(dtype);
    auto emb = r.tensor(type, vocab * dim);
    auto w = r.tensor(type, dim * outputs);
    auto b = r.tensor(type, outputs);
    if (r.pos != bytes.size()) throw ModelLoadError(origin + ": trailing bytes after tensors");
    return std::make_shared<EmbeddingBagClassifier>(std::move(id), vocab, dim, outputs, std::move(emb), std::move(w),
                                                    std::move(b));
  }

  /// Serializes; int8 uses symmetric-range affine quantization per tensor.
  std::string serialize(TensorType type) const {
    std::string out(kMagic);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(type));
    put_u32(out, static_cast<std::uint32_t>(vocab_));
    put_u32(out, static_cast<std::uint32_t>(dim_));
    put_u32(out, static_cast<std::uint32_t>(outputs_));
    put_u32(out, static_cast<std::uint32_t>(id_.size()));
    out += id_;
    for (const auto* t : {&embedding_, &weight_, &bias_}) put_tensor(out, type, *t);
    return out;
  }

  std::vector<float> logits(const TokenSequence& seq) const override {
    std::vector<double> pooled(dim_, 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
      if (!seq.attention_mask[i]) continue;
      const auto id = static_cast<std::size_t>(seq.ids[i]);
      if (id >= vocab_) throw ShapeError("token id " + std::to_string(id) + " outside model vocab");
      const float* row = embedding_.data() + id * dim_;
      for (std::size_t d = 0; d < dim_; ++d) pooled[d] += row[d];
      ++n;
    }
    if (n) for (auto& v : pooled) v /= static_cast<double>(n);
    std::vector<float> out(outputs_);
    for (std::size_t o = 0; o < outputs_; ++o) {
      double acc = bias_[o];
      for (std::size_t d = 0; d < dim_; ++d) acc += pooled[d] * weight_[d * outputs_ + o];
      out[o] = static_cast<float>(acc);
    }
    return out;
  }

  std::size_t vocab_size() const override { return vocab_; }
  const std::string& model_id() const override { return id_; }
  std::size_t dim() const noexcept { return dim_; }

 private:
  struct Reader {
    std::string_view bytes;
    std::size_t pos;
    const std::string& origin;

    std::string_view take(std::size_t n) {
      if (bytes.size() - pos < n) throw ModelLoadError(origin + ": truncated model file");
      auto v = bytes.substr(pos, n);
      pos += n;
      return v;
    }
    template <typename T>
    T scalar() {
      auto v = take(sizeof(T));
      T out;
      std::memcpy(&out, v.data(), sizeof(T));
      if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) out = byteswap(out);
      return out;
    }
    std::uint32_t u32() { return scalar<std::uint32_t>(); }
    std::vector<float> tensor(TensorType type, std::size_t count) {
      std::vector<float> out(count);
      if (type == TensorType::f32) {
        for (auto& v : out) v = scalar<float>();
        return out;
      }
      const float scale = scalar<float>();
      const auto zero = scalar<std::int32_t>();
      if (!(scale > 0.0f) || !std::isfinite(scale)) throw ModelLoadError(origin + ": invalid quantization scale");
      for (auto& v : out) v = scale * static_cast<float>(static_cast<std::int32_t>(scalar<std::int8_t>()) - zero);
      return out;
    }
    template <typename T>
    static T byteswap(T v) {
      T out;
      auto* src = reinterpret_cast<const unsigned char*>(&v);
      auto* dst = reinterpret_cast<unsigned char*>(&out);
      for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
      return out;
    }
  };

  template <typename T>
  static void put(std::string& out, T v) {
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) v = Reader::byteswap(v);
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  static void put_u32(std::string& out, std::uint32_t v) { put(out, v); }

  static void put_tensor(std::string& out, TensorType type, const std::vector<float>& t) {
    if (type == TensorType::f32) {
      for (float v : t) put(out, v);
      return;
    }
    float lo = 0.0f, hi = 0.0f;
    for (float v : t) lo = std::min(lo, v), hi = std::max(hi, v);
    float scale = (hi - lo) / 255.0f;
    if (!(scale > 0.0f)) scale = 1.0f;
    const auto zero = static_cast<std::int32_t>(std::lround(-128.0f - lo / scale));
    put(out, scale);
    put(out, zero);
    for (float v : t) {
      const long q = std::lround(v / scale) + zero;
      put(out, static_cast<std::int8_t>(std::clamp<long>(q, -128, 127)));
    }
  }

  std::string id_;
  std::size_t vocab_, dim_, outputs_;
  std::vector<float> embedding_, weight_, bias_;
};

/// Probability of class 1 under a numerically stable two-way softmax.
inline double toxic_probability(const std::vector<float>& logits) {
  if (logits.size() != 2) throw ShapeError("expected 2 logits, got " + std::to_string(logits.size()));
  const double l0 = logits[0], l1 = logits[1];
  const double m = std::max(l0, l1);
  const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
  return e1 / (e0 + e1);
}

// ---------------------------------------------------------------------------
// Handle, score, decide
// ---------------------------------------------------------------------------

enum class Backend { serialized_model, lexicon };

inline std::string_view to_string(Backend b) { return b == Backend::lexicon ? "lexicon" : "serialized_model"; }

inline Backend backend_from_string(std::string_view s) {
  if (s == "lexicon") return Backend::lexicon;
  if (s == "serialized_model" || s == "model" || s == "onnx") return Backend::serialized_model;
  throw ConfigError("unknown filter backend '" + std::string(s) + "'");
}

inline constexpr double kDefaultThreshold = 0.5;

/// A loaded classifier. Cheap to copy; all state is shared and read-only.
class ClassifierHandle {
 public:
  static ClassifierHandle from_lexicon(Lexicon lexicon, double threshold = kDefaultThreshold,
                                       std::string model_id = "lexicon") {
    ClassifierHandle h;
    h.backend_ = Backend::lexicon;
    h.lexicon_ = std::make_shared<const Lexicon>(std::move(lexicon));
    h.model_id_ = std::move(model_id);
    h.set_threshold(threshold);
    return h;
  }

  static ClassifierHandle from_model(std::shared_ptr<const SequenceClassifier> model,
                                     std::shared_ptr<const Vocab> vocab, double threshold = kDefaultThreshold,
                                     std::size_t max_len = kDefaultMaxLen) {
    if (!model || !vocab) throw ModelLoadError("serialized backend needs both a model and a vocab");
    if (model->vocab_size() != vocab->size())
      throw ModelLoadError("model expects a vocab of " + std::to_string(model->vocab_size()) + " tokens, vocab has " +
                           std::to_string(vocab->size()));
    if (max_len < 3) throw ConfigError("tokenizer.max_len must be >= 3");
    ClassifierHandle h;
    h.backend_ = Backend::serialized_model;
    h.model_ = std::move(model);
    h.vocab_ = std::move(vocab);
    h.model_id_ = h.model_->model_id();
    h.max_len_ = max_len;
    h.set_threshold(threshold);
    return h;
  }

  static ClassifierHandle load_model(const std::string& model_path, const std::string& vocab_path,
                                     double threshold = kDefaultThreshold, std::size_t max_len = kDefaultMaxLen) {
    return from_model(EmbeddingBagClassifier::load(model_path), std::make_shared<const Vocab>(Vocab::load(vocab_path)),
                      threshold, max_len);
  }

  Backend backend() const noexcept { return backend_; }
  const std::string& model_id() const noexcept { return model_id_; }
  double threshold() const noexcept { return threshold_; }
  std::size_t max_len() const noexcept { return max_len_; }
  const Lexicon* lexicon() const noexcept { return lexicon_.get(); }
  const Vocab* vocab() const noexcept { return vocab_.get(); }
  const SequenceClassifier* model() const noexcept { return model_.get(); }

 private:
  void set_threshold(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("filter.threshold must be within [0,1]");
    threshold_ = t;
  }

  Backend backend_ = Backend::lexicon;
  std::shared_ptr<const Lexicon> lexicon_;
  std::shared_ptr<const SequenceClassifier> model_;
  std::shared_ptr<const Vocab> vocab_;
  std::string model_id_;
  double threshold_ = kDefaultThreshold;
  std::size_t max_len_ = kDefaultMaxLen;
};

inline ToxicityScore score(const TextSample& sample, const ClassifierHandle& handle) {
  require_body(sample);
  if (handle.backend() == Backend::lexicon) {
    const auto& lex = *handle.lexicon();
    return ToxicityScore(lexicon_probability(lex.profanity_hits(sample.body).size(), lex.anger_hits(sample.body).size()));
  }
  const auto seq = tokenize(sample.body, *handle.vocab(), handle.max_len());
  return ToxicityScore(toxic_probability(handle.model()->logits(seq)));
}

/// Inclusive threshold: toxic iff p >= threshold.
inline BinaryLabel decide(ToxicityScore score, double threshold = kDefaultThreshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("threshold must be within [0,1]");
  return score.value() >= threshold ? BinaryLabel::toxic : BinaryLabel::non_toxic;
}

}  // namespace toxishield
