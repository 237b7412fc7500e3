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

// Evaluation arithmetic: binary and multi-label classification metrics,
// text-style-transfer metrics (DETOX, FL, PRESERVE, J-Score) and weighted
// Cohen's kappa.
//
// Zero-denominator convention: precision, recall, F1 and MCC are reported
// as 0 and the report's `zero_division` flag is raised.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "toxishield/core.hpp"
#include "toxishield/error.hpp"

namespace toxishield::metrics {

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp, fp += o.fp, fn += o.fn, tn += o.tn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

inline double ratio(std::size_t num, std::size_t den, bool& zero_division) {
  if (den == 0) {
    zero_division = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

/// Harmonic mean of precision and recall; 0 when both are 0.
inline double f1_from_pr(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

/// (TP·TN − FP·FN) / √((TP+FP)(TP+FN)(TN+FP)(TN+FN)); 0 if any factor is 0.
inline double binary_mcc(const Counts& c, bool* zero_division = nullptr) {
  const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
  const double a = tp + fp, b = tp + fn, d = tn + fp, e = tn + fn;
  if (a == 0.0 || b == 0.0 || d == 0.0 || e == 0.0) {
    if (zero_division) *zero_division = true;
    return 0.0;
  }
  return (tp * tn - fp * fn) / std::sqrt(a * b * d * e);
}

struct ClassMetrics {
  std::string label;
  Counts counts;
  std::size_t support = 0;  // gold positives
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  bool zero_division = false;
};

inline ClassMetrics class_metrics(std::string label, const Counts& c) {
  ClassMetrics m;
  m.label = std::move(label);
  m.counts = c;
  m.support = c.tp + c.fn;
  m.precision = ratio(c.tp, c.tp + c.fp, m.zero_division);
  m.recall = ratio(c.tp, c.tp + c.fn, m.zero_division);
  m.f1 = f1_from_pr(m.precision, m.recall);
  m.mcc = binary_mcc(c, &m.zero_division);
  return m;
}

/// K×K counts, rows = gold, columns = predicted.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labels)
      : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {
    if (labels_.size() < 2) throw InvalidArgument("confusion matrix needs at least 2 labels");
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  void add(std::size_t gold, std::size_t pred, std::size_t n = 1) {
    if (gold >= size() || pred >= size()) throw InvalidArgument("label index out of range");
    counts_[gold * size() + pred] += n;
  }

  std::size_t at(std::size_t gold, std::size_t pred) const { return counts_.at(gold * size() + pred); }

  std::size_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

  std::size_t row_total(std::size_t gold) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < size(); ++p) s += at(gold, p);
    return s;
  }

  std::size_t col_total(std::size_t pred) const {
    std::size_t s = 0;
    for (std::size_t g = 0; g < size(); ++g) s += at(g, pred);
    return s;
  }

  std::size_t trace() const {
    std::size_t s = 0;
    for (std::size_t k = 0; k < size(); ++k) s += at(k, k);
    return s;
  }

  Counts one_vs_rest(std::size_t k) const {
    Counts c;
    c.tp = at(k, k);
    c.fp = col_total(k) - c.tp;
    c.fn = row_total(k) - c.tp;
    c.tn = total() - c.tp - c.fp - c.fn;
    return c;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> counts_;
};

/// One-vs-rest MCC of class `positive`.
inline double mcc(const ConfusionMatrix& cm, std::size_t positive) {
  if (positive >= cm.size()) throw InvalidArgument("positive class out of range");
  return binary_mcc(cm.one_vs_rest(positive));
}

/// Binary MCC (class index 1 as positive). Requires a 2×2 matrix.
inline double mcc(const ConfusionMatrix& cm) {
  if (cm.size() != 2) throw InvalidArgument("mcc(cm) without a class index needs a 2x2 matrix");
  return mcc(cm, 1);
}

inline std::vector<double> per_class_mcc(const ConfusionMatrix& cm) {
  std::vector<double> out;
  for (std::size_t k = 0; k < cm.size(); ++k) out.push_back(mcc(cm, k));
  return out;
}

struct Aggregate {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  std::size_t instances = 0;
  double accuracy = 0.0;
  double exact_match = 0.0;
  /// Micro-pooled P/R/F1, support-weighted MCC.
  Aggregate avg;
  /// Unweighted mean over classes.
  Aggregate macro;
  /// MCC computed from the pooled counts, reported alongside the weighted one.
  double avg_mcc_pooled = 0.0;
  bool zero_division = false;

  const ClassMetrics& cls(std::string_view label) const {
    for (const auto& c : per_class)
      if (c.label == label) return c;
    throw InvalidArgument("no class '" + std::string(label) + "' in report");
  }
};

struct AggregateOptions {
  /// Leave classes with no gold support and no predictions out of the macro mean.
  bool skip_empty = false;
};

inline void fill_aggregates(MetricsReport& r, const AggregateOptions& opt) {
  Counts pooled;
  double weighted_mcc = 0.0;
  std::size_t support = 0;
  double sp = 0, sr = 0, sf = 0, sm = 0;
  std::size_t n = 0;
  for (const auto& c : r.per_class) {
    pooled += c.counts;
    weighted_mcc += c.mcc * static_cast<double>(c.support);
    support += c.support;
    r.zero_division = r.zero_division || c.zero_division;
    if (opt.skip_empty && c.support == 0 && c.counts.fp == 0) continue;
    sp += c.precision, sr += c.recall, sf += c.f1, sm += c.mcc;
    ++n;
  }
  bool zd = false;
  r.avg.precision = ratio(pooled.tp, pooled.tp + pooled.fp, zd);
  r.avg.recall = ratio(pooled.tp, pooled.tp + pooled.fn, zd);
  r.avg.f1 = f1_from_pr(r.avg.precision, r.avg.recall);
  r.avg.mcc = support ? weighted_mcc / static_cast<double>(support) : 0.0;
  r.avg_mcc_pooled = binary_mcc(pooled, &zd);
  if (n) {
    const double dn = static_cast<double>(n);
    r.macro = {sp / dn, sr / dn, sf / dn, sm / dn};
  }
  r.zero_division = r.zero_division || zd;
}

template <typename T>
void require_pairs(const std::vector<T>& preds, const std::vector<T>& golds) {
  if (preds.size() != golds.size())
    throw LengthMismatch("predictions (" + std::to_string(preds.size()) + ") and gold labels (" +
                         std::to_string(golds.size()) + ") differ in length");
}

inline ConfusionMatrix binary_confusion(const std::vector<BinaryLabel>& preds, const std::vector<BinaryLabel>& golds) {
  require_pairs(preds, golds);
  ConfusionMatrix cm({"non_toxic", "toxic"});
  for (std::size_t i = 0; i < preds.size(); ++i)
    cm.add(static_cast<std::size_t>(golds[i]), static_cast<std::size_t>(preds[i]));
  return cm;
}

/// Per-class P/R/F1 for non-toxic (index 0) and toxic (index 1) plus accuracy.
inline MetricsReport binary_report(const std::vector<BinaryLabel>& preds, const std::vector<BinaryLabel>& golds,
                                   const AggregateOptions& opt = {}) {
  require_pairs(preds, golds);
  if (preds.empty()) throw EmptyInput("binary_report needs at least one instance");
  const auto cm = binary_confusion(preds, golds);
  MetricsReport r;
  r.instances = preds.size();
  for (std::size_t k = 0; k < 2; ++k) r.per_class.push_back(class_metrics(cm.labels()[k], cm.one_vs_rest(k)));
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  r.exact_match = r.accuracy;
  fill_aggregates(r, opt);
  return r;
}

/// EM plus one-vs-rest metrics for each of the 12 taxonomy classes.
inline MetricsReport multilabel_report(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds,
                                       const AggregateOptions& opt = {}) {
  require_pairs(preds, golds);
  MetricsReport r;
  r.instances = preds.size();
  std::size_t exact = 0;
  std::vector<Counts> counts(kCategoryCount);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == golds[i]) ++exact;
    for (Category c : kAllCategories) {
      const bool p = preds[i].contains(c), g = golds[i].contains(c);
      auto& k = counts[index_of(c)];
      if (p && g) ++k.tp;
      else if (p) ++k.fp;
      else if (g) ++k.fn;
      else ++k.tn;
    }
  }
  for (Category c : kAllCategories)
    r.per_class.push_back(class_metrics(std::string(canonical_name(c)), counts[index_of(c)]));
  r.exact_match = r.instances ? static_cast<double>(exact) / static_cast<double>(r.instances) : 0.0;
  r.accuracy = r.exact_match;
  fill_aggregates(r, opt);
  return r;
}

// ---------------------------------------------------------------------------
// Text style transfer
// ---------------------------------------------------------------------------

enum class DetoxMode { net_reduction, style_accuracy };

inline double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// net_reduction: 100·(mean(orig) − mean(detoxed)) / mean(orig), clipped to
/// [0,100]. style_accuracy: 100 · share of detoxed scores below threshold.
inline double detox_reduction(const std::vector<double>& orig, const std::vector<double>& detoxed,
                              DetoxMode mode = DetoxMode::net_reduction, double threshold = 0.5) {
  require_pairs(orig, detoxed);
  if (orig.empty()) throw EmptyInput("detox_reduction needs at least one pair");
  if (mode == DetoxMode::style_accuracy) {
    const auto below = std::count_if(detoxed.begin(), detoxed.end(), [&](double p) { return p < threshold; });
    return 100.0 * static_cast<double>(below) / static_cast<double>(detoxed.size());
  }
  const double base = mean(orig);
  if (base == 0.0) throw ZeroBaseline("mean toxicity of the originals is 0");
  return std::clamp(100.0 * (base - mean(detoxed)) / base, 0.0, 100.0);
}

/// Returns acceptability in [0,1] (a 0/1 verdict or a probability).
using AcceptabilityScorer = std::function<double(const std::string&)>;

inline std::vector<double> acceptability(const std::vector<std::string>& outputs, const AcceptabilityScorer& scorer) {
  std::vector<double> values;
  values.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    double v;
    try {
      v = scorer(outputs[i]);
    } catch (const std::exception& e) {
      throw ScorerError(i, e.what());
    }
    if (!(v >= 0.0 && v <= 1.0)) throw ScorerError(i, "acceptability " + std::to_string(v) + " outside [0,1]");
    values.push_back(v);
  }
  return values;
}

/// 100 · mean acceptability.
inline double fluency(const std::vector<std::string>& outputs, const AcceptabilityScorer& scorer) {
  if (outputs.empty()) throw EmptyInput("fluency needs at least one output");
  return 100.0 * mean(acceptability(outputs, scorer));
}

using Embedder = std::function<std::vector<double>(const std::string&)>;

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("embedding sizes differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i], na += a[i] * a[i], nb += b[i] * b[i];
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct PreservationResult {
  double percent = 0.0;
  std::vector<double> raw;  // unclipped cosine per pair
};

/// 100 · mean of per-pair similarities floored at 0 (and capped at 1).
inline double preservation_from_similarities(const std::vector<double>& sims) {
  if (sims.empty()) throw EmptyInput("preservation needs at least one pair");
  double s = 0;
  for (double v : sims) s += std::clamp(v, 0.0, 1.0);
  return 100.0 * s / static_cast<double>(sims.size());
}

inline PreservationResult preservation(const std::vector<std::pair<std::string, std::string>>& pairs,
                                       const Embedder& embedder) {
  if (pairs.empty()) throw EmptyInput("preservation needs at least one pair");
  PreservationResult out;
  std::size_t dim = 0;
  auto embed = [&](const std::string& text, std::size_t index) {
    std::vector<double> v;
    try {
      v = embedder(text);
    } catch (const std::exception& e) {
      throw ScorerError(index, e.what());
    }
    if (dim == 0) dim = v.size();
    if (v.size() != dim || v.empty())
      throw DimensionMismatch("embedding for pair " + std::to_string(index) + " has dimension " +
                              std::to_string(v.size()) + ", expected " + std::to_string(dim));
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) throw ZeroVector(index);
    return v;
  };
  for (std::size_t i = 0; i < pairs.size(); ++i)
    out.raw.push_back(cosine(embed(pairs[i].first, i), embed(pairs[i].second, i)));
  out.percent = preservation_from_similarities(out.raw);
  return out;
}

/// Harmonic mean of the three TST components; 0 if any is 0.
inline double j_score(double detox, double fl, double preserve) {
  for (double v : {detox, fl, preserve})
    if (!(v >= 0.0 && v <= 100.0)) throw InvalidArgument("J-Score components must be within [0,100]");
  if (detox == 0.0 || fl == 0.0 || preserve == 0.0) return 0.0;
  return 3.0 / (1.0 / detox + 1.0 / fl + 1.0 / preserve);
}

struct TstPair {
  std::string id;
  std::string orig_text;
  std::string detox_text;
  double orig_p = 0.0;
  double detox_p = 0.0;
  double fluent = 0.0;
  double sim = 0.0;
};

struct TstReport {
  double detox = 0.0;
  double fluency = 0.0;
  double preserve = 0.0;
  double j_score = 0.0;
  DetoxMode mode = DetoxMode::net_reduction;
  std::vector<TstPair> pairs;
};

/// Builds a report from per-pair values that are already scored.
inline TstReport tst_report(std::vector<TstPair> pairs, DetoxMode mode = DetoxMode::net_reduction,
                            double threshold = 0.5) {
  if (pairs.empty()) throw EmptyInput("TST report needs at least one pair");
  std::vector<double> orig, detoxed, fluent, sims;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!(p.fluent >= 0.0 && p.fluent <= 1.0)) throw ScorerError(i, "fluent outside [0,1]");
    orig.push_back(p.orig_p), detoxed.push_back(p.detox_p), fluent.push_back(p.fluent), sims.push_back(p.sim);
  }
  TstReport r;
  r.mode = mode;
  r.detox = detox_reduction(orig, detoxed, mode, threshold);
  r.fluency = 100.0 * mean(fluent);
  r.preserve = preservation_from_similarities(sims);
  r.j_score = j_score(r.detox, r.fluency, r.preserve);
  r.pairs = std::move(pairs);
  return r;
}

/// Scores (original, rewrite) pairs with injected backends and builds the report.
template <typename ToxicityFn>
TstReport evaluate_tst(const std::vector<std::pair<std::string, std::string>>& texts, ToxicityFn&& toxicity,
                       const AcceptabilityScorer& scorer, const Embedder& embedder,
                       DetoxMode mode = DetoxMode::net_reduction, double threshold = 0.5) {
  std::vector<std::string> outputs;
  for (const auto& t : texts) outputs.push_back(t.second);
  const auto fl = acceptability(outputs, scorer);
  const auto pres = preservation(texts, embedder);
  std::vector<TstPair> pairs;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    pairs.push_back({std::to_string(i), texts[i].first, texts[i].second, toxicity(texts[i].first),
                     toxicity(texts[i].second), fl[i], pres.raw[i]});
  }
  return tst_report(std::move(pairs), mode, threshold);
}

// ---------------------------------------------------------------------------
// Inter-rater agreement
// ---------------------------------------------------------------------------

enum class Weighting { unweighted, quadratic };

struct AgreementReport {
  double kappa = 0.0;
  Weighting weighting = Weighting::quadratic;
  std::size_t scale = 0;
  double observed_disagreement = 0.0;
  double expected_disagreement = 0.0;
};

/// κ = 1 − Σ w·O / Σ w·E over proportion matrices. Ratings are 1..K.
inline AgreementReport weighted_kappa(const std::vector<int>& a, const std::vector<int>& b, std::size_t K,
                                      Weighting weighting = Weighting::quadratic) {
  require_pairs(a, b);
  if (a.empty()) throw EmptyInput("kappa needs at least one rated item");
  if (K < 2) throw InvalidArgument("rating scale needs at least 2 points");
  const auto n = static_cast<double>(a.size());
  std::vector<double> obs(K * K, 0.0), ra(K, 0.0), rb(K, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 1 || b[i] < 1 || static_cast<std::size_t>(a[i]) > K || static_cast<std::size_t>(b[i]) > K)
      throw InvalidArgument("rating outside 1.." + std::to_string(K) + " at item " + std::to_string(i));
    const auto x = static_cast<std::size_t>(a[i] - 1), y = static_cast<std::size_t>(b[i] - 1);
    obs[x * K + y] += 1.0;
    ra[x] += 1.0;
    rb[y] += 1.0;
  }
  for (auto& v : obs) v /= n;
  for (auto& v : ra) v /= n;
  for (auto& v : rb) v /= n;
  const double span = static_cast<double>((K - 1) * (K - 1));
  AgreementReport r;
  r.weighting = weighting;
  r.scale = K;
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = weighting == Weighting::quadratic ? d * d / span : (i != j ? 1.0 : 0.0);
      r.observed_disagreement += w * obs[i * K + j];
      r.expected_disagreement += w * ra[i] * rb[j];
    }
  // Both raters constant on the same category: no chance disagreement, agreement is perfect.
  r.kappa = r.expected_disagreement == 0.0 ? 1.0 : 1.0 - r.observed_disagreement / r.expected_disagreement;
  return r;
}

}  // namespace toxishield::metrics
