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

// Dataset construction: score-stratified candidate sampling, lexicon
// purification, teacher-generated parallel corpora and reproducible splits.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "toxishield/core.hpp"
#include "toxishield/filter.hpp"
#include "toxishield/llm.hpp"
#include "toxishield/prompts.hpp"
#include "toxishield/stages.hpp"

namespace toxishield::curation {

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

/// Uniform integer in [0, bound) by rejection, so results do not depend on
/// the standard library's distribution implementation.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

/// Fisher-Yates with a seeded mt19937_64.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_below(rng, i)]);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Probability bins
// ---------------------------------------------------------------------------

/// Five contiguous intervals [b0,b1) … [b4,b5]; the last is closed.
struct BinSpec {
  std::array<double, 6> bounds{0.10, 0.28, 0.46, 0.64, 0.82, 1.0};

  static constexpr std::size_t kBins = 5;

  void validate() const {
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
      if (!(bounds[i] < bounds[i + 1])) throw ConfigError("bin bounds must be strictly increasing");
    if (bounds.front() < 0.0 || bounds.back() > 1.0) throw ConfigError("bin bounds must lie within [0,1]");
  }

  std::string describe(std::size_t bin) const {
    const auto lo = bounds.at(bin - 1), hi = bounds.at(bin);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f <= p %s %.2f", lo, bin == kBins ? "<=" : "<", hi);
    return buf;
  }
};

/// Bin number 1..5, or nullopt below the first bound (or above the last).
inline std::optional<std::size_t> assign_bin(ToxicityScore score, const BinSpec& spec = {}) {
  const double p = score.value();
  const auto& b = spec.bounds;
  if (p < b.front() || p > b.back()) return std::nullopt;
  for (std::size_t i = 1; i < BinSpec::kBins; ++i)
    if (p < b[i]) return i;
  return BinSpec::kBins;
}

struct ScoredSample {
  TextSample sample;
  ToxicityScore score;
};

struct Candidate {
  TextSample sample;
  ToxicityScore score;
  std::size_t bin = 0;
};

struct SampleResult {
  std::vector<Candidate> candidates;
  std::array<std::size_t, BinSpec::kBins> available{};
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kDefaultQuotaPerBin = 2100;

/// Seeded shuffle within each bin, then the first min(quota, size) per bin.
/// Output is grouped by bin in ascending order.
inline SampleResult stratified_sample(const std::vector<ScoredSample>& scored, std::size_t quota_per_bin,
                                      std::uint64_t seed, const BinSpec& spec = {}) {
  spec.validate();
  std::array<std::vector<const ScoredSample*>, BinSpec::kBins> bins;
  for (const auto& s : scored)
    if (auto b = assign_bin(s.score, spec)) bins[*b - 1].push_back(&s);

  SampleResult out;
  for (std::size_t b = 0; b < BinSpec::kBins; ++b) {
    auto& items = bins[b];
    out.available[b] = items.size();
    seeded_shuffle(items, mix_seed(seed, b));
    const std::size_t take = std::min(quota_per_bin, items.size());
    if (take < quota_per_bin)
      out.warnings.push_back("bin " + std::to_string(b + 1) + " (" + spec.describe(b + 1) + ") has only " +
                             std::to_string(items.size()) + " of " + std::to_string(quota_per_bin) + " requested");
    for (std::size_t i = 0; i < take; ++i) out.candidates.push_back({items[i]->sample, items[i]->score, b + 1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lexicon purification
// ---------------------------------------------------------------------------

struct FilterResult {
  std::vector<TextSample> kept;
  std::vector<TextSample> removed;
};

/// Removes every sample with at least one word-boundary lexicon hit.
inline FilterResult lexicon_filter(const std::vector<TextSample>& samples, const Lexicon& lexicon) {
  FilterResult out;
  for (const auto& s : samples) (lexicon.profanity_hits(s.body).empty() ? out.kept : out.removed).push_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// Parallel corpus
// ---------------------------------------------------------------------------

struct ParallelPair {
  std::string id;
  std::string toxic_text;
  std::string detoxified_text;
  std::string rationale;
  std::string teacher_model;
  std::string created_at;
};

struct CorpusFailure {
  std::string id;
  std::size_t index = 0;
  std::string kind;
  std::string message;
};

struct CorpusResult {
  std::vector<ParallelPair> pairs;
  std::vector<CorpusFailure> failures;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct CorpusOptions {
  std::size_t concurrency = 1;
  std::function<std::string()> clock = utc_timestamp;
};

/// Detoxifies each sample with the teacher. Failures are recorded, never
/// dropped; outputs keep input order.
inline CorpusResult build_parallel_corpus(const std::vector<TextSample>& toxic, ChatClient& client,
                                          const ReframeConfig& cfg, const GenParams& gen = {},
                                          const CorpusOptions& opt = {}) {
  struct Slot {
    std::optional<ParallelPair> pair;
    std::optional<CorpusFailure> failure;
  };
  std::vector<Slot> slots(toxic.size());
  const std::string teacher = client.model_id();
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < toxic.size(); i = next++) {
      const auto& s = toxic[i];
      try {
        auto r = detoxify(s, client, cfg, gen);
        slots[i].pair = ParallelPair{s.id, s.body, std::move(r.detoxified), std::move(r.rationale), teacher, opt.clock()};
      } catch (const Error& e) {
        slots[i].failure = CorpusFailure{s.id, i, e.kind(), e.what()};
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(opt.concurrency, 1, std::max<std::size_t>(1, toxic.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  CorpusResult out;
  for (auto& slot : slots) {
    if (slot.pair) out.pairs.push_back(std::move(*slot.pair));
    else out.failures.push_back(std::move(*slot.failure));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct SplitSpec {
  std::vector<unsigned> ratios{80, 10, 10};
  std::uint64_t seed = 0;
  bool stratify = false;

  void validate() const {
    if (ratios.size() < 2) throw ConfigError("a split needs at least two parts");
    unsigned sum = 0;
    for (auto r : ratios) sum += r;
    if (sum != 100) throw ConfigError("split ratios must sum to 100, got " + std::to_string(sum));
  }

  std::vector<std::string> names() const {
    if (ratios.size() == 2) return {"train", "test"};
    if (ratios.size() == 3) return {"train", "validation", "test"};
    std::vector<std::string> n{"train"};
    for (std::size_t i = 1; i < ratios.size(); ++i) n.push_back("part" + std::to_string(i));
    return n;
  }
};

template <typename T>
struct Partition {
  std::string name;
  std::vector<T> items;
};

/// Seeded split. Non-train parts get floor(N·ratio) items and the remainder
/// goes to train. With stratification each part's quota is spread over the
/// label groups by largest fractional share, keeping every group within one
/// item of its exact proportion.
template <typename T, typename KeyFn>
std::vector<Partition<T>> split(const std::vector<T>& dataset, const SplitSpec& spec, KeyFn&& key) {
  spec.validate();
  if (dataset.empty()) throw EmptyDataset("cannot split an empty dataset");
  const std::size_t parts = spec.ratios.size();
  const std::size_t n = dataset.size();

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[spec.stratify ? std::string(key(dataset[i])) : std::string()].push_back(i);

  std::vector<std::size_t> target(parts, 0);
  std::size_t assigned = 0;
  for (std::size_t j = 1; j < parts; ++j) assigned += target[j] = n * spec.ratios[j] / 100;
  target[0] = n - assigned;

  // alloc[g][j]: items of group g going to part j.
  std::vector<std::vector<std::size_t>> alloc(groups.size(), std::vector<std::size_t>(parts, 0));
  std::vector<std::size_t> sizes;
  for (const auto& [k, idx] : groups) sizes.push_back(idx.size());
  for (std::size_t j = 1; j < parts; ++j) {
    std::vector<std::pair<double, std::size_t>> frac;
    std::size_t given = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
      const double exact = static_cast<double>(sizes[g]) * spec.ratios[j] / 100.0;
      alloc[g][j] = static_cast<std::size_t>(std::floor(exact));
      given += alloc[g][j];
      frac.emplace_back(exact - std::floor(exact), g);
    }
    std::stable_sort(frac.begin(), frac.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; given < target[j] && r < frac.size(); ++r, ++given) ++alloc[frac[r].second][j];
  }
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    std::size_t used = 0;
    for (std::size_t j = 1; j < parts; ++j) {
      alloc[g][j] = std::min(alloc[g][j], sizes[g] - used);
      used += alloc[g][j];
    }
    alloc[g][0] = sizes[g] - used;
  }

  auto names = spec.names();
  std::vector<Partition<T>> out(parts);
  for (std::size_t j = 0; j < parts; ++j) out[j].name = names[j];
  std::size_t g = 0;
  for (auto& [k, idx] : groups) {
    seeded_shuffle(idx, mix_seed(spec.seed, g));
    std::size_t pos = 0;
    for (std::size_t j = 0; j < parts; ++j)
      for (std::size_t c = 0; c < alloc[g][j]; ++c) out[j].items.push_back(dataset[idx[pos++]]);
    ++g;
  }
  return out;
}

template <typename T>
std::vector<Partition<T>> split(const std::vector<T>& dataset, const SplitSpec& spec) {
  return split(dataset, spec, [](const T&) { return std::string(); });
}

}  // namespace toxishield::curation
