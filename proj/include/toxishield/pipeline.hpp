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

#include <chrono>
#include <cstdint>
#include <future>
#include <memory>
#include <optional>
#include <string>

#include "toxishield/core.hpp"
#include "toxishield/filter.hpp"
#include "toxishield/llm.hpp"
#include "toxishield/parse.hpp"
#include "toxishield/prompts.hpp"
#include "toxishield/stages.hpp"

namespace toxishield {

struct StageFailure {
  std::string kind;
  std::string message;
};

struct Timings {
  double filter_ms = 0.0;
  /// Wall time of the Coach/Reframer block.
  double downstream_ms = 0.0;
  double total_ms = 0.0;
  double coach_ms = 0.0;
  double reframer_ms = 0.0;
};

struct AnalysisVerdict {
  std::string id;
  ToxicityScore score;
  BinaryLabel label = BinaryLabel::non_toxic;
  std::optional<ClassificationResult> classification;
  std::optional<DetoxResult> detox;
  std::optional<StageFailure> coach_error;
  std::optional<StageFailure> reframer_error;
  Timings timings;

  bool coach_degraded() const noexcept { return coach_error.has_value(); }
  bool reframer_degraded() const noexcept { return reframer_error.has_value(); }
};

struct PipelineOptions {
  GenParams coach_gen;
  GenParams reframer_gen;
  /// Run Coach and Reframer one after the other instead of concurrently.
  bool serial = false;
};

/// Filter -> (Coach ‖ Reframer). Immutable after construction and safe to
/// share across request threads, provided the chat client is.
class Pipeline {
 public:
  Pipeline(ClassifierHandle filter, std::shared_ptr<ChatClient> client, PromptConfig coach, ReframeConfig reframe,
           PipelineOptions options = {}, std::shared_ptr<const Taxonomy> taxonomy = nullptr)
      : filter_(std::move(filter)),
        client_(std::move(client)),
        coach_(std::move(coach)),
        reframe_(std::move(reframe)),
        options_(options),
        taxonomy_(taxonomy ? std::move(taxonomy) : std::shared_ptr<const Taxonomy>(&Taxonomy::builtin(), [](auto*) {})) {
    coach_.validate();
  }

  const ClassifierHandle& filter() const noexcept { return filter_; }
  const PromptConfig& coach_config() const noexcept { return coach_; }
  const ReframeConfig& reframe_config() const noexcept { return reframe_; }
  const Taxonomy& taxonomy() const noexcept { return *taxonomy_; }
  const PipelineOptions& options() const noexcept { return options_; }

  /// Non-toxic input returns right after the filter with no LLM traffic.
  /// Downstream failures set the stage's error and never abort.
  AnalysisVerdict analyze(const TextSample& sample) const {
    using clock = std::chrono::steady_clock;
    require_body(sample);
    AnalysisVerdict v;
    v.id = sample.id;
    const auto t0 = clock::now();
    v.score = score(sample, filter_);
    v.label = decide(v.score, filter_.threshold());
    const auto t1 = clock::now();
    if (v.label == BinaryLabel::toxic) {
      if (client_ && !options_.serial) {
        auto coach = std::async(std::launch::async, [&] { return run_coach(sample); });
        run_reframer(sample, v);
        auto [result, err, ms] = coach.get();
        v.classification = std::move(result);
        v.coach_error = std::move(err);
        v.timings.coach_ms = ms;
      } else {
        auto [result, err, ms] = run_coach(sample);
        v.classification = std::move(result);
        v.coach_error = std::move(err);
        v.timings.coach_ms = ms;
        run_reframer(sample, v);
      }
    }
    const auto t2 = clock::now();
    v.timings.filter_ms = ms_between(t0, t1);
    v.timings.downstream_ms = ms_between(t1, t2);
    v.timings.total_ms = ms_between(t0, t2);
    return v;
  }

  ClassificationResult classify(const TextSample& sample) const {
    return classify_subcategories(sample, require_client(), coach_, options_.coach_gen, *taxonomy_);
  }

  DetoxResult detoxify(const TextSample& sample) const {
    return toxishield::detoxify(sample, require_client(), reframe_, options_.reframer_gen);
  }

 private:
  struct CoachOutcome {
    std::optional<ClassificationResult> result;
    std::optional<StageFailure> error;
    double ms = 0.0;
  };

  static double ms_between(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  }

  ChatClient& require_client() const {
    if (!client_) throw ConfigError("no LLM client configured");
    return *client_;
  }

  template <typename Fn>
  static auto guarded(Fn&& fn) -> std::pair<std::optional<decltype(fn())>, std::optional<StageFailure>> {
    try {
      return {fn(), std::nullopt};
    } catch (const Error& e) {
      return {std::nullopt, StageFailure{e.kind(), e.what()}};
    } catch (const std::exception& e) {
      return {std::nullopt, StageFailure{"InternalError", e.what()}};
    }
  }

  CoachOutcome run_coach(const TextSample& sample) const {
    const auto start = std::chrono::steady_clock::now();
    auto [result, err] = guarded([&] { return classify(sample); });
    return {std::move(result), std::move(err), ms_between(start, std::chrono::steady_clock::now())};
  }

  void run_reframer(const TextSample& sample, AnalysisVerdict& v) const {
    const auto start = std::chrono::steady_clock::now();
    auto [result, err] = guarded([&] { return detoxify(sample); });
    v.detox = std::move(result);
    v.reframer_error = std::move(err);
    v.timings.reframer_ms = ms_between(start, std::chrono::steady_clock::now());
  }

  ClassifierHandle filter_;
  std::shared_ptr<ChatClient> client_;
  PromptConfig coach_;
  ReframeConfig reframe_;
  PipelineOptions options_;
  std::shared_ptr<const Taxonomy> taxonomy_;
};

}  // namespace toxishield
