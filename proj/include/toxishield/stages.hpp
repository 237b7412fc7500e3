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

// Coach and Reframer calls: prompt -> completion -> parse, retrying on
// unparseable output.

#include <string>

#include "toxishield/core.hpp"
#include "toxishield/llm.hpp"
#include "toxishield/parse.hpp"
#include "toxishield/prompts.hpp"

namespace toxishield {

namespace detail {

/// Runs `parse` on completions of `prompt`; on a parse error re-asks with
/// `suffix` appended, at most `gen.retries` more times. ClientError is not
/// retried here.
template <typename Parse>
auto complete_with_retries(ChatClient& client, const std::string& prompt, std::string_view suffix,
                           const GenParams& gen, Parse&& parse) {
  std::string last_kind, last_message;
  for (std::size_t attempt = 0; attempt <= gen.retries; ++attempt) {
    const std::string text = attempt == 0 ? prompt : prompt + "\n\n" + std::string(suffix);
    const std::string raw = client.complete(text, gen);
    try {
      auto result = parse(raw);
      result.retry_count = attempt;
      return result;
    } catch (const ClientError&) {
      throw;
    } catch (const Error& e) {
      last_kind = e.kind();
      last_message = e.what();
    }
  }
  throw ExhaustedRetries(gen.retries + 1, last_kind, last_message);
}

}  // namespace detail

inline ClassificationResult classify_subcategories(const TextSample& sample, ChatClient& client,
                                                   const PromptConfig& cfg, const GenParams& gen = {},
                                                   const Taxonomy& taxonomy = Taxonomy::builtin()) {
  require_body(sample);
  const Prompt prompt = build_coach_prompt(sample, cfg);
  return detail::complete_with_retries(client, prompt.text, kCoachRetrySuffix, gen,
                                       [&](const std::string& raw) { return parse_coach_response(raw, taxonomy); });
}

inline DetoxResult detoxify(const TextSample& sample, ChatClient& client, const ReframeConfig& cfg,
                            const GenParams& gen = {}) {
  const Prompt prompt = build_reframe_prompt(sample, cfg);
  return detail::complete_with_retries(client, prompt.text, kReframeRetrySuffix, gen,
                                       [](const std::string& raw) { return parse_reframe_response(raw); });
}

}  // namespace toxishield
