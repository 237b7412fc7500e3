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

// Service configuration: an INI file, TOXISHIELD_<SECTION>_<KEY> environment
// overrides, and LLM_ENDPOINT / LLM_MODEL / LLM_API_KEY.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "toxishield/core.hpp"
#include "toxishield/filter.hpp"
#include "toxishield/llm.hpp"
#include "toxishield/pipeline.hpp"
#include "toxishield/prompts.hpp"

#ifndef TOXISHIELD_DEFAULT_DATA_DIR
#define TOXISHIELD_DEFAULT_DATA_DIR "data"
#endif

namespace toxishield {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

struct ServiceConfig {
  // [server]
  std::string host = "127.0.0.1";
  int port = 8787;
  std::vector<std::string> cors_origins;
  std::size_t threads = 8;
  // [filter]
  Backend backend = Backend::lexicon;
  std::string model_path;
  std::string vocab_path;
  std::string lexicon_path;
  std::string anger_path;
  double threshold = kDefaultThreshold;
  // [tokenizer]
  std::size_t max_len = kDefaultMaxLen;
  // [llm]
  std::string llm_endpoint;
  std::string llm_model;
  std::string api_key_env = "LLM_API_KEY";
  std::string api_key;  // environment only
  GenParams coach_gen;
  GenParams reframer_gen;
  std::size_t llm_max_concurrency = 8;
  // [prompt]
  PromptStage stage = kDefaultStage;
  std::string data_dir = TOXISHIELD_DEFAULT_DATA_DIR;
  std::string taxonomy_path;
  std::string coach_prompt_path;
  std::string reframe_prompt_path;
  // [pipeline]
  bool serial = false;

  std::string data_file(const std::string& configured, const std::string& fallback) const {
    if (!configured.empty()) return configured;
    return (std::filesystem::path(data_dir) / fallback).string();
  }

  void validate() const {
    if (port < 0 || port > 65535) throw ConfigError("server.port out of range");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("filter.threshold must be within [0,1]");
    if (max_len < 3) throw ConfigError("tokenizer.max_len must be >= 3");
    if (backend == Backend::serialized_model && (model_path.empty() || vocab_path.empty()))
      throw ConfigError("serialized_model backend needs filter.model_path and filter.vocab_path");
    for (const auto* g : {&coach_gen, &reframer_gen})
      if (g->temperature < 0.0 || g->max_output_tokens == 0 || g->timeout.count() <= 0)
        throw ConfigError("invalid llm generation parameters");
  }

  /// Parses INI text; `base_dir` anchors relative paths.
  static ServiceConfig parse(const std::string& text, const EnvLookup& env = process_env,
                             const std::filesystem::path& base_dir = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& [section, keys] : tree)
      for (const auto& [key, value] : keys)
        if (key == "api_key" || key == "key" || key == "secret" || key == "token")
          throw ConfigError("config: secrets are read from the environment only (" + section + "." + key + ")");

    ServiceConfig c;
    auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
      std::string env_name = "TOXISHIELD_" + section + "_" + key;
      for (auto& ch : env_name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      if (auto v = env(env_name)) return v;
      if (auto v = tree.get_optional<std::string>(section + "." + key)) return std::string(trim(*v));
      return std::nullopt;
    };
    auto path = [&](const std::string& section, const std::string& key, std::string& dst) {
      if (auto v = get(section, key); v && !v->empty()) {
        std::filesystem::path p(*v);
        dst = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
      }
    };
    auto num = [&](const std::string& section, const std::string& key, auto& dst) {
      if (auto v = get(section, key)) {
        try {
          using T = std::decay_t<decltype(dst)>;
          if constexpr (std::is_floating_point_v<T>) dst = std::stod(*v);
          else dst = static_cast<T>(std::stoll(*v));
        } catch (const std::exception&) {
          throw ConfigError("config: " + section + "." + key + " is not a number: '" + *v + "'");
        }
      }
    };
    auto flag = [&](const std::string& section, const std::string& key, bool& dst) {
      if (auto v = get(section, key)) dst = (*v == "1" || *v == "true" || *v == "yes" || *v == "on");
    };

    if (auto v = get("server", "host")) c.host = *v;
    num("server", "port", c.port);
    num("server", "threads", c.threads);
    if (auto v = get("server", "cors_origins")) {
      std::istringstream s(*v);
      std::string item;
      while (std::getline(s, item, ','))
        if (auto t = trim(item); !t.empty()) c.cors_origins.emplace_back(t);
    }

    if (auto v = get("filter", "backend")) c.backend = backend_from_string(*v);
    path("filter", "model_path", c.model_path);
    path("filter", "vocab_path", c.vocab_path);
    path("filter", "lexicon_path", c.lexicon_path);
    path("filter", "anger_path", c.anger_path);
    num("filter", "threshold", c.threshold);
    num("tokenizer", "max_len", c.max_len);

    if (auto v = get("llm", "endpoint")) c.llm_endpoint = *v;
    if (auto v = get("llm", "model")) c.llm_model = *v;
    if (auto v = get("llm", "api_key_env")) c.api_key_env = *v;
    double temperature = 0.0;
    std::size_t max_tokens = 256, retries = 2;
    long long timeout_ms = 30000;
    num("llm", "temperature", temperature);
    num("llm", "max_output_tokens", max_tokens);
    num("llm", "retries", retries);
    num("llm", "timeout_ms", timeout_ms);
    num("llm", "max_concurrency", c.llm_max_concurrency);
    for (auto* g : {&c.coach_gen, &c.reframer_gen}) {
      g->temperature = temperature;
      g->max_output_tokens = max_tokens;
      g->retries = retries;
      g->timeout = std::chrono::milliseconds(timeout_ms);
    }
    long long coach_ms = 0, reframer_ms = 0;
    num("llm", "coach_timeout_ms", coach_ms);
    num("llm", "reframer_timeout_ms", reframer_ms);
    if (coach_ms > 0) c.coach_gen.timeout = std::chrono::milliseconds(coach_ms);
    if (reframer_ms > 0) c.reframer_gen.timeout = std::chrono::milliseconds(reframer_ms);

    if (auto v = get("prompt", "stage")) c.stage = stage_from_string(*v);
    path("prompt", "data_dir", c.data_dir);
    path("prompt", "taxonomy_path", c.taxonomy_path);
    path("prompt", "coach_path", c.coach_prompt_path);
    path("prompt", "reframe_path", c.reframe_prompt_path);
    flag("pipeline", "serial", c.serial);

    if (auto v = env("LLM_ENDPOINT")) c.llm_endpoint = *v;
    if (auto v = env("LLM_MODEL")) c.llm_model = *v;
    if (auto v = env(c.api_key_env)) c.api_key = *v;

    c.validate();
    return c;
  }

  static ServiceConfig load(const std::string& file, const EnvLookup& env = process_env) {
    if (file.empty()) return parse("", env);
    return parse(read_text_file(file), env, std::filesystem::path(file).parent_path());
  }
};

/// Loaded runtime pieces for a config.
struct Runtime {
  ServiceConfig config;
  std::shared_ptr<const Taxonomy> taxonomy;
  ClassifierHandle filter;
  std::shared_ptr<Pipeline> pipeline;
};

inline ClassifierHandle load_filter(const ServiceConfig& c) {
  if (c.backend == Backend::serialized_model) return ClassifierHandle::load_model(c.model_path, c.vocab_path, c.threshold, c.max_len);
  return ClassifierHandle::from_lexicon(
      Lexicon::load(c.data_file(c.lexicon_path, "lexicon.txt"), c.data_file(c.anger_path, "anger.txt")), c.threshold);
}

/// Builds the pipeline. `client` overrides the HTTP client from the config
/// (tests inject mocks here); with neither, downstream stages degrade.
inline Runtime make_runtime(const ServiceConfig& c, std::shared_ptr<ChatClient> client = nullptr) {
  Runtime rt;
  rt.config = c;
  rt.taxonomy = std::make_shared<const Taxonomy>(
      Taxonomy::load(c.data_file(c.taxonomy_path, "taxonomy.txt")));
  rt.filter = load_filter(c);

  auto coach = PromptConfig::load(c.data_file(c.coach_prompt_path, "prompts/coach.txt"), *rt.taxonomy);
  coach.stage = c.stage;
  if (const auto* lex = rt.filter.lexicon()) coach.profanity_terms.assign(lex->terms().begin(), lex->terms().end());
  else coach.profanity_terms = Lexicon::parse_terms(read_text_file(c.data_file(c.lexicon_path, "lexicon.txt")));
  auto reframe = ReframeConfig::load(c.data_file(c.reframe_prompt_path, "prompts/reframe.txt"));

  if (!client && !c.llm_endpoint.empty()) client = std::make_shared<HttpChatClient>(c.llm_endpoint, c.llm_model, c.api_key);
  if (client) client = std::make_shared<BoundedChatClient>(client, static_cast<std::ptrdiff_t>(c.llm_max_concurrency));

  PipelineOptions opt;
  opt.coach_gen = c.coach_gen;
  opt.reframer_gen = c.reframer_gen;
  opt.serial = c.serial;
  rt.pipeline = std::make_shared<Pipeline>(rt.filter, std::move(client), std::move(coach), std::move(reframe), opt,
                                           rt.taxonomy);
  return rt;
}

}  // namespace toxishield
