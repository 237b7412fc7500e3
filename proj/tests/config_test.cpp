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

#include <gtest/gtest.h>

#include <map>

#include "toxishield/config.hpp"
#include "test_support.hpp"

using namespace toxishield;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

const EnvLookup kNoEnv = env_of({});

}  // namespace

TEST(Config, Defaults) {
  const auto c = ServiceConfig::parse("", kNoEnv);
  EXPECT_EQ(c.host, "127.0.0.1");
  EXPECT_EQ(c.port, 8787);
  EXPECT_EQ(c.backend, Backend::lexicon);
  EXPECT_EQ(c.threshold, 0.5);
  EXPECT_EQ(c.max_len, 128u);
  EXPECT_EQ(c.stage, PromptStage::S4);
  EXPECT_EQ(c.coach_gen.temperature, 0.0);
  EXPECT_EQ(c.coach_gen.max_output_tokens, 256u);
  EXPECT_TRUE(c.cors_origins.empty());
}

TEST(Config, ParsesSections) {
  const auto c = ServiceConfig::parse(R"(
[server]
port = 9000
cors_origins = chrome-extension://abc, https://github.com
[filter]
threshold = 0.7
[llm]
endpoint = http://localhost:1234/v1/chat/completions
model = tiny
retries = 4
timeout_ms = 5000
reframer_timeout_ms = 700
[prompt]
stage = 2
[pipeline]
serial = true
)",
                                      kNoEnv);
  EXPECT_EQ(c.port, 9000);
  EXPECT_EQ(c.cors_origins, (std::vector<std::string>{"chrome-extension://abc", "https://github.com"}));
  EXPECT_EQ(c.threshold, 0.7);
  EXPECT_EQ(c.llm_model, "tiny");
  EXPECT_EQ(c.coach_gen.retries, 4u);
  EXPECT_EQ(c.coach_gen.timeout, std::chrono::milliseconds(5000));
  EXPECT_EQ(c.reframer_gen.timeout, std::chrono::milliseconds(700));
  EXPECT_EQ(c.stage, PromptStage::S2);
  EXPECT_TRUE(c.serial);
}

TEST(Config, EnvironmentOverrides) {
  const auto c = ServiceConfig::parse("[filter]\nthreshold = 0.7\n[llm]\napi_key_env = MY_KEY\n",
                                      env_of({{"TOXISHIELD_FILTER_THRESHOLD", "0.25"},
                                              {"LLM_ENDPOINT", "http://h:1/x"},
                                              {"LLM_MODEL", "m"},
                                              {"MY_KEY", "sk-123"},
                                              {"LLM_API_KEY", "ignored"}}));
  EXPECT_EQ(c.threshold, 0.25);
  EXPECT_EQ(c.llm_endpoint, "http://h:1/x");
  EXPECT_EQ(c.llm_model, "m");
  EXPECT_EQ(c.api_key, "sk-123");
}

TEST(Config, SecretsRejectedInFile) {
  EXPECT_THROW(ServiceConfig::parse("[llm]\napi_key = sk-1\n", kNoEnv), ConfigError);
  EXPECT_THROW(ServiceConfig::parse("[llm]\ntoken = x\n", kNoEnv), ConfigError);
}

TEST(Config, ValidationErrors) {
  EXPECT_THROW(ServiceConfig::parse("[filter]\nthreshold = 2\n", kNoEnv), ConfigError);
  EXPECT_THROW(ServiceConfig::parse("[filter]\nthreshold = high\n", kNoEnv), ConfigError);
  EXPECT_THROW(ServiceConfig::parse("[filter]\nbackend = serialized_model\n", kNoEnv), ConfigError);
  EXPECT_THROW(ServiceConfig::parse("[filter]\nbackend = gpu\n", kNoEnv), ConfigError);
  EXPECT_THROW(ServiceConfig::parse("[tokenizer]\nmax_len = 2\n", kNoEnv), ConfigError);
  EXPECT_THROW(ServiceConfig::parse("[server]\nport = 70000\n", kNoEnv), ConfigError);
  EXPECT_THROW(ServiceConfig::parse("[prompt]\nstage = S7\n", kNoEnv), ConfigError);
  EXPECT_THROW(ServiceConfig::parse("[broken\n", kNoEnv), ConfigError);
}

TEST(Config, SampleFileLoadsAndBuildsRuntime) {
  const auto c = ServiceConfig::load(fixtures::data_path("toxishield.ini"), kNoEnv);
  EXPECT_EQ(c.cors_origins.size(), 2u);
  auto client = std::make_shared<fixtures::EchoClient>();
  const auto rt = make_runtime(c, client);
  EXPECT_EQ(rt.filter.backend(), Backend::lexicon);
  EXPECT_EQ(rt.pipeline->coach_config().stage, PromptStage::S4);
  EXPECT_FALSE(rt.pipeline->coach_config().profanity_terms.empty());
  const auto v = rt.pipeline->analyze({"x", "what the fuck"});
  EXPECT_EQ(v.label, BinaryLabel::toxic);
  ASSERT_TRUE(v.classification);
  EXPECT_EQ(client->calls(), 2u);
}

TEST(Config, RuntimeWithoutLlmDegrades) {
  const auto rt = make_runtime(ServiceConfig::parse("", kNoEnv));
  const auto v = rt.pipeline->analyze({"x", "damn"});
  EXPECT_TRUE(v.coach_degraded());
  EXPECT_TRUE(v.reframer_degraded());
  EXPECT_EQ(rt.pipeline->analyze({"y", "fine"}).label, BinaryLabel::non_toxic);
}

TEST(Config, MissingDataFileIsConfigError) {
  auto c = ServiceConfig::parse("", kNoEnv);
  c.data_dir = "/nonexistent";
  EXPECT_THROW(make_runtime(c), ConfigError);
}

TEST(Endpoint, Parsing) {
  EXPECT_EQ(parse_endpoint("http://h:8/v1/chat/completions").scheme_host_port, "http://h:8");
  EXPECT_EQ(parse_endpoint("http://h:8").path, "/v1/chat/completions");
  EXPECT_EQ(parse_endpoint("https://api.x.com/v2/chat").path, "/v2/chat");
  EXPECT_THROW(parse_endpoint("h:8/x"), ConfigError);
  EXPECT_THROW(parse_endpoint("ftp://h/x"), ConfigError);
}

TEST(HttpChatClient, WireFormat) {
  GenParams g;
  const auto body = HttpChatClient::request_body("m", "hello", g);
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "hello");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["max_tokens"], 256);
  EXPECT_EQ(HttpChatClient::extract_content(R"({"choices":[{"message":{"role":"assistant","content":"hi"}}]})"), "hi");
  EXPECT_THROW(HttpChatClient::extract_content("nope"), ClientError);
  EXPECT_THROW(HttpChatClient::extract_content(R"({"choices":[]})"), ClientError);
  EXPECT_THROW(HttpChatClient::extract_content(R"({"choices":[{"message":{"content":null}}]})"), ClientError);
}
