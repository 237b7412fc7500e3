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

// Chat-completion client contract and an HTTP implementation speaking the
// common `/v1/chat/completions` JSON wire format.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>

#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 256
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "toxishield/error.hpp"

namespace toxishield {

struct GenParams {
  double temperature = 0.0;
  std::size_t max_output_tokens = 256;
  std::size_t retries = 2;
  std::chrono::milliseconds timeout{30000};
};

/// complete(prompt, params) -> text. Implementations throw ClientError.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::string& prompt, const GenParams& params) = 0;
  virtual std::string model_id() const = 0;
};

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

inline Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("LLM endpoint must be an absolute URL: " + std::string(url));
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported LLM endpoint scheme: " + std::string(scheme));
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.scheme_host_port = std::string(url.substr(0, path_start));
  ep.path = path_start == std::string_view::npos ? "/v1/chat/completions" : std::string(url.substr(path_start));
  if (ep.path == "/" || ep.path.empty()) ep.path = "/v1/chat/completions";
  return ep;
}

class HttpChatClient final : public ChatClient {
 public:
  HttpChatClient(std::string endpoint_url, std::string model, std::string api_key = {})
      : endpoint_(parse_endpoint(endpoint_url)), model_(std::move(model)), api_key_(std::move(api_key)) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (endpoint_.scheme_host_port.rfind("https", 0) == 0)
      throw ConfigError("https LLM endpoint requested but built without OpenSSL support");
#endif
  }

  static nlohmann::json request_body(const std::string& model, const std::string& prompt, const GenParams& params) {
    return {
        {"model", model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", params.temperature},
        {"max_tokens", params.max_output_tokens},
    };
  }

  /// Pulls choices[0].message.content out of a completion response.
  static std::string extract_content(std::string_view body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ClientError(ClientError::Reason::protocol, "response is not JSON");
    try {
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw ClientError(ClientError::Reason::protocol, "message content is not a string");
      return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ClientError(ClientError::Reason::protocol, std::string("unexpected response shape: ") + e.what());
    }
  }

  std::string complete(const std::string& prompt, const GenParams& params) override {
    httplib::Client cli(endpoint_.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(params.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(params.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(endpoint_.path, headers, request_body(model_, prompt, params).dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      const auto reason = (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
                              ? ClientError::Reason::timeout
                              : ClientError::Reason::transport;
      throw ClientError(reason, httplib::to_string(err));
    }
    if (res->status == 401 || res->status == 403) throw ClientError(ClientError::Reason::auth, "HTTP " + std::to_string(res->status));
    if (res->status == 408 || res->status == 504) throw ClientError(ClientError::Reason::timeout, "HTTP " + std::to_string(res->status));
    if (res->status != 200)
      throw ClientError(ClientError::Reason::transport,
                        "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    return extract_content(res->body);
  }

  std::string model_id() const override { return model_; }

 private:
  Endpoint endpoint_;
  std::string model_;
  std::string api_key_;
};

/// Caps the number of in-flight completions across all callers.
class BoundedChatClient final : public ChatClient {
 public:
  BoundedChatClient(std::shared_ptr<ChatClient> inner, std::ptrdiff_t max_in_flight)
      : inner_(std::move(inner)), slots_(max_in_flight < 1 ? 1 : max_in_flight) {}

  std::string complete(const std::string& prompt, const GenParams& params) override {
    if (!slots_.try_acquire_for(params.timeout))
      throw ClientError(ClientError::Reason::timeout, "no free LLM slot within timeout");
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    return inner_->complete(prompt, params);
  }

  std::string model_id() const override { return inner_->model_id(); }

 private:
  std::shared_ptr<ChatClient> inner_;
  std::counting_semaphore<> slots_;
};

}  // namespace toxishield
