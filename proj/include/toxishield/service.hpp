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

// HTTP JSON API over a Pipeline:
//   POST /v1/analyze   {text, id?} -> AnalysisVerdict
//   POST /v1/classify  {text, id?} -> ClassificationResult
//   POST /v1/detoxify  {text, id?} -> DetoxResult
//   GET  /v1/health                -> {status, backend, model_id}
// Unknown request fields are ignored.

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 256
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "toxishield/config.hpp"
#include "toxishield/jsonio.hpp"
#include "toxishield/pipeline.hpp"

namespace toxishield::service {

using nlohmann::json;

inline constexpr const char* kJson = "application/json";

inline int status_for(const Error& e) {
  const auto& k = e.kind();
  if (k == "EmptyInput" || k == "InvalidArgument") return 400;
  if (k == "ClientError" || k == "ExhaustedRetries") return 502;
  if (k == "ConfigError") return 503;
  return 500;
}

inline TextSample request_sample(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw InvalidArgument("request body must be a JSON object");
  if (!body.contains("text") || !body["text"].is_string()) throw InvalidArgument("field 'text' (string) is required");
  TextSample s;
  s.body = body["text"].get<std::string>();
  if (body.contains("id") && body["id"].is_string()) s.id = body["id"].get<std::string>();
  return s;
}

class Server {
 public:
  Server(std::shared_ptr<const Pipeline> pipeline, std::vector<std::string> cors_origins, std::size_t threads = 8)
      : pipeline_(std::move(pipeline)), cors_(std::move(cors_origins)) {
    const std::size_t n = std::max<std::size_t>(1, threads);
    http_.new_task_queue = [n] { return new httplib::ThreadPool(n); };
    routes();
  }

  /// Binds and serves until stop(). Returns false if the bind failed.
  bool listen(const std::string& host, int port) { return http_.listen(host, port); }

  /// Binds to an ephemeral port; returns it (or -1).
  int bind_any(const std::string& host = "127.0.0.1") { return http_.bind_to_any_port(host); }
  bool listen_after_bind() { return http_.listen_after_bind(); }

  void stop() { http_.stop(); }
  void wait_until_ready() const { http_.wait_until_ready(); }
  bool is_running() const { return http_.is_running(); }

 private:
  bool origin_allowed(const std::string& origin) const {
    return std::find(cors_.begin(), cors_.end(), "*") != cors_.end() ||
           std::find(cors_.begin(), cors_.end(), origin) != cors_.end();
  }

  void cors(const httplib::Request& req, httplib::Response& res) const {
    if (!req.has_header("Origin")) return;
    const auto origin = req.get_header_value("Origin");
    if (!origin_allowed(origin)) return;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Vary", "Origin");
  }

  template <typename Handler>
  void post(const std::string& path, Handler handler) {
    http_.Post(path, [this, handler](const httplib::Request& req, httplib::Response& res) {
      cors(req, res);
      try {
        res.set_content(handler(request_sample(req)).dump(), kJson);
      } catch (const Error& e) {
        res.status = status_for(e);
        res.set_content(io::error_json(e.kind(), e.what()).dump(), kJson);
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(io::error_json("InternalError", e.what()).dump(), kJson);
      }
    });
  }

  void routes() {
    post("/v1/analyze", [this](const TextSample& s) { return io::to_json(pipeline_->analyze(s)); });
    post("/v1/classify", [this](const TextSample& s) { return io::to_json(pipeline_->classify(s)); });
    post("/v1/detoxify", [this](const TextSample& s) { return io::to_json(pipeline_->detoxify(s)); });

    http_.Get("/v1/health", [this](const httplib::Request& req, httplib::Response& res) {
      cors(req, res);
      const auto& f = pipeline_->filter();
      res.set_content(json{{"status", "ok"},
                           {"backend", std::string(to_string(f.backend()))},
                           {"model_id", f.model_id()},
                           {"threshold", f.threshold()},
                           {"prompt_stage", static_cast<int>(pipeline_->coach_config().stage)}}
                          .dump(),
                      kJson);
    });

    http_.Options(R"(/v1/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      cors(req, res);
      if (res.has_header("Access-Control-Allow-Origin")) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.set_header("Access-Control-Max-Age", "600");
        res.status = 204;
      } else {
        res.status = 403;
      }
    });
  }

  std::shared_ptr<const Pipeline> pipeline_;
  std::vector<std::string> cors_;
  httplib::Server http_;
};

}  // namespace toxishield::service
