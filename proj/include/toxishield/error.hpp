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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace toxishield {

/// Base of every error the library throws. `kind()` is a stable identifier
/// used by the HTTP layer and the CLI when reporting failures.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define TOXISHIELD_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

TOXISHIELD_DEFINE_ERROR(EmptyInput)
TOXISHIELD_DEFINE_ERROR(ConfigError)
TOXISHIELD_DEFINE_ERROR(ModelLoadError)
TOXISHIELD_DEFINE_ERROR(ShapeError)
TOXISHIELD_DEFINE_ERROR(MalformedResponse)
TOXISHIELD_DEFINE_ERROR(ConflictingLabels)
TOXISHIELD_DEFINE_ERROR(MissingDefinition)
TOXISHIELD_DEFINE_ERROR(LengthMismatch)
TOXISHIELD_DEFINE_ERROR(ZeroBaseline)
TOXISHIELD_DEFINE_ERROR(DimensionMismatch)
TOXISHIELD_DEFINE_ERROR(EmptyDataset)
TOXISHIELD_DEFINE_ERROR(InvalidArgument)

#undef TOXISHIELD_DEFINE_ERROR

/// A label string that matches no canonical name or alias.
class UnknownLabel : public Error {
 public:
  explicit UnknownLabel(std::string raw)
      : Error("UnknownLabel", "unknown category label: '" + raw + "'"), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// Transport-level chat failure.
class ClientError : public Error {
 public:
  enum class Reason { transport, auth, timeout, protocol };

  ClientError(Reason reason, const std::string& message)
      : Error("ClientError", std::string(reason_name(reason)) + ": " + message), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

  static constexpr const char* reason_name(Reason r) noexcept {
    switch (r) {
      case Reason::transport: return "transport";
      case Reason::auth: return "auth";
      case Reason::timeout: return "timeout";
      case Reason::protocol: return "protocol";
    }
    return "unknown";
  }

 private:
  Reason reason_;
};

/// Every attempt produced an unparseable completion. Carries the last parse error.
class ExhaustedRetries : public Error {
 public:
  ExhaustedRetries(std::size_t attempts, const std::string& last_kind, const std::string& last_message)
      : Error("ExhaustedRetries", "gave up after " + std::to_string(attempts) +
                                      " attempt(s); last error " + last_kind + ": " + last_message),
        attempts_(attempts),
        last_kind_(last_kind) {}

  std::size_t attempts() const noexcept { return attempts_; }
  const std::string& last_kind() const noexcept { return last_kind_; }

 private:
  std::size_t attempts_;
  std::string last_kind_;
};

/// A per-item failure raised while scoring (fluency scorer, embedder).
class ScorerError : public Error {
 public:
  ScorerError(std::size_t index, const std::string& message)
      : Error("ScorerError", "item " + std::to_string(index) + ": " + message), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ZeroVector : public Error {
 public:
  explicit ZeroVector(std::size_t index)
      : Error("ZeroVector", "embedding " + std::to_string(index) + " is all zeros"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace toxishield
