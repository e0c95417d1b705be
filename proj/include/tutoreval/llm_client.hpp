// Copyright 2026 the tutoreval authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "tutoreval/error.hpp"

namespace tutoreval {

enum class ChatRole { System, User, Assistant };
std::string_view to_string(ChatRole role);

struct ChatMessage {
  ChatRole role = ChatRole::User;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

inline constexpr double kDefaultTemperature = 0.0;
inline constexpr int kDefaultMaxOutputTokens = 1024;

struct CompletionRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = kDefaultTemperature;
  int max_output_tokens = kDefaultMaxOutputTokens;
  std::string request_tag;

  /// Throws Error(InvalidRequest).
  void validate() const;
};

enum class UsageSource { ProviderReported, Estimated };
std::string_view to_string(UsageSource source);

struct TokenUsage {
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  UsageSource source = UsageSource::Estimated;

  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct CompletionResponse {
  std::string text;
  TokenUsage usage;
  std::string model_id;
  double latency_ms = 0.0;
  int attempts = 1;
};

/// What a backend produces for one attempt. Usage is absent when the
/// provider did not report it.
struct RawCompletion {
  std::string text;
  std::optional<TokenUsage> usage;
};

/// One chat-completion transport. send() performs a single attempt and
/// reports failure by throwing Error with a transport-level code
/// (AuthError, RateLimited, TransportError, MalformedResponse, InvalidRequest).
class Backend {
 public:
  virtual ~Backend() = default;
  virtual RawCompletion send(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// ceil(byte_length / 4).
std::uint64_t estimate_tokens(std::string_view text);
/// Estimate over all message contents of a request.
std::uint64_t estimate_prompt_tokens(const CompletionRequest& request);

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  /// Replaceable so tests do not sleep.
  std::function<void(std::chrono::milliseconds)> sleep;

  std::chrono::milliseconds delay_before_attempt(int attempt) const;  // attempt >= 2
};

bool is_retryable(ErrorCode code);

/// Validates, sends with retries and fills usage (estimated when the provider
/// omits it).
CompletionResponse complete(const CompletionRequest& request, Backend& backend, const RetryPolicy& policy = {});

/// A backend plus a bound on concurrent in-flight requests.
class LlmClient {
 public:
  static constexpr int kDefaultParallelism = 4;

  explicit LlmClient(std::shared_ptr<Backend> backend, RetryPolicy policy = {},
                     int parallelism = kDefaultParallelism);

  CompletionResponse complete(const CompletionRequest& request);
  Backend& backend() { return *backend_; }
  int parallelism() const { return parallelism_; }

 private:
  std::shared_ptr<Backend> backend_;
  RetryPolicy policy_;
  int parallelism_;
  std::counting_semaphore<> slots_;
};

// ---------------------------------------------------------------------------
// Mock backend

struct MockReply {
  std::optional<std::string> text;
  std::optional<ErrorCode> error;  // one of the transport-level codes

  static MockReply respond(std::string text) { return MockReply{std::move(text), std::nullopt}; }
  static MockReply fail(ErrorCode code) { return MockReply{std::nullopt, code}; }
};

struct MockEntry {
  enum class Match { Sequence, Contains };
  Match match = Match::Sequence;
  std::string needle;  // for Contains
  MockReply reply;
};

struct MockScript {
  std::vector<MockEntry> entries;
  enum class Fallback { None, Echo, Fixed };
  Fallback fallback = Fallback::None;
  std::string fallback_text;

  static MockScript sequence(std::vector<std::string> texts);
};

/// Parses the mock script document:
/// {"entries": [{"match": "sequence" | "contains:<substr>", "response": "..."} |
///              {"match": ..., "error": "rate_limited"|"auth"|"transport"|"malformed"}],
///  "fallback": "echo" | {"response": "..."}}
MockScript parse_mock_script(std::string_view json_text);
MockScript load_mock_script(const std::filesystem::path& path);

/// Scripted, deterministic backend. Contains-rules are checked first, in file
/// order, against the last message; otherwise the next unused sequence entry
/// is consumed; otherwise the fallback applies or ScriptExhausted is raised.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockScript script);

  RawCompletion send(const CompletionRequest& request) override;
  std::string name() const override { return "mock"; }

  std::vector<CompletionRequest> requests() const;
  std::size_t call_count() const;

 private:
  MockScript script_;
  mutable std::mutex mu_;
  std::size_t next_sequence_ = 0;
  std::vector<CompletionRequest> requests_;
};

// ---------------------------------------------------------------------------
// OpenAI-compatible HTTP backend

inline constexpr std::string_view kApiKeyEnv = "TUTOREVAL_API_KEY";
inline constexpr std::string_view kBaseUrlEnv = "TUTOREVAL_BASE_URL";
inline constexpr std::string_view kDefaultBaseUrl = "https://api.openai.com/v1";

struct HttpEndpoint {
  std::string base_url = std::string(kDefaultBaseUrl);
  std::string api_key;
  std::chrono::seconds timeout{60};

  /// TUTOREVAL_API_KEY / TUTOREVAL_BASE_URL, falling back to OPENAI_API_KEY /
  /// OPENAI_BASE_URL. Throws Error(AuthError) when no key is set.
  static HttpEndpoint from_environment();
};

/// {model, messages:[{role, content}], temperature, max_tokens}
std::string chat_request_body(const CompletionRequest& request);
/// Reads choices[0].message.content and usage.prompt_tokens/completion_tokens.
RawCompletion parse_chat_response(std::string_view body);
/// Maps an HTTP status to the error code complete() understands.
ErrorCode error_for_status(int status);

/// POST body to <base_url><path>; returns the response body or throws.
std::string http_post_json(const HttpEndpoint& endpoint, std::string_view path, const std::string& body);

class OpenAiBackend final : public Backend {
 public:
  explicit OpenAiBackend(HttpEndpoint endpoint);
  RawCompletion send(const CompletionRequest& request) override;
  std::string name() const override { return "openai-compatible"; }

 private:
  HttpEndpoint endpoint_;
};

}  // namespace tutoreval
