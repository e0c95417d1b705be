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

#include "tutoreval/llm_client.hpp"

#include <cmath>
#include <thread>

#include "json.hpp"
#include "util.hpp"

namespace tutoreval {

using nlohmann::json;

std::string_view to_string(ChatRole role) {
  switch (role) {
    case ChatRole::System: return "system";
    case ChatRole::User: return "user";
    case ChatRole::Assistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(UsageSource source) {
  return source == UsageSource::ProviderReported ? "provider" : "estimated";
}

void CompletionRequest::validate() const {
  auto fail = [](const std::string& why) { return Error(ErrorCode::InvalidRequest, why); };
  if (model_id.empty()) throw fail("model_id is empty");
  if (messages.empty()) throw fail("messages list is empty");
  if (messages.back().role != ChatRole::User) throw fail("last message must have role user");
  for (const auto& m : messages) {
    if (m.role != ChatRole::Assistant && m.content.empty()) throw fail("empty system/user message");
  }
  if (!(temperature >= 0.0 && temperature <= 2.0)) throw fail("temperature must be within [0, 2]");
  if (max_output_tokens <= 0) throw fail("max_output_tokens must be positive");
}

std::uint64_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::uint64_t estimate_prompt_tokens(const CompletionRequest& request) {
  std::size_t bytes = 0;
  for (const auto& m : request.messages) bytes += m.content.size();
  return (bytes + 3) / 4;
}

std::chrono::milliseconds RetryPolicy::delay_before_attempt(int attempt) const {
  const double scale = std::pow(factor, std::max(0, attempt - 2));
  return std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(base_delay.count()) * scale));
}

bool is_retryable(ErrorCode code) { return code == ErrorCode::RateLimited || code == ErrorCode::TransportError; }

CompletionResponse complete(const CompletionRequest& request, Backend& backend, const RetryPolicy& policy) {
  request.validate();
  const auto started = std::chrono::steady_clock::now();
  const int max_attempts = std::max(1, policy.max_attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      RawCompletion raw = backend.send(request);
      CompletionResponse resp;
      resp.text = std::move(raw.text);
      resp.model_id = request.model_id;
      resp.attempts = attempt;
      if (raw.usage) {
        resp.usage = *raw.usage;
        resp.usage.source = UsageSource::ProviderReported;
      } else {
        resp.usage = TokenUsage{estimate_prompt_tokens(request), estimate_tokens(resp.text), UsageSource::Estimated};
      }
      resp.latency_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
      return resp;
    } catch (const Error& e) {
      if (!is_retryable(e.code()) || attempt >= max_attempts) throw;
      const auto delay = policy.delay_before_attempt(attempt + 1);
      if (policy.sleep) {
        policy.sleep(delay);
      } else if (delay.count() > 0) {
        std::this_thread::sleep_for(delay);
      }
    }
  }
}

LlmClient::LlmClient(std::shared_ptr<Backend> backend, RetryPolicy policy, int parallelism)
    : backend_(std::move(backend)),
      policy_(std::move(policy)),
      parallelism_(std::max(1, parallelism)),
      slots_(std::max(1, parallelism)) {
  if (!backend_) throw Error(ErrorCode::ConfigError, "LlmClient needs a backend");
}

CompletionResponse LlmClient::complete(const CompletionRequest& request) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return tutoreval::complete(request, *backend_, policy_);
}

// ---------------------------------------------------------------------------

MockScript MockScript::sequence(std::vector<std::string> texts) {
  MockScript s;
  for (auto& t : texts) s.entries.push_back(MockEntry{MockEntry::Match::Sequence, {}, MockReply::respond(std::move(t))});
  return s;
}

namespace {

ErrorCode mock_error_code(const std::string& name) {
  const auto n = detail::to_lower(name);
  if (n == "rate_limited" || n == "ratelimited" || n == "429") return ErrorCode::RateLimited;
  if (n == "auth" || n == "autherror" || n == "401") return ErrorCode::AuthError;
  if (n == "transport" || n == "timeout" || n == "transporterror" || n == "500") return ErrorCode::TransportError;
  if (n == "malformed" || n == "malformedresponse") return ErrorCode::MalformedResponse;
  throw Error(ErrorCode::ParseError, "unknown mock error '" + name + "'");
}

}  // namespace

MockScript parse_mock_script(std::string_view json_text) {
  MockScript script;
  try {
    const json doc = json::parse(json_text);
    const json& entries = doc.is_array() ? doc : doc.value("entries", json::array());
    for (const auto& je : entries) {
      MockEntry entry;
      const auto match = je.value("match", std::string("sequence"));
      if (match == "sequence") {
        entry.match = MockEntry::Match::Sequence;
      } else if (match.rfind("contains:", 0) == 0) {
        entry.match = MockEntry::Match::Contains;
        entry.needle = match.substr(9);
        if (entry.needle.empty()) throw Error(ErrorCode::ParseError, "empty contains: needle");
      } else {
        throw Error(ErrorCode::ParseError, "unknown match rule '" + match + "'");
      }
      if (je.contains("response")) {
        entry.reply = MockReply::respond(je.at("response").get<std::string>());
      } else if (je.contains("error")) {
        entry.reply = MockReply::fail(mock_error_code(je.at("error").get<std::string>()));
      } else {
        throw Error(ErrorCode::ParseError, "mock entry needs 'response' or 'error'");
      }
      script.entries.push_back(std::move(entry));
    }
    if (doc.is_object() && doc.contains("fallback")) {
      const auto& fb = doc.at("fallback");
      if (fb.is_string() && fb.get<std::string>() == "echo") {
        script.fallback = MockScript::Fallback::Echo;
      } else if (fb.is_object() && fb.contains("response")) {
        script.fallback = MockScript::Fallback::Fixed;
        script.fallback_text = fb.at("response").get<std::string>();
      } else {
        throw Error(ErrorCode::ParseError, "fallback must be \"echo\" or {\"response\": ...}");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("mock script: ") + e.what());
  }
  if (script.entries.empty() && script.fallback == MockScript::Fallback::None) {
    throw Error(ErrorCode::ConfigError, "mock script has no entries and no fallback");
  }
  return script;
}

MockScript load_mock_script(const std::filesystem::path& path) { return parse_mock_script(detail::read_file(path)); }

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {
  if (script_.entries.empty() && script_.fallback == MockScript::Fallback::None) {
    throw Error(ErrorCode::ConfigError, "mock script has no entries and no fallback");
  }
}

RawCompletion MockBackend::send(const CompletionRequest& request) {
  std::lock_guard lock(mu_);
  requests_.push_back(request);
  const std::string& last = request.messages.empty() ? std::string() : request.messages.back().content;

  const MockReply* reply = nullptr;
  for (const auto& e : script_.entries) {
    if (e.match == MockEntry::Match::Contains && last.find(e.needle) != std::string::npos) {
      reply = &e.reply;
      break;
    }
  }
  if (!reply) {
    std::size_t seen = 0;
    for (const auto& e : script_.entries) {
      if (e.match != MockEntry::Match::Sequence) continue;
      if (seen++ == next_sequence_) {
        reply = &e.reply;
        ++next_sequence_;
        break;
      }
    }
  }
  if (!reply) {
    switch (script_.fallback) {
      case MockScript::Fallback::Echo: return RawCompletion{last, std::nullopt};
      case MockScript::Fallback::Fixed: return RawCompletion{script_.fallback_text, std::nullopt};
      case MockScript::Fallback::None: break;
    }
    throw Error(ErrorCode::ScriptExhausted, "mock script has no reply for call #" + std::to_string(requests_.size()));
  }
  if (reply->error) throw Error(*reply->error, "scripted mock failure");
  return RawCompletion{*reply->text, std::nullopt};
}

std::vector<CompletionRequest> MockBackend::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

// ---------------------------------------------------------------------------

std::string chat_request_body(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  json body = {{"model", request.model_id},
               {"messages", std::move(messages)},
               {"temperature", request.temperature},
               {"max_tokens", request.max_output_tokens}};
  return body.dump();
}

RawCompletion parse_chat_response(std::string_view body) {
  try {
    const json doc = json::parse(body);
    RawCompletion out;
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    out.text = content.is_null() ? std::string() : content.get<std::string>();
    if (doc.contains("usage") && doc.at("usage").is_object()) {
      const auto& u = doc.at("usage");
      if (u.contains("prompt_tokens") && u.contains("completion_tokens")) {
        out.usage = TokenUsage{u.at("prompt_tokens").get<std::uint64_t>(), u.at("completion_tokens").get<std::uint64_t>(),
                               UsageSource::ProviderReported};
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("chat completion response: ") + e.what());
  }
}

ErrorCode error_for_status(int status) {
  if (status == 401 || status == 403) return ErrorCode::AuthError;
  if (status == 429) return ErrorCode::RateLimited;
  if (status == 408 || status >= 500) return ErrorCode::TransportError;
  return ErrorCode::InvalidRequest;
}

HttpEndpoint HttpEndpoint::from_environment() {
  auto env = [](std::string_view primary, const char* fallback) -> std::string {
    if (const char* v = std::getenv(std::string(primary).c_str()); v && *v) return v;
    if (const char* v = std::getenv(fallback); v && *v) return v;
    return {};
  };
  HttpEndpoint ep;
  ep.api_key = env(kApiKeyEnv, "OPENAI_API_KEY");
  if (auto base = env(kBaseUrlEnv, "OPENAI_BASE_URL"); !base.empty()) ep.base_url = base;
  if (ep.api_key.empty()) {
    throw Error(ErrorCode::AuthError, "no API key: set " + std::string(kApiKeyEnv) + " (or OPENAI_API_KEY)");
  }
  return ep;
}

OpenAiBackend::OpenAiBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.api_key.empty()) throw Error(ErrorCode::AuthError, "OpenAI-compatible backend needs an API key");
}

RawCompletion OpenAiBackend::send(const CompletionRequest& request) {
  return parse_chat_response(http_post_json(endpoint_, "/chat/completions", chat_request_body(request)));
}

}  // namespace tutoreval
