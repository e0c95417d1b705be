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

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "json.hpp"
#include "support.hpp"
#include "tutoreval/llm_client.hpp"

using namespace tutoreval;

namespace {

CompletionRequest request_of(std::string text, std::string tag = "t") {
  CompletionRequest r;
  r.model_id = "mock-model";
  r.messages = {ChatMessage{ChatRole::User, std::move(text)}};
  r.request_tag = std::move(tag);
  return r;
}

RetryPolicy no_sleep(std::vector<std::chrono::milliseconds>* slept = nullptr) {
  RetryPolicy p;
  p.sleep = [slept](std::chrono::milliseconds d) {
    if (slept) slept->push_back(d);
  };
  return p;
}

// Fails with the given codes in order, then answers "ok".
class FlakyBackend : public Backend {
 public:
  explicit FlakyBackend(std::vector<ErrorCode> failures) : failures_(std::move(failures)) {}
  RawCompletion send(const CompletionRequest&) override {
    const int n = calls++;
    if (n < static_cast<int>(failures_.size())) throw Error(failures_[n], "scripted");
    return RawCompletion{"ok", TokenUsage{7, 3, UsageSource::ProviderReported}};
  }
  std::string name() const override { return "flaky"; }
  int calls = 0;

 private:
  std::vector<ErrorCode> failures_;
};

}  // namespace

TEST(TokenEstimate, CeilingOfQuarterBytes) {
  EXPECT_EQ(estimate_tokens(""), 0u);
  EXPECT_EQ(estimate_tokens("12345678"), 2u);
  EXPECT_EQ(estimate_tokens("123456789"), 3u);
  CompletionRequest r = request_of("1234");
  r.messages.push_back({ChatRole::Assistant, "12345"});
  EXPECT_EQ(estimate_prompt_tokens(r), 3u);
}

TEST(Complete, MockReturnsScriptedTextWithEstimatedUsage) {
  MockBackend mock(MockScript{{MockEntry{MockEntry::Match::Contains, "", MockReply::respond("1")}},
                              MockScript::Fallback::Fixed, "1"});
  const auto resp = complete(request_of("Please only return 0 or 1"), mock, no_sleep());
  EXPECT_EQ(resp.text, "1");
  EXPECT_EQ(resp.usage.source, UsageSource::Estimated);
  EXPECT_EQ(resp.usage.input_tokens, estimate_tokens("Please only return 0 or 1"));
  EXPECT_EQ(resp.usage.output_tokens, 1u);
  EXPECT_EQ(resp.attempts, 1);
}

TEST(Complete, EmptyMessagesIsInvalidRequest) {
  MockBackend mock(MockScript::sequence({"x"}));
  CompletionRequest r = request_of("x");
  r.messages.clear();
  EXPECT_ERROR_CODE(complete(r, mock, no_sleep()), ErrorCode::InvalidRequest);
  EXPECT_EQ(mock.call_count(), 0u);
  r = request_of("x");
  r.model_id.clear();
  EXPECT_ERROR_CODE(complete(r, mock, no_sleep()), ErrorCode::InvalidRequest);
}

TEST(Complete, RetriesRateLimitWithBackoff) {
  FlakyBackend flaky({ErrorCode::RateLimited, ErrorCode::RateLimited});
  std::vector<std::chrono::milliseconds> slept;
  const auto resp = complete(request_of("x"), flaky, no_sleep(&slept));
  EXPECT_EQ(resp.text, "ok");
  EXPECT_EQ(resp.attempts, 3);
  EXPECT_EQ(flaky.calls, 3);
  ASSERT_EQ(slept.size(), 2u);
  EXPECT_EQ(slept[0].count(), 1000);
  EXPECT_EQ(slept[1].count(), 2000);
  EXPECT_EQ(resp.usage, (TokenUsage{7, 3, UsageSource::ProviderReported}));
}

TEST(Complete, MockScriptedRateLimitsThenSuccess) {
  MockScript script;
  script.entries = {MockEntry{MockEntry::Match::Sequence, "", MockReply::fail(ErrorCode::RateLimited)},
                    MockEntry{MockEntry::Match::Sequence, "", MockReply::fail(ErrorCode::RateLimited)},
                    MockEntry{MockEntry::Match::Sequence, "", MockReply::respond("done")}};
  MockBackend mock(script);
  const auto resp = complete(request_of("x"), mock, no_sleep());
  EXPECT_EQ(resp.attempts, 3);
  EXPECT_EQ(mock.call_count(), 3u);
}

TEST(Complete, GivesUpAfterMaxAttempts) {
  FlakyBackend flaky(std::vector<ErrorCode>(10, ErrorCode::TransportError));
  EXPECT_ERROR_CODE(complete(request_of("x"), flaky, no_sleep()), ErrorCode::TransportError);
  EXPECT_EQ(flaky.calls, 5);
}

TEST(Complete, AuthAndMalformedAreNotRetried) {
  for (ErrorCode code : {ErrorCode::AuthError, ErrorCode::MalformedResponse, ErrorCode::InvalidRequest}) {
    FlakyBackend flaky({code});
    EXPECT_ERROR_CODE(complete(request_of("x"), flaky, no_sleep()), code);
    EXPECT_EQ(flaky.calls, 1);
  }
}

TEST(Retry, DelaysDoubleFromOneSecond) {
  RetryPolicy p;
  EXPECT_EQ(p.delay_before_attempt(2).count(), 1000);
  EXPECT_EQ(p.delay_before_attempt(3).count(), 2000);
  EXPECT_EQ(p.delay_before_attempt(5).count(), 8000);
  EXPECT_TRUE(is_retryable(ErrorCode::RateLimited));
  EXPECT_TRUE(is_retryable(ErrorCode::TransportError));
  EXPECT_FALSE(is_retryable(ErrorCode::AuthError));
}

TEST(Mock, SequencePlaybackAndExhaustion) {
  MockBackend mock(MockScript::sequence({"Score: 4", "Evidence: ..."}));
  EXPECT_EQ(mock.send(request_of("a")).text, "Score: 4");
  EXPECT_EQ(mock.send(request_of("b")).text, "Evidence: ...");
  EXPECT_ERROR_CODE(mock.send(request_of("c")), ErrorCode::ScriptExhausted);
}

TEST(Mock, ReplayIsDeterministic) {
  auto run = [] {
    MockBackend mock(MockScript::sequence({"1", "2", "3"}));
    std::vector<std::string> out;
    for (const char* q : {"a", "b", "c"}) out.push_back(mock.send(request_of(q)).text);
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Mock, ContainsRulesMatchLastMessage) {
  const auto script = parse_mock_script(R"({"entries":[
    {"match":"contains:alpha","response":"A"},
    {"match":"sequence","response":"S1"}],
    "fallback":"echo"})");
  MockBackend mock(script);
  CompletionRequest r = request_of("alpha");
  r.messages.push_back({ChatRole::Assistant, "A"});
  r.messages.push_back({ChatRole::User, "beta"});
  EXPECT_EQ(mock.send(r).text, "S1");
  EXPECT_EQ(mock.send(request_of("xx alpha xx")).text, "A");
  EXPECT_EQ(mock.send(request_of("gamma")).text, "gamma");
  EXPECT_EQ(mock.requests().size(), 3u);
}

TEST(Mock, ScriptErrorsAndParsing) {
  EXPECT_ERROR_CODE(parse_mock_script("{}"), ErrorCode::ConfigError);
  EXPECT_ERROR_CODE(parse_mock_script(R"([{"match":"regex:x","response":"a"}])"), ErrorCode::ParseError);
  EXPECT_ERROR_CODE(parse_mock_script(R"([{"match":"sequence"}])"), ErrorCode::ParseError);
  const auto s = parse_mock_script(R"([{"error":"rate_limited"},{"response":"x"}])");
  MockBackend mock(s);
  EXPECT_EQ(complete(request_of("q"), mock, no_sleep()).attempts, 2);
  EXPECT_NO_THROW(load_mock_script(testing_support::data_dir() / "mock_script.json"));
}

namespace {

class SlowCounting : public Backend {
 public:
  RawCompletion send(const CompletionRequest&) override {
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --in_flight;
    return RawCompletion{"x", std::nullopt};
  }
  std::string name() const override { return "slow"; }
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
};

}  // namespace

TEST(LlmClient, BoundsInFlightRequests) {
  auto backend = std::make_shared<SlowCounting>();
  LlmClient client(backend, no_sleep(), 3);
  std::vector<std::thread> threads;
  for (int i = 0; i < 12; ++i) threads.emplace_back([&] { client.complete(request_of("x")); });
  for (auto& t : threads) t.join();
  EXPECT_LE(backend->peak.load(), 3);
  EXPECT_GE(backend->peak.load(), 1);
}

TEST(Wire, RequestBodyAndResponseParsing) {
  CompletionRequest r = request_of("hello");
  r.messages.insert(r.messages.begin(), ChatMessage{ChatRole::System, "sys"});
  r.max_output_tokens = 77;
  const auto body = nlohmann::json::parse(chat_request_body(r));
  EXPECT_EQ(body["model"], "mock-model");
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "hello");
  EXPECT_EQ(body["max_tokens"], 77);
  EXPECT_EQ(body["temperature"], 0.0);

  const auto raw = parse_chat_response(
      R"({"choices":[{"message":{"role":"assistant","content":"4"}}],"usage":{"prompt_tokens":12,"completion_tokens":1}})");
  EXPECT_EQ(raw.text, "4");
  ASSERT_TRUE(raw.usage);
  EXPECT_EQ(raw.usage->input_tokens, 12u);
  EXPECT_EQ(raw.usage->source, UsageSource::ProviderReported);
  EXPECT_FALSE(parse_chat_response(R"({"choices":[{"message":{"content":"x"}}]})").usage);
  EXPECT_ERROR_CODE(parse_chat_response("<html>"), ErrorCode::MalformedResponse);
  EXPECT_ERROR_CODE(parse_chat_response(R"({"choices":[]})"), ErrorCode::MalformedResponse);
}

TEST(Wire, StatusMapping) {
  EXPECT_EQ(error_for_status(401), ErrorCode::AuthError);
  EXPECT_EQ(error_for_status(403), ErrorCode::AuthError);
  EXPECT_EQ(error_for_status(429), ErrorCode::RateLimited);
  EXPECT_EQ(error_for_status(500), ErrorCode::TransportError);
  EXPECT_EQ(error_for_status(503), ErrorCode::TransportError);
  EXPECT_EQ(error_for_status(408), ErrorCode::TransportError);
  EXPECT_EQ(error_for_status(400), ErrorCode::InvalidRequest);
}

TEST(Endpoint, RequiresApiKey) {
  const char* saved[] = {std::getenv("TUTOREVAL_API_KEY"), std::getenv("OPENAI_API_KEY")};
  const std::string keep[] = {saved[0] ? saved[0] : "", saved[1] ? saved[1] : ""};
  unsetenv("TUTOREVAL_API_KEY");
  unsetenv("OPENAI_API_KEY");
  EXPECT_ERROR_CODE(HttpEndpoint::from_environment(), ErrorCode::AuthError);
  setenv("TUTOREVAL_API_KEY", "k", 1);
  setenv("TUTOREVAL_BASE_URL", "http://localhost:1/v1", 1);
  const auto ep = HttpEndpoint::from_environment();
  EXPECT_EQ(ep.api_key, "k");
  EXPECT_EQ(ep.base_url, "http://localhost:1/v1");
  unsetenv("TUTOREVAL_BASE_URL");
  if (saved[0]) setenv("TUTOREVAL_API_KEY", keep[0].c_str(), 1); else unsetenv("TUTOREVAL_API_KEY");
  if (saved[1]) setenv("OPENAI_API_KEY", keep[1].c_str(), 1);
}
