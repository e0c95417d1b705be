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

#include "support.hpp"
#include "tutoreval/assessment.hpp"
#include "tutoreval/cost_ledger.hpp"
#include "tutoreval/principles.hpp"

using namespace tutoreval;

namespace {

const char* kRaw =
    "Tutor: What is 2/3 plus 1/4?\nStudent: 3/7?\nTutor: Let's check that together.\n"
    "Student: Oh, common denominator. 11/12.\nTutor: Nice work, you checked your own answer.\n"
    "Student: I'm bad at math.\nTutor: You just fixed your own mistake, so you are getting better.";

PriceTable prices() {
  return parse_price_table(
      R"({"currency_code":"USD","models":[{"model_id":"mock-model","input_per_1k":"0.001","output_per_1k":"0.002"}]})");
}

RetryPolicy instant() {
  RetryPolicy p;
  p.sleep = [](std::chrono::milliseconds) {};
  return p;
}

MockScript rules(std::vector<std::pair<std::string, std::string>> pairs) {
  MockScript s;
  for (auto& [needle, reply] : pairs) {
    s.entries.push_back(MockEntry{MockEntry::Match::Contains, needle, MockReply::respond(reply)});
  }
  return s;
}

struct Fixture {
  Transcript transcript = parse_transcript(kRaw, TranscriptFormat::PlainDialogue, "s1");
  Rubric rubric = default_rubric();
  PriceTable table = prices();
  CostLedger ledger;
  HashingEmbedder embedder;
  std::shared_ptr<MockBackend> backend;
  std::unique_ptr<LlmClient> client;

  explicit Fixture(MockScript script) {
    backend = std::make_shared<MockBackend>(std::move(script));
    client = std::make_unique<LlmClient>(backend, instant(), 4);
  }
  AssessmentContext context(const VectorStore* store = nullptr) {
    return AssessmentContext{*client, ledger, table, store, store ? &embedder : nullptr};
  }
};

}  // namespace

TEST(Assess, ZeroShotOneWithScriptedMock) {
  Fixture f(rules({{"Please only return 0 or 1", "1"}, {"Please briefly explain", "The tutor praised effort."}}));
  const auto run = assess(f.transcript, f.rubric, Strategy::ZeroShot1, "mock-model", f.context());
  ASSERT_EQ(run.results.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& pa = run.results[i];
    EXPECT_EQ(pa.principle_id, f.rubric.principles[i].principle_id);
    EXPECT_EQ(pa.score, Score::of(1, ScoreScale::Binary01));
    EXPECT_EQ(pa.evidence, "The tutor praised effort.");
    EXPECT_EQ(pa.parse_status, ParseStatus::Parsed);
    ASSERT_EQ(pa.raw_responses.size(), 2u);
  }
  EXPECT_EQ(f.backend->call_count(), 10u);
  EXPECT_EQ(f.ledger.size(), 10u);
  EXPECT_EQ(run.total_cost, f.ledger.total_for_run(run.run_id));
  EXPECT_GT(run.total_cost.micros(), 0);
  EXPECT_EQ(run.run_id, default_run_id(f.transcript, f.rubric, Strategy::ZeroShot1, "mock-model"));
}

TEST(Assess, FeedForwardSendsHistory) {
  Fixture f(rules({{"Please only return 0 or 1", "1"}, {"Please briefly explain", "why"}}));
  assess(f.transcript, f.rubric, Strategy::ZeroShot1, "mock-model", f.context());
  for (const auto& req : f.backend->requests()) {
    const bool generator = req.messages.back().content.find("Please briefly explain") != std::string::npos;
    ASSERT_EQ(req.messages.front().role, ChatRole::System);
    if (generator) {
      ASSERT_EQ(req.messages.size(), 4u);
      EXPECT_EQ(req.messages[2].role, ChatRole::Assistant);
      EXPECT_EQ(req.messages[2].content, "1");
      EXPECT_NE(req.messages[1].content.find("Please only return 0 or 1"), std::string::npos);
    } else {
      EXPECT_EQ(req.messages.size(), 2u);
    }
  }
  const auto tags = f.ledger.snapshot();
  EXPECT_EQ(tags[0].request_tag, "zero_shot_1/giving-effective-praise/scoring");
  EXPECT_EQ(tags[1].request_tag, "zero_shot_1/giving-effective-praise/generator");
}

TEST(Assess, UnparseableScoreMarksParseFailed) {
  Fixture f(rules({{"Please identify", "Criteria 1 and 2 met."}, {"Give one point", "no score given"}}));
  const auto run = assess(f.transcript, f.rubric, Strategy::ZeroShot2, "mock-model", f.context());
  for (const auto& pa : run.results) {
    EXPECT_EQ(pa.parse_status, ParseStatus::ParseFailed);
    EXPECT_TRUE(pa.score.is_missing());
    EXPECT_FALSE(pa.parse_detail.empty());
  }
}

TEST(Assess, BlankAnswersAreNoInformation) {
  Fixture f(rules({{"Please only return 0 or 1", "  "}, {"Please briefly explain", ""}}));
  const auto run = assess(f.transcript, f.rubric, Strategy::ZeroShot1, "mock-model", f.context());
  for (const auto& pa : run.results) EXPECT_EQ(pa.parse_status, ParseStatus::NoInformation);
}

TEST(Assess, TreeOfThoughts) {
  Fixture f(rules({{"score how well the tutor performed",
                    "Giving Effective Praise: 4\nSupporting a Growth Mindset: 3\nReacting to Errors: 5\n"
                    "Responding to Negative Self-Talk: 2\nUsing Motivational Strategies: 1"},
                   {"please indicate which", "Criteria 1 and 2 are met."},
                   {"Provide your evaluation", "0\nEvidence: \"Let's check that together.\""}}));
  const auto run = assess(f.transcript, f.rubric, Strategy::ToT, "mock-model", f.context());
  ASSERT_EQ(run.results.size(), 5u);
  const int expected[] = {4, 3, 5, 2, 1};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(run.results[i].score, Score::of(expected[i], ScoreScale::Zero2Five));
    EXPECT_EQ(run.results[i].supplementary_score, Score::of(0, ScoreScale::Binary01));
    EXPECT_EQ(run.results[i].evidence, "Criteria 1 and 2 are met.");
    EXPECT_EQ(run.results[i].raw_responses.size(), 3u);
  }
  EXPECT_EQ(f.backend->call_count(), 11u);
  // Layer 3 sees the shared root and its own layer 2 exchange.
  for (const auto& req : f.backend->requests()) {
    if (req.messages.back().content.find("Provide your evaluation") == std::string::npos) continue;
    EXPECT_EQ(req.messages.size(), 6u);
  }
  const auto entries = f.ledger.snapshot();
  EXPECT_EQ(entries.front().request_tag, "tot/all/layer_1");
}

TEST(Assess, RagNeedsStore) {
  Fixture f(rules({{"x", "1"}}));
  EXPECT_ERROR_CODE(assess(f.transcript, f.rubric, Strategy::RAG, "mock-model", f.context()), ErrorCode::RagStoreMissing);
  EXPECT_EQ(f.backend->call_count(), 0u);
}

TEST(Assess, RagUsesRetrievedChunks) {
  Fixture f(rules({{"Return the dialogues of the tutor", "Evidence: \"Nice work\""}, {"Give one point", "Score: 3"}}));
  const auto store = build_store(f.transcript, f.rubric, f.embedder, ChunkParams{3, 1});
  const auto run = assess(f.transcript, f.rubric, Strategy::RAG, "mock-model", f.context(store.get()));
  for (const auto& pa : run.results) {
    EXPECT_EQ(pa.score, Score::of(3, ScoreScale::Zero2Five));
    EXPECT_EQ(pa.evidence, "Evidence: \"Nice work\"");
  }
  for (const auto& req : f.backend->requests()) {
    if (req.messages.back().content.find("Return the dialogues") == std::string::npos) continue;
    EXPECT_NE(req.messages.back().content.find("[1]\n"), std::string::npos);
  }
}

TEST(Assess, UnknownModelFailsBeforeAnyRequest) {
  Fixture f(rules({{"x", "1"}}));
  EXPECT_ERROR_CODE(assess(f.transcript, f.rubric, Strategy::ZeroShot1, "gpt-9", f.context()), ErrorCode::UnknownModel);
  EXPECT_EQ(f.backend->call_count(), 0u);
}

TEST(Assess, BackendFailurePropagatesAfterRecordingCompletedCosts) {
  MockScript s = rules({{"Please briefly explain", "ok"}});
  s.entries.insert(s.entries.begin(),
                   MockEntry{MockEntry::Match::Contains, "Reacting to Errors", MockReply::fail(ErrorCode::AuthError)});
  s.entries.push_back(MockEntry{MockEntry::Match::Contains, "Please only return 0 or 1", MockReply::respond("1")});
  Fixture f(s);
  EXPECT_ERROR_CODE(assess(f.transcript, f.rubric, Strategy::ZeroShot1, "mock-model", f.context()), ErrorCode::AuthError);
  EXPECT_EQ(f.ledger.size(), 8u);
}

TEST(Assess, EmptyRubric) {
  Fixture f(rules({{"x", "1"}}));
  Rubric empty;
  EXPECT_ERROR_CODE(assess(f.transcript, empty, Strategy::ToT, "mock-model", f.context()), ErrorCode::EmptyRubric);
}

TEST(Assess, DeterministicAcrossRuns) {
  auto once = [] {
    Fixture f(rules({{"Please identify", "ok"}, {"Give one point", "Score: 2"}}));
    AssessOptions o;
    o.clock = [] { return std::chrono::system_clock::time_point{}; };
    return run_to_json(assess(f.transcript, f.rubric, Strategy::ZeroShot2, "mock-model", f.context(), o));
  };
  EXPECT_EQ(once(), once());
}
