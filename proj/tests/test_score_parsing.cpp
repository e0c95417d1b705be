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

#include <random>

#include "support.hpp"
#include "tutoreval/assessment.hpp"
#include "tutoreval/principles.hpp"

using namespace tutoreval;

namespace {

std::optional<int> value_of(const ScoreParse& p) {
  if (const auto* s = std::get_if<Score>(&p)) return s->value();
  return std::nullopt;
}

std::optional<ParseFailure::Kind> failure_of(const ScoreParse& p) {
  if (const auto* f = std::get_if<ParseFailure>(&p)) return f->kind;
  return std::nullopt;
}

}  // namespace

TEST(ParseScore, ExactFormats) {
  EXPECT_EQ(value_of(parse_score("1", ScoreScale::Binary01)), 1);
  EXPECT_EQ(value_of(parse_score("0", ScoreScale::Binary01)), 0);
  EXPECT_EQ(value_of(parse_score("  1.\n", ScoreScale::Binary01)), 1);
  EXPECT_EQ(value_of(parse_score("Score: 4", ScoreScale::Zero2Five)), 4);
  EXPECT_EQ(std::get<Score>(parse_score("Score: 4", ScoreScale::Zero2Five)).scale(), ScoreScale::Zero2Five);
}

TEST(ParseScore, CueBeatsOtherNumbers) {
  EXPECT_EQ(value_of(parse_score("Score: 4 out of 5", ScoreScale::Zero2Five)), 4);
  EXPECT_EQ(value_of(parse_score("Criteria 1, 2 and 3 are met.\nFinal score: 3", ScoreScale::Zero2Five)), 3);
  EXPECT_EQ(value_of(parse_score("The score is 2/5.", ScoreScale::Zero2Five)), 2);
}

TEST(ParseScore, SingleStandaloneInteger) {
  EXPECT_EQ(value_of(parse_score("I would give this a 3 overall.", ScoreScale::Zero2Five)), 3);
  EXPECT_EQ(value_of(parse_score("1\nEvidence: the tutor asked a guiding question.", ScoreScale::Binary01)), 1);
  EXPECT_EQ(value_of(parse_score("It is a 4, clearly a 4.", ScoreScale::Zero2Five)), 4);
}

TEST(ParseScore, Failures) {
  EXPECT_EQ(failure_of(parse_score("7", ScoreScale::Zero2Five)), ParseFailure::Kind::OutOfRange);
  EXPECT_EQ(failure_of(parse_score("no score given", ScoreScale::Zero2Five)), ParseFailure::Kind::NoNumber);
  EXPECT_EQ(failure_of(parse_score("", ScoreScale::Binary01)), ParseFailure::Kind::NoNumber);
  EXPECT_EQ(failure_of(parse_score("between 2 and 3", ScoreScale::Zero2Five)), ParseFailure::Kind::Ambiguous);
  EXPECT_EQ(failure_of(parse_score("-1", ScoreScale::Binary01)), ParseFailure::Kind::OutOfRange);
  EXPECT_EQ(failure_of(parse_score("2.5", ScoreScale::Zero2Five)), ParseFailure::Kind::NoNumber);
  EXPECT_EQ(failure_of(parse_score("Score: 9", ScoreScale::Zero2Five)), ParseFailure::Kind::OutOfRange);
}

TEST(ParseScore, ListMarkersAndFractionsAreNotScores) {
  EXPECT_EQ(value_of(parse_score("1. praise was specific\n2. effort named\nOverall 4", ScoreScale::Zero2Five)), 4);
  EXPECT_EQ(failure_of(parse_score("out of 5", ScoreScale::Zero2Five)), ParseFailure::Kind::NoNumber);
}

TEST(ParseScore, TotalityFuzz) {
  std::mt19937_64 rng(424242);
  const std::string alphabet = "0123456789 -+.:/\nScoreOUTof\t,abc!?()[]\xc3\xa9";
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    const std::size_t n = rng() % 40;
    for (std::size_t j = 0; j < n; ++j) s += alphabet[rng() % alphabet.size()];
    for (ScoreScale scale : {ScoreScale::Binary01, ScoreScale::Zero2Five}) {
      const auto r = parse_score(s, scale);
      if (const auto* score = std::get_if<Score>(&r)) {
        ASSERT_EQ(score->scale(), scale);
        ASSERT_TRUE(score->value());
        ASSERT_GE(*score->value(), 0);
        ASSERT_LE(*score->value(), scale == ScoreScale::Binary01 ? 1 : 5);
      }
    }
  }
}

TEST(Score, RangeChecked) {
  EXPECT_ERROR_CODE(Score::of(2, ScoreScale::Binary01), ErrorCode::ValidationError);
  EXPECT_ERROR_CODE(Score::of(6, ScoreScale::Zero2Five), ErrorCode::ValidationError);
  EXPECT_TRUE(Score::missing().is_missing());
}

TEST(TotLayerOne, AllFivePrinciples) {
  const Rubric r = default_rubric();
  const auto scores = parse_tot_layer1(
      "Giving Effective Praise: 4\nSupporting a Growth Mindset: 3\nReacting to Errors - 5\n"
      "Responding to Negative Self-Talk: 2/5\nUsing Motivational Strategies: 0",
      r);
  ASSERT_EQ(scores.size(), 5u);
  EXPECT_EQ(scores.at("giving-effective-praise").value(), 4);
  EXPECT_EQ(scores.at("supporting-a-growth-mindset").value(), 3);
  EXPECT_EQ(scores.at("reacting-to-errors").value(), 5);
  EXPECT_EQ(scores.at("responding-to-negative-self-talk").value(), 2);
  EXPECT_EQ(scores.at("using-motivational-strategies").value(), 0);
}

TEST(TotLayerOne, EmptyAndPartial) {
  const Rubric r = default_rubric();
  for (const auto& [id, s] : parse_tot_layer1("", r)) EXPECT_TRUE(s.is_missing()) << id;
  const auto partial = parse_tot_layer1(
      "giving effective praise: 4. reacting to errors: 3. Using Motivational Strategies was 5 points", r);
  int parsed = 0, missing = 0;
  for (const auto& [id, s] : partial) (s.is_missing() ? missing : parsed)++;
  EXPECT_EQ(parsed, 3);
  EXPECT_EQ(missing, 2);
  EXPECT_EQ(partial.at("reacting-to-errors").value(), 3);
}

TEST(Evidence, ExcludesScoringSteps) {
  EXPECT_EQ(extract_evidence({{"scoring", ExpectedOutput::BinaryScore, "1"},
                              {"generator", ExpectedOutput::Explanation, "good praise"}}),
            "good praise");
  EXPECT_EQ(extract_evidence({{"scoring", ExpectedOutput::BinaryScore, "1"}}), "");
  EXPECT_EQ(extract_evidence({{"a", ExpectedOutput::Identification, "x"},
                              {"b", ExpectedOutput::Explanation, "y"},
                              {"c", ExpectedOutput::EvidenceList, "z"}}),
            "x\n\ny\n\nz");
}

TEST(RunDocument, RoundTrip) {
  AssessmentRun run;
  run.run_id = "rag-1";
  run.transcript_id = "s";
  run.strategy = Strategy::RAG;
  run.model_id = "m";
  run.rubric_id = "sel-default-v1";
  run.total_cost = Money::from_micros(1234);
  run.started_at = std::chrono::system_clock::time_point(std::chrono::milliseconds(1700000000123));
  run.ended_at = run.started_at + std::chrono::milliseconds(5);
  run.config_json = R"({"a":1})";
  PrincipleAssessment pa;
  pa.principle_id = "p";
  pa.principle_name = "P";
  pa.score = Score::of(3, ScoreScale::Zero2Five);
  pa.evidence = "e";
  pa.raw_responses = {{"retriever", ExpectedOutput::EvidenceList, "e"}, {"generator", ExpectedOutput::ScaleScore, "3"}};
  pa.parse_status = ParseStatus::Parsed;
  run.results.push_back(pa);
  pa.principle_id = "q";
  pa.score = Score::missing();
  pa.parse_status = ParseStatus::ParseFailed;
  pa.parse_detail = "no_number: x";
  pa.supplementary_score = Score::of(1, ScoreScale::Binary01);
  pa.supplementary_evidence = "ev";
  run.results.push_back(pa);
  EXPECT_EQ(run_from_json(run_to_json(run)), run);
  EXPECT_ERROR_CODE(run_from_json("{}"), ErrorCode::ParseError);
}
