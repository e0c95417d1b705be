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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tutoreval/cost_ledger.hpp"
#include "tutoreval/llm_client.hpp"
#include "tutoreval/money.hpp"
#include "tutoreval/principles.hpp"
#include "tutoreval/rag_store.hpp"
#include "tutoreval/strategies.hpp"
#include "tutoreval/transcript.hpp"

namespace tutoreval {

enum class ScoreScale { Binary01, Zero2Five, Missing };
std::string_view to_string(ScoreScale scale);

/// A model verdict. Binary01 holds 0 or 1, Zero2Five holds 0..5, Missing holds nothing.
class Score {
 public:
  Score() = default;
  static Score missing() { return Score(); }
  /// Throws ValidationError when value is outside the scale.
  static Score of(int value, ScoreScale scale);

  std::optional<int> value() const { return value_; }
  ScoreScale scale() const { return scale_; }
  bool is_missing() const { return scale_ == ScoreScale::Missing; }

  friend bool operator==(const Score&, const Score&) = default;

 private:
  std::optional<int> value_;
  ScoreScale scale_ = ScoreScale::Missing;
};

struct ParseFailure {
  enum class Kind { NoNumber, OutOfRange, Ambiguous };
  Kind kind = Kind::NoNumber;
  std::string detail;

  friend bool operator==(const ParseFailure&, const ParseFailure&) = default;
};
std::string_view to_string(ParseFailure::Kind kind);

using ScoreParse = std::variant<Score, ParseFailure>;

/// Tries, in order: the whole trimmed text is an integer; a "score" cue
/// followed by an integer on the same line; the single distinct in-range
/// standalone integer. Never throws.
ScoreParse parse_score(std::string_view text, ScoreScale scale) noexcept;

/// Finds each principle name (case-insensitive, longest match wins) and takes
/// the nearest following integer 0..5 before the next name. Keyed by
/// principle_id; principles not found map to Score::missing().
std::map<std::string, Score> parse_tot_layer1(std::string_view text, const Rubric& rubric);

struct RawResponse {
  std::string step_id;
  ExpectedOutput kind = ExpectedOutput::Explanation;
  std::string text;

  friend bool operator==(const RawResponse&, const RawResponse&) = default;
};

/// Non-scoring outputs in step order, joined by blank lines.
std::string extract_evidence(const std::vector<RawResponse>& raw_responses);

enum class ParseStatus { Parsed, ParseFailed, NoInformation };
std::string_view to_string(ParseStatus status);

struct PrincipleAssessment {
  std::string principle_id;
  std::string principle_name;
  Score score;
  std::string evidence;
  std::vector<RawResponse> raw_responses;
  ParseStatus parse_status = ParseStatus::NoInformation;
  std::string parse_detail;  // why parsing failed, empty otherwise
  /// ToT only: the Layer_3 binary judgment and its evidence.
  std::optional<Score> supplementary_score;
  std::string supplementary_evidence;

  friend bool operator==(const PrincipleAssessment&, const PrincipleAssessment&) = default;
};

struct AssessmentRun {
  std::string run_id;
  std::string transcript_id;
  Strategy strategy = Strategy::ZeroShot1;
  std::string model_id;
  std::string rubric_id;
  std::vector<PrincipleAssessment> results;
  Money total_cost;
  std::chrono::system_clock::time_point started_at;
  std::chrono::system_clock::time_point ended_at;
  std::string config_json = "{}";  // effective configuration, echoed for reproducibility

  friend bool operator==(const AssessmentRun&, const AssessmentRun&) = default;
};

std::string run_to_json(const AssessmentRun& run);
AssessmentRun run_from_json(std::string_view json_text);
AssessmentRun load_run(const std::filesystem::path& path);

struct AssessmentContext {
  LlmClient& client;
  CostLedger& ledger;
  const PriceTable& prices;
  const VectorStore* store = nullptr;  // required for RAG
  Embedder* embedder = nullptr;        // required for RAG
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct AssessOptions {
  std::optional<std::string> run_id;
  PlanOptions plan;
  std::size_t top_k = kDefaultTopK;
  double temperature = kDefaultTemperature;
  int max_output_tokens = kDefaultMaxOutputTokens;
  Clock clock;  // system clock when empty
  std::string config_json = "{}";
};

/// Content-derived run id: stable for the same transcript, rubric, strategy and model.
std::string default_run_id(const Transcript& transcript, const Rubric& rubric, Strategy strategy,
                           std::string_view model_id);

/// Runs one strategy over one transcript. Every request is priced into the
/// ledger under the run id. Unparseable answers mark the principle
/// ParseFailed; backend errors propagate after the completed requests are
/// recorded.
AssessmentRun assess(const Transcript& transcript, const Rubric& rubric, Strategy strategy, const std::string& model_id,
                     AssessmentContext context, const AssessOptions& options = {});

}  // namespace tutoreval
