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

#include "tutoreval/assessment.hpp"

#include <exception>
#include <future>

#include "json.hpp"
#include "util.hpp"

namespace tutoreval {

using nlohmann::json;

std::string_view to_string(ParseStatus status) {
  switch (status) {
    case ParseStatus::Parsed: return "parsed";
    case ParseStatus::ParseFailed: return "parse_failed";
    case ParseStatus::NoInformation: return "no_information";
  }
  return "no_information";
}

namespace {

struct StepOutcome {
  std::optional<CompletionResponse> response;
  std::string tag;
};

struct PlanExecution {
  std::vector<StepOutcome> steps;
  std::exception_ptr error;
};

CompletionRequest make_request(const PromptPlan& plan, const std::vector<std::size_t>& lineage,
                               const std::vector<StepOutcome>& done, std::size_t step, const std::string& model_id,
                               const AssessOptions& options, const std::string& tag) {
  CompletionRequest req;
  req.model_id = model_id;
  req.temperature = options.temperature;
  req.max_output_tokens = options.max_output_tokens;
  req.request_tag = tag;
  if (plan.system_message && !plan.system_message->empty()) {
    req.messages.push_back({ChatRole::System, *plan.system_message});
  }
  if (plan.steps[step].feeds_forward) {
    for (std::size_t prior : lineage) {
      req.messages.push_back({ChatRole::User, plan.steps[prior].text});
      req.messages.push_back({ChatRole::Assistant, done[prior].response->text});
    }
  }
  req.messages.push_back({ChatRole::User, plan.steps[step].text});
  return req;
}

// Runs the shared root steps, then every branch; branches run concurrently.
// Steps inside a branch are strictly sequential.
PlanExecution execute_plan(const PromptPlan& plan, LlmClient& client, const std::string& model_id,
                           const AssessOptions& options) {
  PlanExecution exec;
  exec.steps.resize(plan.steps.size());
  const std::string strategy(to_string(plan.strategy));
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    exec.steps[i].tag = strategy + "/" + (s.branch.empty() ? std::string("all") : s.branch) + "/" + s.step_id;
  }

  std::vector<std::size_t> root;
  std::vector<std::string> branch_order;
  std::map<std::string, std::vector<std::size_t>> branches;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& b = plan.steps[i].branch;
    if (b.empty()) {
      root.push_back(i);
    } else {
      if (!branches.count(b)) branch_order.push_back(b);
      branches[b].push_back(i);
    }
  }

  auto run_sequence = [&](const std::vector<std::size_t>& prefix, const std::vector<std::size_t>& steps) {
    std::vector<std::size_t> lineage = prefix;
    for (std::size_t idx : steps) {
      const auto req = make_request(plan, lineage, exec.steps, idx, model_id, options, exec.steps[idx].tag);
      exec.steps[idx].response = client.complete(req);
      lineage.push_back(idx);
    }
  };

  try {
    run_sequence({}, root);
  } catch (...) {
    exec.error = std::current_exception();
    return exec;
  }

  if (branch_order.size() <= 1) {
    try {
      for (const auto& b : branch_order) run_sequence(root, branches[b]);
    } catch (...) {
      exec.error = std::current_exception();
    }
    return exec;
  }
  std::vector<std::future<void>> futures;
  for (const auto& b : branch_order) {
    futures.push_back(std::async(std::launch::async, [&, b] { run_sequence(root, branches.at(b)); }));
  }
  for (auto& f : futures) {
    try {
      f.get();
    } catch (...) {
      if (!exec.error) exec.error = std::current_exception();
    }
  }
  return exec;
}

bool blank(std::string_view s) { return detail::trim(s).empty(); }

PrincipleAssessment assemble(const Principle& principle, const PromptPlan& plan, const PlanExecution& exec,
                             const std::optional<Score>& tot_score) {
  PrincipleAssessment pa;
  pa.principle_id = principle.principle_id;
  pa.principle_name = principle.name;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    if (!s.branch.empty() && s.branch != principle.principle_id) continue;
    pa.raw_responses.push_back(RawResponse{s.step_id, s.expected_output, exec.steps[i].response->text});
  }
  pa.evidence = extract_evidence(pa.raw_responses);

  const bool all_blank =
      std::all_of(pa.raw_responses.begin(), pa.raw_responses.end(), [](const RawResponse& r) { return blank(r.text); });

  if (plan.strategy == Strategy::ToT) {
    for (const auto& r : pa.raw_responses) {
      if (r.step_id == "layer_3") {
        pa.supplementary_evidence = r.text;
        const auto parsed = parse_score(r.text, ScoreScale::Binary01);
        pa.supplementary_score = std::holds_alternative<Score>(parsed) ? std::get<Score>(parsed) : Score::missing();
      }
    }
    const bool branch_blank = std::all_of(pa.raw_responses.begin(), pa.raw_responses.end(), [](const RawResponse& r) {
      return r.step_id == "layer_1" || blank(r.text);
    });
    if (tot_score && !tot_score->is_missing()) {
      pa.score = *tot_score;
      pa.parse_status = ParseStatus::Parsed;
    } else if (branch_blank) {
      pa.parse_status = ParseStatus::NoInformation;
    } else {
      pa.parse_status = ParseStatus::ParseFailed;
      pa.parse_detail = "principle not scored in layer_1";
    }
    return pa;
  }

  if (all_blank) {
    pa.parse_status = ParseStatus::NoInformation;
    return pa;
  }
  for (const auto& r : pa.raw_responses) {
    if (!is_scoring(r.kind)) continue;
    const auto scale = r.kind == ExpectedOutput::BinaryScore ? ScoreScale::Binary01 : ScoreScale::Zero2Five;
    const auto parsed = parse_score(r.text, scale);
    if (const auto* score = std::get_if<Score>(&parsed)) {
      pa.score = *score;
      pa.parse_status = ParseStatus::Parsed;
    } else {
      const auto& f = std::get<ParseFailure>(parsed);
      pa.parse_status = ParseStatus::ParseFailed;
      pa.parse_detail = std::string(to_string(f.kind)) + ": " + f.detail;
    }
    break;
  }
  return pa;
}

void record_costs(const PlanExecution& exec, const std::string& run_id, const std::string& model_id,
                  AssessmentContext& ctx) {
  for (const auto& s : exec.steps) {
    if (s.response) ctx.ledger.record(run_id, s.tag, model_id, s.response->usage, ctx.prices);
  }
}

}  // namespace

std::string default_run_id(const Transcript& transcript, const Rubric& rubric, Strategy strategy,
                           std::string_view model_id) {
  std::string key = transcript.session_id;
  key += '\x1f';
  key += render_dialogue(transcript);
  key += '\x1f';
  key += rubric_to_json(rubric);
  key += '\x1f';
  key += to_string(strategy);
  key += '\x1f';
  key += model_id;
  return std::string(to_string(strategy)) + "-" + detail::hex64(detail::fnv1a64(key));
}

AssessmentRun assess(const Transcript& transcript, const Rubric& rubric, Strategy strategy, const std::string& model_id,
                     AssessmentContext context, const AssessOptions& options) {
  if (rubric.principles.empty()) throw Error(ErrorCode::EmptyRubric, "rubric has no principles");
  transcript.validate();
  if (strategy == Strategy::RAG && (context.store == nullptr || context.store->size() == 0)) {
    throw Error(ErrorCode::RagStoreMissing, "the RAG strategy needs a populated vector store");
  }
  if (strategy == Strategy::RAG && context.embedder == nullptr) {
    throw Error(ErrorCode::EmbedderUnavailable, "the RAG strategy needs an embedder for queries");
  }
  context.prices.at(model_id);  // fail before spending anything

  const Clock clock = options.clock ? options.clock : Clock([] { return std::chrono::system_clock::now(); });
  AssessmentRun run;
  run.run_id = options.run_id.value_or(default_run_id(transcript, rubric, strategy, model_id));
  run.transcript_id = transcript.session_id;
  run.strategy = strategy;
  run.model_id = model_id;
  run.rubric_id = rubric.rubric_id;
  run.config_json = options.config_json;
  run.started_at = clock();

  const std::string dialogue = render_dialogue(transcript);

  if (strategy == Strategy::ToT) {
    const PromptPlan plan = build_tot(rubric, dialogue, options.plan);
    const PlanExecution exec = execute_plan(plan, context.client, model_id, options);
    record_costs(exec, run.run_id, model_id, context);
    if (exec.error) std::rethrow_exception(exec.error);
    const auto layer1 = parse_tot_layer1(exec.steps.front().response->text, rubric);
    for (const auto& p : rubric.principles) run.results.push_back(assemble(p, plan, exec, layer1.at(p.principle_id)));
  } else {
    std::vector<PromptPlan> plans;
    for (const auto& p : rubric.principles) {
      switch (strategy) {
        case Strategy::ZeroShot1: plans.push_back(build_zero_shot_1(p, dialogue, options.plan)); break;
        case Strategy::ZeroShot2: plans.push_back(build_zero_shot_2(p, dialogue, options.plan)); break;
        case Strategy::RAG: {
          std::vector<std::string> context_texts;
          if (const auto principle_record = context.store->get(principle_record_id(p))) {
            context_texts.push_back(principle_record->text);
          }
          for (const auto& hit :
               context.store->retrieve(principle_query(p), options.top_k, SourceKind::TranscriptChunk, *context.embedder)) {
            context_texts.push_back(context.store->get(hit.record_id)->text);
          }
          plans.push_back(build_rag(p, dialogue, context_texts, options.plan));
          break;
        }
        case Strategy::ToT: break;
      }
    }
    std::vector<std::future<PlanExecution>> futures;
    for (const auto& plan : plans) {
      futures.push_back(std::async(std::launch::async, [&context, &plan, &model_id, &options] {
        return execute_plan(plan, context.client, model_id, options);
      }));
    }
    std::vector<PlanExecution> execs;
    for (auto& f : futures) execs.push_back(f.get());
    std::exception_ptr first_error;
    for (const auto& e : execs) {
      record_costs(e, run.run_id, model_id, context);
      if (e.error && !first_error) first_error = e.error;
    }
    if (first_error) std::rethrow_exception(first_error);
    for (std::size_t i = 0; i < plans.size(); ++i) {
      run.results.push_back(assemble(rubric.principles[i], plans[i], execs[i], std::nullopt));
    }
  }

  run.total_cost = context.ledger.total_for_run(run.run_id);
  run.ended_at = clock();
  return run;
}

// ---------------------------------------------------------------------------

namespace {

json score_to_json(const Score& s) {
  return json{{"value", s.value() ? json(*s.value()) : json(nullptr)}, {"scale", std::string(to_string(s.scale()))}};
}

Score score_from_json(const json& j) {
  const auto scale = j.at("scale").get<std::string>();
  if (scale == "missing" || j.at("value").is_null()) return Score::missing();
  return Score::of(j.at("value").get<int>(), scale == "binary_0_1" ? ScoreScale::Binary01 : ScoreScale::Zero2Five);
}

ExpectedOutput expected_from(const std::string& s) {
  for (auto k : {ExpectedOutput::BinaryScore, ExpectedOutput::ScaleScore, ExpectedOutput::Identification,
                 ExpectedOutput::Explanation, ExpectedOutput::EvidenceList}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown response kind '" + s + "'");
}

ParseStatus status_from(const std::string& s) {
  for (auto k : {ParseStatus::Parsed, ParseStatus::ParseFailed, ParseStatus::NoInformation}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown parse_status '" + s + "'");
}

}  // namespace

std::string run_to_json(const AssessmentRun& run) {
  json results = json::array();
  for (const auto& r : run.results) {
    json raw = json::array();
    for (const auto& rr : r.raw_responses) {
      raw.push_back({{"step_id", rr.step_id}, {"kind", std::string(to_string(rr.kind))}, {"text", rr.text}});
    }
    json jr = {{"principle_id", r.principle_id},
               {"principle_name", r.principle_name},
               {"score", score_to_json(r.score)},
               {"evidence", r.evidence},
               {"raw_responses", std::move(raw)},
               {"parse_status", std::string(to_string(r.parse_status))},
               {"parse_detail", r.parse_detail}};
    if (r.supplementary_score) {
      jr["supplementary"] = {{"score", score_to_json(*r.supplementary_score)}, {"evidence", r.supplementary_evidence}};
    }
    results.push_back(std::move(jr));
  }
  json config = json::object();
  try {
    config = json::parse(run.config_json);
  } catch (const json::exception&) {
    config = run.config_json;
  }
  json doc = {{"run_id", run.run_id},
              {"transcript_id", run.transcript_id},
              {"strategy", std::string(to_string(run.strategy))},
              {"model_id", run.model_id},
              {"rubric_id", run.rubric_id},
              {"results", std::move(results)},
              {"total_cost", run.total_cost.to_string(6)},
              {"started_at", detail::format_utc(run.started_at)},
              {"ended_at", detail::format_utc(run.ended_at)},
              {"config", std::move(config)}};
  return doc.dump(2) + "\n";
}

AssessmentRun run_from_json(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    AssessmentRun run;
    run.run_id = doc.at("run_id").get<std::string>();
    run.transcript_id = doc.at("transcript_id").get<std::string>();
    const auto strategy = parse_strategy(doc.at("strategy").get<std::string>());
    if (!strategy) throw Error(ErrorCode::ParseError, "unknown strategy in run document");
    run.strategy = *strategy;
    run.model_id = doc.at("model_id").get<std::string>();
    run.rubric_id = doc.value("rubric_id", std::string{});
    run.total_cost = Money::parse(doc.at("total_cost").get<std::string>());
    run.started_at = detail::parse_utc(doc.at("started_at").get<std::string>());
    run.ended_at = detail::parse_utc(doc.at("ended_at").get<std::string>());
    run.config_json = doc.contains("config") ? doc.at("config").dump() : "{}";
    for (const auto& jr : doc.at("results")) {
      PrincipleAssessment pa;
      pa.principle_id = jr.at("principle_id").get<std::string>();
      pa.principle_name = jr.value("principle_name", std::string{});
      pa.score = score_from_json(jr.at("score"));
      pa.evidence = jr.value("evidence", std::string{});
      pa.parse_status = status_from(jr.at("parse_status").get<std::string>());
      pa.parse_detail = jr.value("parse_detail", std::string{});
      for (const auto& rr : jr.at("raw_responses")) {
        pa.raw_responses.push_back(RawResponse{rr.at("step_id").get<std::string>(),
                                               expected_from(rr.at("kind").get<std::string>()),
                                               rr.at("text").get<std::string>()});
      }
      if (jr.contains("supplementary")) {
        pa.supplementary_score = score_from_json(jr.at("supplementary").at("score"));
        pa.supplementary_evidence = jr.at("supplementary").value("evidence", std::string{});
      }
      run.results.push_back(std::move(pa));
    }
    return run;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("run document: ") + e.what());
  }
}

AssessmentRun load_run(const std::filesystem::path& path) { return run_from_json(detail::read_file(path)); }

}  // namespace tutoreval
