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

#include "tutoreval/strategies.hpp"

#include <cctype>

#include "tutoreval/error.hpp"
#include "util.hpp"

namespace tutoreval {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::ZeroShot1: return "zero_shot_1";
    case Strategy::ZeroShot2: return "zero_shot_2";
    case Strategy::ToT: return "tot";
    case Strategy::RAG: return "rag";
  }
  return "unknown";
}

std::string_view display_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::ZeroShot1: return "Zero-shot Prompt Type I";
    case Strategy::ZeroShot2: return "Zero-shot Prompt Type II";
    case Strategy::ToT: return "Tree of Thoughts (ToT)";
    case Strategy::RAG: return "Retrieval-Augmented Generation (RAG)";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  const auto t = detail::to_lower(detail::trim(text));
  if (t == "zero_shot_1" || t == "zs1" || t == "zeroshot1") return Strategy::ZeroShot1;
  if (t == "zero_shot_2" || t == "zs2" || t == "zeroshot2") return Strategy::ZeroShot2;
  if (t == "tot" || t == "tree_of_thoughts") return Strategy::ToT;
  if (t == "rag") return Strategy::RAG;
  return std::nullopt;
}

std::string_view to_string(ExpectedOutput kind) {
  switch (kind) {
    case ExpectedOutput::BinaryScore: return "binary_score";
    case ExpectedOutput::ScaleScore: return "scale_score";
    case ExpectedOutput::Identification: return "identification";
    case ExpectedOutput::Explanation: return "explanation";
    case ExpectedOutput::EvidenceList: return "evidence_list";
  }
  return "explanation";
}

// ---------------------------------------------------------------------------

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Calls fn(start, end, name) for each {identifier} token; end is one past '}'.
template <typename Fn>
void scan_placeholders(std::string_view body, Fn&& fn) {
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '{' || i + 1 >= body.size() || !ident_start(body[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < body.size() && ident_char(body[j])) ++j;
    if (j < body.size() && body[j] == '}') {
      fn(i, j + 1, body.substr(i + 1, j - i - 1));
      i = j;
    }
  }
}

}  // namespace

Template::Template(std::string template_id, std::string body) : id_(std::move(template_id)), body_(std::move(body)) {
  scan_placeholders(body_, [&](std::size_t, std::size_t, std::string_view name) {
    if (!allowed_placeholders().count(name)) {
      throw Error(ErrorCode::UnknownPlaceholder, "template '" + id_ + "' uses {" + std::string(name) + "}");
    }
    required_.emplace(name);
  });
}

std::string substitute(const Template& tmpl, const Bindings& bindings) {
  for (const auto& name : tmpl.required_placeholders()) {
    if (!bindings.count(name)) {
      throw Error(ErrorCode::MissingBinding, "template '" + tmpl.id() + "' needs {" + name + "}");
    }
  }
  const std::string& body = tmpl.body();
  std::string out;
  out.reserve(body.size() * 2);
  std::size_t copied = 0;
  scan_placeholders(body, [&](std::size_t start, std::size_t end, std::string_view name) {
    out.append(body, copied, start - copied);
    out += bindings.find(name)->second;
    copied = end;
  });
  out.append(body, copied, std::string::npos);
  return out;
}

// ---------------------------------------------------------------------------
// Default templates. The sentences after the framing lines are the published
// prompt texts, byte for byte.

namespace {

const std::string kFence = "\n\n--- TRANSCRIPT ---\n{Dialogue}\n--- END TRANSCRIPT ---";

const std::map<std::string, std::string, std::less<>>& default_bodies() {
  static const std::map<std::string, std::string, std::less<>> bodies = {
      {"zero_shot_1.scoring",
       "Given a dialogue of a tutoring session, please evaluate the Tutor based on specific best teaching practice "
       "within {Principle_Name} Please return 1 if the tutor correctly used the tutoring practice. Return 0 if the "
       "tutor incorrectly used the tutoring practice. Please only return 0 or 1" +
           kFence},
      {"zero_shot_1.generator", "Please briefly explain why you give the score?"},
      {"zero_shot_2.identification",
       "Given the following evaluation criteria\n{Principle_Criteria}\nPlease identify if there is any tutor's "
       "incorrect use of the tutoring strategy {Principle_Name} based on the criteria above.If there is incorrect "
       "response, return the incorrect response by tutor as evidence in the dialogue and list the criteria not met. If "
       "the tutor used teaching strategy correctly, please return based on the criteria above, which ones are correct "
       "and also return evidence from the dialogue." +
           kFence},
      {"zero_shot_2.score_generation",
       "Return the score of {Principle_Name} from 0 to 5 based on the evaluation. Give one point to each criteria met."},
      {"tot.layer_1",
       "{Social_Emotional_Learning_Principles}\nFor the following transcript between a tutor and a middle school "
       "student, score how well the tutor performed in the competency area above. Give one point for each of the "
       "following criteria or skills being met by the tutor. For example, if a tutor did not demonstrate any evidence "
       "of a given skill or criteria give a score of 0.  If a tutor met all the given criteria, give a score of 5. "
       "Please only return the evaluated score from 0 to 5.\n"
       "Return one line per competency in the form \"<competency name>: <score>\"." +
           kFence},
      {"tot.layer_2",
       "Competency: {Principle_Name}\nCriteria:\n{Principle_Criteria}\n\nFor each criteria listed, please indicate "
       "which from the current {Social_Emotional_Learning_Principles} is not met, and which criteria are met."},
      {"tot.layer_3",
       "Competency: {Principle_Name}\n\nGiven a dialogue of a tutoring session between a tutor and a middle school "
       "student, please evaluate the Tutor based on specific given criteria : {rubric}, Please return 1 if the tutor "
       "correctly used the tutoring practice. Return 0 if the tutor incorrectly used the tutoring practice. Provide "
       "your evaluation in the form of a number. Please also list evidence why you provide the evaluation."},
      {"rag.retriever",
       "Retrieved context:\n{Retrieved_Context}\n\nCompetency: {Principle_Name}\nCriteria:\n{Principle_Criteria}\n\n"
       "For each criteria and rubric above, please identify all of tutor's correct and incorrect use of the practice "
       "above.  Return the dialogues of the tutor as evidence in the format: 1. Competency 2. Each Criteria of the "
       "competency  3. Sentences that tutor said within the dialogue serves as evidence." +
           kFence},
      {"rag.generator",
       "Return the score of {Principle_Name} from 0 to 5 based on the evaluation. Give one point to each criteria met. "
       "Please only return the evaluated score from 0 to 5."},
  };
  return bodies;
}

}  // namespace

const std::vector<std::string>& TemplateSet::ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [id, body] : default_bodies()) v.push_back(id);
    return v;
  }();
  return ids;
}

TemplateSet TemplateSet::defaults() {
  TemplateSet set;
  for (const auto& [id, body] : default_bodies()) set.templates_.emplace(id, Template(id, body));
  return set;
}

TemplateSet TemplateSet::with_overrides(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::FileNotFound, "templates directory " + dir.string());
  TemplateSet set = defaults();
  for (const auto& id : ids()) {
    const auto file = dir / (id + ".txt");
    if (!std::filesystem::exists(file)) continue;
    std::string body = detail::read_file(file);
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    set.set(Template(id, std::move(body)));
  }
  return set;
}

const Template& TemplateSet::get(std::string_view template_id) const {
  const auto it = templates_.find(template_id);
  if (it == templates_.end()) throw Error(ErrorCode::ConfigError, "no template '" + std::string(template_id) + "'");
  return it->second;
}

void TemplateSet::set(Template tmpl) {
  const std::string id = tmpl.id();
  templates_.insert_or_assign(id, std::move(tmpl));
}

// ---------------------------------------------------------------------------

void PromptPlan::validate() const {
  if (steps.empty()) throw Error(ErrorCode::ValidationError, "plan has no steps");
  std::map<std::string, bool> branch_scored;
  for (const auto& s : steps) {
    if (!s.branch.empty()) branch_scored[s.branch] = branch_scored[s.branch] || is_scoring(s.expected_output);
  }
  bool root_scored = false;
  for (const auto& s : steps) root_scored = root_scored || (s.branch.empty() && is_scoring(s.expected_output));
  for (const auto& [branch, scored] : branch_scored) {
    if (!scored && !root_scored) throw Error(ErrorCode::ValidationError, "branch '" + branch + "' has no scoring step");
  }
}

std::string render_retrieved_context(const std::vector<std::string>& context) {
  if (context.empty()) return std::string(kNoRetrievedContext);
  std::string out;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i) out += "\n\n";
    out += "[" + std::to_string(i + 1) + "]\n" + context[i];
  }
  return out;
}

std::string render_principles_block(const Rubric& rubric) {
  std::string out;
  for (std::size_t i = 0; i < rubric.principles.size(); ++i) {
    const auto& p = rubric.principles[i];
    if (i) out += "\n\n";
    out += "Competency: " + p.name + "\n" + p.description + "\nCriteria:\n" + render_criteria(p);
  }
  return out;
}

namespace {

PromptStep make_step(const PlanOptions& options, std::string step_id, std::string_view template_id,
                     const Bindings& bindings, ExpectedOutput expected, bool feeds_forward, std::string branch) {
  const Template& tmpl = options.templates.get(template_id);
  return PromptStep{std::move(step_id), tmpl,          substitute(tmpl, bindings), expected,
                    feeds_forward,      std::move(branch)};
}

Bindings principle_bindings(const Principle& p, std::string_view dialogue) {
  return Bindings{{"Principle_Name", p.name},
                  {"Principle_Criteria", render_criteria(p)},
                  {"rubric", render_criteria(p)},
                  {"Social_Emotional_Learning_Principles", p.name},
                  {"Dialogue", std::string(dialogue)}};
}

}  // namespace

PromptPlan build_zero_shot_1(const Principle& principle, std::string_view dialogue_text, const PlanOptions& options) {
  const auto b = principle_bindings(principle, dialogue_text);
  PromptPlan plan{Strategy::ZeroShot1, PrincipleScope::PerPrinciple, options.system_message, {}};
  plan.steps.push_back(
      make_step(options, "scoring", "zero_shot_1.scoring", b, ExpectedOutput::BinaryScore, false, principle.principle_id));
  plan.steps.push_back(make_step(options, "generator", "zero_shot_1.generator", b, ExpectedOutput::Explanation, true,
                                 principle.principle_id));
  plan.validate();
  return plan;
}

PromptPlan build_zero_shot_2(const Principle& principle, std::string_view dialogue_text, const PlanOptions& options) {
  const auto b = principle_bindings(principle, dialogue_text);
  PromptPlan plan{Strategy::ZeroShot2, PrincipleScope::PerPrinciple, options.system_message, {}};
  plan.steps.push_back(make_step(options, "identification", "zero_shot_2.identification", b,
                                 ExpectedOutput::Identification, false, principle.principle_id));
  plan.steps.push_back(make_step(options, "score_generation", "zero_shot_2.score_generation", b,
                                 ExpectedOutput::ScaleScore, true, principle.principle_id));
  plan.validate();
  return plan;
}

PromptPlan build_tot(const Rubric& rubric, std::string_view dialogue_text, const PlanOptions& options) {
  if (rubric.principles.empty()) throw Error(ErrorCode::EmptyRubric, "ToT needs at least one principle");
  PromptPlan plan{Strategy::ToT, PrincipleScope::AllPrinciples, options.system_message, {}};
  const Bindings root{{"Social_Emotional_Learning_Principles", render_principles_block(rubric)},
                      {"Dialogue", std::string(dialogue_text)}};
  plan.steps.push_back(make_step(options, "layer_1", "tot.layer_1", root, ExpectedOutput::ScaleScore, false, ""));
  for (const auto& p : rubric.principles) {
    plan.steps.push_back(make_step(options, "layer_2", "tot.layer_2", principle_bindings(p, dialogue_text),
                                   ExpectedOutput::Identification, true, p.principle_id));
  }
  for (const auto& p : rubric.principles) {
    plan.steps.push_back(make_step(options, "layer_3", "tot.layer_3", principle_bindings(p, dialogue_text),
                                   ExpectedOutput::BinaryScore, true, p.principle_id));
  }
  plan.validate();
  return plan;
}

PromptPlan build_rag(const Principle& principle, std::string_view dialogue_text,
                     const std::vector<std::string>& retrieved_context, const PlanOptions& options) {
  auto b = principle_bindings(principle, dialogue_text);
  b["Retrieved_Context"] = render_retrieved_context(retrieved_context);
  PromptPlan plan{Strategy::RAG, PrincipleScope::PerPrinciple, options.system_message, {}};
  plan.steps.push_back(make_step(options, "retriever", "rag.retriever", b, ExpectedOutput::EvidenceList, false,
                                 principle.principle_id));
  plan.steps.push_back(make_step(options, "generator", "rag.generator", b, ExpectedOutput::ScaleScore, true,
                                 principle.principle_id));
  plan.validate();
  return plan;
}

}  // namespace tutoreval
