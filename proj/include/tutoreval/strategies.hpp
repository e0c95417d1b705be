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

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tutoreval/principles.hpp"

namespace tutoreval {

enum class Strategy { ZeroShot1, ZeroShot2, ToT, RAG };

inline constexpr std::array<Strategy, 4> kAllStrategies = {Strategy::ZeroShot1, Strategy::ZeroShot2, Strategy::ToT,
                                                           Strategy::RAG};

/// Stable machine token: "zero_shot_1", "zero_shot_2", "tot", "rag".
std::string_view to_string(Strategy strategy);
/// Human-readable name used in reports.
std::string_view display_name(Strategy strategy);
/// Accepts the machine token plus short aliases (zs1, zs2, tot, rag).
std::optional<Strategy> parse_strategy(std::string_view text);

/// Placeholder names a template may use.
inline const std::set<std::string, std::less<>>& allowed_placeholders() {
  static const std::set<std::string, std::less<>> names = {
      "Principle_Name", "Principle_Criteria", "Social_Emotional_Learning_Principles",
      "rubric",         "Dialogue",           "Retrieved_Context"};
  return names;
}

class Template {
 public:
  /// Scans the body for {Identifier} tokens. Throws UnknownPlaceholder for
  /// identifiers outside allowed_placeholders(); other braces are literal.
  Template(std::string template_id, std::string body);

  const std::string& id() const { return id_; }
  const std::string& body() const { return body_; }
  const std::set<std::string, std::less<>>& required_placeholders() const { return required_; }

  friend bool operator==(const Template&, const Template&) = default;

 private:
  std::string id_;
  std::string body_;
  std::set<std::string, std::less<>> required_;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Single pass: substituted values are never rescanned. Throws MissingBinding.
std::string substitute(const Template& tmpl, const Bindings& bindings);

/// The templates a plan is built from, keyed by template id.
class TemplateSet {
 public:
  static const std::vector<std::string>& ids();
  static TemplateSet defaults();
  /// Defaults, with any "<template_id>.txt" file in dir replacing its entry.
  static TemplateSet with_overrides(const std::filesystem::path& dir);

  const Template& get(std::string_view template_id) const;
  void set(Template tmpl);

 private:
  std::map<std::string, Template, std::less<>> templates_;
};

inline constexpr std::string_view kDefaultSystemMessage = "You are an expert evaluator of math tutoring practice.";
inline constexpr std::string_view kTranscriptFenceOpen = "--- TRANSCRIPT ---";
inline constexpr std::string_view kTranscriptFenceClose = "--- END TRANSCRIPT ---";
inline constexpr std::string_view kNoRetrievedContext = "(no retrieved context)";

enum class ExpectedOutput { BinaryScore, ScaleScore, Identification, Explanation, EvidenceList };
std::string_view to_string(ExpectedOutput kind);
inline bool is_scoring(ExpectedOutput kind) {
  return kind == ExpectedOutput::BinaryScore || kind == ExpectedOutput::ScaleScore;
}

struct PromptStep {
  std::string step_id;
  Template tmpl;
  std::string text;  // rendered user message
  ExpectedOutput expected_output = ExpectedOutput::Explanation;
  /// Whether earlier exchanges of the same branch (and the shared root) are
  /// sent as history with this step.
  bool feeds_forward = false;
  /// principle_id of the branch, or empty for a root step shared by all branches.
  std::string branch;
};

enum class PrincipleScope { PerPrinciple, AllPrinciples };

struct PromptPlan {
  Strategy strategy = Strategy::ZeroShot1;
  PrincipleScope scope = PrincipleScope::PerPrinciple;
  std::optional<std::string> system_message;
  std::vector<PromptStep> steps;

  /// Throws ValidationError: empty plan, or a branch without a final scoring step.
  void validate() const;
};

struct PlanOptions {
  TemplateSet templates = TemplateSet::defaults();
  std::optional<std::string> system_message = std::string(kDefaultSystemMessage);
};

PromptPlan build_zero_shot_1(const Principle& principle, std::string_view dialogue_text,
                             const PlanOptions& options = {});
PromptPlan build_zero_shot_2(const Principle& principle, std::string_view dialogue_text,
                             const PlanOptions& options = {});
/// One plan: a shared Layer_1 root scoring every principle, then Layer_2 and
/// Layer_3 per principle branch.
PromptPlan build_tot(const Rubric& rubric, std::string_view dialogue_text, const PlanOptions& options = {});
PromptPlan build_rag(const Principle& principle, std::string_view dialogue_text,
                     const std::vector<std::string>& retrieved_context, const PlanOptions& options = {});

/// Renders the numbered context block, or kNoRetrievedContext when empty.
std::string render_retrieved_context(const std::vector<std::string>& context);
/// "Competency: <name>\n<description>\nCriteria:\n<numbered>" per principle.
std::string render_principles_block(const Rubric& rubric);

}  // namespace tutoreval
