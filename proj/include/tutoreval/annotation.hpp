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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tutoreval/assessment.hpp"

namespace tutoreval {

/// Correctness codes: -1 nothing generated, 0 incorrect, 1 correct.
/// Hallucination codes: -1 nothing generated, 0 none, 0.5 partial, 1 complete.
inline constexpr int kCorrectnessCodes[] = {-1, 0, 1};
inline constexpr double kHallucinationCodes[] = {-1.0, 0.0, 0.5, 1.0};

struct AnnotationRecord {
  std::string annotation_id;
  std::string run_id;
  std::string principle_id;
  double correctness = 0;
  double hallucination = 0;
  std::string coder_id;
  std::optional<std::string> notes;
  std::chrono::system_clock::time_point annotated_at;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

bool is_correctness_code(double value);
bool is_hallucination_code(double value);

/// Throws InvalidCode or InconsistentNoInfo (-1 on exactly one metric).
void validate_annotation(const AnnotationRecord& record);

struct CodingGuide {
  struct Entry {
    std::string metric;
    std::string code;
    std::string meaning;
  };
  std::vector<Entry> entries;

  static const CodingGuide& standard();
  std::string render() const;
};

std::string annotation_to_json_line(const AnnotationRecord& record);
AnnotationRecord annotation_from_json_line(std::string_view line);

/// Append-only, line-delimited record file plus resumable cursor files under
/// <dir>/cursors/<run_id>.<coder_id>.
class AnnotationStore {
 public:
  explicit AnnotationStore(std::filesystem::path dir);

  /// Validates, then appends. Invalid records are never written.
  void append(const AnnotationRecord& record);
  std::vector<AnnotationRecord> load() const;

  std::size_t cursor(std::string_view run_id, std::string_view coder_id) const;
  void set_cursor(std::string_view run_id, std::string_view coder_id, std::size_t next_index);

  const std::filesystem::path& records_path() const { return records_path_; }
  std::string next_annotation_id() const;

 private:
  std::filesystem::path dir_;
  std::filesystem::path records_path_;
};

struct AnnotationSession {
  const AssessmentRun& run;
  std::string coder_id;
  const Transcript* transcript = nullptr;  // shown to the coder when available
  const Rubric* rubric = nullptr;          // criteria shown when available
  std::istream& in;
  std::ostream& out;
  AnnotationStore& store;
  std::function<std::chrono::system_clock::time_point()> clock;
};

/// Walks the run's principles from the stored cursor, collecting both codes
/// and optional notes per principle. NoInformation principles are offered the
/// (-1, -1) pre-fill. Invalid input re-prompts. "q" or end of input persists
/// what was collected and throws Error(Aborted); the cursor lets the next
/// session resume.
std::vector<AnnotationRecord> annotate_interactive(AnnotationSession session);

struct CodePair {
  double correctness;
  double hallucination;
  friend auto operator<=>(const CodePair&, const CodePair&) = default;
};

struct AccuracyCell {
  std::map<CodePair, std::size_t> counts;
  std::size_t total = 0;
  std::size_t desired_count = 0;  // correctness 1 and hallucination 0
};

struct AccuracyReport {  // one cell per (strategy, model) seen in the runs
  std::map<std::pair<std::string, std::string>, AccuracyCell> cells;  // (strategy token, model_id)
  std::size_t total_annotations = 0;
  std::size_t desired_count = 0;
  double coverage = 0.0;  // annotated (run, principle) pairs / all pairs
};

/// Pure counting. Throws DanglingRunReference for annotations of unknown runs.
AccuracyReport aggregate(const std::vector<AnnotationRecord>& annotations, const std::vector<AssessmentRun>& runs);

std::string render_accuracy_markdown(const AccuracyReport& report);
/// [{strategy, model_id, correctness, hallucination, count}, ...]
std::string accuracy_matrix_json(const AccuracyReport& report);

}  // namespace tutoreval
