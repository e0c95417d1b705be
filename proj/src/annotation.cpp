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

#include "tutoreval/annotation.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"
#include "util.hpp"

namespace tutoreval {

using nlohmann::json;

bool is_correctness_code(double value) {
  for (int c : kCorrectnessCodes) {
    if (value == static_cast<double>(c)) return true;
  }
  return false;
}

bool is_hallucination_code(double value) {
  for (double c : kHallucinationCodes) {
    if (value == c) return true;
  }
  return false;
}

namespace {

std::string code_text(double v) {
  if (v == 0.5) return "0.5";
  return std::to_string(static_cast<int>(v));
}

}  // namespace

void validate_annotation(const AnnotationRecord& record) {
  if (!is_correctness_code(record.correctness)) {
    throw Error(ErrorCode::InvalidCode, "correctness " + std::to_string(record.correctness) + " is not one of -1, 0, 1");
  }
  if (!is_hallucination_code(record.hallucination)) {
    throw Error(ErrorCode::InvalidCode,
                "hallucination " + std::to_string(record.hallucination) + " is not one of -1, 0, 0.5, 1");
  }
  if ((record.correctness == -1.0) != (record.hallucination == -1.0)) {
    throw Error(ErrorCode::InconsistentNoInfo, "-1 (nothing generated) must be used for both metrics or neither");
  }
}

const CodingGuide& CodingGuide::standard() {
  static const CodingGuide guide{{
      {"correctness", "-1", "The model produced nothing for this principle."},
      {"correctness", "0", "The model's score or feedback misjudges how the tutor used the principle."},
      {"correctness", "1", "The model's score and feedback match how the tutor used the principle."},
      {"hallucination", "-1", "The model produced nothing for this principle."},
      {"hallucination", "0", "Everything the model says is grounded in the transcript."},
      {"hallucination", "0.5", "Grounded and invented content are mixed."},
      {"hallucination", "1", "The response is invented or unrelated to what happened in the transcript."},
  }};
  return guide;
}

std::string CodingGuide::render() const {
  std::string out = "Coding guide (the two metrics are independent, except that -1 is used for both or neither)\n";
  std::string metric;
  for (const auto& e : entries) {
    if (e.metric != metric) {
      metric = e.metric;
      out += "  " + metric + ":\n";
    }
    out += "    " + e.code + std::string(e.code.size() < 4 ? 4 - e.code.size() : 0, ' ') + " " + e.meaning + "\n";
  }
  return out;
}

std::string annotation_to_json_line(const AnnotationRecord& r) {
  json j = {{"annotation_id", r.annotation_id},
            {"run_id", r.run_id},
            {"principle_id", r.principle_id},
            {"correctness", r.correctness},
            {"hallucination", r.hallucination},
            {"coder_id", r.coder_id},
            {"annotated_at", detail::format_utc(r.annotated_at)}};
  if (r.notes) j["notes"] = *r.notes;
  return j.dump();
}

AnnotationRecord annotation_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    AnnotationRecord r;
    r.annotation_id = j.at("annotation_id").get<std::string>();
    r.run_id = j.at("run_id").get<std::string>();
    r.principle_id = j.at("principle_id").get<std::string>();
    r.correctness = j.at("correctness").get<double>();
    r.hallucination = j.at("hallucination").get<double>();
    r.coder_id = j.at("coder_id").get<std::string>();
    if (j.contains("notes") && !j.at("notes").is_null()) r.notes = j.at("notes").get<std::string>();
    r.annotated_at = detail::parse_utc(j.at("annotated_at").get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("annotation line: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

AnnotationStore::AnnotationStore(std::filesystem::path dir)
    : dir_(std::move(dir)), records_path_(dir_ / "annotations.jsonl") {}

void AnnotationStore::append(const AnnotationRecord& record) {
  validate_annotation(record);
  detail::append_file(records_path_, annotation_to_json_line(record) + "\n");
}

std::vector<AnnotationRecord> AnnotationStore::load() const {
  std::vector<AnnotationRecord> out;
  if (!std::filesystem::exists(records_path_)) return out;
  const std::string content = detail::read_file(records_path_);
  for (const auto line : detail::split_lines(content)) {
    if (detail::trim(line).empty()) continue;
    out.push_back(annotation_from_json_line(line));
    validate_annotation(out.back());
  }
  return out;
}

namespace {

std::filesystem::path cursor_path(const std::filesystem::path& dir, std::string_view run_id, std::string_view coder) {
  std::string name = std::string(run_id) + "." + std::string(coder);
  for (char& c : name) {
    if (c == '/' || c == '\\') c = '_';
  }
  return dir / "cursors" / name;
}

}  // namespace

std::size_t AnnotationStore::cursor(std::string_view run_id, std::string_view coder_id) const {
  const auto path = cursor_path(dir_, run_id, coder_id);
  if (!std::filesystem::exists(path)) return 0;
  const std::string text(detail::trim(detail::read_file(path)));
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{}) throw Error(ErrorCode::ParseError, "corrupt cursor file " + path.string());
  return v;
}

void AnnotationStore::set_cursor(std::string_view run_id, std::string_view coder_id, std::size_t next_index) {
  detail::write_file(cursor_path(dir_, run_id, coder_id), std::to_string(next_index) + "\n");
}

std::string AnnotationStore::next_annotation_id() const {
  std::size_t n = 0;
  if (std::filesystem::exists(records_path_)) {
    const std::string content = detail::read_file(records_path_);
    for (const auto line : detail::split_lines(content)) {
      if (!detail::trim(line).empty()) ++n;
    }
  }
  return "a" + std::to_string(n + 1);
}

// ---------------------------------------------------------------------------

namespace {

struct AbortRequested {};

std::optional<double> parse_code(std::string_view text) {
  const auto t = detail::trim(text);
  if (t.empty()) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

class Prompter {
 public:
  Prompter(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

  std::string ask(const std::string& question) {
    out_ << question << std::flush;
    std::string line;
    if (!std::getline(in_, line)) throw AbortRequested{};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = detail::trim(line);
    if (t == "q" || t == "quit") throw AbortRequested{};
    return line;
  }

  double ask_code(const std::string& question, bool (*valid)(double), const std::string& allowed) {
    for (;;) {
      const std::string line = ask(question);
      if (detail::trim(line) == "?") {
        out_ << CodingGuide::standard().render();
        continue;
      }
      if (auto v = parse_code(line); v && valid(*v)) return *v;
      out_ << "  Please enter one of " << allowed << " (? shows the coding guide, q stops).\n";
    }
  }

  std::ostream& out() { return out_; }

 private:
  std::istream& in_;
  std::ostream& out_;
};

}  // namespace

std::vector<AnnotationRecord> annotate_interactive(AnnotationSession s) {
  const auto clock = s.clock ? s.clock : [] { return std::chrono::system_clock::now(); };
  Prompter prompt(s.in, s.out);
  std::vector<AnnotationRecord> records;
  const std::size_t total = s.run.results.size();
  std::size_t index = s.store.cursor(s.run.run_id, s.coder_id);

  s.out << "Annotating run " << s.run.run_id << " (" << display_name(s.run.strategy) << ", " << s.run.model_id
        << ") as " << s.coder_id << "\n";
  if (index >= total) {
    s.out << "All " << total << " principles of this run are already annotated by " << s.coder_id << ".\n";
    return records;
  }
  if (index > 0) s.out << "Resuming at principle " << index + 1 << " of " << total << ".\n";
  s.out << "\n" << CodingGuide::standard().render();
  if (s.transcript) s.out << "\nTranscript " << s.transcript->session_id << ":\n" << render_dialogue(*s.transcript) << "\n";

  try {
    for (; index < total; ++index) {
      const PrincipleAssessment& pa = s.run.results[index];
      s.out << "\n=== Principle " << index + 1 << "/" << total << ": "
            << (pa.principle_name.empty() ? pa.principle_id : pa.principle_name) << " ===\n";
      if (s.rubric) {
        if (const Principle* p = s.rubric->find(pa.principle_id)) s.out << "Criteria:\n" << render_criteria(*p) << "\n";
      }
      if (pa.score.is_missing()) {
        s.out << "Model score: none (" << to_string(pa.parse_status) << ")\n";
      } else {
        s.out << "Model score: " << *pa.score.value() << " (" << to_string(pa.score.scale()) << ")\n";
      }
      if (pa.supplementary_score && !pa.supplementary_score->is_missing()) {
        s.out << "Supplementary judgment: " << *pa.supplementary_score->value() << " ("
              << to_string(pa.supplementary_score->scale()) << ")\n";
      }
      s.out << "Model evidence:\n" << (pa.evidence.empty() ? std::string("(none)") : pa.evidence) << "\n";
      if (!pa.supplementary_evidence.empty()) s.out << "Supplementary evidence:\n" << pa.supplementary_evidence << "\n";

      AnnotationRecord rec;
      rec.run_id = s.run.run_id;
      rec.principle_id = pa.principle_id;
      rec.coder_id = s.coder_id;

      bool prefilled = false;
      if (pa.parse_status == ParseStatus::NoInformation) {
        for (;;) {
          const auto answer =
              detail::to_lower(detail::trim(prompt.ask("No information was generated. Record (-1, -1)? [Y/n] ")));
          if (answer.empty() || answer == "y" || answer == "yes") {
            rec.correctness = -1;
            rec.hallucination = -1;
            prefilled = true;
            break;
          }
          if (answer == "n" || answer == "no") break;
        }
      }
      while (!prefilled) {
        rec.correctness = prompt.ask_code("Correctness [-1/0/1]: ", is_correctness_code, "-1, 0, 1");
        rec.hallucination = prompt.ask_code("Hallucination [-1/0/0.5/1]: ", is_hallucination_code, "-1, 0, 0.5, 1");
        try {
          validate_annotation(rec);
          break;
        } catch (const Error& e) {
          s.out << "  " << e.what() << "\n";
        }
      }
      const auto notes = std::string(detail::trim(prompt.ask("Notes (optional): ")));
      if (!notes.empty()) rec.notes = notes;
      rec.annotation_id = s.store.next_annotation_id();
      rec.annotated_at = clock();
      s.store.append(rec);
      s.store.set_cursor(s.run.run_id, s.coder_id, index + 1);
      records.push_back(std::move(rec));
    }
  } catch (const AbortRequested&) {
    throw Error(ErrorCode::Aborted, "stopped at principle " + std::to_string(index + 1) + " of " +
                                        std::to_string(total) + "; " + std::to_string(records.size()) +
                                        " record(s) saved, rerun to resume");
  }
  s.out << "\nSaved " << records.size() << " annotation(s) to " << s.store.records_path().string() << "\n";
  return records;
}

// ---------------------------------------------------------------------------

AccuracyReport aggregate(const std::vector<AnnotationRecord>& annotations, const std::vector<AssessmentRun>& runs) {
  std::map<std::string, const AssessmentRun*> by_id;
  std::size_t pairs = 0;
  for (const auto& r : runs) {
    by_id[r.run_id] = &r;
    pairs += r.results.size();
  }
  AccuracyReport report;
  for (const auto& r : runs) report.cells[{std::string(to_string(r.strategy)), r.model_id}];
  std::set<std::pair<std::string, std::string>> covered;
  for (const auto& a : annotations) {
    const auto it = by_id.find(a.run_id);
    if (it == by_id.end()) throw Error(ErrorCode::DanglingRunReference, "annotation refers to unknown run " + a.run_id);
    const AssessmentRun& run = *it->second;
    AccuracyCell& cell = report.cells[{std::string(to_string(run.strategy)), run.model_id}];
    ++cell.counts[CodePair{a.correctness, a.hallucination}];
    ++cell.total;
    ++report.total_annotations;
    if (a.correctness == 1.0 && a.hallucination == 0.0) {
      ++cell.desired_count;
      ++report.desired_count;
    }
    for (const auto& pa : run.results) {
      if (pa.principle_id == a.principle_id) covered.emplace(a.run_id, a.principle_id);
    }
  }
  report.coverage = pairs == 0 ? 0.0 : static_cast<double>(covered.size()) / static_cast<double>(pairs);
  return report;
}

namespace {

std::vector<std::string> ordered_strategy_tokens(const AccuracyReport& report) {
  std::set<std::string> seen;
  for (const auto& [key, cell] : report.cells) seen.insert(key.first);
  std::vector<std::string> out;
  for (Strategy s : kAllStrategies) {
    if (seen.erase(std::string(to_string(s)))) out.emplace_back(to_string(s));
  }
  out.insert(out.end(), seen.begin(), seen.end());
  return out;
}

std::string label_for(const std::string& token) {
  if (auto s = parse_strategy(token)) return std::string(display_name(*s));
  return token;
}

}  // namespace

std::string render_accuracy_markdown(const AccuracyReport& report) {
  std::set<std::string> model_set;
  for (const auto& [key, cell] : report.cells) model_set.insert(key.second);
  const std::vector<std::string> models(model_set.begin(), model_set.end());
  const auto strategies = ordered_strategy_tokens(report);

  std::string out = "Correct and hallucination-free assessments (correctness 1, hallucination 0) per cell:\n\n| Prompt |";
  for (const auto& m : models) out += " " + m + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < models.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& s : strategies) {
    out += "| " + label_for(s) + " |";
    for (const auto& m : models) {
      const auto it = report.cells.find({s, m});
      if (it == report.cells.end()) {
        out += " - |";
      } else {
        out += " " + std::to_string(it->second.desired_count) + "/" + std::to_string(it->second.total) + " |";
      }
    }
    out += "\n";
  }
  char coverage[32];
  std::snprintf(coverage, sizeof coverage, "%.1f%%", report.coverage * 100.0);
  out += "\nAnnotations: " + std::to_string(report.total_annotations) + ", desired: " +
         std::to_string(report.desired_count) + ", coverage: " + coverage + "\n";

  for (const auto& s : strategies) {
    for (const auto& m : models) {
      const auto it = report.cells.find({s, m});
      if (it == report.cells.end()) continue;
      out += "\n### " + label_for(s) + " / " + m + "\n\n| correctness \\ hallucination |";
      for (double h : kHallucinationCodes) out += " " + code_text(h) + " |";
      out += "\n|---|---|---|---|---|\n";
      for (int c : {1, 0, -1}) {
        out += "| " + std::to_string(c) + " |";
        for (double h : kHallucinationCodes) {
          const auto cnt = it->second.counts.find(CodePair{static_cast<double>(c), h});
          out += " " + std::to_string(cnt == it->second.counts.end() ? 0 : cnt->second) + " |";
        }
        out += "\n";
      }
    }
  }
  return out;
}

std::string accuracy_matrix_json(const AccuracyReport& report) {
  json cells = json::array();
  for (const auto& [key, cell] : report.cells) {
    for (const auto& [pair, count] : cell.counts) {
      cells.push_back({{"strategy", key.first},
                       {"model_id", key.second},
                       {"correctness", pair.correctness},
                       {"hallucination", pair.hallucination},
                       {"count", count}});
    }
  }
  return json{{"cells", std::move(cells)},
              {"total_annotations", report.total_annotations},
              {"desired_count", report.desired_count},
              {"coverage", report.coverage}}
             .dump(2) +
         "\n";
}

}  // namespace tutoreval
