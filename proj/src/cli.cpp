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

#include "tutoreval/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "tutoreval/annotation.hpp"
#include "tutoreval/assessment.hpp"
#include "tutoreval/cost_ledger.hpp"
#include "tutoreval/llm_client.hpp"
#include "tutoreval/principles.hpp"
#include "tutoreval/rag_store.hpp"
#include "tutoreval/strategies.hpp"
#include "tutoreval/transcript.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace tutoreval {
namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<TranscriptFormat> parse_format(const std::string& text, const std::string& path) {
  if (text == "auto") return format_for_path(path);
  if (text == "plain") return TranscriptFormat::PlainDialogue;
  if (text == "jsonl") return TranscriptFormat::JsonLines;
  return std::nullopt;
}

// A raw transcript, or an ingested ".json" artifact.
Transcript read_transcript(const std::string& path, const std::string& format) {
  const fs::path p(path);
  if (p.extension() == ".json") return transcript_from_json(detail::read_file(p));
  const auto fmt = parse_format(format, path);
  if (!fmt) throw ConfigError("unknown --format '" + format + "' (auto, plain, jsonl)");
  return parse_transcript(detail::read_file(p), *fmt, p.stem().string());
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs, const std::string& extension) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == extension) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      throw ConfigError("input not found: " + in);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> transcripts;
  std::string format = "auto";
  std::string out;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  if (a.format != "auto" && a.format != "plain" && a.format != "jsonl") {
    err << "error: unknown --format '" << a.format << "' (auto, plain, jsonl)\n";
    return kExitConfigError;
  }
  int failures = 0;
  std::set<std::string> seen;
  for (const auto& path : a.transcripts) {
    try {
      const Transcript t = read_transcript(path, a.format);
      if (!seen.insert(t.session_id).second) {
        throw Error(ErrorCode::ValidationError, "duplicate session_id '" + t.session_id + "'");
      }
      const fs::path dest = fs::path(a.out) / "transcripts" / (t.session_id + ".json");
      detail::write_file(dest, transcript_to_json(t));
      out << "ingested " << path << " -> " << dest.string() << " (" << t.turns.size() << " turns)\n";
    } catch (const Error& e) {
      ++failures;
      if (e.line()) {
        err << "error: " << path << ":" << *e.line() << ": " << e.what() << "\n";
      } else {
        err << "error: " << path << ": " << e.what() << "\n";
      }
    } catch (const ConfigError& e) {
      ++failures;
      err << "error: " << path << ": " << e.what() << "\n";
    }
  }
  return failures ? kExitPartialFailure : kExitOk;
}

// ---------------------------------------------------------------------------

struct AssessArgs {
  std::vector<std::string> transcripts;
  std::string format = "auto";
  std::string rubric;
  std::string strategy = "all";
  std::string model;
  std::string backend = "real";
  std::string mock_script;
  std::string embedder = "hashing";
  std::string embedding_model = "text-embedding-3-small";
  std::size_t embedding_dim = 0;
  std::size_t window = 10;
  std::size_t overlap = 2;
  std::size_t top_k = kDefaultTopK;
  std::string prices;
  std::string out;
  int parallelism = LlmClient::kDefaultParallelism;
  std::uint64_t seed = 0;
  std::string templates;
  bool no_system_message = false;
  double temperature = kDefaultTemperature;
  int max_output_tokens = kDefaultMaxOutputTokens;
};

json effective_config(const AssessArgs& a, Strategy strategy, const std::string& transcript_id) {
  return json{{"transcript_id", transcript_id},
              {"format", a.format},
              {"rubric", a.rubric.empty() ? std::string("default") : a.rubric},
              {"strategy", std::string(to_string(strategy))},
              {"model", a.model},
              {"backend", a.backend},
              {"mock_script", a.mock_script},
              {"embedder", a.embedder},
              {"embedding_model", a.embedder == "remote" ? a.embedding_model : std::string()},
              {"window", a.window},
              {"overlap", a.overlap},
              {"top_k", a.top_k},
              {"prices", a.prices},
              {"parallelism", a.parallelism},
              {"seed", a.seed},
              {"templates", a.templates},
              {"system_message", !a.no_system_message},
              {"temperature", a.temperature},
              {"max_output_tokens", a.max_output_tokens}};
}

std::string score_text(const PrincipleAssessment& pa) {
  if (pa.score.is_missing()) return std::string(to_string(pa.parse_status));
  return std::to_string(*pa.score.value()) + (pa.score.scale() == ScoreScale::Binary01 ? "/1" : "/5");
}

int cmd_assess(const AssessArgs& a, std::ostream& out, std::ostream& err) {
  // Configuration: everything here fails with exit code 2 before any request.
  std::vector<Strategy> strategies;
  std::vector<Transcript> transcripts;
  Rubric rubric;
  PriceTable prices;
  PlanOptions plan_options;
  std::shared_ptr<Backend> backend;
  std::unique_ptr<Embedder> embedder;
  int failures = 0;
  try {
    if (a.strategy == "all") {
      strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
    } else {
      const auto s = parse_strategy(a.strategy);
      if (!s) throw ConfigError("unknown --strategy '" + a.strategy + "' (zero_shot_1, zero_shot_2, tot, rag, all)");
      strategies.push_back(*s);
    }
    if (a.model.empty()) throw ConfigError("--model is required");
    if (a.out.empty()) throw ConfigError("--out is required");
    if (a.prices.empty()) throw ConfigError("--prices is required (see data/prices.sample.json)");
    if (a.parallelism < 1) throw ConfigError("--parallelism must be at least 1");
    if (a.overlap >= a.window) throw ConfigError("--overlap must be smaller than --window");
    if (a.top_k < 1) throw ConfigError("--top-k must be at least 1");
    prices = load_price_table(a.prices);
    prices.at(a.model);
    rubric = a.rubric.empty() ? default_rubric() : load_rubric(a.rubric);
    if (!a.templates.empty()) plan_options.templates = TemplateSet::with_overrides(a.templates);
    if (a.no_system_message) plan_options.system_message.reset();

    if (a.backend == "mock") {
      if (a.mock_script.empty()) throw ConfigError("--backend mock needs --mock-script");
      backend = std::make_shared<MockBackend>(load_mock_script(a.mock_script));
    } else if (a.backend == "real") {
      backend = std::make_shared<OpenAiBackend>(HttpEndpoint::from_environment());
    } else {
      throw ConfigError("unknown --backend '" + a.backend + "' (real, mock)");
    }
    if (a.embedder == "hashing") {
      embedder = std::make_unique<HashingEmbedder>(a.embedding_dim ? a.embedding_dim : HashingEmbedder::kDefaultDimension);
    } else if (a.embedder == "remote") {
      embedder = std::make_unique<RemoteEmbedder>(HttpEndpoint::from_environment(), a.embedding_model,
                                                  a.embedding_dim ? a.embedding_dim : 1536);
    } else {
      throw ConfigError("unknown --embedder '" + a.embedder + "' (hashing, remote)");
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  }

  for (const auto& path : a.transcripts) {
    try {
      transcripts.push_back(read_transcript(path, a.format));
    } catch (const ConfigError& e) {
      err << "configuration error: " << e.what() << "\n";
      return kExitConfigError;
    } catch (const Error& e) {
      ++failures;
      err << "error: " << path << (e.line() ? ":" + std::to_string(*e.line()) : std::string()) << ": " << e.what()
          << "\n";
    }
  }

  // Mock runs use a pinned clock so reruns produce byte-identical artifacts.
  Clock clock;
  if (a.backend == "mock") clock = [] { return std::chrono::system_clock::time_point{}; };

  LlmClient client(backend, RetryPolicy{}, a.parallelism);
  for (const auto& transcript : transcripts) {
    std::unique_ptr<VectorStore> store;
    for (Strategy strategy : strategies) {
      const json config = effective_config(a, strategy, transcript.session_id);
      const std::string run_id =
          std::string(to_string(strategy)) + "-" +
          detail::hex64(detail::fnv1a64(config.dump() + "\x1f" + render_dialogue(transcript) + "\x1f" +
                                        rubric_to_json(rubric)));
      try {
        if (strategy == Strategy::RAG && !store) {
          store = build_store(transcript, rubric, *embedder, ChunkParams{a.window, a.overlap});
          store->save(fs::path(a.out) / "stores" / (transcript.session_id + ".store.jsonl"));
        }
        const fs::path cost_path = fs::path(a.out) / "costs" / (run_id + ".jsonl");
        fs::remove(cost_path);
        CostLedger ledger(cost_path);
        AssessOptions options;
        options.run_id = run_id;
        options.plan = plan_options;
        options.top_k = a.top_k;
        options.temperature = a.temperature;
        options.max_output_tokens = a.max_output_tokens;
        options.clock = clock;
        options.config_json = config.dump();
        AssessmentContext ctx{client, ledger, prices, store.get(), embedder.get()};
        const AssessmentRun run = assess(transcript, rubric, strategy, a.model, ctx, options);
        const fs::path run_path = fs::path(a.out) / "runs" / (run_id + ".json");
        detail::write_file(run_path, run_to_json(run));
        out << run_id << "  " << display_name(strategy) << "  " << transcript.session_id << "  cost "
            << run.total_cost.to_string(6) << " " << prices.currency_code << "\n";
        for (const auto& pa : run.results) out << "    " << pa.principle_name << ": " << score_text(pa) << "\n";
      } catch (const Error& e) {
        ++failures;
        err << "error: run " << run_id << " (" << display_name(strategy) << ", " << transcript.session_id
            << "): " << e.what() << "\n";
        if (e.code() == ErrorCode::AuthError) return kExitConfigError;
      }
    }
  }
  return failures ? kExitPartialFailure : kExitOk;
}

// ---------------------------------------------------------------------------

struct AnnotateArgs {
  std::string run;
  std::string coder;
  std::string transcript;
  std::string format = "auto";
  std::string rubric;
  std::string store;
};

int cmd_annotate(const AnnotateArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  AssessmentRun run;
  std::optional<Transcript> transcript;
  std::optional<Rubric> rubric;
  try {
    run = load_run(a.run);
    if (!a.transcript.empty()) transcript = read_transcript(a.transcript, a.format);
    rubric = a.rubric.empty() ? default_rubric() : load_rubric(a.rubric);
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const fs::path store_dir =
      a.store.empty() ? fs::path(a.run).parent_path().parent_path() / "annotations" : fs::path(a.store);
  AnnotationStore store(store_dir);
  try {
    annotate_interactive(AnnotationSession{run, a.coder, transcript ? &*transcript : nullptr, &*rubric, in, out, store,
                                           nullptr});
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitPartialFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> ledgers;
  std::vector<std::string> runs;
  std::vector<std::string> annotations;
  std::string prices;
  std::string out;
};

int cmd_report_cost(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<CostEntry> entries;
  std::string currency = "USD";
  try {
    if (!a.prices.empty()) currency = load_price_table(a.prices).currency_code;
    for (const auto& p : expand_inputs(a.ledgers, ".jsonl")) {
      auto part = CostLedger::read_file(p);
      entries.insert(entries.end(), part.begin(), part.end());
    }
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const CostReport report = cost_report(entries);
  const std::string md = render_cost_markdown(report, currency);
  out << md;
  if (!a.out.empty()) {
    detail::write_file(fs::path(a.out) / "cost_report.md", md);
    detail::write_file(fs::path(a.out) / "cost_report.json", cost_report_to_json(report));
  }
  return kExitOk;
}

int cmd_report_accuracy(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<AssessmentRun> runs;
  std::vector<AnnotationRecord> annotations;
  try {
    for (const auto& p : expand_inputs(a.runs, ".json")) runs.push_back(load_run(p));
    for (const auto& p : expand_inputs(a.annotations, ".jsonl")) {
      const std::string text = detail::read_file(p);
      for (const auto line : detail::split_lines(text)) {
        if (detail::trim(line).empty()) continue;
        annotations.push_back(annotation_from_json_line(line));
        validate_annotation(annotations.back());
      }
    }
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  }
  AccuracyReport report;
  try {
    report = aggregate(annotations, runs);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitPartialFailure;
  }
  const std::string md = render_accuracy_markdown(report);
  out << md;
  if (!a.out.empty()) {
    detail::write_file(fs::path(a.out) / "accuracy_report.md", md);
    detail::write_file(fs::path(a.out) / "accuracy_matrix.json", accuracy_matrix_json(report));
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"tutoreval: assess tutors' social-emotional-learning practice from tutoring transcripts"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with an [assess] section; flags override it, it overrides the environment");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate transcripts and store them as JSON artifacts");
  ingest_cmd->add_option("--transcript", ingest.transcripts, "Transcript file (repeatable)")->required();
  ingest_cmd->add_option("--format", ingest.format, "auto, plain or jsonl")->capture_default_str();
  ingest_cmd->add_option("--out", ingest.out, "Output directory")->required();

  AssessArgs assess;
  auto* assess_cmd = app.add_subcommand("assess", "Run prompting strategies over transcripts");
  assess_cmd->add_option("--transcript", assess.transcripts, "Raw transcript or ingested .json (repeatable)")->required();
  assess_cmd->add_option("--format", assess.format, "auto, plain or jsonl")->capture_default_str();
  assess_cmd->add_option("--rubric", assess.rubric, "Rubric JSON; built-in default when omitted");
  assess_cmd->add_option("--strategy", assess.strategy, "zero_shot_1, zero_shot_2, tot, rag or all")
      ->capture_default_str();
  assess_cmd->add_option("--model", assess.model, "Model id, e.g. gpt-4-turbo")->envname("TUTOREVAL_MODEL");
  assess_cmd->add_option("--backend", assess.backend, "real or mock")->capture_default_str()->envname("TUTOREVAL_BACKEND");
  assess_cmd->add_option("--mock-script", assess.mock_script, "Mock script JSON (with --backend mock)");
  assess_cmd->add_option("--embedder", assess.embedder, "hashing or remote")->capture_default_str();
  assess_cmd->add_option("--embedding-model", assess.embedding_model, "Remote embedding model")->capture_default_str();
  assess_cmd->add_option("--embedding-dim", assess.embedding_dim, "Embedding dimension (hashing default 256)");
  assess_cmd->add_option("--window", assess.window, "Chunk window in turns")->capture_default_str();
  assess_cmd->add_option("--overlap", assess.overlap, "Chunk overlap in turns")->capture_default_str();
  assess_cmd->add_option("--top-k", assess.top_k, "Retrieved chunks per principle")->capture_default_str();
  assess_cmd->add_option("--prices", assess.prices, "Price table JSON")->envname("TUTOREVAL_PRICES");
  assess_cmd->add_option("--out", assess.out, "Output directory")->envname("TUTOREVAL_OUT");
  assess_cmd->add_option("--parallelism", assess.parallelism, "Max in-flight requests")->capture_default_str();
  assess_cmd->add_option("--seed", assess.seed, "Reserved; recorded in artifacts")->capture_default_str();
  assess_cmd->add_option("--templates", assess.templates, "Directory of <template_id>.txt overrides");
  assess_cmd->add_flag("--no-system-message", assess.no_system_message, "Send only the prompt texts");
  assess_cmd->add_option("--temperature", assess.temperature)->capture_default_str();
  assess_cmd->add_option("--max-output-tokens", assess.max_output_tokens)->capture_default_str();

  AnnotateArgs annotate;
  auto* annotate_cmd = app.add_subcommand("annotate", "Code a run's assessments for correctness and hallucination");
  annotate_cmd->add_option("--run", annotate.run, "Run artifact (.json)")->required();
  annotate_cmd->add_option("--coder", annotate.coder, "Coder id")->required();
  annotate_cmd->add_option("--transcript", annotate.transcript, "Transcript to display");
  annotate_cmd->add_option("--format", annotate.format, "auto, plain or jsonl")->capture_default_str();
  annotate_cmd->add_option("--rubric", annotate.rubric, "Rubric JSON; built-in default when omitted");
  annotate_cmd->add_option("--store", annotate.store, "Annotation store directory (default <out>/annotations)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Cost and accuracy reports");
  report_cmd->require_subcommand(1);
  auto* cost_cmd = report_cmd->add_subcommand("cost", "Cost per strategy and model");
  cost_cmd->add_option("--ledger", report.ledgers, "Ledger files or directories (repeatable)")->required();
  cost_cmd->add_option("--prices", report.prices, "Price table, for the currency code");
  cost_cmd->add_option("--out", report.out, "Write cost_report.md and cost_report.json here");
  auto* accuracy_cmd = report_cmd->add_subcommand("accuracy", "Correctness x hallucination grids");
  accuracy_cmd->add_option("--runs", report.runs, "Run artifacts or directories (repeatable)")->required();
  accuracy_cmd->add_option("--annotations", report.annotations, "Annotation files or store directories");
  accuracy_cmd->add_option("--out", report.out, "Write accuracy_report.md and accuracy_matrix.json here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out, err);
    if (*assess_cmd) return cmd_assess(assess, out, err);
    if (*annotate_cmd) return cmd_annotate(annotate, in, out, err);
    if (*cost_cmd) return cmd_report_cost(report, out, err);
    if (*accuracy_cmd) return cmd_report_accuracy(report, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPartialFailure;
  }
  return kExitConfigError;
}

}  // namespace tutoreval
