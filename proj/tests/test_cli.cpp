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

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "tutoreval/annotation.hpp"
#include "tutoreval/cli.hpp"
#include "tutoreval/cost_ledger.hpp"

using namespace tutoreval;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::vector<std::string> mock_assess(const fs::path& out) {
  const auto data = testing_support::data_dir();
  return {"assess",
          "--transcript", (data / "sample_transcript.txt").string(),
          "--model", "mock-model",
          "--backend", "mock",
          "--mock-script", (data / "mock_script.json").string(),
          "--prices", (data / "prices.sample.json").string(),
          "--out", out.string()};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

}  // namespace

TEST(CliIngest, ValidFile) {
  const auto dir = testing_support::temp_dir("ingest");
  const auto r = cli({"ingest", "--transcript", (testing_support::data_dir() / "sample_transcript.txt").string(),
                      "--out", dir.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "transcripts" / "sample_transcript.json"));
}

TEST(CliIngest, MalformedLineNamesFileAndLine) {
  const auto dir = testing_support::temp_dir("ingest_bad");
  std::ofstream(dir / "bad.txt") << "Tutor: hi\nthis line has no speaker\n";
  const auto r = cli({"ingest", "--transcript", (dir / "bad.txt").string(), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, kExitPartialFailure);
  EXPECT_NE(r.err.find("bad.txt:2"), std::string::npos) << r.err;
}

TEST(CliIngest, MixedBatchKeepsValidOnes) {
  const auto dir = testing_support::temp_dir("ingest_mixed");
  std::ofstream(dir / "good.txt") << "Tutor: hi\nStudent: hello\n";
  std::ofstream(dir / "bad.txt") << "Student: only me\n";
  std::ofstream(dir / "good2.jsonl") << "{\"speaker\":\"Tutor\",\"text\":\"hi\"}\n";
  const auto r = cli({"ingest", "--transcript", (dir / "good.txt").string(), "--transcript",
                      (dir / "bad.txt").string(), "--transcript", (dir / "good2.jsonl").string(), "--out",
                      (dir / "out").string()});
  EXPECT_EQ(r.code, kExitPartialFailure);
  EXPECT_TRUE(fs::exists(dir / "out" / "transcripts" / "good.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "transcripts" / "good2.json"));
  EXPECT_FALSE(fs::exists(dir / "out" / "transcripts" / "bad.json"));
}

TEST(CliAssess, AllStrategiesWithMockAreReproducible) {
  const auto dir = testing_support::temp_dir("assess");
  auto r = cli(mock_assess(dir / "a"));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::size_t runs = 0;
  for (const auto& e : fs::directory_iterator(dir / "a" / "runs")) {
    ++runs;
    EXPECT_EQ(load_run(e.path()).results.size(), 5u);
  }
  EXPECT_EQ(runs, 4u);
  ASSERT_EQ(cli(mock_assess(dir / "b")).code, kExitOk);
  EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
  ASSERT_EQ(cli(mock_assess(dir / "a")).code, kExitOk);
  EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
}

TEST(CliAssess, IngestedArtifactAndSingleStrategy) {
  const auto dir = testing_support::temp_dir("assess_artifact");
  ASSERT_EQ(cli({"ingest", "--transcript", (testing_support::data_dir() / "sample_transcript.jsonl").string(), "--out",
                 dir.string()})
                .code,
            kExitOk);
  auto args = mock_assess(dir);
  args[2] = (dir / "transcripts" / "sample_transcript.json").string();
  args.push_back("--strategy");
  args.push_back("tot");
  const auto r = cli(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "runs")) ++n;
  EXPECT_EQ(n, 1u);
}

TEST(CliAssess, MissingApiKeyIsConfigError) {
  const auto dir = testing_support::temp_dir("assess_auth");
  const char* keys[] = {"TUTOREVAL_API_KEY", "OPENAI_API_KEY"};
  std::vector<std::pair<std::string, std::string>> saved;
  for (const char* k : keys) {
    if (const char* v = std::getenv(k)) saved.emplace_back(k, v);
    unsetenv(k);
  }
  auto args = mock_assess(dir);
  args[6] = "real";
  const auto r = cli(args);
  for (const auto& [k, v] : saved) setenv(k.c_str(), v.c_str(), 1);
  EXPECT_EQ(r.code, kExitConfigError);
  EXPECT_NE(r.err.find("AuthError"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "runs"));
}

TEST(CliAssess, ConfigErrors) {
  const auto dir = testing_support::temp_dir("assess_cfg");
  auto args = mock_assess(dir);
  args[4] = "not-in-price-table";
  EXPECT_EQ(cli(args).code, kExitConfigError);
  args = mock_assess(dir);
  args.push_back("--strategy");
  args.push_back("chain_of_thought");
  EXPECT_EQ(cli(args).code, kExitConfigError);
  args = mock_assess(dir);
  args.erase(args.begin() + 7, args.begin() + 9);
  EXPECT_EQ(cli(args).code, kExitConfigError);
  EXPECT_EQ(cli({"assess", "--bogus"}).code, kExitConfigError);
  EXPECT_EQ(cli({}).code, kExitConfigError);
}

TEST(CliAssess, ConfigFileAndFlagPrecedence) {
  const auto dir = testing_support::temp_dir("assess_config");
  const auto data = testing_support::data_dir();
  std::ofstream(dir / "run.toml") << "[assess]\nmodel = \"gpt-4-turbo\"\nbackend = \"mock\"\nmock-script = \""
                                  << (data / "mock_script.json").string() << "\"\nprices = \""
                                  << (data / "prices.sample.json").string() << "\"\nstrategy = \"zs1\"\n";
  auto r = cli({"assess", "--config", (dir / "run.toml").string(), "--transcript",
                (data / "sample_transcript.txt").string(), "--out", (dir / "o").string(), "--model", "mock-model"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const auto& e : fs::directory_iterator(dir / "o" / "runs")) {
    const auto run = load_run(e.path());
    EXPECT_EQ(run.model_id, "mock-model");
    EXPECT_EQ(run.strategy, Strategy::ZeroShot1);
  }
}

TEST(CliAssess, ConfigFileBeatsEnvironment) {
  const auto dir = testing_support::temp_dir("assess_env");
  const auto data = testing_support::data_dir();
  std::ofstream(dir / "run.toml") << "[assess]\nmodel = \"mock-model\"\n";
  setenv("TUTOREVAL_MODEL", "gpt-4-turbo", 1);
  setenv("TUTOREVAL_PRICES", (data / "prices.sample.json").string().c_str(), 1);
  const auto r = cli({"assess", "--config", (dir / "run.toml").string(), "--transcript",
                      (data / "sample_transcript.txt").string(), "--backend", "mock", "--mock-script",
                      (data / "mock_script.json").string(), "--strategy", "zs2", "--out", (dir / "o").string()});
  unsetenv("TUTOREVAL_MODEL");
  unsetenv("TUTOREVAL_PRICES");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const auto& e : fs::directory_iterator(dir / "o" / "runs")) EXPECT_EQ(load_run(e.path()).model_id, "mock-model");
}

TEST(CliAssess, BackendFailureIsPartial) {
  const auto dir = testing_support::temp_dir("assess_partial");
  std::ofstream(dir / "script.json") << R"({"entries":[{"match":"contains:score how well","error":"malformed"}],
    "fallback":{"response":"Score: 3"}})";
  auto args = mock_assess(dir / "o");
  args[8] = (dir / "script.json").string();
  const auto r = cli(args);
  EXPECT_EQ(r.code, kExitPartialFailure);
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "o" / "runs")) ++n;
  EXPECT_EQ(n, 3u);
}

TEST(CliReport, CostTableHasStrategyRowsAndModelColumns) {
  const auto dir = testing_support::temp_dir("report_cost");
  ASSERT_EQ(cli(mock_assess(dir)).code, kExitOk);
  auto args = mock_assess(dir);
  args[4] = "gpt-4-turbo";
  ASSERT_EQ(cli(args).code, kExitOk);
  const auto r = cli({"report", "cost", "--ledger", (dir / "costs").string(), "--out", (dir / "rep").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("| Prompt | gpt-4-turbo | mock-model |"), std::string::npos) << r.out;
  for (const char* row : {"| Zero-shot Prompt Type I |", "| Zero-shot Prompt Type II |", "| Tree of Thoughts (ToT) |",
                          "| Retrieval-Augmented Generation (RAG) |"}) {
    EXPECT_NE(r.out.find(row), std::string::npos) << row;
  }
  EXPECT_TRUE(fs::exists(dir / "rep" / "cost_report.md"));
  EXPECT_TRUE(fs::exists(dir / "rep" / "cost_report.json"));

  Money sum;
  for (const auto& e : fs::directory_iterator(dir / "costs")) {
    for (const auto& entry : CostLedger::read_file(e.path())) sum += entry.cost;
  }
  EXPECT_NE(r.out.find("$" + sum.to_string(6)), std::string::npos);
}

TEST(CliReport, AccuracyWithoutAnnotations) {
  const auto dir = testing_support::temp_dir("report_acc");
  ASSERT_EQ(cli(mock_assess(dir)).code, kExitOk);
  const auto r = cli({"report", "accuracy", "--runs", (dir / "runs").string(), "--out", (dir / "rep").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("0/0"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "rep" / "accuracy_matrix.json"));
}

TEST(CliReport, DanglingAnnotation) {
  const auto dir = testing_support::temp_dir("report_dangling");
  ASSERT_EQ(cli(mock_assess(dir)).code, kExitOk);
  AnnotationStore store(dir / "annotations");
  AnnotationRecord a;
  a.annotation_id = "a1";
  a.run_id = "ghost";
  a.principle_id = "p";
  a.correctness = 1;
  store.append(a);
  const auto r = cli({"report", "accuracy", "--runs", (dir / "runs").string(), "--annotations",
                      (dir / "annotations").string()});
  EXPECT_EQ(r.code, kExitPartialFailure);
  EXPECT_NE(r.err.find("ghost"), std::string::npos);
}

TEST(CliAnnotate, FullSessionThenReport) {
  const auto dir = testing_support::temp_dir("annotate");
  ASSERT_EQ(cli(mock_assess(dir)).code, kExitOk);
  fs::path zs1;
  for (const auto& e : fs::directory_iterator(dir / "runs")) {
    if (e.path().filename().string().rfind("zero_shot_1", 0) == 0) zs1 = e.path();
  }
  ASSERT_FALSE(zs1.empty());
  const auto r = cli({"annotate", "--run", zs1.string(), "--coder", "c1", "--transcript",
                      (testing_support::data_dir() / "sample_transcript.txt").string()},
                     "1\n0\n\n1\n0\n\n0\n0.5\n\n1\n1\n\n1\n0\nok\n");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("Giving Effective Praise"), std::string::npos);
  const auto rep = cli({"report", "accuracy", "--runs", (dir / "runs").string(), "--annotations",
                        (dir / "annotations").string()});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  EXPECT_NE(rep.out.find("| Zero-shot Prompt Type I | 3/5 |"), std::string::npos) << rep.out;
}
