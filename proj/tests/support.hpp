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

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tutoreval/assessment.hpp"
#include "tutoreval/error.hpp"
#include "tutoreval/rag_store.hpp"
#include "tutoreval/transcript.hpp"

// Runs stmt and checks that it throws tutoreval::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected_code)                                       \
  do {                                                                               \
    try {                                                                            \
      stmt;                                                                          \
      ADD_FAILURE() << "expected " << tutoreval::to_string(expected_code);           \
    } catch (const tutoreval::Error& e_) {                                           \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                              \
    }                                                                                \
  } while (0)

namespace testing_support {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("tutoreval_test_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path data_dir() { return std::filesystem::path(TUTOREVAL_SOURCE_DIR) / "data"; }

// Printable text without newlines, leading or trailing whitespace. May contain
// ": " and other separators.
inline std::string random_text(std::mt19937_64& rng) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,!?:;'\"-/()\\{}#";
  std::uniform_int_distribution<std::size_t> len(1, 60);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng)];
  while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  while (!s.empty() && s.back() == ' ') s.pop_back();
  if (s.empty()) s = "ok";
  return s;
}

inline tutoreval::Speaker random_speaker(std::mt19937_64& rng) {
  switch (rng() % 6) {
    case 0:
    case 1:
    case 2: return tutoreval::Speaker::tutor();
    case 3:
    case 4: return tutoreval::Speaker::student();
    default: {
      static const char* labels[] = {"Teacher2", "Parent", "Observer: A", "Aide (TA)", "T:2"};
      return tutoreval::Speaker::from_label(labels[rng() % 5]);
    }
  }
}

inline tutoreval::Transcript random_transcript(std::mt19937_64& rng, std::size_t turns) {
  tutoreval::Transcript t;
  t.session_id = "transcript";
  for (std::size_t i = 0; i < turns; ++i) {
    t.turns.push_back(tutoreval::Turn{i, random_speaker(rng), random_text(rng), std::nullopt});
  }
  t.turns[rng() % turns].speaker = tutoreval::Speaker::tutor();
  return t;
}

// Reference top-k: score every record, stable sort by (score desc, id asc).
inline std::vector<tutoreval::RetrievalHit> brute_force_top_k(const std::vector<tutoreval::EmbeddingRecord>& records,
                                                              const tutoreval::Vector& query, std::size_t k) {
  std::vector<tutoreval::RetrievalHit> all;
  double qn = 0;
  for (double x : query) qn += x * x;
  qn = std::sqrt(qn);
  for (const auto& r : records) {
    double dot = 0, rn = 0;
    for (std::size_t i = 0; i < query.size(); ++i) {
      dot += query[i] * r.vector[i];
      rn += r.vector[i] * r.vector[i];
    }
    rn = std::sqrt(rn);
    double s = (qn == 0 || rn == 0) ? 0.0 : dot / (qn * rn);
    s = std::max(-1.0, std::min(1.0, s));
    all.push_back({r.record_id, s});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.record_id < b.record_id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace testing_support
