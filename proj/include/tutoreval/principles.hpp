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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tutoreval {

struct Criterion {
  std::string criterion_id;
  std::string text;  // one observable tutor behavior

  friend bool operator==(const Criterion&, const Criterion&) = default;
};

struct Principle {
  std::string principle_id;
  std::string name;
  std::string description;
  std::vector<Criterion> criteria;
  std::optional<std::string> desired_example;
  std::optional<std::string> undesired_example;

  friend bool operator==(const Principle&, const Principle&) = default;
};

/// ZeroToFive awards one point per criterion, so it requires exactly five.
enum class RubricScale { ZeroToFive, Unconstrained };

inline constexpr std::size_t kFivePointCriteria = 5;
inline constexpr std::size_t kMaxCriteria = 10;

struct Rubric {
  std::string rubric_id;
  std::vector<Principle> principles;
  RubricScale scale = RubricScale::ZeroToFive;

  /// Throws Error(ValidationError) naming the violated invariant.
  void validate() const;
  const Principle* find(std::string_view principle_id) const;

  friend bool operator==(const Rubric&, const Rubric&) = default;
};

/// The five social-emotional-learning principles. Descriptions are the
/// published one-liners; the criteria are editable defaults derived from them.
Rubric default_rubric();

Rubric load_rubric(const std::filesystem::path& path);
Rubric parse_rubric(std::string_view json_text);
std::string rubric_to_json(const Rubric& rubric);
void save_rubric(const Rubric& rubric, const std::filesystem::path& path);

/// "1. <text>\n2. <text>..." in list order.
std::string render_criteria(const Principle& principle);

/// Lowercase, non-alphanumerics collapsed to '-': "Reacting to Errors" -> "reacting-to-errors".
std::string slugify(std::string_view name);

}  // namespace tutoreval
