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

#include <cctype>
#include <charconv>
#include <set>

#include "tutoreval/assessment.hpp"
#include "util.hpp"

namespace tutoreval {

std::string_view to_string(ScoreScale scale) {
  switch (scale) {
    case ScoreScale::Binary01: return "binary_0_1";
    case ScoreScale::Zero2Five: return "zero_to_five";
    case ScoreScale::Missing: return "missing";
  }
  return "missing";
}

std::string_view to_string(ParseFailure::Kind kind) {
  switch (kind) {
    case ParseFailure::Kind::NoNumber: return "no_number";
    case ParseFailure::Kind::OutOfRange: return "out_of_range";
    case ParseFailure::Kind::Ambiguous: return "ambiguous";
  }
  return "no_number";
}

Score Score::of(int value, ScoreScale scale) {
  const bool ok = (scale == ScoreScale::Binary01 && (value == 0 || value == 1)) ||
                  (scale == ScoreScale::Zero2Five && value >= 0 && value <= 5);
  if (!ok) {
    throw Error(ErrorCode::ValidationError,
                "score " + std::to_string(value) + " is not valid on scale " + std::string(to_string(scale)));
  }
  Score s;
  s.value_ = value;
  s.scale_ = scale;
  return s;
}

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

int scale_max(ScoreScale scale) { return scale == ScoreScale::Binary01 ? 1 : 5; }

bool in_range(long long v, ScoreScale scale) { return v >= 0 && v <= scale_max(scale); }

// Values past this are simply "out of range"; no need to keep precision.
constexpr long long kHuge = 1'000'000'000LL;

long long digits_value(std::string_view digits) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || v > kHuge) return kHuge;
  return v;
}

struct Integer {
  std::size_t begin = 0;  // first digit, or the '-' sign
  std::size_t end = 0;
  long long value = 0;
};

// Digit runs that stand alone: not glued to letters, not part of a decimal,
// not the denominator of "n/m" or "out of m", not a list marker such as "2.".
std::vector<Integer> standalone_integers(std::string_view t) {
  std::vector<Integer> out;
  std::size_t i = 0;
  while (i < t.size()) {
    if (!is_digit(t[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < t.size() && is_digit(t[j])) ++j;
    const bool glued_before = i > 0 && (is_alnum(t[i - 1]) || t[i - 1] == '.' || t[i - 1] == '/');
    const bool glued_after = j < t.size() && is_alnum(t[j]);
    const bool decimal = j + 1 < t.size() && (t[j] == '.' || t[j] == ',') && is_digit(t[j + 1]);
    bool denominator = false;
    if (i >= 7) {
      const auto before = detail::to_lower(t.substr(i - 7, 7));
      denominator = before == "out of ";
    }
    // list marker: only whitespace since line start, then "N." or "N)" followed by space
    bool list_marker = false;
    if (j < t.size() && (t[j] == '.' || t[j] == ')') && (j + 1 >= t.size() || t[j + 1] == ' ')) {
      std::size_t k = i;
      while (k > 0 && (t[k - 1] == ' ' || t[k - 1] == '\t')) --k;
      list_marker = k == 0 || t[k - 1] == '\n';
    }
    if (!glued_before && !glued_after && !decimal && !denominator && !list_marker) {
      long long v = digits_value(t.substr(i, j - i));
      std::size_t begin = i;
      if (i > 0 && t[i - 1] == '-' && (i < 2 || !is_alnum(t[i - 2]))) {
        v = -v;
        begin = i - 1;
      }
      out.push_back(Integer{begin, j, v});
    }
    i = j;
  }
  return out;
}

ScoreParse finish(long long v, ScoreScale scale, std::string_view how) {
  if (!in_range(v, scale)) {
    return ParseFailure{ParseFailure::Kind::OutOfRange,
                        std::string(how) + " " + std::to_string(v) + " outside 0.." + std::to_string(scale_max(scale))};
  }
  return Score::of(static_cast<int>(v), scale);
}

}  // namespace

ScoreParse parse_score(std::string_view text, ScoreScale scale) noexcept {
  try {
    if (scale == ScoreScale::Missing) return ParseFailure{ParseFailure::Kind::NoNumber, "no scale to parse against"};
    const std::string_view t = detail::trim(text);
    if (t.empty()) return ParseFailure{ParseFailure::Kind::NoNumber, "empty response"};

    // (1) the whole answer is an integer, optionally signed or with a final period
    {
      std::string_view body = t;
      if (!body.empty() && body.back() == '.') body.remove_suffix(1);
      bool negative = false;
      if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
      }
      if (!body.empty() && std::all_of(body.begin(), body.end(), is_digit)) {
        const long long v = digits_value(body);
        return finish(negative ? -v : v, scale, "integer");
      }
    }

    const auto ints = standalone_integers(t);

    // (2) "score" cue followed by an integer on the same line
    const std::string lower = detail::to_lower(t);
    for (std::size_t pos = lower.find("score"); pos != std::string::npos; pos = lower.find("score", pos + 1)) {
      const std::size_t line_end = std::min(lower.find('\n', pos), lower.size());
      for (const auto& n : ints) {
        if (n.begin > pos && n.end <= line_end) return finish(n.value, scale, "score");
      }
    }

    // (3) the single distinct in-range standalone integer
    if (ints.empty()) return ParseFailure{ParseFailure::Kind::NoNumber, "no integer in response"};
    std::set<long long> candidates;
    for (const auto& n : ints) {
      if (in_range(n.value, scale)) candidates.insert(n.value);
    }
    if (candidates.empty()) return finish(ints.front().value, scale, "integer");
    if (candidates.size() > 1) {
      return ParseFailure{ParseFailure::Kind::Ambiguous, std::to_string(candidates.size()) +
                                                             " different in-range integers without a score cue"};
    }
    return Score::of(static_cast<int>(*candidates.begin()), scale);
  } catch (...) {
    return ParseFailure{ParseFailure::Kind::NoNumber, "internal parse error"};
  }
}

std::map<std::string, Score> parse_tot_layer1(std::string_view text, const Rubric& rubric) {
  std::map<std::string, Score> out;
  for (const auto& p : rubric.principles) out[p.principle_id] = Score::missing();

  const std::string lower = detail::to_lower(text);
  std::vector<std::string> names;
  for (const auto& p : rubric.principles) names.push_back(detail::to_lower(p.name));

  struct Match {
    std::size_t begin, end, principle;
  };
  std::vector<Match> matches;
  for (std::size_t pos = 0; pos < lower.size();) {
    std::optional<Match> best;
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto& n = names[k];
      if (!n.empty() && lower.compare(pos, n.size(), n) == 0 && (!best || n.size() > best->end - best->begin)) {
        best = Match{pos, pos + n.size(), k};
      }
    }
    if (best) {
      matches.push_back(*best);
      pos = best->end;
    } else {
      ++pos;
    }
  }

  const auto ints = standalone_integers(text);
  for (std::size_t m = 0; m < matches.size(); ++m) {
    const auto& pid = rubric.principles[matches[m].principle].principle_id;
    if (!out[pid].is_missing()) continue;
    const std::size_t limit = m + 1 < matches.size() ? matches[m + 1].begin : text.size();
    for (const auto& n : ints) {
      if (n.begin < matches[m].end || n.end > limit) continue;
      if (n.value >= 0 && n.value <= 5) {
        out[pid] = Score::of(static_cast<int>(n.value), ScoreScale::Zero2Five);
        break;
      }
    }
  }
  return out;
}

std::string extract_evidence(const std::vector<RawResponse>& raw_responses) {
  std::string out;
  for (const auto& r : raw_responses) {
    if (is_scoring(r.kind)) continue;
    if (!out.empty()) out += "\n\n";
    out += r.text;
  }
  return out;
}

}  // namespace tutoreval
