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

#include "tutoreval/money.hpp"

#include <charconv>
#include <limits>

#include "tutoreval/error.hpp"

namespace tutoreval {
namespace {

// Parses "[+]digits[.digits]" into an integer scaled by 10^scale.
std::int64_t parse_fixed(std::string_view text, int scale, std::string_view what) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::ParseError, std::string(what) + " '" + std::string(text) + "': " + why);
  };
  std::string_view s = text;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) throw fail("empty amount");
  if (s.front() == '-') throw fail("negative amounts are not allowed");

  const auto dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw fail("no digits");
  if (static_cast<int>(frac.size()) > scale) {
    // Trailing zeros beyond the scale are harmless.
    for (std::size_t i = static_cast<std::size_t>(scale); i < frac.size(); ++i) {
      if (frac[i] != '0') throw fail("more than " + std::to_string(scale) + " decimal places");
    }
  }

  unsigned __int128 value = 0;
  const auto limit = static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max());
  for (char c : whole) {
    if (c < '0' || c > '9') throw fail("not a decimal number");
    value = value * 10 + static_cast<unsigned>(c - '0');
    if (value > limit) throw fail("amount too large");
  }
  for (int i = 0; i < scale; ++i) {
    unsigned digit = 0;
    if (static_cast<std::size_t>(i) < frac.size()) {
      const char c = frac[static_cast<std::size_t>(i)];
      if (c < '0' || c > '9') throw fail("not a decimal number");
      digit = static_cast<unsigned>(c - '0');
    }
    value = value * 10 + digit;
    if (value > limit) throw fail("amount too large");
  }
  for (std::size_t i = static_cast<std::size_t>(scale); i < frac.size(); ++i) {
    if (frac[i] < '0' || frac[i] > '9') throw fail("not a decimal number");
  }
  return static_cast<std::int64_t>(value);
}

std::string format_fixed(std::int64_t scaled, int scale, int decimals) {
  std::int64_t pow = 1;
  for (int i = decimals; i < scale; ++i) pow *= 10;
  // half-up rounding of the dropped digits
  std::int64_t v = decimals < scale ? (scaled + pow / 2) / pow : scaled;
  std::int64_t unit = 1;
  for (int i = 0; i < decimals; ++i) unit *= 10;
  std::string out = std::to_string(v / unit);
  if (decimals > 0) {
    std::string frac = std::to_string(v % unit);
    out += '.';
    out.append(static_cast<std::size_t>(decimals) - frac.size(), '0');
    out += frac;
  }
  return out;
}

}  // namespace

Money Money::parse(std::string_view text) { return Money(parse_fixed(text, 6, "amount")); }

std::string Money::to_string(int decimals) const {
  if (decimals < 0 || decimals > 6) decimals = 6;
  return format_fixed(micros_, 6, decimals);
}

PricePer1k PricePer1k::parse(std::string_view text) {
  return PricePer1k(parse_fixed(text, 9, "price"));
}

PricePer1k PricePer1k::from_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  if (ec != std::errc{}) throw Error(ErrorCode::ParseError, "price is not representable");
  return parse(std::string_view(buf, static_cast<std::size_t>(end - buf)));
}

std::string PricePer1k::to_string() const {
  std::string s = format_fixed(nanos_, 9, 9);
  while (s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

Money token_cost(std::uint64_t input_tokens, PricePer1k input_price, std::uint64_t output_tokens,
                 PricePer1k output_price) {
  // tokens * nanos is the cost in units of 1e-12; one micro-unit is 1e6 of those.
  using u128 = unsigned __int128;
  const u128 pico = static_cast<u128>(input_tokens) * static_cast<u128>(input_price.nanos()) +
                    static_cast<u128>(output_tokens) * static_cast<u128>(output_price.nanos());
  const u128 micros = (pico + 500'000) / 1'000'000;
  if (micros > static_cast<u128>(std::numeric_limits<std::int64_t>::max())) {
    throw Error(ErrorCode::ValidationError, "cost overflows the currency representation");
  }
  return Money::from_micros(static_cast<std::int64_t>(micros));
}

}  // namespace tutoreval
