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

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace tutoreval {

/// A non-negative currency amount held as integer micro-units (1e-6), so sums
/// and comparisons are exact.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }

  /// Parses a plain decimal such as "0.143790". At most 6 fractional digits.
  static Money parse(std::string_view text);

  constexpr std::int64_t micros() const { return micros_; }

  /// Fixed-point rendering. Fewer than 6 decimals rounds half-up.
  std::string to_string(int decimals = 6) const;

  constexpr Money& operator+=(Money other) {
    micros_ += other.micros_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return a += b; }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

/// Price per 1000 tokens held as integer nano-units (1e-9).
class PricePer1k {
 public:
  constexpr PricePer1k() = default;
  static constexpr PricePer1k from_nanos(std::int64_t nanos) { return PricePer1k(nanos); }

  /// Parses a plain decimal such as "0.0005". At most 9 fractional digits.
  static PricePer1k parse(std::string_view text);
  /// Converts a JSON-style double through its shortest round-trip decimal text.
  static PricePer1k from_double(double value);

  constexpr std::int64_t nanos() const { return nanos_; }
  std::string to_string() const;

  friend constexpr auto operator<=>(PricePer1k, PricePer1k) = default;

 private:
  constexpr explicit PricePer1k(std::int64_t nanos) : nanos_(nanos) {}
  std::int64_t nanos_ = 0;
};

/// input/1000 * input_price + output/1000 * output_price, computed exactly and
/// rounded half-up once to micro-units.
Money token_cost(std::uint64_t input_tokens, PricePer1k input_price, std::uint64_t output_tokens,
                 PricePer1k output_price);

}  // namespace tutoreval
