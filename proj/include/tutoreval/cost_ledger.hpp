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
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tutoreval/llm_client.hpp"
#include "tutoreval/money.hpp"

namespace tutoreval {

struct ModelPrice {
  PricePer1k input_per_1k;
  PricePer1k output_per_1k;

  friend bool operator==(const ModelPrice&, const ModelPrice&) = default;
};

struct PriceTable {
  std::string currency_code = "USD";
  std::string as_of_date;
  std::map<std::string, ModelPrice, std::less<>> models;

  const ModelPrice& at(std::string_view model_id) const;  // throws UnknownModel
  bool contains(std::string_view model_id) const { return models.find(model_id) != models.end(); }
};

/// {currency_code, as_of_date, models: [{model_id, input_per_1k, output_per_1k}]}.
/// Prices may be JSON numbers or decimal strings.
PriceTable parse_price_table(std::string_view json_text);
PriceTable load_price_table(const std::filesystem::path& path);

Money cost_of(const TokenUsage& usage, std::string_view model_id, const PriceTable& table);

struct CostEntry {
  std::string entry_id;
  std::string run_id;
  std::string request_tag;  // "<strategy>/<principle or all>/<step>"
  std::string model_id;
  TokenUsage usage;
  Money cost;

  friend bool operator==(const CostEntry&, const CostEntry&) = default;
};

/// Strategy token of a request tag: the part before the first '/'.
std::string_view tag_strategy(std::string_view request_tag);

std::string cost_entry_to_json_line(const CostEntry& entry);
CostEntry cost_entry_from_json_line(std::string_view line);

/// Append-only ledger. record() is safe to call from many threads; entry ids
/// are assigned in append order.
class CostLedger {
 public:
  CostLedger() = default;
  /// Every recorded entry is also appended to this file as one JSON line.
  explicit CostLedger(std::filesystem::path persist_to);

  CostLedger(const CostLedger&) = delete;
  CostLedger& operator=(const CostLedger&) = delete;

  const CostEntry& record(std::string_view run_id, std::string_view request_tag, std::string_view model_id,
                          const TokenUsage& usage, const PriceTable& table);

  /// Appends replayed entries as-is (ids preserved).
  void replay(std::vector<CostEntry> entries);

  std::vector<CostEntry> snapshot() const;
  std::size_t size() const;
  Money total_for_run(std::string_view run_id) const;

  /// Reads a ledger file written by this class.
  static std::vector<CostEntry> read_file(const std::filesystem::path& path);

 private:
  mutable std::mutex mu_;
  std::vector<CostEntry> entries_;
  std::size_t next_id_ = 1;
  std::optional<std::filesystem::path> persist_to_;
};

struct CostCell {
  Money total;
  std::size_t runs = 0;
  std::size_t requests = 0;
};

struct CostReport {
  std::map<std::pair<std::string, std::string>, CostCell> rows;  // (strategy token, model_id)
  Money grand_total;
  std::uint64_t provider_tokens = 0;
  std::uint64_t estimated_tokens = 0;
  std::size_t entry_count = 0;

  double estimated_share() const;
};

CostReport cost_report(const std::vector<CostEntry>& entries);

/// One row per strategy, one column per model; amounts with 3 decimals.
std::string render_cost_markdown(const CostReport& report, std::string_view currency_code = "USD");
std::string cost_report_to_json(const CostReport& report);

}  // namespace tutoreval
