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

#include "tutoreval/cost_ledger.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "tutoreval/strategies.hpp"
#include "util.hpp"

namespace tutoreval {

using nlohmann::json;

const ModelPrice& PriceTable::at(std::string_view model_id) const {
  const auto it = models.find(model_id);
  if (it == models.end()) throw Error(ErrorCode::UnknownModel, "no price for model '" + std::string(model_id) + "'");
  return it->second;
}

namespace {

PricePer1k price_from_json(const json& j) {
  if (j.is_string()) return PricePer1k::parse(j.get<std::string>());
  if (j.is_number_unsigned() || j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw Error(ErrorCode::ValidationError, "negative price");
    return PricePer1k::parse(std::to_string(v));
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v < 0) throw Error(ErrorCode::ValidationError, "negative price");
    return PricePer1k::from_double(v);
  }
  throw Error(ErrorCode::ParseError, "price must be a number or a decimal string");
}

}  // namespace

PriceTable parse_price_table(std::string_view json_text) {
  PriceTable table;
  try {
    const json doc = json::parse(json_text);
    table.currency_code = doc.value("currency_code", std::string("USD"));
    table.as_of_date = doc.value("as_of_date", std::string{});
    for (const auto& m : doc.at("models")) {
      const auto id = m.at("model_id").get<std::string>();
      ModelPrice price{price_from_json(m.at("input_per_1k")), price_from_json(m.at("output_per_1k"))};
      if (!table.models.emplace(id, price).second) {
        throw Error(ErrorCode::ValidationError, "duplicate model_id '" + id + "' in price table");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("price table: ") + e.what());
  }
  return table;
}

PriceTable load_price_table(const std::filesystem::path& path) { return parse_price_table(detail::read_file(path)); }

Money cost_of(const TokenUsage& usage, std::string_view model_id, const PriceTable& table) {
  const ModelPrice& p = table.at(model_id);
  return token_cost(usage.input_tokens, p.input_per_1k, usage.output_tokens, p.output_per_1k);
}

std::string_view tag_strategy(std::string_view request_tag) { return request_tag.substr(0, request_tag.find('/')); }

std::string cost_entry_to_json_line(const CostEntry& e) {
  return json{{"entry_id", e.entry_id},
              {"run_id", e.run_id},
              {"request_tag", e.request_tag},
              {"model_id", e.model_id},
              {"input_tokens", e.usage.input_tokens},
              {"output_tokens", e.usage.output_tokens},
              {"usage_source", std::string(to_string(e.usage.source))},
              {"cost", e.cost.to_string(6)}}
      .dump();
}

CostEntry cost_entry_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    CostEntry e;
    e.entry_id = j.at("entry_id").get<std::string>();
    e.run_id = j.at("run_id").get<std::string>();
    e.request_tag = j.at("request_tag").get<std::string>();
    e.model_id = j.at("model_id").get<std::string>();
    e.usage.input_tokens = j.at("input_tokens").get<std::uint64_t>();
    e.usage.output_tokens = j.at("output_tokens").get<std::uint64_t>();
    e.usage.source = j.at("usage_source").get<std::string>() == "provider" ? UsageSource::ProviderReported
                                                                          : UsageSource::Estimated;
    e.cost = Money::parse(j.at("cost").get<std::string>());
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("ledger line: ") + ex.what());
  }
}

CostLedger::CostLedger(std::filesystem::path persist_to) : persist_to_(std::move(persist_to)) {}

const CostEntry& CostLedger::record(std::string_view run_id, std::string_view request_tag, std::string_view model_id,
                                    const TokenUsage& usage, const PriceTable& table) {
  const Money cost = cost_of(usage, model_id, table);
  std::lock_guard lock(mu_);
  char id[24];
  std::snprintf(id, sizeof id, "e%08zu", next_id_++);
  entries_.push_back(CostEntry{id, std::string(run_id), std::string(request_tag), std::string(model_id), usage, cost});
  if (persist_to_) detail::append_file(*persist_to_, cost_entry_to_json_line(entries_.back()) + "\n");
  return entries_.back();
}

void CostLedger::replay(std::vector<CostEntry> entries) {
  std::lock_guard lock(mu_);
  for (auto& e : entries) entries_.push_back(std::move(e));
  next_id_ = entries_.size() + 1;
}

std::vector<CostEntry> CostLedger::snapshot() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t CostLedger::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

Money CostLedger::total_for_run(std::string_view run_id) const {
  std::lock_guard lock(mu_);
  Money total;
  for (const auto& e : entries_) {
    if (e.run_id == run_id) total += e.cost;
  }
  return total;
}

std::vector<CostEntry> CostLedger::read_file(const std::filesystem::path& path) {
  const std::string content = detail::read_file(path);
  std::vector<CostEntry> out;
  for (const auto line : detail::split_lines(content)) {
    if (!detail::trim(line).empty()) out.push_back(cost_entry_from_json_line(line));
  }
  return out;
}

// ---------------------------------------------------------------------------

double CostReport::estimated_share() const {
  const auto total = provider_tokens + estimated_tokens;
  return total == 0 ? 0.0 : static_cast<double>(estimated_tokens) / static_cast<double>(total);
}

CostReport cost_report(const std::vector<CostEntry>& entries) {
  CostReport report;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> runs;
  for (const auto& e : entries) {
    const std::pair<std::string, std::string> key{std::string(tag_strategy(e.request_tag)), e.model_id};
    CostCell& cell = report.rows[key];
    cell.total += e.cost;
    ++cell.requests;
    runs[key].insert(e.run_id);
    report.grand_total += e.cost;
    const auto tokens = e.usage.input_tokens + e.usage.output_tokens;
    (e.usage.source == UsageSource::ProviderReported ? report.provider_tokens : report.estimated_tokens) += tokens;
    ++report.entry_count;
  }
  for (auto& [key, cell] : report.rows) cell.runs = runs[key].size();
  return report;
}

namespace {

// Known strategies first in their fixed order, anything else alphabetically.
std::vector<std::string> ordered_strategies(const CostReport& report) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& [key, cell] : report.rows) seen.insert(key.first);
  for (Strategy s : kAllStrategies) {
    if (seen.erase(std::string(to_string(s)))) out.emplace_back(to_string(s));
  }
  out.insert(out.end(), seen.begin(), seen.end());
  return out;
}

std::string strategy_label(const std::string& token) {
  if (auto s = parse_strategy(token)) return std::string(display_name(*s));
  return token;
}

std::string currency_prefix(std::string_view code) { return code == "USD" ? "$" : std::string(code) + " "; }

}  // namespace

std::string render_cost_markdown(const CostReport& report, std::string_view currency_code) {
  std::set<std::string> model_set;
  for (const auto& [key, cell] : report.rows) model_set.insert(key.second);
  const std::vector<std::string> models(model_set.begin(), model_set.end());
  const std::string cur = currency_prefix(currency_code);

  std::string out = "| Prompt |";
  for (const auto& m : models) out += " " + m + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < models.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& s : ordered_strategies(report)) {
    out += "| " + strategy_label(s) + " |";
    for (const auto& m : models) {
      const auto it = report.rows.find({s, m});
      out += it == report.rows.end() ? std::string(" - |") : " " + cur + it->second.total.to_string(3) + " |";
    }
    out += "\n";
  }
  char share[32];
  std::snprintf(share, sizeof share, "%.1f%%", report.estimated_share() * 100.0);
  out += "\nGrand total: " + cur + report.grand_total.to_string(6) + " over " + std::to_string(report.entry_count) +
         " requests. Totals are per run set, not averaged. Estimated token share: " + share + "\n";
  return out;
}

std::string cost_report_to_json(const CostReport& report) {
  json rows = json::array();
  for (const auto& [key, cell] : report.rows) {
    rows.push_back({{"strategy", key.first},
                    {"model_id", key.second},
                    {"total", cell.total.to_string(6)},
                    {"runs", cell.runs},
                    {"requests", cell.requests}});
  }
  return json{{"rows", std::move(rows)},
              {"grand_total", report.grand_total.to_string(6)},
              {"provider_tokens", report.provider_tokens},
              {"estimated_tokens", report.estimated_tokens},
              {"entries", report.entry_count}}
             .dump(2) +
         "\n";
}

}  // namespace tutoreval
