// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "faasflow/accounting.hpp"
#include "faasflow/config.hpp"
#include "faasflow/error.hpp"

namespace faasflow {

namespace {
constexpr std::int64_t kPicosPerUsd = 1'000'000'000'000;
constexpr std::int64_t kBytesPerGb = 1'000'000'000;
}  // namespace

Money Money::usd(double value) { return Money(std::llround(value * static_cast<double>(kPicosPerUsd))); }

Money Money::parse(const std::string& text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool digits = false;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
    whole = whole * 10 + (text[i] - '0');
    digits = true;
  }
  if (i < text.size() && text[i] == '.') {
    for (++i; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      digits = true;
      if (frac_digits == 12) continue;  // below one pico
      frac = frac * 10 + (text[i] - '0');
      ++frac_digits;
    }
  }
  if (!digits || i != text.size()) throw Error(ErrorCode::ConfigError, "not a USD amount: '" + text + "'");
  while (frac_digits++ < 12) frac *= 10;
  const std::int64_t picos = whole * kPicosPerUsd + frac;
  return Money(negative ? -picos : picos);
}

std::string Money::str() const {
  const std::int64_t magnitude = picos_ < 0 ? -picos_ : picos_;
  std::string frac = std::to_string(magnitude % kPicosPerUsd);
  frac.insert(0, 12 - frac.size(), '0');
  return (picos_ < 0 ? "-" : "") + std::to_string(magnitude / kPicosPerUsd) + "." + frac;
}

PricingModel PricingModel::defaults(EngineKind kind) {
  PricingModel p;
  // Only the client scheduler publishes a per-transition price; the others
  // bill the functions they run.
  if (kind != EngineKind::ClientScheduler) p.per_transition = Money{};
  return p;
}

PricingModel PricingModel::from_config(const Config& config, EngineKind kind) {
  PricingModel p = defaults(kind);
  auto amount = [&](const char* key, Money& target) {
    if (auto text = config.raw("pricing", key)) target = Money::parse(*text);
  };
  amount("per_transition_usd", p.per_transition);
  amount("per_gb_second_usd", p.per_gb_second);
  amount("storage_per_gb_month_usd", p.storage_per_gb_month);
  p.memory_gb = config.number_or("pricing", "memory_gb", p.memory_gb);
  p.granularity_ms = static_cast<Millis>(config.number_or("pricing", "granularity_ms", static_cast<double>(p.granularity_ms)));
  p.validate();
  return p;
}

void PricingModel::validate() const {
  if (per_transition < Money{} || per_gb_second < Money{} || storage_per_gb_month < Money{}) {
    throw Error(ErrorCode::ConfigError, "prices must be >= 0");
  }
  if (!(memory_gb >= 0)) throw Error(ErrorCode::ConfigError, "memory_gb must be >= 0");
  if (granularity_ms < 1) throw Error(ErrorCode::ConfigError, "granularity_ms must be >= 1");
}

Money PricingModel::per_ms() const {
  return Money::pico(std::llround(static_cast<double>(per_gb_second.picos()) * memory_gb / 1000.0));
}

std::vector<InvocationRecord> execution_records(const WorkflowResult& result) {
  std::set<std::uint64_t> owned;
  std::vector<InvocationRecord> out;
  // Parents always precede their children in id order, so one pass closes
  // the set under the parent relation.
  for (const auto& rec : result.trace) {
    const bool seed = (result.execution != 0 && rec.execution == result.execution) ||
                      (result.root && rec.id == *result.root);
    const bool spawned = rec.parent && owned.contains(rec.parent->value);
    if (seed || spawned) {
      owned.insert(rec.id.value);
      out.push_back(rec);
    }
  }
  return out;
}

BillingReport compute_billing(const std::vector<InvocationRecord>& records, std::uint64_t transitions,
                              std::uint64_t history_bytes, const PricingModel& pricing) {
  pricing.validate();
  BillingReport r;
  r.transitions = transitions;
  r.history_bytes = history_bytes;
  for (const auto& rec : records) {
    const Millis billed = rec.billed_ms();
    if (billed == 0 && rec.billed_intervals.empty()) continue;
    ++r.invocations;
    const Millis g = pricing.granularity_ms;
    r.billed_ms += (billed + g - 1) / g * g;
  }
  r.transition_charge = pricing.per_transition * static_cast<std::int64_t>(transitions);
  r.duration_charge = pricing.per_ms() * r.billed_ms;
  const Money per_byte = Money::pico(pricing.storage_per_gb_month.picos() / kBytesPerGb);
  r.storage_charge = per_byte * static_cast<std::int64_t>(history_bytes);
  r.total = r.transition_charge + r.duration_charge + r.storage_charge;
  return r;
}

BillingReport compute_billing(const WorkflowResult& result, const PricingModel& pricing) {
  return compute_billing(execution_records(result), result.transitions, result.history_bytes, pricing);
}

Millis overlap_ms(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  Millis total = 0;
  for (const auto& x : a) {
    for (const auto& y : b) {
      const Millis from = std::max(x.from, y.from);
      const Millis to = std::min(x.to, y.to);
      if (to > from) total += to - from;
    }
  }
  return total;
}

std::vector<OverlapFinding> detect_double_billing(const std::vector<InvocationRecord>& trace, Millis epsilon_ms) {
  std::map<std::uint64_t, std::vector<std::size_t>> children;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].parent) children[trace[i].parent->value].push_back(i);
  }
  std::vector<OverlapFinding> findings;
  for (const auto& orch : trace) {
    if (!orch.orchestrator || orch.billed_intervals.empty()) continue;
    std::vector<std::size_t> stack;
    auto push_children = [&](std::uint64_t id) {
      if (auto it = children.find(id); it != children.end()) {
        stack.insert(stack.end(), it->second.begin(), it->second.end());
      }
    };
    push_children(orch.id.value);
    std::vector<OverlapFinding> found;
    while (!stack.empty()) {
      const auto& d = trace[stack.back()];
      stack.pop_back();
      push_children(d.id.value);
      const Millis o = overlap_ms(orch.billed_intervals, d.billed_intervals);
      if (o > epsilon_ms) found.push_back({orch.id, d.id, o});
    }
    std::sort(found.begin(), found.end(),
              [](const OverlapFinding& a, const OverlapFinding& b) { return a.descendant < b.descendant; });
    findings.insert(findings.end(), found.begin(), found.end());
  }
  return findings;
}

std::string to_json(const BillingReport& report) {
  nlohmann::ordered_json j;
  j["transitions"] = report.transitions;
  j["invocations"] = report.invocations;
  j["billed_ms"] = report.billed_ms;
  j["history_bytes"] = report.history_bytes;
  j["transition_charge_usd"] = report.transition_charge.str();
  j["duration_charge_usd"] = report.duration_charge.str();
  j["storage_charge_usd"] = report.storage_charge.str();
  j["total_usd"] = report.total.str();
  return j.dump(2);
}

}  // namespace faasflow
