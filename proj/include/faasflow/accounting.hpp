// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "faasflow/engine.hpp"
#include "faasflow/runtime.hpp"

namespace faasflow {

class Config;

/// Integer amount of pico-USD. Charges are summed in this unit so that
/// additivity checks are exact.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money pico(std::int64_t value) { return Money(value); }
  static Money usd(double value);
  /// Parses a decimal USD amount ("0.000025") without going through double.
  static Money parse(const std::string& text);

  [[nodiscard]] constexpr std::int64_t picos() const noexcept { return picos_; }
  [[nodiscard]] double to_usd() const noexcept { return static_cast<double>(picos_) / 1e12; }
  /// Fixed 12-decimal rendering, e.g. "0.025000000000".
  [[nodiscard]] std::string str() const;

  constexpr Money& operator+=(Money other) noexcept {
    picos_ += other.picos_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) noexcept { return Money(a.picos_ + b.picos_); }
  friend constexpr Money operator-(Money a, Money b) noexcept { return Money(a.picos_ - b.picos_); }
  friend constexpr Money operator*(Money a, std::int64_t k) noexcept { return Money(a.picos_ * k); }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t picos) : picos_(picos) {}
  std::int64_t picos_ = 0;
};

struct PricingModel {
  Money per_transition = Money::pico(25'000'000);  // 0.000025 USD
  Money per_gb_second = Money::pico(16'666'700);
  Money storage_per_gb_month = Money::pico(20'000'000'000);
  double memory_gb = 0.125;      // memory size every invocation is billed at
  Millis granularity_ms = 1;     // billed duration rounds up to a multiple of this

  /// Vendor-shaped defaults: only the client scheduler charges transitions.
  static PricingModel defaults(EngineKind kind);
  /// Reads [pricing]; keys mirror the field names, amounts in USD.
  static PricingModel from_config(const Config& config, EngineKind kind);
  void validate() const;

  /// Price of one billed millisecond at memory_gb, rounded to the pico.
  [[nodiscard]] Money per_ms() const;
};

struct BillingReport {
  std::uint64_t transitions = 0;
  std::uint64_t invocations = 0;
  Millis billed_ms = 0;             // after granularity rounding
  std::uint64_t history_bytes = 0;  // as stored (post-compression)
  Money transition_charge;
  Money duration_charge;
  Money storage_charge;
  Money total;
};

/// Records a workflow result owns: records of its execution, its root
/// invocation, and everything they spawned.
std::vector<InvocationRecord> execution_records(const WorkflowResult& result);

BillingReport compute_billing(const WorkflowResult& result, const PricingModel& pricing);
BillingReport compute_billing(const std::vector<InvocationRecord>& records, std::uint64_t transitions,
                              std::uint64_t history_bytes, const PricingModel& pricing);

struct OverlapFinding {
  InvocationId orchestrator;
  InvocationId descendant;
  Millis overlap_ms = 0;
};

/// Every (orchestrator, descendant) pair whose billed intervals overlap by
/// more than epsilon_ms. Pairs are ordered by (orchestrator, descendant).
std::vector<OverlapFinding> detect_double_billing(const std::vector<InvocationRecord>& trace,
                                                  Millis epsilon_ms = 1);

/// Total length of the pairwise intersection of two interval lists.
Millis overlap_ms(const std::vector<Interval>& a, const std::vector<Interval>& b);

/// Registers the functions a composition refers to.
using Setup = std::function<void(Runtime&)>;

struct VerifyOptions {
  LatencyModel latency;
  Millis epsilon_ms = 1;
};

/// Direct evaluation of the AST, one synchronous invocation per task; used as
/// the reference output when checking substitution.
Payload evaluate_directly(const CompositionSpec& spec, const Setup& setup, const Payload& input);

/// True iff the composition registers as a function, is invocable through
/// Runtime::invoke, and works as a task of another composition on the same
/// engine, producing the reference output each time.
bool check_substitution(const std::shared_ptr<Engine>& engine, const CompositionSpec& spec, const Setup& setup,
                        const Payload& input = "{}", const VerifyOptions& options = {});

struct TrilemmaVerdict {
  bool black_box = false;
  bool substitution = false;
  bool no_double_billing = false;
  std::vector<std::string> evidence;

  [[nodiscard]] bool st_safe() const noexcept { return black_box && substitution && no_double_billing; }
};

TrilemmaVerdict verify_trilemma(const std::shared_ptr<Engine>& engine, const CompositionSpec& spec,
                                const Setup& setup, const Payload& input = "{}", const VerifyOptions& options = {});

/// JSON documents for the CLI and for archiving next to benchmark output.
std::string to_json(const BillingReport& report);
std::string to_json(const TrilemmaVerdict& verdict, EngineKind engine);

}  // namespace faasflow
