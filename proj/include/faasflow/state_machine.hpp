// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faasflow/composition.hpp"

namespace faasflow {

// A subset of Amazon States Language: Task, Parallel, Choice, Wait and Pass
// states. Paths, catchers and intrinsic functions are not supported.

enum class StateType { Task, Parallel, Choice, Wait, Pass };

struct ChoiceRule {
  Predicate predicate;
  std::string next;
  friend bool operator==(const ChoiceRule&, const ChoiceRule&) = default;
};

/// Fixed-interval retry. `max_attempts` counts retries, as ASL does, so a
/// policy of 2 runs the task at most three times.
struct RetryPolicy {
  int max_attempts = 0;
  double interval_seconds = 0.0;
  friend bool operator==(const RetryPolicy&, const RetryPolicy&) = default;
};

struct StateMachineDoc;

struct State {
  StateType type = StateType::Pass;
  std::string resource;                    // Task
  std::optional<std::string> next;
  bool end = false;
  std::vector<StateMachineDoc> branches;   // Parallel
  std::vector<ChoiceRule> choices;         // Choice
  std::optional<std::string> default_next; // Choice
  double seconds = 0.0;                    // Wait
  std::optional<RetryPolicy> retry;        // Task, Parallel
  std::string comment;

  friend bool operator==(const State&, const State&);
};

struct StateMachineDoc {
  std::string comment;
  std::string start_at;
  std::map<std::string, State> states;
  friend bool operator==(const StateMachineDoc&, const StateMachineDoc&) = default;
};

std::string_view to_string(StateType type) noexcept;

/// Parses and validates. Throws ParseError (with byte position) on
/// malformed text and ValidationError on structural violations.
StateMachineDoc parse_state_machine(std::string_view text);

/// Throws ValidationError: unknown start_at or next target, a non-terminal
/// state without Next, unreachable states, or a cycle.
void validate_state_machine(const StateMachineDoc& doc);

std::string serialize_state_machine(const StateMachineDoc& doc);

/// Translates a valid document to a normalized AST. Choice arms are closed
/// at the state where they reconverge (immediate post-dominator).
CompositionSpec compile(const StateMachineDoc& doc);

/// Inverse direction. Repeat is unrolled; Retry is only expressible around a
/// Task or Parallel (UnsupportedConstruct otherwise).
StateMachineDoc to_state_machine(const CompositionSpec& spec, const std::string& comment = {});

/// Generated machines used by the benchmarks: `n` chained Task states named
/// "1".."n", and one Parallel state with `n` single-task branches.
StateMachineDoc sequence_machine(int n, const std::string& resource);
StateMachineDoc parallel_machine(int n, const std::string& resource);

}  // namespace faasflow
