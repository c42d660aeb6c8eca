// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "faasflow/clock.hpp"

namespace faasflow {

using Payload = std::string;

class InvocationContext;

namespace behavior {

/// Sleeps, then returns its input unchanged.
struct Sleep {
  Millis duration = 0;
};

/// Returns its input immediately.
struct Echo {};

// Scripted steps run in order against a working output that starts as the
// input payload.
struct Compute {
  Millis duration = 0;
};
/// Adds 1 to a numeric field of a JSON-object payload; other payloads pass
/// through unchanged.
struct Increment {
  std::string field;
};
/// Self-suspends on `key`; the event payload replaces the working output.
struct Suspend {
  std::string key;
};
/// Publishes the working output as an event on `key`.
struct Trigger {
  std::string key;
};
struct Fail {
  std::string message;
};
using Step = std::variant<Compute, Increment, Suspend, Trigger, Fail>;

struct Scripted {
  std::vector<Step> steps;
};

/// Fails its first `failures` invocations, then behaves like Sleep.
struct Flaky {
  int failures = 0;
  Millis duration = 0;
};

/// Host-implemented body (orchestrators, composition wrappers). The body
/// must eventually call complete() or fail() on the context.
struct Native {
  std::function<void(InvocationContext)> body;
};

}  // namespace behavior

using Behavior = std::variant<behavior::Sleep, behavior::Echo, behavior::Scripted,
                              behavior::Flaky, behavior::Native>;

inline constexpr std::size_t kUnlimitedBytes = std::numeric_limits<std::size_t>::max();

struct FunctionDef {
  std::string name;
  Behavior behavior;
  std::size_t max_payload_bytes = kUnlimitedBytes;
  bool orchestrator = false;  // invocations are flagged as orchestrator records
  bool sealed = false;        // introspection attempts are counted

  static FunctionDef sleep(std::string name, Millis duration) {
    return {std::move(name), behavior::Sleep{duration}};
  }
  static FunctionDef echo(std::string name) {
    return {std::move(name), behavior::Echo{}};
  }
  static FunctionDef incrementer(std::string name, std::string field,
                                 Millis duration = 0) {
    behavior::Scripted s;
    if (duration > 0) s.steps.emplace_back(behavior::Compute{duration});
    s.steps.emplace_back(behavior::Increment{std::move(field)});
    return {std::move(name), std::move(s)};
  }
  static FunctionDef flaky(std::string name, int failures, Millis duration) {
    return {std::move(name), behavior::Flaky{failures, duration}};
  }
};

/// Increment semantics shared by the runtime and reference evaluators.
Payload increment_field(const Payload& payload, const std::string& field);

/// Parses a compact function description: "sleep:<ms>", "echo",
/// "increment:<field>[:<ms>]", "flaky:<failures>:<ms>".
FunctionDef parse_function_spec(const std::string& name, const std::string& spec);

}  // namespace faasflow
