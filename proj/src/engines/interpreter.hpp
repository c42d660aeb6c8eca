// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>

#include "faasflow/composition.hpp"

namespace faasflow::detail {

struct StepResult {
  bool ok = true;
  Payload output;
  std::string error;
};

using Cont = std::function<void(StepResult)>;
using Resume = std::function<void()>;

/// Engine-specific effects of the continuation-passing AST walker. Only
/// `task` and `wait` are required.
struct Hooks {
  std::function<void(const std::string& path, const std::string& function, Payload input, Cont)> task;
  std::function<void(const std::string& path, Millis duration, Payload input, Cont)> wait;

  // Replaces the default fan-out/fan-in when set.
  std::function<void(const std::string& path, const Parallel&, Payload input, Cont)> parallel;
  // Default fan-out/fan-in steps: entering the state, merging the k-th
  // result, leaving the state. Each must call its continuation.
  std::function<void(const std::string& path, const Payload& input, Resume)> parallel_enter;
  std::function<void(const std::string& path, std::size_t joined, Resume)> join;
  std::function<void(const std::string& path, const Payload& output, Resume)> parallel_exit;

  // Called for every state entered (task attempt, wait, choice, parallel)
  // with the state payload; may throw to abort the execution.
  std::function<void(const std::string& path, const Payload& state)> transition;
};

/// Walks a composition in continuation-passing style. Every continuation is
/// invoked from engine hooks, so the walker never blocks the event loop.
/// Continuations keep the interpreter, and with it the walked tree, alive.
class Interpreter : public std::enable_shared_from_this<Interpreter> {
 public:
  Interpreter(std::shared_ptr<const Node> root, Hooks hooks) : root_(std::move(root)), hooks_(std::move(hooks)) {}

  static std::shared_ptr<Interpreter> create(Node root, Hooks hooks) {
    return std::make_shared<Interpreter>(std::make_shared<const Node>(std::move(root)), std::move(hooks));
  }

  [[nodiscard]] const Node& root() const noexcept { return *root_; }

  /// Walks the whole tree from `base_path`.
  void run(const std::string& base_path, Payload input, Cont cont) {
    eval(*root_, base_path, std::move(input),
         [self = shared_from_this(), cont = std::move(cont)](StepResult r) { cont(std::move(r)); });
  }

  void eval(const Node& node, const std::string& path, Payload input, Cont cont);

  /// Default fan-out/fan-in of `parallel`, also usable by custom hooks.
  void fan_out(const Parallel& parallel, const std::string& path, Payload input, Cont cont);

 private:
  void transition(const std::string& path, const Payload& state) {
    if (hooks_.transition) hooks_.transition(path, state);
  }
  void steps(const Sequence& seq, std::size_t index, const std::string& path, Payload input, Cont cont);
  void iterate(const Repeat& repeat, int index, const std::string& path, Payload input, Cont cont);
  void attempt(const Retry& retry, int number, const std::string& path, Payload input, Cont cont);

  std::shared_ptr<const Node> root_;
  Hooks hooks_;
};

}  // namespace faasflow::detail
