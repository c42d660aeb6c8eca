// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "faasflow/clock.hpp"
#include "faasflow/function.hpp"

namespace faasflow {

/// Heap-allocated value with deep-copy semantics; lets recursive variants
/// hold a single child by value.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT: implicit by design of a value box
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() noexcept { return *ptr_; }
  const T& operator*() const noexcept { return *ptr_; }
  T* operator->() noexcept { return ptr_.get(); }
  const T* operator->() const noexcept { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a == *b; }

 private:
  std::unique_ptr<T> ptr_;
};

enum class CompareOp { Equal, Less, LessEqual, Greater, GreaterEqual };

/// Comparison of one named field of a JSON-object payload against a number
/// or string constant. Missing fields and type mismatches evaluate to false.
struct Predicate {
  std::string field;
  CompareOp op = CompareOp::Equal;
  std::variant<double, std::string> value;

  [[nodiscard]] bool evaluate(const Payload& payload) const;
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct Node;

struct Task {
  std::string function;
  friend bool operator==(const Task&, const Task&) = default;
};
struct Sequence {
  std::vector<Node> steps;
  friend bool operator==(const Sequence&, const Sequence&);
};
struct Parallel {
  std::vector<Node> branches;
  friend bool operator==(const Parallel&, const Parallel&);
};
struct Choice {
  Predicate predicate;
  Box<Node> then_branch;
  Box<Node> else_branch;
  friend bool operator==(const Choice&, const Choice&);
};
struct Retry {
  Box<Node> body;
  int max_attempts = 1;
  Millis backoff_ms = 0;
  friend bool operator==(const Retry&, const Retry&);
};
struct Repeat {
  int count = 1;
  Box<Node> body;
  friend bool operator==(const Repeat&, const Repeat&);
};
struct Wait {
  Millis duration_ms = 0;
  friend bool operator==(const Wait&, const Wait&) = default;
};

struct Node {
  std::variant<Task, Sequence, Parallel, Choice, Retry, Repeat, Wait> value;

  template <class T>
  [[nodiscard]] bool is() const noexcept { return std::holds_alternative<T>(value); }
  template <class T>
  [[nodiscard]] const T& as() const { return std::get<T>(value); }

  friend bool operator==(const Node&, const Node&) = default;
};

/// Workflow AST. An empty Sequence is the identity composition.
struct CompositionSpec {
  Node root{Sequence{}};
  friend bool operator==(const CompositionSpec&, const CompositionSpec&) = default;
};

namespace compose {
Node task(std::string function);
Node sequence(std::vector<Node> steps);
Node parallel(std::vector<Node> branches);
Node choice(Predicate predicate, Node then_branch, Node else_branch);
Node retry(Node body, int max_attempts, Millis backoff_ms);
Node repeat(int count, Node body);
Node wait(Millis duration_ms);
}  // namespace compose

/// Repeat(n, Task(task)). Throws InvalidCount for n < 1.
CompositionSpec seq(int n, const std::string& task);
/// Parallel of n Task(task) branches. Throws InvalidCount for n < 1.
CompositionSpec fan_out(int n, const std::string& task);

/// Checks structural invariants (counts, non-empty names, non-negative
/// durations). Throws ValidationError.
void validate(const CompositionSpec& spec);

/// Flattens nested sequences, unwraps single-step sequences and Repeat(1, x).
/// Idempotent.
CompositionSpec normalize(const CompositionSpec& spec);

/// Task occurrences after Repeat expansion; Choice counts both arms.
std::size_t action_count(const CompositionSpec& spec);
std::size_t action_count(const Node& node);

/// Sorted multiset of referenced function names (Repeat expanded).
std::vector<std::string> referenced_functions(const CompositionSpec& spec);

[[nodiscard]] bool contains_parallel(const Node& node);
[[nodiscard]] std::size_t depth(const Node& node);

/// AST serialization (JSON, one object per node kind) and its inverse.
std::string serialize(const CompositionSpec& spec);
CompositionSpec parse_composition(const std::string& text);

/// Ordered branch outputs as a JSON array; outputs that are themselves JSON
/// are embedded, anything else becomes a JSON string.
Payload join_outputs(const std::vector<Payload>& outputs);

/// Path naming for composed-function records. Every engine tags the
/// invocations it issues with the path of the node that issued them.
namespace node_path {
inline const std::string kRoot = "$";
std::string step(const std::string& parent, std::size_t index);
std::string branch(const std::string& parent, std::size_t index);
std::string then_arm(const std::string& parent);
std::string else_arm(const std::string& parent);
std::string iteration(const std::string& parent, int index);
std::string retry_body(const std::string& parent);
}  // namespace node_path

}  // namespace faasflow
