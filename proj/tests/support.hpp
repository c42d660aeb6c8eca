// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the test binaries: a random composition generator and
// oracles that recompute results without going through library code paths.

#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faasflow/composition.hpp"
#include "faasflow/engine.hpp"
#include "faasflow/runtime.hpp"

namespace faasflow::testing {

/// Functions every random composition may use.
inline void register_test_functions(Runtime& rt) {
  rt.register_function(FunctionDef::sleep("short", 100));
  rt.register_function(FunctionDef::sleep("long", 250));
  rt.register_function(FunctionDef::incrementer("inc", "count", 30));
  rt.register_function(FunctionDef::echo("echo"));
}

struct GenLimits {
  int max_depth = 4;
  int max_tasks = 20;  // after Repeat expansion
  bool parallel = true;
  bool control = true;  // Choice, Retry, Wait
  bool waits = true;
};

/// Limits an engine can run.
inline GenLimits limits_for(EngineKind kind) {
  GenLimits g;
  if (kind == EngineKind::ReactiveConductor) g.parallel = false;
  if (kind == EngineKind::SequenceNative) g.parallel = g.control = false;
  return g;
}

class SpecGenerator {
 public:
  explicit SpecGenerator(std::uint64_t seed, GenLimits limits = {}) : rng_(seed), limits_(limits) {}

  CompositionSpec next() {
    budget_ = 1 + pick(limits_.max_tasks - 1);
    CompositionSpec spec;
    spec.root = node(1);
    return spec;
  }

 private:
  int pick(int bound) { return std::uniform_int_distribution<int>(0, std::max(0, bound))(rng_); }

  Node leaf() {
    static const char* const kNames[] = {"short", "long", "inc", "echo"};
    if (limits_.control && limits_.waits && pick(9) == 0) return compose::wait(10 * (1 + pick(9)));
    --budget_;
    return compose::task(kNames[pick(3)]);
  }

  Node node(int depth) {
    if (depth >= limits_.max_depth || budget_ <= 1 || pick(3) == 0) return leaf();
    std::vector<int> kinds{0, 0, 3};  // 0 sequence, 1 parallel, 2 choice, 3 repeat, 4 retry
    if (limits_.parallel) kinds.push_back(1);
    if (limits_.control) {
      kinds.push_back(2);
      kinds.push_back(4);
    }
    const int kind = kinds[static_cast<std::size_t>(pick(static_cast<int>(kinds.size()) - 1))];
    switch (kind) {
      case 0:
      case 1: {
        std::vector<Node> children;
        const int k = 1 + pick(3);
        for (int i = 0; i < k && budget_ > 0; ++i) children.push_back(node(depth + 1));
        if (children.empty()) children.push_back(leaf());
        if (kind == 1 && children.size() > 1) return compose::parallel(std::move(children));
        return compose::sequence(std::move(children));
      }
      case 2: {
        static const CompareOp kOps[] = {CompareOp::Equal, CompareOp::Less, CompareOp::LessEqual, CompareOp::Greater,
                                         CompareOp::GreaterEqual};
        Predicate p{"count", kOps[pick(4)], static_cast<double>(pick(3))};
        Node then_branch = node(depth + 1);
        Node else_branch = node(depth + 1);
        return compose::choice(std::move(p), std::move(then_branch), std::move(else_branch));
      }
      case 3: {
        // The body is generated with the budget it gets per iteration.
        const int count = 2 + pick(1);
        const int before = budget_;
        budget_ = std::max(1, budget_ / count);
        const int share = budget_;
        Node body = node(depth + 1);
        const int used = share - budget_;
        budget_ = before - used * count;
        return compose::repeat(count, std::move(body));
      }
      default: return compose::retry(node(depth + 1), 1 + pick(2), pick(1) * 50);
    }
  }

  std::mt19937_64 rng_;
  GenLimits limits_;
  int budget_ = 0;
};

/// Critical-path overhead recomputed from the NDJSON trace export: all
/// source-to-sink paths through the series-parallel structure are
/// enumerated and the heaviest one is subtracted from the wall time.
class TraceOracle {
 public:
  explicit TraceOracle(const WorkflowResult& result) : result_(result) {
    std::stringstream file;
    write_trace(file, result.trace);
    std::string line;
    while (std::getline(file, line)) {
      const auto j = nlohmann::json::parse(line);
      if (j.at("orchestrator").get<bool>()) continue;
      if (j.at("execution").get<std::uint64_t>() != result.execution) continue;
      Millis billed = 0;
      for (const auto& iv : j.at("billed_intervals")) billed += iv.at(1).get<Millis>() - iv.at(0).get<Millis>();
      billed_[j.at("path").get<std::string>()] += billed;
    }
  }

  [[nodiscard]] Millis overhead() const {
    const auto sums = paths(result_.spec.root, "$");
    return result_.wall_time_ms - *std::max_element(sums.begin(), sums.end());
  }

 private:
  std::vector<Millis> paths(const Node& node, const std::string& at) const {
    if (node.is<Task>()) {
      const auto it = billed_.find(at);
      return {it == billed_.end() ? 0 : it->second};
    }
    if (node.is<Wait>()) return {0};
    auto chain = [this](const std::vector<std::pair<const Node*, std::string>>& parts) {
      std::vector<Millis> acc{0};
      for (const auto& [child, where] : parts) {
        std::vector<Millis> next;
        for (Millis a : acc) {
          for (Millis b : paths(*child, where)) next.push_back(a + b);
        }
        // Only the maximum matters downstream; keep the set small.
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        acc = std::move(next);
      }
      return acc;
    };
    if (node.is<Sequence>()) {
      std::vector<std::pair<const Node*, std::string>> parts;
      const auto& steps = node.as<Sequence>().steps;
      for (std::size_t i = 0; i < steps.size(); ++i) parts.emplace_back(&steps[i], at + "/" + std::to_string(i));
      return chain(parts);
    }
    if (node.is<Repeat>()) {
      std::vector<std::pair<const Node*, std::string>> parts;
      const auto& r = node.as<Repeat>();
      for (int i = 0; i < r.count; ++i) parts.emplace_back(&*r.body, at + "/r" + std::to_string(i));
      return chain(parts);
    }
    std::vector<Millis> all;
    auto add = [&all](std::vector<Millis> more) { all.insert(all.end(), more.begin(), more.end()); };
    if (node.is<Parallel>()) {
      const auto& branches = node.as<Parallel>().branches;
      for (std::size_t i = 0; i < branches.size(); ++i) add(paths(branches[i], at + "/b" + std::to_string(i)));
    } else if (node.is<Choice>()) {
      add(paths(*node.as<Choice>().then_branch, at + "/t"));
      add(paths(*node.as<Choice>().else_branch, at + "/e"));
    } else {
      add(paths(*node.as<Retry>().body, at + "/try"));
    }
    return all;
  }

  const WorkflowResult& result_;
  std::map<std::string, Millis> billed_;
};

/// A latency model with every knob non-zero, so that engines cannot hide
/// bookkeeping errors behind zero delays.
inline LatencyModel busy_latency() {
  LatencyModel m;
  m.invoke_latency_ms = 3;
  m.queue_latency_ms = 5;
  m.log_write_ms = 7;
  m.per_kb_transfer_ms = 0.5;
  return m;
}

inline EngineProfile busy_profile(EngineKind kind) {
  EngineProfile p = EngineProfile::defaults(kind);
  p.conductor_exec_ms = 4;
  p.replay_ms_per_event = 0.5;
  p.join_ms_per_result = 2;
  p.activity_dispatch_ms = 6;
  return p;
}

}  // namespace faasflow::testing
