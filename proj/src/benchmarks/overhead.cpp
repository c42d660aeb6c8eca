// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "faasflow/accounting.hpp"
#include "faasflow/benchmarks.hpp"
#include "faasflow/error.hpp"

namespace faasflow {

namespace {

using BilledByPath = std::map<std::string, Millis, std::less<>>;

Millis critical_path(const Node& node, const std::string& path, const BilledByPath& billed) {
  if (std::holds_alternative<Task>(node.value)) {
    const auto it = billed.find(path);
    return it == billed.end() ? 0 : it->second;
  }
  if (std::holds_alternative<Wait>(node.value)) return 0;
  if (const auto* seq = std::get_if<Sequence>(&node.value)) {
    Millis total = 0;
    for (std::size_t i = 0; i < seq->steps.size(); ++i) {
      total += critical_path(seq->steps[i], node_path::step(path, i), billed);
    }
    return total;
  }
  if (const auto* repeat = std::get_if<Repeat>(&node.value)) {
    Millis total = 0;
    for (int i = 0; i < repeat->count; ++i) {
      total += critical_path(*repeat->body, node_path::iteration(path, i), billed);
    }
    return total;
  }
  if (const auto* parallel = std::get_if<Parallel>(&node.value)) {
    Millis longest = 0;
    for (std::size_t i = 0; i < parallel->branches.size(); ++i) {
      longest = std::max(longest, critical_path(parallel->branches[i], node_path::branch(path, i), billed));
    }
    return longest;
  }
  if (const auto* choice = std::get_if<Choice>(&node.value)) {
    // Only the taken arm has records.
    return std::max(critical_path(*choice->then_branch, node_path::then_arm(path), billed),
                    critical_path(*choice->else_branch, node_path::else_arm(path), billed));
  }
  // Attempts share the body path and run one after another; their records
  // are already summed per path.
  const auto& retry = std::get<Retry>(node.value);
  return critical_path(*retry.body, node_path::retry_body(path), billed);
}

}  // namespace

Millis composed_time(const WorkflowResult& result) {
  BilledByPath billed;
  for (const auto& rec : execution_records(result)) {
    if (!rec.finished()) {
      throw Error(ErrorCode::IncompleteTrace, "invocation #" + std::to_string(rec.id.value) + " (" + rec.function +
                                                  ") is " + std::string(to_string(rec.state)));
    }
    if (rec.orchestrator || rec.execution != result.execution) continue;
    billed[rec.path] += rec.billed_ms();
  }
  if (result.end_time < result.start_time) throw Error(ErrorCode::IncompleteTrace, "result has no end time");
  return critical_path(result.spec.root, node_path::kRoot, billed);
}

Millis overhead(const WorkflowResult& result) { return result.wall_time_ms - composed_time(result); }

std::string_view scenario_name(Scenario scenario) noexcept {
  switch (scenario) {
    case Scenario::Sequence: return "sequence";
    case Scenario::Parallel: return "parallel";
    case Scenario::StatePassing: return "state";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  for (auto s : {Scenario::Sequence, Scenario::Parallel, Scenario::StatePassing}) {
    if (scenario_name(s) == name) return s;
  }
  throw Error(ErrorCode::ConfigError, "unknown scenario '" + std::string(name) + "' (sequence, parallel or state)");
}

void OverheadSample::summarize() {
  repetitions = static_cast<int>(overhead_ms.size());
  if (overhead_ms.empty()) {
    mean_ms = stdev_ms = 0;
    return;
  }
  const double n = static_cast<double>(overhead_ms.size());
  mean_ms = static_cast<double>(std::accumulate(overhead_ms.begin(), overhead_ms.end(), Millis{0})) / n;
  double sq = 0;
  for (Millis v : overhead_ms) sq += (static_cast<double>(v) - mean_ms) * (static_cast<double>(v) - mean_ms);
  stdev_ms = overhead_ms.size() > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
}

double linear_fit_r2(const std::vector<OverheadSample>& samples) {
  std::vector<std::pair<double, double>> points;
  for (const auto& s : samples) {
    if (s.available) points.emplace_back(s.n, s.mean_ms);
  }
  if (points.size() < 2) return 1.0;
  const double k = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (auto [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (syy == 0) return 1.0;  // flat line: perfectly explained
  return sxy * sxy / (sxx * syy);
}

}  // namespace faasflow
