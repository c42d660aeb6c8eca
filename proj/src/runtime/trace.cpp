// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "faasflow/error.hpp"
#include "faasflow/runtime.hpp"

namespace faasflow {

namespace {

using nlohmann::json;

json intervals_to_json(const std::vector<Interval>& intervals) {
  json out = json::array();
  for (const auto& i : intervals) out.push_back({i.from, i.to});
  return out;
}

std::vector<Interval> intervals_from_json(const json& j) {
  std::vector<Interval> out;
  for (const auto& pair : j) out.push_back({pair.at(0).get<Millis>(), pair.at(1).get<Millis>()});
  return out;
}

InvocationState state_from_string(const std::string& s) {
  for (auto st : {InvocationState::Pending, InvocationState::Running, InvocationState::Suspended,
                  InvocationState::Completed, InvocationState::Failed}) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorCode::ParseError, "unknown invocation state '" + s + "'");
}

}  // namespace

void write_trace(std::ostream& out, const std::vector<InvocationRecord>& trace) {
  for (const auto& r : trace) {
    json line;
    line["id"] = r.id.value;
    line["function"] = r.function;
    line["parent"] = r.parent ? json(r.parent->value) : json(nullptr);
    line["execution"] = r.execution;
    line["path"] = r.path;
    line["orchestrator"] = r.orchestrator;
    line["submit_time"] = r.submit_time;
    line["start_time"] = r.start_time;
    line["end_time"] = r.end_time;
    line["billed_intervals"] = intervals_to_json(r.billed_intervals);
    line["suspended_gaps"] = intervals_to_json(r.suspended_gaps);
    line["state"] = std::string(to_string(r.state));
    line["input_bytes"] = r.input_bytes;
    line["output_bytes"] = r.output_bytes;
    line["output"] = r.output;
    if (!r.error.empty()) line["error"] = r.error;
    out << line.dump() << '\n';
  }
}

std::vector<InvocationRecord> read_trace(std::istream& in) {
  std::vector<InvocationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      InvocationRecord r;
      r.id = InvocationId{j.at("id").get<std::uint64_t>()};
      r.function = j.at("function").get<std::string>();
      if (!j.at("parent").is_null()) r.parent = InvocationId{j.at("parent").get<std::uint64_t>()};
      r.execution = j.value("execution", std::uint64_t{0});
      r.path = j.value("path", std::string{});
      r.orchestrator = j.value("orchestrator", false);
      r.submit_time = j.at("submit_time").get<Millis>();
      r.start_time = j.at("start_time").get<Millis>();
      r.end_time = j.at("end_time").get<Millis>();
      r.billed_intervals = intervals_from_json(j.at("billed_intervals"));
      r.suspended_gaps = intervals_from_json(j.value("suspended_gaps", json::array()));
      r.state = state_from_string(j.at("state").get<std::string>());
      r.input_bytes = j.at("input_bytes").get<std::size_t>();
      r.output_bytes = j.at("output_bytes").get<std::size_t>();
      r.output = j.value("output", std::string{});
      r.error = j.value("error", std::string{});
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace faasflow
