// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "faasflow/accounting.hpp"
#include "faasflow/error.hpp"
#include "faasflow/state_machine.hpp"
#include "support.hpp"

using namespace faasflow;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

const char* const kDiamond = R"({
  "StartAt": "Check",
  "States": {
    "Check": {"Type": "Choice",
              "Choices": [{"Variable": "$.count", "NumericGreaterThanEquals": 1, "Next": "Big"}],
              "Default": "Small"},
    "Big": {"Type": "Task", "Resource": "long", "Next": "Join"},
    "Small": {"Type": "Task", "Resource": "short", "Next": "Join"},
    "Join": {"Type": "Task", "Resource": "echo", "End": true}
  }
})";

}  // namespace

TEST_CASE("malformed JSON reports the byte position") {
  try {
    parse_state_machine(R"({"StartAt": "A", "States": {)");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() >= 27);
    CHECK(std::string(e.what()).find("at byte") != std::string::npos);
  }
}

TEST_CASE("structural violations are rejected") {
  auto check = [](const char* text) { return code_of([text] { parse_state_machine(text); }); };
  CHECK(check(R"({"StartAt": "X", "States": {"A": {"Type": "Pass", "End": true}}})") == ErrorCode::ValidationError);
  CHECK(check(R"({"StartAt": "A", "States": {"A": {"Type": "Pass", "Next": "B"}}})") == ErrorCode::ValidationError);
  CHECK(check(R"({"StartAt": "A", "States": {"A": {"Type": "Pass"}}})") == ErrorCode::ValidationError);
  CHECK(check(R"({"StartAt": "A", "States": {"A": {"Type": "Pass", "End": true},
                                            "B": {"Type": "Pass", "End": true}}})") == ErrorCode::ValidationError);
  CHECK(check(R"({"StartAt": "A", "States": {"A": {"Type": "Pass", "Next": "B"},
                                            "B": {"Type": "Pass", "Next": "A"}}})") == ErrorCode::ValidationError);
  CHECK(check(R"({"StartAt": "A", "States": {"A": {"Type": "Map", "End": true}}})") == ErrorCode::UnsupportedState);
  CHECK(check(R"({"StartAt": "A", "States": {"A": {"Type": "Choice",
      "Choices": [{"Variable": "$.x", "NumericEquals": 1, "Next": "B"}]},
      "B": {"Type": "Pass", "End": true}}})") == ErrorCode::ValidationError);
  CHECK(check(R"({"StartAt": "A", "States": {"A": {"Type": "Wait", "Seconds": -1, "End": true}}})") ==
        ErrorCode::ValidationError);
}

TEST_CASE("generated machines compile to the builders") {
  const auto chain = compile(sequence_machine(5, "f"));
  CHECK(action_count(chain) == 5);
  CHECK_FALSE(contains_parallel(chain.root));
  const auto par = compile(parallel_machine(4, "g"));
  CHECK(par.root.is<Parallel>());
  CHECK(action_count(par) == 4);
  CHECK(code_of([] { sequence_machine(0, "f"); }) == ErrorCode::InvalidCount);
  CHECK(code_of([] { parallel_machine(0, "f"); }) == ErrorCode::InvalidCount);
}

TEST_CASE("choice arms close at the reconvergence point") {
  const auto spec = compile(parse_state_machine(kDiamond));
  REQUIRE(spec.root.is<Sequence>());
  const auto& steps = spec.root.as<Sequence>().steps;
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].is<Choice>());
  CHECK(steps[1] == compose::task("echo"));
}

TEST_CASE("serialize and parse are inverse") {
  const auto doc = parse_state_machine(kDiamond);
  CHECK(parse_state_machine(serialize_state_machine(doc)) == doc);
}

TEST_CASE("the shipped state machine example compiles") {
  std::ifstream file(std::string(FAASFLOW_SOURCE_DIR) + "/workflows/seq5_asl.json");
  std::stringstream text;
  text << file.rdbuf();
  const auto envelope = nlohmann::json::parse(text.str());
  const auto spec = compile(parse_state_machine(envelope["workflow"].dump()));
  CHECK(action_count(spec) == 5);
}

TEST_CASE("random compositions keep their meaning through a state machine") {
  testing::SpecGenerator gen(2024);
  int translated = 0;
  for (int i = 0; i < 150; ++i) {
    const auto spec = gen.next();
    StateMachineDoc doc;
    try {
      doc = to_state_machine(spec);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedConstruct);
      continue;
    }
    ++translated;
    CHECK_NOTHROW(validate_state_machine(doc));
    const auto back = compile(parse_state_machine(serialize_state_machine(doc)));
    for (const char* input : {R"({"count": 0})", R"({"count": 2})"}) {
      CHECK(evaluate_directly(back, testing::register_test_functions, input) ==
            evaluate_directly(spec, testing::register_test_functions, input));
    }
  }
  CHECK(translated > 100);
}
