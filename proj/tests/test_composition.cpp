// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <nlohmann/json.hpp>

#include "faasflow/composition.hpp"
#include "faasflow/error.hpp"
#include "support.hpp"

using namespace faasflow;
using nlohmann::json;

namespace {

// Counts tasks straight from the serialized document.
std::size_t count_tasks(const json& j) {
  if (j.is_string()) return 1;
  const std::string kind = j.begin().key();
  const json& v = j.begin().value();
  if (kind == "task") return 1;
  if (kind == "wait") return 0;
  std::size_t n = 0;
  if (kind == "sequence" || kind == "parallel") {
    for (const auto& c : v) n += count_tasks(c);
    return n;
  }
  if (kind == "choice") return count_tasks(v["then"]) + count_tasks(v["else"]);
  if (kind == "retry") return count_tasks(v["body"]);
  return v["count"].get<std::size_t>() * count_tasks(v["body"]);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("seq and fan_out builders") {
  const auto s = seq(5, "f");
  CHECK(action_count(s) == 5);
  CHECK_FALSE(contains_parallel(s.root));
  const auto p = fan_out(3, "g");
  CHECK(p.root.is<Parallel>());
  CHECK(p.root.as<Parallel>().branches.size() == 3);
  CHECK(referenced_functions(p) == std::vector<std::string>{"g", "g", "g"});
  CHECK(code_of([] { seq(0, "f"); }) == ErrorCode::InvalidCount);
  CHECK(code_of([] { fan_out(-2, "f"); }) == ErrorCode::InvalidCount);
}

TEST_CASE("validate rejects malformed trees") {
  using namespace compose;
  CHECK_NOTHROW(validate(CompositionSpec{}));
  CHECK(code_of([] { validate({task("")}); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { validate({parallel({})}); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { validate({retry(task("a"), 0, 0)}); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { validate({retry(task("a"), 2, -1)}); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { validate({repeat(0, task("a"))}); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { validate({wait(-5)}); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { validate({choice(Predicate{"", CompareOp::Equal, 1.0}, task("a"), task("b"))}); }) ==
        ErrorCode::ValidationError);
}

TEST_CASE("normalize flattens and unwraps") {
  using namespace compose;
  const CompositionSpec nested{sequence({sequence({task("a"), task("b")}), repeat(1, task("c")),
                                         retry(sequence({task("d")}), 1, 0)})};
  const auto n = normalize(nested);
  CHECK(n == CompositionSpec{sequence({task("a"), task("b"), task("c"), task("d")})});
  CHECK(normalize(CompositionSpec{sequence({task("x")})}) == CompositionSpec{task("x")});
}

TEST_CASE("random specs: normalize is idempotent and preserves action counts") {
  testing::SpecGenerator gen(7);
  for (int i = 0; i < 300; ++i) {
    const auto spec = gen.next();
    CHECK_NOTHROW(validate(spec));
    const auto once = normalize(spec);
    CHECK(normalize(once) == once);
    CHECK(action_count(once) == action_count(spec));
    CHECK(action_count(spec) == count_tasks(json::parse(serialize(spec))));
    CHECK(referenced_functions(spec).size() == action_count(spec));
  }
}

TEST_CASE("random specs survive a serialize round trip") {
  testing::SpecGenerator gen(99);
  for (int i = 0; i < 300; ++i) {
    const auto spec = gen.next();
    CHECK(parse_composition(serialize(spec)) == spec);
  }
}

TEST_CASE("composition parse errors") {
  try {
    parse_composition(R"({"sequence": [ {"task": "a"}, ]})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() > 0);
  }
  CHECK(code_of([] { parse_composition(R"({"loop": 3})"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_composition(R"({"choice": {"if": {"field": "x", "op": "~", "value": 1},
      "then": "a", "else": "b"}})"); }) == ErrorCode::ParseError);
  CHECK(parse_composition(R"({"sequence": ["a", {"task": "b"}]})") ==
        CompositionSpec{compose::sequence({compose::task("a"), compose::task("b")})});
}

TEST_CASE("predicates compare numbers and strings, otherwise false") {
  const Predicate ge{"count", CompareOp::GreaterEqual, 2.0};
  CHECK(ge.evaluate(R"({"count": 2})"));
  CHECK_FALSE(ge.evaluate(R"({"count": 1})"));
  CHECK_FALSE(ge.evaluate(R"({"count": "2"})"));
  CHECK_FALSE(ge.evaluate(R"({"other": 5})"));
  CHECK_FALSE(ge.evaluate("not json"));
  const Predicate eq{"state", CompareOp::Equal, std::string("ok")};
  CHECK(eq.evaluate(R"({"state": "ok"})"));
  CHECK_FALSE(eq.evaluate(R"({"state": 1})"));
}

TEST_CASE("join_outputs embeds JSON and quotes plain text") {
  CHECK(join_outputs({R"({"a":1})", "plain", "3"}) == R"([{"a":1},"plain",3])");
  CHECK(join_outputs({}) == "[]");
}

TEST_CASE("depth and node paths") {
  using namespace compose;
  CHECK(depth(task("a")) == 1);
  CHECK(depth(sequence({parallel({task("a"), repeat(2, task("b"))})})) == 4);
  CHECK(node_path::step("$", 2) == "$/2");
  CHECK(node_path::branch("$/1", 0) == "$/1/b0");
  CHECK(node_path::iteration("$", 3) == "$/r3");
  CHECK(node_path::then_arm("$") == "$/t");
  CHECK(node_path::else_arm("$") == "$/e");
  CHECK(node_path::retry_body("$") == "$/try");
}
