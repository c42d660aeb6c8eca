// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "faasflow/config.hpp"
#include "faasflow/error.hpp"
#include "faasflow/runtime.hpp"

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

// billed + suspended gaps must tile [start, end) exactly.
void check_tiling(const InvocationRecord& r) {
  Millis gaps = 0;
  for (const auto& g : r.suspended_gaps) gaps += g.length();
  CHECK(r.billed_ms() + gaps == r.end_time - r.start_time);
}

}  // namespace

TEST_CASE("sleep invocation lifecycle and billing") {
  LatencyModel m;
  m.invoke_latency_ms = 7;
  Runtime rt(m);
  rt.register_function(FunctionDef::sleep("s", 100));
  const auto r = rt.invoke("s", "abc");
  CHECK(r.state == InvocationState::Completed);
  CHECK(r.submit_time == 0);
  CHECK(r.start_time == 7);
  CHECK(r.end_time == 107);
  CHECK(r.billed_intervals == std::vector<Interval>{{7, 107}});
  CHECK(r.output == "abc");
  CHECK(r.input_bytes == 3);
  CHECK(r.output_bytes == 3);
}

TEST_CASE("input transfer is billed to the receiving function") {
  LatencyModel m;
  m.per_kb_transfer_ms = 2;
  Runtime rt(m);
  rt.register_function(FunctionDef::echo("e"));
  const auto r = rt.invoke("e", std::string(4096, 'x'));
  CHECK(r.billed_ms() == 8);
}

TEST_CASE("registry rejects duplicates, unknown names and bad durations") {
  Runtime rt;
  rt.register_function(FunctionDef::echo("e"));
  CHECK(code_of([&] { rt.register_function(FunctionDef::echo("e")); }) == ErrorCode::DuplicateName);
  CHECK(code_of([&] { rt.invoke("missing", ""); }) == ErrorCode::UnknownFunction);
  CHECK(code_of([&] { rt.register_function(FunctionDef::sleep("neg", -1)); }) == ErrorCode::ValidationError);
  CHECK(code_of([&] { rt.register_function(FunctionDef::echo("")); }) == ErrorCode::ValidationError);
}

TEST_CASE("payload limits are enforced at the boundary") {
  Runtime rt;
  FunctionDef def = FunctionDef::echo("e");
  def.max_payload_bytes = 10;
  rt.register_function(def);
  CHECK(rt.invoke("e", std::string(10, 'x')).state == InvocationState::Completed);
  CHECK(code_of([&] { rt.invoke("e", std::string(11, 'x')); }) == ErrorCode::PayloadTooLarge);
  rt.register_function(FunctionDef::echo("open"));
  StartOptions o;
  o.payload_limit = 4;
  CHECK(code_of([&] { rt.start("open", "12345", o, nullptr); }) == ErrorCode::PayloadTooLarge);
}

TEST_CASE("suspension stops billing until the event arrives") {
  LatencyModel m;
  m.queue_latency_ms = 5;
  Runtime rt(m);
  FunctionDef waiter{"waiter", behavior::Scripted{{behavior::Compute{10}, behavior::Suspend{"k"},
                                                   behavior::Compute{20}}}};
  rt.register_function(waiter);
  const auto id = rt.start("waiter", "in", {}, nullptr);
  rt.publish_after(100, Event{"k", "evt", 0});
  rt.run_until_idle();
  const auto& r = rt.record(id);
  CHECK(r.state == InvocationState::Completed);
  CHECK(r.output == "evt");
  CHECK(r.billed_intervals == std::vector<Interval>{{0, 10}, {105, 125}});
  CHECK(r.suspended_gaps == std::vector<Interval>{{10, 105}});
  check_tiling(r);
}

TEST_CASE("an event that arrives before suspension is latched") {
  Runtime rt;
  rt.register_function({"waiter", behavior::Scripted{{behavior::Compute{50}, behavior::Suspend{"k"},
                                                      behavior::Compute{5}}}});
  const auto id = rt.start("waiter", "", {}, nullptr);
  rt.publish_after(10, Event{"k", "early", 0});
  rt.run_until_idle();
  const auto& r = rt.record(id);
  CHECK(r.output == "early");
  CHECK(r.suspended_gaps.empty());
  CHECK(r.billed_intervals == std::vector<Interval>{{0, 55}});
}

TEST_CASE("trigger_event broadcasts to every waiter") {
  LatencyModel m;
  m.queue_latency_ms = 3;
  Runtime rt(m);
  rt.register_function({"waiter", behavior::Scripted{{behavior::Suspend{"go"}}}});
  std::vector<InvocationId> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(rt.start("waiter", "", {}, nullptr));
  rt.clock().schedule_at(40, [&] { CHECK(rt.trigger_event({"go", "p", 0}).size() == 4); });
  rt.run_until_idle();
  for (auto id : ids) {
    CHECK(rt.record(id).end_time == 43);
    CHECK(rt.record(id).output == "p");
    CHECK(rt.record(id).billed_ms() == 0);
  }
  CHECK(rt.trigger_event({"go", "late", 0}).empty());  // latched for a later waiter
}

TEST_CASE("a suspension that outlives the limit fails") {
  RuntimeOptions o;
  o.suspend_limit_ms = 1000;
  Runtime rt({}, o);
  rt.register_function({"waiter", behavior::Scripted{{behavior::Suspend{"never"}}}});
  const auto r = rt.invoke("waiter", "");
  CHECK(r.state == InvocationState::Failed);
  CHECK(r.error.find("SuspendLimitExceeded") != std::string::npos);
  CHECK(r.end_time == 1000);
  check_tiling(r);
}

TEST_CASE("compute requires a running invocation") {
  Runtime rt;
  std::optional<InvocationContext> saved;
  rt.register_function({"n", behavior::Native{[&](InvocationContext ctx) {
                          saved = ctx;
                          ctx.complete("done");
                        }}});
  rt.invoke("n", "");
  REQUIRE(saved);
  CHECK(code_of([&] { saved->compute(1, [] {}); }) == ErrorCode::NotRunning);
  CHECK(code_of([&] { saved->complete("again"); }) == ErrorCode::NotRunning);
}

TEST_CASE("invoke is not reentrant") {
  Runtime rt;
  rt.register_function(FunctionDef::echo("e"));
  bool threw = false;
  rt.register_function({"n", behavior::Native{[&](InvocationContext ctx) {
                          try {
                            ctx.runtime().invoke("e", "");
                          } catch (const std::logic_error&) {
                            threw = true;
                          }
                          ctx.complete("");
                        }}});
  rt.invoke("n", "");
  CHECK(threw);
}

TEST_CASE("flaky functions fail the configured number of times") {
  Runtime rt;
  rt.register_function(FunctionDef::flaky("f", 2, 10));
  CHECK(rt.invoke("f", "").state == InvocationState::Failed);
  CHECK(rt.invoke("f", "").state == InvocationState::Failed);
  CHECK(rt.invoke("f", "").state == InvocationState::Completed);
}

TEST_CASE("incrementer updates a JSON field") {
  Runtime rt;
  rt.register_function(FunctionDef::incrementer("inc", "count", 30));
  const auto r = rt.invoke("inc", R"({"count":2})");
  CHECK(nlohmann::json::parse(r.output)["count"] == 3);
  CHECK(r.billed_ms() == 30);
  CHECK(increment_field("not json", "count") == "not json");
}

TEST_CASE("invoke_async delivers after queue plus log write") {
  LatencyModel m;
  m.queue_latency_ms = 4;
  m.log_write_ms = 6;
  m.per_kb_transfer_ms = 1;
  Runtime rt(m);
  rt.register_function(FunctionDef::sleep("s", 10));
  rt.register_function({"waiter", behavior::Scripted{{behavior::Suspend{"k"}}}});
  Millis resumed_at = -1;
  rt.start("waiter", "", {}, [&](const InvocationRecord& r) { resumed_at = r.end_time; });
  rt.invoke_async("s", std::string(2048, 'x'), "k");
  rt.run_until_idle();
  // sleep finishes at 2 + 10; delivery 4 + 6 + 2; the waiter resumes after 4 more.
  CHECK(resumed_at == 12 + 12 + 4);

  m.active_ack_bypass = true;
  CHECK(m.delivery_base_ms() == 4);
}

TEST_CASE("hop adds transfer and cliff costs") {
  LatencyModel m;
  m.per_kb_transfer_ms = 0.25;
  m.large_payload_cliff = PayloadCliff{1000, 500};
  Runtime rt(m);
  CHECK(rt.hop(10, 999) == 10);
  CHECK(rt.hop(10, 1000) == 10 + 0 + 500);
  CHECK(rt.hop(10, 4096) == 10 + 1 + 500);
  CHECK(m.payload_ms(32768) == 8);
}

TEST_CASE("jitter is deterministic per seed and bounded") {
  LatencyModel m;
  m.jitter = 0.2;
  RuntimeOptions a;
  a.seed = 42;
  Runtime x(m, a), y(m, a);
  a.seed = 43;
  Runtime z(m, a);
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const Millis dx = x.delay(100);
    CHECK(dx == y.delay(100));
    CHECK(dx >= 80);
    CHECK(dx <= 120);
    differs = differs || dx != z.delay(100);
  }
  CHECK(differs);
}

TEST_CASE("negative latencies are rejected") {
  LatencyModel m;
  m.queue_latency_ms = -1;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::ConfigError);
}

TEST_CASE("latency model reads config sections and flat files") {
  const auto sectioned = Config::parse(
      "[latency]\ninvoke_latency_ms = 3\nqueue_latency_ms=4.5\nactive_ack_bypass = true\n"
      "cliff_threshold_bytes = 100\ncliff_delay_ms = 9\n");
  const auto m = LatencyModel::from_config(sectioned);
  CHECK(m.invoke_latency_ms == 3);
  CHECK(m.queue_latency_ms == 4.5);
  CHECK(m.active_ack_bypass);
  REQUIRE(m.large_payload_cliff);
  CHECK(m.large_payload_cliff->threshold_bytes == 100);
  CHECK(m.large_payload_cliff->extra_delay_ms == 9);

  const auto flat = LatencyModel::from_config(Config::parse("log_write_ms = 8\n"));
  CHECK(flat.log_write_ms == 8);
  CHECK(LatencyModel::from_config(Config::parse(m.to_config_text())) == m);
}

TEST_CASE("config errors carry the code") {
  CHECK(code_of([] { Config::load("/nonexistent/file.cfg"); }) == ErrorCode::IoError);
  CHECK(code_of([] { LatencyModel::from_config(Config::parse("[latency]\nlog_write_ms = fast\n")); }) ==
        ErrorCode::ConfigError);
}

TEST_CASE("trace survives an NDJSON round trip") {
  LatencyModel m;
  m.queue_latency_ms = 2;
  Runtime rt(m);
  rt.register_function({"waiter", behavior::Scripted{{behavior::Compute{3}, behavior::Suspend{"k"}}}});
  rt.register_function(FunctionDef::flaky("f", 1, 4));
  StartOptions o;
  o.execution = 9;
  o.path = "$/0";
  const auto parent = rt.start("waiter", "line\n\"quoted\"", o, nullptr);
  StartOptions child;
  child.parent = parent;
  rt.start("f", "", child, nullptr);
  rt.publish_after(50, {"k", "{\"a\":1}", 0});
  rt.run_until_idle();

  std::stringstream buffer;
  write_trace(buffer, rt.trace());
  CHECK(read_trace(buffer) == rt.trace());
}

TEST_CASE("seal counts later introspection") {
  Runtime rt;
  rt.register_function(FunctionDef::echo("e"));
  rt.describe("e");
  CHECK(rt.introspections() == 0);
  rt.seal("e");
  rt.describe("e");
  CHECK(rt.introspections() == 1);
  CHECK(code_of([&] { rt.seal("nope"); }) == ErrorCode::UnknownFunction);
}

TEST_CASE("function specs parse") {
  CHECK(std::get<behavior::Sleep>(parse_function_spec("a", "sleep:250").behavior).duration == 250);
  CHECK(std::holds_alternative<behavior::Echo>(parse_function_spec("a", "echo").behavior));
  const auto flaky = std::get<behavior::Flaky>(parse_function_spec("a", "flaky:2:10").behavior);
  CHECK(flaky.failures == 2);
  CHECK(flaky.duration == 10);
  CHECK(code_of([] { parse_function_spec("a", "teleport:3"); }) == ErrorCode::ConfigError);
}
