// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "faasflow/accounting.hpp"
#include "faasflow/benchmarks.hpp"
#include "faasflow/config.hpp"
#include "faasflow/engine.hpp"
#include "faasflow/error.hpp"
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

void check_record_invariants(const InvocationRecord& r) {
  CHECK(r.finished());
  CHECK(r.submit_time <= r.start_time);
  CHECK(r.start_time <= r.end_time);
  Millis cursor = r.start_time;
  for (const auto& iv : r.billed_intervals) {
    CHECK(iv.from >= cursor);
    CHECK(iv.to > iv.from);
    cursor = iv.to;
  }
  CHECK(cursor <= r.end_time);
}

CompositionSpec chain(std::initializer_list<const char*> names) {
  std::vector<Node> steps;
  for (const char* n : names) steps.push_back(compose::task(n));
  return {compose::sequence(std::move(steps))};
}

}  // namespace

TEST_CASE("engine names round trip") {
  for (EngineKind kind : kAllEngines) CHECK(parse_engine(engine_name(kind)) == kind);
  CHECK(code_of([] { parse_engine("lambda"); }) == ErrorCode::ValidationError);
}

TEST_CASE("every engine computes the same output as direct evaluation") {
  for (EngineKind kind : kAllEngines) {
    CAPTURE(engine_name(kind));
    testing::SpecGenerator gen(500 + static_cast<int>(kind), testing::limits_for(kind));
    for (int i = 0; i < 40; ++i) {
      const auto spec = gen.next();
      const Payload input = i % 2 == 0 ? R"({"count":0})" : R"({"count":2})";
      Runtime rt(testing::busy_latency());
      testing::register_test_functions(rt);
      const auto result = make_engine(testing::busy_profile(kind))->run(rt, spec, input);
      CHECK(result.ok);
      CHECK(result.output == evaluate_directly(spec, testing::register_test_functions, input));
      CHECK(result.wall_time_ms == result.end_time - result.start_time);
      for (const auto& r : result.trace) check_record_invariants(r);
    }
  }
}

TEST_CASE("client scheduler state limit boundary") {
  auto run = [](std::size_t bytes) {
    Runtime rt;
    rt.register_function(FunctionDef::echo("echo"));
    return make_engine(EngineKind::ClientScheduler)->run(rt, chain({"echo", "echo"}), std::string(bytes, 'x'));
  };
  CHECK(run(32'768).ok);
  CHECK(code_of([&] { run(32'769); }) == ErrorCode::StateTooLarge);
}

TEST_CASE("client scheduler is rate limited by a token bucket") {
  EngineProfile p = EngineProfile::defaults(EngineKind::ClientScheduler);
  p.transition_rate_limit = RateLimit{1, 2};
  Runtime rt;
  rt.register_function(FunctionDef::echo("echo"));
  CHECK(code_of([&] { make_engine(p)->run(rt, seq(5, "echo"), ""); }) == ErrorCode::RateLimited);

  // With a second between transitions the bucket refills in time.
  Runtime slow;
  slow.register_function(FunctionDef::sleep("s", 1000));
  CHECK(make_engine(p)->run(slow, seq(5, "s"), "").ok);
}

TEST_CASE("client scheduler bills nothing to itself") {
  Runtime rt;
  rt.register_function(FunctionDef::sleep("s", 10));
  const auto r = make_engine(EngineKind::ClientScheduler)->run(rt, seq(3, "s"), "");
  CHECK(r.trace.size() == 3);
  for (const auto& rec : r.trace) CHECK_FALSE(rec.orchestrator);
  CHECK(r.transitions == 3);
}

TEST_CASE("conductor action limit boundary and parallel rejection") {
  Runtime rt;
  rt.register_function(FunctionDef::echo("echo"));
  const auto engine = make_engine(EngineKind::ReactiveConductor);
  CHECK(engine->run(rt, seq(50, "echo"), "").ok);
  CHECK(code_of([&] { engine->run(rt, seq(51, "echo"), ""); }) == ErrorCode::TooManyActions);
  CHECK(code_of([&] { engine->run(rt, fan_out(5, "echo"), ""); }) == ErrorCode::ParallelUnsupported);
  CHECK(code_of([&] { make_engine(EngineKind::SequenceNative)->run(rt, seq(80, "echo"), ""); }) ==
        ErrorCode::TooManyActions);
}

TEST_CASE("sequences: empty chain is the identity and nesting works") {
  Runtime rt;
  rt.register_function(FunctionDef::incrementer("inc", "count"));
  const auto engine = make_engine(EngineKind::SequenceNative);
  const auto empty = engine->run(rt, CompositionSpec{}, R"({"count":1})");
  CHECK(empty.output == R"({"count":1})");
  CHECK(overhead(empty) == 0);

  engine->register_composition(rt, "inner", chain({"inc", "inc"}));
  const auto outer = engine->run(rt, chain({"inner", "inc"}), R"({"count":0})");
  CHECK(nlohmann::json::parse(outer.output)["count"] == 3);
  CHECK(code_of([&] { engine->run(rt, {compose::choice({"count", CompareOp::Equal, 1.0}, compose::task("inc"),
                                                       compose::task("inc"))},
                                  ""); }) == ErrorCode::UnsupportedConstruct);
}

TEST_CASE("suspend orchestrator: nested compositions and zero-latency parallel") {
  Runtime rt;
  testing::register_test_functions(rt);
  const auto engine = make_engine(EngineKind::SuspendOrchestrator);
  const CompositionSpec inner{compose::parallel({compose::task("inc"), compose::task("short")})};
  engine->register_composition(rt, "inner", inner);
  const CompositionSpec outer = chain({"inc", "inner", "echo"});
  const auto r = engine->run(rt, outer, R"({"count":0})");
  CHECK(r.output == R"([{"count":2},{"count":1}])");

  Runtime zero;
  zero.register_function(FunctionDef::sleep("sleep20", 20'000));
  const auto par = engine->run(zero, fan_out(80, "sleep20"), "");
  CHECK(par.wall_time_ms == 20'000);
  CHECK(overhead(par) == 0);
}

TEST_CASE("suspend orchestrator never overlaps its children") {
  Runtime rt(testing::busy_latency());
  rt.register_function(FunctionDef::sleep("s", 1000));
  auto profile = EngineProfile::defaults(EngineKind::SuspendOrchestrator);
  profile.conductor_exec_ms = 5;
  const auto r = make_engine(profile)->run(rt, seq(5, "s"), "");
  CHECK(detect_double_billing(r.trace, 0).empty());
  REQUIRE(r.root);
  CHECK(rt.record(*r.root).billed_ms() == 5 * 5);
}

TEST_CASE("inline orchestrator double bills") {
  Runtime rt;
  rt.register_function(FunctionDef::sleep("s", 1000));
  const auto engine = make_engine(EngineKind::InlineOrchestrator);

  const auto two = engine->run(rt, seq(2, "s"), "");
  REQUIRE(two.root);
  CHECK(rt.record(*two.root).billed_ms() >= 2000);
  CHECK(detect_double_billing(two.trace).size() == 2);

  const auto fan = engine->run(rt, fan_out(3, "s"), "");
  const auto findings = detect_double_billing(execution_records(fan));
  REQUIRE(findings.size() == 3);
  for (const auto& f : findings) CHECK(f.overlap_ms == 1000);
  CHECK(rt.record(*fan.root).billed_ms() == 1000);

  Runtime empty_rt;
  const auto empty = engine->run(empty_rt, CompositionSpec{}, "");
  CHECK(detect_double_billing(empty.trace).empty());
}

TEST_CASE("trilemma matrix") {
  const auto setup = [](Runtime& rt) { testing::register_test_functions(rt); };
  const CompositionSpec spec = chain({"short", "inc", "echo"});
  struct Row {
    EngineKind kind;
    bool black_box, substitution, no_double_billing;
  };
  const Row rows[] = {
      {EngineKind::ClientScheduler, true, false, true},    {EngineKind::ReactiveConductor, true, true, true},
      {EngineKind::SequenceNative, true, true, true},      {EngineKind::EventSourcing, true, true, true},
      {EngineKind::SuspendOrchestrator, true, true, true}, {EngineKind::InlineOrchestrator, true, true, false},
  };
  for (const auto& row : rows) {
    CAPTURE(engine_name(row.kind));
    const auto v = verify_trilemma(make_engine(row.kind), spec, setup);
    CHECK(v.black_box == row.black_box);
    CHECK(v.substitution == row.substitution);
    CHECK(v.no_double_billing == row.no_double_billing);
    CHECK((v.st_safe() || !v.evidence.empty()));
  }
}

TEST_CASE("verdicts do not depend on the latency model") {
  const auto setup = [](Runtime& rt) { testing::register_test_functions(rt); };
  VerifyOptions busy;
  busy.latency = testing::busy_latency();
  for (EngineKind kind : kAllEngines) {
    const auto a = verify_trilemma(make_engine(kind), seq(3, "short"), setup);
    const auto b = verify_trilemma(make_engine(kind), seq(3, "short"), setup, "{}", busy);
    CHECK(a.st_safe() == b.st_safe());
    CHECK(a.substitution == b.substitution);
  }
}

TEST_CASE("engine profile overrides from config") {
  const auto config = Config::parse(
      "[engine]\nmax_actions = none\nconductor_exec_ms = 12\nparallel_dispatch = concurrent\n"
      "rate_per_second = 10\n");
  const auto p = EngineProfile::from_config(config, EngineKind::ReactiveConductor);
  CHECK_FALSE(p.max_actions);
  CHECK(p.conductor_exec_ms == 12);
  CHECK(p.parallel_dispatch == DispatchMode::Concurrent);
  REQUIRE(p.transition_rate_limit);
  CHECK(p.transition_rate_limit->per_second == 10);
  CHECK(code_of([] { EngineProfile::from_config(Config::parse("[engine]\nparallel_dispatch = sideways\n"),
                                                EngineKind::ClientScheduler); }) == ErrorCode::ConfigError);
}

TEST_CASE("failed functions surface as a failed workflow, retry recovers") {
  for (EngineKind kind : {EngineKind::ClientScheduler, EngineKind::ReactiveConductor, EngineKind::EventSourcing,
                          EngineKind::SuspendOrchestrator, EngineKind::InlineOrchestrator}) {
    CAPTURE(engine_name(kind));
    Runtime rt;
    rt.register_function(FunctionDef::flaky("f", 2, 10));
    const auto engine = make_engine(kind);
    CHECK_FALSE(engine->run(rt, seq(1, "f"), "").ok);
    const auto r = engine->run(rt, {compose::retry(compose::task("f"), 3, 100)}, "x");
    CHECK(r.ok);
    CHECK(r.output == "x");
  }
}
