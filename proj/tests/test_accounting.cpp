// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "faasflow/accounting.hpp"
#include "faasflow/config.hpp"
#include "faasflow/error.hpp"
#include "support.hpp"

using namespace faasflow;

namespace {

std::vector<Interval> random_intervals(std::mt19937_64& rng) {
  std::vector<Interval> out;
  Millis t = static_cast<Millis>(rng() % 10);
  const int n = static_cast<int>(rng() % 5);
  for (int i = 0; i < n; ++i) {
    const Millis from = t + static_cast<Millis>(rng() % 20);
    const Millis to = from + 1 + static_cast<Millis>(rng() % 30);
    out.push_back({from, to});
    t = to;
  }
  return out;
}

Millis brute_overlap(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  auto covers = [](const std::vector<Interval>& v, Millis t) {
    for (const auto& i : v) {
      if (i.from <= t && t < i.to) return true;
    }
    return false;
  };
  Millis n = 0;
  for (Millis t = 0; t < 400; ++t) n += covers(a, t) && covers(b, t) ? 1 : 0;
  return n;
}

// The charge recomputed from first principles, in picos.
std::int64_t expected_picos(const std::vector<InvocationRecord>& records, std::uint64_t transitions,
                            std::uint64_t history_bytes, const PricingModel& p) {
  std::int64_t ms = 0;
  for (const auto& r : records) {
    Millis billed = 0;
    for (const auto& i : r.billed_intervals) billed += i.to - i.from;
    ms += (billed + p.granularity_ms - 1) / p.granularity_ms * p.granularity_ms;
  }
  const auto per_ms = static_cast<std::int64_t>(
      std::llround(static_cast<double>(p.per_gb_second.picos()) * p.memory_gb / 1000.0));
  const std::int64_t per_byte = p.storage_per_gb_month.picos() / 1'000'000'000;
  return p.per_transition.picos() * static_cast<std::int64_t>(transitions) + per_ms * ms +
         per_byte * static_cast<std::int64_t>(history_bytes);
}

}  // namespace

TEST_CASE("money parses and prints exactly") {
  CHECK(Money::parse("0.025").picos() == 25'000'000'000);
  CHECK(Money::parse("0.000025").picos() == 25'000'000);
  CHECK(Money::parse("1").str() == "1.000000000000");
  CHECK(Money::parse("-0.5").str() == "-0.500000000000");
  CHECK(Money::parse("0.0000166667").picos() == 16'666'700);
  CHECK(Money::usd(0.025) == Money::parse("0.025"));
  CHECK_THROWS_AS(Money::parse("abc"), Error);
  CHECK_THROWS_AS(Money::parse("1.2.3"), Error);
}

TEST_CASE("a thousand scheduler transitions cost 0.025 USD") {
  Runtime rt;
  rt.register_function(FunctionDef::echo("echo"));
  const auto r = make_engine(EngineKind::ClientScheduler)->run(rt, seq(1000, "echo"), "");
  CHECK(r.transitions == 1000);
  const auto bill = compute_billing(r, PricingModel::defaults(EngineKind::ClientScheduler));
  CHECK(bill.transition_charge.str() == "0.025000000000");
  CHECK(bill.total == Money::parse("0.025"));
}

TEST_CASE("five step scheduler sequence costs 0.000125 USD in transitions") {
  Runtime rt;
  rt.register_function(FunctionDef::sleep("sleepAction", 1000));
  const auto r = make_engine(EngineKind::ClientScheduler)->run(rt, seq(5, "sleepAction"), "");
  const auto bill = compute_billing(r, PricingModel::defaults(EngineKind::ClientScheduler));
  CHECK(bill.transition_charge == Money::parse("0.000125"));
  CHECK(bill.billed_ms == 5000);
  CHECK(bill.total.picos() == expected_picos(execution_records(r), 5, 0, PricingModel::defaults(EngineKind::ClientScheduler)));
}

TEST_CASE("only the client scheduler charges transitions by default") {
  for (EngineKind kind : kAllEngines) {
    CHECK((PricingModel::defaults(kind).per_transition == Money{}) == (kind != EngineKind::ClientScheduler));
  }
}

TEST_CASE("granularity rounds each invocation up") {
  PricingModel p;
  p.granularity_ms = 100;
  InvocationRecord a;
  a.billed_intervals = {{0, 1}};
  InvocationRecord b;
  b.billed_intervals = {{0, 100}, {150, 151}};
  const auto bill = compute_billing({a, b}, 0, 0, p);
  CHECK(bill.billed_ms == 100 + 200);
  CHECK(bill.invocations == 2);
}

TEST_CASE("pricing config") {
  const auto p = PricingModel::from_config(
      Config::parse("[pricing]\nper_transition_usd = 0.00005\nmemory_gb = 1\ngranularity_ms = 100\n"),
      EngineKind::ClientScheduler);
  CHECK(p.per_transition.picos() == 50'000'000);
  CHECK(p.memory_gb == 1);
  CHECK(p.granularity_ms == 100);
  CHECK_THROWS_AS(PricingModel::from_config(Config::parse("[pricing]\ngranularity_ms = 0\n"), EngineKind::ClientScheduler),
                  Error);
}

TEST_CASE("storage is charged on stored history bytes") {
  Runtime rt;
  rt.register_function(FunctionDef::echo("echo"));
  const auto r = make_engine(EngineKind::EventSourcing)->run(rt, seq(2, "echo"), std::string(100'000, 'z'));
  const auto p = PricingModel::defaults(EngineKind::EventSourcing);
  const auto bill = compute_billing(r, p);
  CHECK(bill.history_bytes == r.history_bytes);
  CHECK(bill.storage_charge.picos() == 20 * static_cast<std::int64_t>(r.history_bytes));
  CHECK(bill.total.picos() == expected_picos(execution_records(r), r.transitions, r.history_bytes, p));
}

TEST_CASE("overlap matches a per-millisecond count") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_intervals(rng);
    const auto b = random_intervals(rng);
    CHECK(overlap_ms(a, b) == brute_overlap(a, b));
    CHECK(overlap_ms(a, b) == overlap_ms(b, a));
  }
}

TEST_CASE("double billing findings shrink as epsilon grows") {
  Runtime rt;
  rt.register_function(FunctionDef::sleep("a", 3));
  rt.register_function(FunctionDef::sleep("b", 40));
  const auto r = make_engine(EngineKind::InlineOrchestrator)
                     ->run(rt, CompositionSpec{compose::parallel({compose::task("a"), compose::task("b")})}, "");
  std::set<std::pair<std::uint64_t, std::uint64_t>> previous;
  bool first = true;
  for (Millis eps : {0, 1, 2, 3, 10, 39, 40, 1000}) {
    std::set<std::pair<std::uint64_t, std::uint64_t>> now;
    for (const auto& f : detect_double_billing(r.trace, eps)) {
      CHECK(f.overlap_ms > eps);
      now.emplace(f.orchestrator.value, f.descendant.value);
    }
    if (!first) CHECK(std::includes(previous.begin(), previous.end(), now.begin(), now.end()));
    previous = now;
    first = false;
  }
  CHECK(detect_double_billing(r.trace, 0).size() == 2);
  CHECK(detect_double_billing(r.trace, 3).size() == 1);
  CHECK(detect_double_billing(r.trace, 40).empty());
}

TEST_CASE("nested descendants are found through intermediate records") {
  InvocationRecord orch;
  orch.id = {1};
  orch.orchestrator = true;
  orch.billed_intervals = {{0, 100}};
  InvocationRecord mid;
  mid.id = {2};
  mid.parent = InvocationId{1};
  InvocationRecord leaf;
  leaf.id = {3};
  leaf.parent = InvocationId{2};
  leaf.billed_intervals = {{50, 80}};
  const auto f = detect_double_billing({orch, mid, leaf});
  REQUIRE(f.size() == 1);
  CHECK(f[0].descendant.value == 3);
  CHECK(f[0].overlap_ms == 30);
}

TEST_CASE("billing is additive over nested compositions") {
  const PricingModel p = [] {
    PricingModel m;
    m.per_transition = Money::parse("0.000025");
    m.granularity_ms = 7;
    return m;
  }();
  for (EngineKind kind : {EngineKind::SuspendOrchestrator, EngineKind::ReactiveConductor, EngineKind::EventSourcing,
                          EngineKind::InlineOrchestrator}) {
    CAPTURE(engine_name(kind));
    Runtime rt(testing::busy_latency());
    testing::register_test_functions(rt);
    const auto engine = make_engine(testing::busy_profile(kind));
    engine->register_composition(rt, "inner", seq(3, "inc"));
    const auto r = engine->run(rt, CompositionSpec{compose::sequence({compose::task("short"), compose::task("inner"),
                                                                      compose::task("long")})},
                               R"({"count":0})");
    REQUIRE(r.ok);
    const auto all = execution_records(r);

    // Split into the inner composition's subtree and the rest.
    std::set<std::uint64_t> inner;
    for (const auto& rec : all) {
      if (rec.function == "inner" || (rec.parent && inner.contains(rec.parent->value))) inner.insert(rec.id.value);
    }
    REQUIRE_FALSE(inner.empty());
    std::vector<InvocationRecord> part_a, part_b;
    for (const auto& rec : all) (inner.contains(rec.id.value) ? part_b : part_a).push_back(rec);

    const auto whole = compute_billing(all, 10, 300, p);
    const auto a = compute_billing(part_a, 4, 100, p);
    const auto b = compute_billing(part_b, 6, 200, p);
    CHECK(whole.total == a.total + b.total);
    CHECK(whole.duration_charge == a.duration_charge + b.duration_charge);
    CHECK(whole.billed_ms == a.billed_ms + b.billed_ms);
    CHECK(whole.total.picos() == expected_picos(all, 10, 300, p));
  }
}

TEST_CASE("reports serialize to JSON") {
  BillingReport r;
  r.transitions = 3;
  r.total = Money::parse("0.000075");
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["transitions"] == 3);
  CHECK(j["total_usd"] == "0.000075000000");

  TrilemmaVerdict v;
  v.black_box = v.substitution = true;
  v.evidence.push_back("overlap");
  const auto k = nlohmann::json::parse(to_json(v, EngineKind::InlineOrchestrator));
  CHECK(k["engine"] == "inline");
  CHECK(k["st_safe"] == false);
}

TEST_CASE("substitution requires compositions to be functions") {
  const auto setup = [](Runtime& rt) { testing::register_test_functions(rt); };
  CHECK_FALSE(check_substitution(make_engine(EngineKind::ClientScheduler), seq(2, "short"), setup));
  CHECK(check_substitution(make_engine(EngineKind::SuspendOrchestrator), seq(2, "inc"), setup, R"({"count":0})"));
  CHECK(evaluate_directly(seq(2, "inc"), setup, R"({"count":0})") == R"({"count":2})");
}
