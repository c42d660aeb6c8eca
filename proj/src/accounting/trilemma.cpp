// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include <nlohmann/json.hpp>

#include "faasflow/accounting.hpp"
#include "faasflow/error.hpp"

namespace faasflow {

namespace {

struct Direct {
  bool ok = true;
  Payload output;
  std::string error;
};

Direct evaluate(Runtime& rt, const Node& node, const Payload& input) {
  if (const auto* task = std::get_if<Task>(&node.value)) {
    const auto rec = rt.invoke(task->function, input);
    return rec.state == InvocationState::Completed ? Direct{true, rec.output, {}} : Direct{false, {}, rec.error};
  }
  if (std::holds_alternative<Wait>(node.value)) return Direct{true, input, {}};
  if (const auto* seq = std::get_if<Sequence>(&node.value)) {
    Direct cur{true, input, {}};
    for (const auto& step : seq->steps) {
      cur = evaluate(rt, step, cur.output);
      if (!cur.ok) break;
    }
    return cur;
  }
  if (const auto* repeat = std::get_if<Repeat>(&node.value)) {
    Direct cur{true, input, {}};
    for (int i = 0; i < repeat->count && cur.ok; ++i) cur = evaluate(rt, *repeat->body, cur.output);
    return cur;
  }
  if (const auto* choice = std::get_if<Choice>(&node.value)) {
    return evaluate(rt, choice->predicate.evaluate(input) ? *choice->then_branch : *choice->else_branch, input);
  }
  if (const auto* retry = std::get_if<Retry>(&node.value)) {
    Direct r;
    for (int attempt = 0; attempt < retry->max_attempts; ++attempt) {
      r = evaluate(rt, *retry->body, input);
      if (r.ok) break;
    }
    return r;
  }
  const auto& parallel = std::get<Parallel>(node.value);
  std::vector<Payload> outputs;
  for (const auto& branch : parallel.branches) {
    Direct r = evaluate(rt, branch, input);
    if (!r.ok) return r;
    outputs.push_back(std::move(r.output));
  }
  return Direct{true, join_outputs(outputs), {}};
}

Direct evaluate_fresh(const CompositionSpec& spec, const Setup& setup, const Payload& input) {
  Runtime rt;
  if (setup) setup(rt);
  return evaluate(rt, spec.root, input);
}

}  // namespace

Payload evaluate_directly(const CompositionSpec& spec, const Setup& setup, const Payload& input) {
  Direct r = evaluate_fresh(spec, setup, input);
  if (!r.ok) throw Error(ErrorCode::WorkflowFailed, r.error);
  return r.output;
}

bool check_substitution(const std::shared_ptr<Engine>& engine, const CompositionSpec& spec, const Setup& setup,
                        const Payload& input, const VerifyOptions& options) {
  engine->check(spec);
  if (!engine->profile().composition_is_function) return false;
  const Direct expected = evaluate_fresh(spec, setup, input);

  Runtime rt(options.latency);
  if (setup) setup(rt);
  const std::string name = rt.unique_key("__substitute");
  try {
    engine->register_composition(rt, name, spec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CompositionNotFunction) return false;
    throw;
  }
  auto matches = [&expected](bool ok, const Payload& output) {
    return ok == expected.ok && (!ok || output == expected.output);
  };

  // Invoked like any other function...
  const InvocationRecord direct = rt.invoke(name, input);
  if (!matches(direct.state == InvocationState::Completed, direct.output)) return false;

  // ...and used as a step of another composition.
  CompositionSpec outer;
  outer.root = compose::sequence({compose::task(name)});
  const WorkflowResult nested = engine->run(rt, outer, input);
  return matches(nested.ok, nested.output);
}

TrilemmaVerdict verify_trilemma(const std::shared_ptr<Engine>& engine, const CompositionSpec& spec,
                                const Setup& setup, const Payload& input, const VerifyOptions& options) {
  TrilemmaVerdict v;
  Runtime rt(options.latency);
  if (setup) setup(rt);
  const auto functions = referenced_functions(spec);
  for (const auto& f : std::set<std::string>(functions.begin(), functions.end())) rt.seal(f);

  const WorkflowResult result = engine->run(rt, spec, input);
  if (!result.ok) v.evidence.push_back("workflow failed: " + result.error);

  v.black_box = rt.introspections() == 0;
  if (!v.black_box) {
    v.evidence.push_back("engine inspected sealed functions " + std::to_string(rt.introspections()) + " times");
  }

  v.substitution = check_substitution(engine, spec, setup, input, options);
  if (!v.substitution) {
    v.evidence.push_back(engine->profile().composition_is_function
                             ? "composition did not behave as a function when invoked or nested"
                             : "compositions are not functions");
  }

  const auto findings = detect_double_billing(execution_records(result), options.epsilon_ms);
  v.no_double_billing = findings.empty();
  for (const auto& f : findings) {
    const auto& o = result.trace.at(f.orchestrator.value - 1);
    const auto& d = result.trace.at(f.descendant.value - 1);
    v.evidence.push_back("orchestrator #" + std::to_string(f.orchestrator.value) + " (" + o.function +
                         ") billed " + std::to_string(f.overlap_ms) + " ms while #" +
                         std::to_string(f.descendant.value) + " (" + d.function + ") ran");
  }
  return v;
}

std::string to_json(const TrilemmaVerdict& verdict, EngineKind engine) {
  nlohmann::ordered_json j;
  j["engine"] = std::string(engine_name(engine));
  j["black_box"] = verdict.black_box;
  j["substitution"] = verdict.substitution;
  j["no_double_billing"] = verdict.no_double_billing;
  j["st_safe"] = verdict.st_safe();
  j["evidence"] = verdict.evidence;
  return j.dump(2);
}

}  // namespace faasflow
