// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "engines.hpp"
#include "faasflow/error.hpp"
#include "interpreter.hpp"

namespace faasflow::detail {

namespace {

void check_state(const EngineProfile& profile, const std::string& path, std::size_t bytes) {
  if (profile.max_state_bytes && bytes > *profile.max_state_bytes) {
    throw Error(ErrorCode::StateTooLarge, "state of " + std::to_string(bytes) + " bytes at " + path + " exceeds " +
                                              std::to_string(*profile.max_state_bytes));
  }
}

// Conductor actions are ordinary functions that take the current state,
// decide the next step and return the state.
std::string ensure_conductor(Runtime& rt, double exec_ms) {
  std::string name = helper_name("__conductor", exec_ms);
  if (!rt.has_function(name)) {
    FunctionDef def;
    def.name = name;
    def.orchestrator = true;
    def.behavior = behavior::Native{[exec_ms](InvocationContext ctx) {
      ctx.compute(ctx.runtime().delay(exec_ms), [ctx] { ctx.complete(ctx.input()); });
    }};
    rt.register_function(std::move(def));
  }
  return name;
}

void flatten(const Node& node, const std::string& path, std::vector<std::pair<std::string, std::string>>& out) {
  if (const auto* task = std::get_if<Task>(&node.value)) {
    out.emplace_back(path, task->function);
  } else if (const auto* seq = std::get_if<Sequence>(&node.value)) {
    for (std::size_t i = 0; i < seq->steps.size(); ++i) flatten(seq->steps[i], node_path::step(path, i), out);
  } else if (const auto* repeat = std::get_if<Repeat>(&node.value)) {
    for (int i = 0; i < repeat->count; ++i) flatten(*repeat->body, node_path::iteration(path, i), out);
  } else {
    throw Error(ErrorCode::UnsupportedConstruct, "sequences only chain tasks; found another construct at " + path);
  }
}

}  // namespace

void ReactiveConductorEngine::drive(Runtime& rt, const CompositionSpec& spec, Payload input, std::uint64_t execution,
                                    std::optional<InvocationId> parent, Finish finish) {
  auto self = std::static_pointer_cast<ReactiveConductorEngine>(shared_from_this());
  const std::string conductor = ensure_conductor(rt, profile_.conductor_exec_ms);

  auto conduct = [&rt, conductor, parent, execution](const std::string& path, Payload state,
                                                     std::function<void(Payload)> then) {
    StartOptions opts{parent, execution, path, std::nullopt};
    rt.start(conductor, std::move(state), std::move(opts),
             [then = std::move(then)](const InvocationRecord& rec) { then(rec.output); });
  };

  Hooks hooks;
  hooks.transition = [self, &rt, execution](const std::string& path, const Payload& state) {
    check_state(self->profile_, path, state.size());
    self->count_transition(rt, execution);
  };
  hooks.task = [self, &rt, conduct, parent, execution](const std::string& path, const std::string& function,
                                                       Payload in, Cont cont) {
    conduct(path, std::move(in), [self, &rt, parent, execution, path, function, cont](Payload state) {
      StartOptions opts{parent, execution, path, std::nullopt};
      rt.start(function, std::move(state), std::move(opts), [self, &rt, path, cont](const InvocationRecord& rec) {
        const Millis deliver = rt.hop(rt.latency().delivery_base_ms(), rec.output_bytes);
        rt.clock().schedule_after(deliver, [self, path, cont, rec] {
          if (rec.state == InvocationState::Completed) check_state(self->profile_, path, rec.output_bytes);
          cont(StepResult{rec.state == InvocationState::Completed, rec.output, rec.error});
        });
      });
    });
  };
  hooks.wait = [&rt, conduct](const std::string& path, Millis duration, Payload in, Cont cont) {
    conduct(path, std::move(in), [&rt, duration, cont](Payload state) {
      rt.clock().schedule_after(duration, [cont, state = std::move(state)] { cont(StepResult{true, state, {}}); });
    });
  };

  auto interpreter = Interpreter::create(spec.root, std::move(hooks));
  interpreter->run(node_path::kRoot, std::move(input), [conduct, finish = std::move(finish)](StepResult r) {
    if (!r.ok) {
      finish(Outcome{false, {}, r.error});
      return;
    }
    // A last conductor action observes that no step is left.
    conduct(node_path::kRoot, std::move(r.output), [finish](Payload out) { finish(Outcome{true, out, {}}); });
  });
}

void SequenceNativeEngine::check(const CompositionSpec& spec) const {
  Engine::check(spec);
  std::vector<std::pair<std::string, std::string>> steps;
  flatten(spec.root, node_path::kRoot, steps);
}

void SequenceNativeEngine::drive(Runtime& rt, const CompositionSpec& spec, Payload input, std::uint64_t execution,
                                 std::optional<InvocationId> parent, Finish finish) {
  auto self = std::static_pointer_cast<SequenceNativeEngine>(shared_from_this());
  auto steps = std::make_shared<std::vector<std::pair<std::string, std::string>>>();
  flatten(spec.root, node_path::kRoot, *steps);

  auto chain = std::make_shared<std::function<void(std::size_t, Payload)>>();
  *chain = [self, &rt, steps, parent, execution, finish, weak = std::weak_ptr(chain)](std::size_t i, Payload state) {
    if (i == steps->size()) {
      finish(Outcome{true, std::move(state), {}});
      return;
    }
    const auto& [path, function] = (*steps)[i];
    check_state(self->profile_, path, state.size());
    self->count_transition(rt, execution);
    StartOptions opts{parent, execution, path, std::nullopt};
    rt.start(function, std::move(state), std::move(opts),
             [&rt, finish, i, next = weak.lock()](const InvocationRecord& rec) {
               if (rec.state != InvocationState::Completed) {
                 finish(Outcome{false, {}, rec.error});
                 return;
               }
               // Results travel straight to the next action over the queue.
               const Millis hop = rt.hop(rt.latency().queue_latency_ms, rec.output_bytes);
               rt.clock().schedule_after(hop, [next, i, out = rec.output] { (*next)(i + 1, out); });
             });
  };
  (*chain)(0, std::move(input));
}

}  // namespace faasflow::detail
