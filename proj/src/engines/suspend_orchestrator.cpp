// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <stdexcept>

#include "engines.hpp"
#include "faasflow/error.hpp"
#include "interpreter.hpp"

namespace faasflow::detail {

void SuspendOrchestratorEngine::drive(Runtime&, const CompositionSpec&, Payload, std::uint64_t,
                                      std::optional<InvocationId>, Finish) {
  throw std::logic_error("the suspend orchestrator runs inside its composition function");
}

void SuspendOrchestratorEngine::host(const InvocationContext& ctx, const CompositionSpec& spec,
                                     std::uint64_t execution) {
  const std::string name = ctx.runtime().record(ctx.id()).function;
  orchestrate(ctx, spec.root, name, node_path::kRoot, execution);
}

void SuspendOrchestratorEngine::orchestrate(const InvocationContext& ctx, const Node& node, const std::string& name,
                                            const std::string& base_path, std::uint64_t execution) {
  auto self = std::static_pointer_cast<SuspendOrchestratorEngine>(shared_from_this());
  Runtime& rt = ctx.runtime();

  // Every dispatch costs one billed slice of orchestrator time; waiting for
  // results is spent suspended.
  auto slice = [self, ctx](Resume then) {
    ctx.compute(ctx.runtime().delay(self->profile_.conductor_exec_ms), std::move(then));
  };
  auto child = [ctx, execution](const std::string& path) {
    return StartOptions{ctx.id(), execution, path, std::nullopt};
  };

  Hooks hooks;
  hooks.transition = [self, &rt, execution](const std::string&, const Payload&) {
    self->count_transition(rt, execution);
  };
  hooks.task = [ctx, &rt, slice, child](const std::string& path, const std::string& function, Payload in,
                                        Cont cont) {
    slice([ctx, &rt, child, path, function, in = std::move(in), cont = std::move(cont)]() mutable {
      const std::string key = rt.unique_key("__task");
      const InvocationId id = rt.invoke_async(function, std::move(in), key, child(path));
      ctx.suspend(key, [&rt, id, cont](Payload out) {
        const auto& rec = rt.record(id);
        cont(StepResult{rec.state == InvocationState::Completed, std::move(out), rec.error});
      });
    });
  };
  hooks.wait = [ctx, &rt, slice](const std::string&, Millis duration, Payload in, Cont cont) {
    slice([ctx, &rt, duration, in = std::move(in), cont = std::move(cont)]() mutable {
      const std::string key = rt.unique_key("__timer");
      rt.publish_after(duration, Event{key, std::move(in), 0});
      ctx.suspend(key, [cont](Payload p) { cont(StepResult{true, std::move(p), {}}); });
    });
  };
  hooks.parallel = [self, ctx, &rt, slice, child, name](const std::string& path, const Parallel& parallel,
                                                        Payload in, Cont cont) {
    slice([self, ctx, &rt, child, name, path, &parallel, in = std::move(in), cont = std::move(cont)]() mutable {
      struct FanIn {
        std::vector<std::string> keys;
        std::vector<InvocationId> ids;
        std::vector<Payload> outputs;
        std::string error;
        bool ok = true;
      };
      auto fan = std::make_shared<FanIn>();
      for (std::size_t i = 0; i < parallel.branches.size(); ++i) {
        const Node& branch = parallel.branches[i];
        const std::string branch_path = node_path::branch(path, i);
        std::string function;
        if (const auto* task = std::get_if<Task>(&branch.value)) {
          function = task->function;
          self->count_transition(rt, child(branch_path).execution);
        } else {
          // Composite branches run in their own suspending orchestrator.
          function = name + "#" + branch_path;
          if (!rt.has_function(function)) {
            FunctionDef def;
            def.name = function;
            def.orchestrator = true;
            def.behavior = behavior::Native{[self, branch, name](InvocationContext sub) {
              const auto& rec = sub.runtime().record(sub.id());
              self->orchestrate(sub, branch, name, rec.path, rec.execution);
            }};
            rt.register_function(std::move(def));
          }
        }
        fan->keys.push_back(rt.unique_key("__branch"));
        fan->ids.push_back(rt.invoke_async(function, in, fan->keys.back(), child(branch_path)));
      }
      // Fan-in: one suspension per branch, in branch order. Results that
      // arrived early are latched and resume immediately.
      auto collect = std::make_shared<std::function<void(std::size_t)>>();
      *collect = [ctx, &rt, fan, cont, weak = std::weak_ptr(collect)](std::size_t i) {
        if (i == fan->keys.size()) {
          if (fan->ok) {
            cont(StepResult{true, join_outputs(fan->outputs), {}});
          } else {
            cont(StepResult{false, {}, fan->error});
          }
          return;
        }
        ctx.suspend(fan->keys[i], [&rt, fan, i, next = weak.lock()](Payload out) {
          const auto& rec = rt.record(fan->ids[i]);
          if (rec.state != InvocationState::Completed && fan->ok) {
            fan->ok = false;
            fan->error = rec.error;
          }
          fan->outputs.push_back(std::move(out));
          (*next)(i + 1);
        });
      };
      (*collect)(0);
    });
  };

  auto interpreter = Interpreter::create(node, std::move(hooks));
  interpreter->run(base_path, ctx.input(), [ctx](StepResult r) {
    if (r.ok) {
      ctx.complete(std::move(r.output));
    } else {
      ctx.fail(std::move(r.error));
    }
  });
}

void InlineOrchestratorEngine::drive(Runtime&, const CompositionSpec&, Payload, std::uint64_t,
                                     std::optional<InvocationId>, Finish) {
  throw std::logic_error("the inline orchestrator runs inside its composition function");
}

void InlineOrchestratorEngine::host(const InvocationContext& ctx, const CompositionSpec& spec,
                                    std::uint64_t execution) {
  auto self = std::static_pointer_cast<InlineOrchestratorEngine>(shared_from_this());
  Runtime& rt = ctx.runtime();

  Hooks hooks;
  hooks.transition = [self, &rt, execution](const std::string&, const Payload&) {
    self->count_transition(rt, execution);
  };
  // Children are awaited while the orchestrator keeps running (and billing).
  hooks.task = [ctx, &rt, execution](const std::string& path, const std::string& function, Payload in, Cont cont) {
    rt.start(function, std::move(in), StartOptions{ctx.id(), execution, path, std::nullopt},
             [cont](const InvocationRecord& rec) {
               cont(StepResult{rec.state == InvocationState::Completed, rec.output, rec.error});
             });
  };
  hooks.wait = [ctx](const std::string&, Millis duration, Payload in, Cont cont) {
    ctx.compute(duration, [cont, in = std::move(in)] { cont(StepResult{true, in, {}}); });
  };

  auto interpreter = Interpreter::create(spec.root, std::move(hooks));
  interpreter->run(node_path::kRoot, ctx.input(), [ctx](StepResult r) {
    if (r.ok) {
      ctx.complete(std::move(r.output));
    } else {
      ctx.fail(std::move(r.error));
    }
  });
}

}  // namespace faasflow::detail
