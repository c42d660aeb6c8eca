// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "interpreter.hpp"

#include <vector>

namespace faasflow::detail {

void Interpreter::eval(const Node& node, const std::string& path, Payload input, Cont cont) {
  auto self = shared_from_this();

  if (const auto* task = std::get_if<Task>(&node.value)) {
    transition(path, input);
    hooks_.task(path, task->function, std::move(input), std::move(cont));
    return;
  }
  if (const auto* wait = std::get_if<Wait>(&node.value)) {
    transition(path, input);
    hooks_.wait(path, wait->duration_ms, std::move(input), std::move(cont));
    return;
  }
  if (const auto* seq = std::get_if<Sequence>(&node.value)) {
    steps(*seq, 0, path, std::move(input), std::move(cont));
    return;
  }
  if (const auto* repeat = std::get_if<Repeat>(&node.value)) {
    iterate(*repeat, 0, path, std::move(input), std::move(cont));
    return;
  }
  if (const auto* choice = std::get_if<Choice>(&node.value)) {
    transition(path, input);
    if (choice->predicate.evaluate(input)) {
      eval(*choice->then_branch, node_path::then_arm(path), std::move(input), std::move(cont));
    } else {
      eval(*choice->else_branch, node_path::else_arm(path), std::move(input), std::move(cont));
    }
    return;
  }
  if (const auto* retry = std::get_if<Retry>(&node.value)) {
    attempt(*retry, 1, path, std::move(input), std::move(cont));
    return;
  }
  const auto& parallel = std::get<Parallel>(node.value);
  transition(path, input);
  if (hooks_.parallel) {
    hooks_.parallel(path, parallel, std::move(input), std::move(cont));
  } else {
    fan_out(parallel, path, std::move(input), std::move(cont));
  }
}

void Interpreter::steps(const Sequence& seq, std::size_t index, const std::string& path, Payload input,
                        Cont cont) {
  if (index == seq.steps.size()) {
    cont(StepResult{true, std::move(input), {}});
    return;
  }
  auto self = shared_from_this();
  eval(seq.steps[index], node_path::step(path, index), std::move(input),
       [self, &seq, index, path, cont = std::move(cont)](StepResult r) mutable {
         if (!r.ok) {
           cont(std::move(r));
           return;
         }
         self->steps(seq, index + 1, path, std::move(r.output), std::move(cont));
       });
}

void Interpreter::iterate(const Repeat& repeat, int index, const std::string& path, Payload input, Cont cont) {
  if (index == repeat.count) {
    cont(StepResult{true, std::move(input), {}});
    return;
  }
  auto self = shared_from_this();
  eval(*repeat.body, node_path::iteration(path, index), std::move(input),
       [self, &repeat, index, path, cont = std::move(cont)](StepResult r) mutable {
         if (!r.ok) {
           cont(std::move(r));
           return;
         }
         self->iterate(repeat, index + 1, path, std::move(r.output), std::move(cont));
       });
}

void Interpreter::attempt(const Retry& retry, int number, const std::string& path, Payload input, Cont cont) {
  auto self = shared_from_this();
  Payload again = input;
  eval(*retry.body, node_path::retry_body(path), std::move(input),
       [self, &retry, number, path, again = std::move(again), cont = std::move(cont)](StepResult r) mutable {
         if (r.ok || number >= retry.max_attempts) {
           cont(std::move(r));
           return;
         }
         auto next = [self, &retry, number, path, cont = std::move(cont)](StepResult waited) mutable {
           self->attempt(retry, number + 1, path, std::move(waited.output), std::move(cont));
         };
         if (retry.backoff_ms > 0) {
           self->hooks_.wait(path, retry.backoff_ms, std::move(again), std::move(next));
         } else {
           next(StepResult{true, std::move(again), {}});
         }
       });
}

void Interpreter::fan_out(const Parallel& parallel, const std::string& path, Payload input, Cont cont) {
  struct Join {
    std::vector<StepResult> results;
    std::size_t arrived = 0;
    std::size_t merged = 0;
    Cont cont;
  };
  auto self = shared_from_this();
  auto join = std::make_shared<Join>();
  join->results.resize(parallel.branches.size());
  join->cont = std::move(cont);

  auto finish = [self, join, path] {
    std::vector<Payload> outputs;
    for (auto& r : join->results) {
      if (!r.ok) {
        join->cont(std::move(r));
        return;
      }
      outputs.push_back(std::move(r.output));
    }
    Payload joined = join_outputs(outputs);
    if (self->hooks_.parallel_exit) {
      self->hooks_.parallel_exit(path, joined, [join, joined] { join->cont(StepResult{true, joined, {}}); });
    } else {
      join->cont(StepResult{true, std::move(joined), {}});
    }
  };

  auto dispatch = [self, &parallel, path, input, join, finish] {
    for (std::size_t i = 0; i < parallel.branches.size(); ++i) {
      self->eval(parallel.branches[i], node_path::branch(path, i), input,
                 [self, join, i, path, finish](StepResult r) {
                   join->results[i] = std::move(r);
                   const std::size_t k = ++join->arrived;
                   auto merged = [join, finish] {
                     if (++join->merged == join->results.size()) finish();
                   };
                   if (self->hooks_.join) {
                     self->hooks_.join(path, k, merged);
                   } else {
                     merged();
                   }
                 });
    }
  };

  if (hooks_.parallel_enter) {
    hooks_.parallel_enter(path, input, dispatch);
  } else {
    dispatch();
  }
}

}  // namespace faasflow::detail
