// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "engines.hpp"
#include "faasflow/error.hpp"
#include "interpreter.hpp"

namespace faasflow::detail {

namespace {

struct SchedulerState {
  explicit SchedulerState(VirtualClock& clock) : scheduler(clock) {}
  SerialResource scheduler;  // one logging scheduler per execution
  double tokens = 0;
  Millis refilled_at = 0;
};

}  // namespace

void ClientSchedulerEngine::drive(Runtime& rt, const CompositionSpec& spec, Payload input, std::uint64_t execution,
                                  std::optional<InvocationId> /*parent*/, Finish finish) {
  auto self = std::static_pointer_cast<ClientSchedulerEngine>(shared_from_this());
  auto st = std::make_shared<SchedulerState>(rt.clock());
  if (profile_.transition_rate_limit) st->tokens = profile_.transition_rate_limit->burst;
  st->refilled_at = rt.now();

  const bool serial = profile_.parallel_dispatch == DispatchMode::Serial;
  auto op = [&rt, st, serial](Millis duration, Resume then) {
    if (serial) {
      st->scheduler.submit(duration, std::move(then));
    } else {
      rt.clock().schedule_after(duration, std::move(then));
    }
  };
  auto check_size = [self](const std::string& path, std::size_t bytes) {
    const auto& limit = self->profile_.max_state_bytes;
    if (limit && bytes > *limit) {
      throw Error(ErrorCode::StateTooLarge, "state of " + std::to_string(bytes) + " bytes at " + path +
                                                " exceeds " + std::to_string(*limit));
    }
  };
  const double log_write = rt.latency().log_write_ms;

  Hooks hooks;
  hooks.transition = [self, &rt, st, execution, check_size](const std::string& path, const Payload& state) {
    check_size(path, state.size());
    if (const auto& limit = self->profile_.transition_rate_limit) {
      const Millis now = rt.now();
      st->tokens = std::min(limit->burst,
                            st->tokens + limit->per_second * static_cast<double>(now - st->refilled_at) / 1000.0);
      st->refilled_at = now;
      if (st->tokens < 1.0) {
        throw Error(ErrorCode::RateLimited, "transition rate above " + std::to_string(limit->per_second) +
                                                "/s with burst " + std::to_string(limit->burst) + " at " + path);
      }
      st->tokens -= 1.0;
    }
    self->count_transition(rt, execution);
  };

  hooks.task = [&rt, op, check_size, execution, log_write](const std::string& path, const std::string& function,
                                                            Payload in, Cont cont) {
    // Read the state from the log, invoke synchronously, log the result.
    const Millis read = rt.hop(log_write, in.size());
    op(read, [&rt, op, check_size, execution, log_write, path, function, in = std::move(in),
              cont = std::move(cont)]() mutable {
      StartOptions opts;
      opts.execution = execution;
      opts.path = path;
      rt.start(function, std::move(in), std::move(opts),
               [&rt, op, check_size, log_write, path, cont](const InvocationRecord& rec) {
                 op(rt.hop(log_write, rec.output_bytes), [check_size, path, cont, rec] {
                   if (rec.state == InvocationState::Completed) check_size(path, rec.output_bytes);
                   cont(StepResult{rec.state == InvocationState::Completed, rec.output, rec.error});
                 });
               });
    });
  };

  hooks.wait = [&rt, op, log_write](const std::string&, Millis duration, Payload in, Cont cont) {
    op(rt.hop(log_write, in.size()), [&rt, duration, in = std::move(in), cont = std::move(cont)]() mutable {
      rt.clock().schedule_after(duration, [in = std::move(in), cont = std::move(cont)]() mutable {
        cont(StepResult{true, std::move(in), {}});
      });
    });
  };

  hooks.parallel_enter = [&rt, op, log_write](const std::string&, const Payload& in, Resume resume) {
    op(rt.hop(log_write, in.size()), std::move(resume));
  };
  hooks.join = [self, &rt, op](const std::string&, std::size_t joined, Resume resume) {
    op(rt.delay(self->profile_.join_ms_per_result * static_cast<double>(joined)), std::move(resume));
  };
  hooks.parallel_exit = [&rt, op, log_write](const std::string&, const Payload& out, Resume resume) {
    op(rt.hop(log_write, out.size()), std::move(resume));
  };

  auto interpreter = Interpreter::create(spec.root, std::move(hooks));
  const double queue = rt.latency().queue_latency_ms;
  const Millis submit = rt.hop(queue, input.size());
  rt.clock().schedule_after(submit, [&rt, interpreter, queue, check_size, input = std::move(input),
                                     finish = std::move(finish)]() mutable {
    interpreter->run(node_path::kRoot, std::move(input),
                     [&rt, queue, check_size, finish = std::move(finish)](StepResult r) {
                       if (r.ok) check_size(node_path::kRoot, r.output.size());
                       rt.clock().schedule_after(rt.hop(queue, r.output.size()), [r, finish] {
                         finish(Outcome{r.ok, r.output, r.error});
                       });
                     });
  });
}

}  // namespace faasflow::detail
