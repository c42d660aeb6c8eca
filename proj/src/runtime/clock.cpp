// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/clock.hpp"

#include <algorithm>
#include <string>

#include "faasflow/error.hpp"

namespace faasflow {

TimerToken VirtualClock::schedule_at(Millis at, Action action) {
  const Millis fire = std::max(at, now_);
  const std::uint64_t seq = next_sequence_++;
  queue_.push(Entry{fire, seq});
  actions_.emplace(seq, std::move(action));
  return TimerToken{seq};
}

TimerToken VirtualClock::schedule_after(Millis delay, Action action) {
  return schedule_at(now_ + std::max<Millis>(delay, 0), std::move(action));
}

bool VirtualClock::cancel(TimerToken token) {
  return actions_.erase(token.sequence) > 0;
}

bool VirtualClock::step() {
  while (!queue_.empty()) {
    const Entry entry = queue_.top();
    queue_.pop();
    auto it = actions_.find(entry.sequence);
    if (it == actions_.end()) continue;  // cancelled
    if (++executed_ > budget_) {
      throw Error(ErrorCode::LivelockGuard,
                  "action budget of " + std::to_string(budget_) + " exceeded");
    }
    Action action = std::move(it->second);
    actions_.erase(it);
    now_ = entry.fire_time;
    ++depth_;
    try {
      action();
    } catch (...) {
      --depth_;
      throw;
    }
    --depth_;
    return true;
  }
  return false;
}

Millis VirtualClock::run_until_idle() {
  while (step()) {
  }
  return now_;
}

bool VirtualClock::run_until(const std::function<bool()>& done) {
  while (!done()) {
    if (!step()) return done();
  }
  return true;
}

void SerialResource::submit(Millis duration, VirtualClock::Action done) {
  const Millis start = std::max(clock_->now(), busy_until_);
  busy_until_ = start + std::max<Millis>(duration, 0);
  clock_->schedule_at(busy_until_, std::move(done));
}

}  // namespace faasflow
