// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <vector>

namespace faasflow {

/// Virtual time in integer milliseconds.
using Millis = std::int64_t;

/// Handle for a scheduled action; used to cancel it before it fires.
struct TimerToken {
  std::uint64_t sequence = 0;
  friend bool operator==(TimerToken, TimerToken) = default;
};

/// Discrete-event clock. Actions fire in (fire_time, sequence_no) order, so
/// actions scheduled for the same instant run in submission order.
class VirtualClock {
 public:
  using Action = std::function<void()>;

  static constexpr std::uint64_t kDefaultActionBudget = 50'000'000;

  VirtualClock() = default;
  VirtualClock(const VirtualClock&) = delete;
  VirtualClock& operator=(const VirtualClock&) = delete;

  [[nodiscard]] Millis now() const noexcept { return now_; }

  /// Schedules `action` at absolute time `at`; times in the past are clamped
  /// to now so the clock never runs backward.
  TimerToken schedule_at(Millis at, Action action);
  TimerToken schedule_after(Millis delay, Action action);

  /// Returns false when the token already fired or was cancelled.
  bool cancel(TimerToken token);

  /// Executes one action. Returns false when the queue is empty.
  bool step();

  /// Drains the queue and returns the final virtual time.
  Millis run_until_idle();

  /// Runs until `done()` holds or the queue drains; returns `done()`.
  bool run_until(const std::function<bool()>& done);

  [[nodiscard]] std::size_t pending() const noexcept { return actions_.size(); }
  [[nodiscard]] bool running() const noexcept { return depth_ > 0; }
  [[nodiscard]] std::uint64_t executed() const noexcept { return executed_; }

  void set_action_budget(std::uint64_t budget) noexcept { budget_ = budget; }

 private:
  struct Entry {
    Millis fire_time;
    std::uint64_t sequence;
    friend bool operator>(const Entry& a, const Entry& b) {
      return a.fire_time != b.fire_time ? a.fire_time > b.fire_time
                                        : a.sequence > b.sequence;
    }
  };

  Millis now_ = 0;
  std::uint64_t next_sequence_ = 0;
  std::uint64_t executed_ = 0;
  std::uint64_t budget_ = kDefaultActionBudget;
  int depth_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  std::map<std::uint64_t, Action> actions_;
};

/// Single server that executes jobs one at a time in FIFO order. Models a
/// component (scheduler thread, orchestration instance) that serializes work.
class SerialResource {
 public:
  explicit SerialResource(VirtualClock& clock) : clock_(&clock) {}

  /// Occupies the resource for `duration` starting when it next becomes free,
  /// then fires `done`.
  void submit(Millis duration, VirtualClock::Action done);

  [[nodiscard]] Millis busy_until() const noexcept { return busy_until_; }

 private:
  VirtualClock* clock_;
  Millis busy_until_ = 0;
};

}  // namespace faasflow
