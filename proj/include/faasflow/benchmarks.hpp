// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faasflow/engine.hpp"
#include "faasflow/latency.hpp"

namespace faasflow {

class Config;

enum class Scenario { Sequence, Parallel, StatePassing };

std::string_view scenario_name(Scenario scenario) noexcept;
Scenario parse_scenario(std::string_view name);

/// Wall time minus the time spent inside the composed functions along the
/// critical path of the composition: sequential parts add up, parallel
/// branches contribute their longest branch. Orchestrator records (conductor
/// actions, orchestrator episodes, composition functions) count as overhead.
/// Throws IncompleteTrace when a record of the execution never finished.
Millis overhead(const WorkflowResult& result);

/// Time inside composed functions along the critical path.
Millis composed_time(const WorkflowResult& result);

/// Latency model plus engine settings fitted to one vendor.
struct CalibrationProfile {
  std::string name;
  EngineKind engine = EngineKind::SuspendOrchestrator;
  LatencyModel latency;
  EngineProfile settings;
  std::map<Scenario, EngineProfile> scenario_settings;  // [engine.<scenario>] overlays
  std::string note;

  [[nodiscard]] const EngineProfile& settings_for(Scenario scenario) const;

  static CalibrationProfile defaults(EngineKind engine);
  /// [profile] name/engine/note, [latency], [engine] and optional
  /// [engine.sequence|parallel|state] sections.
  static CalibrationProfile from_config(const Config& config);
  static CalibrationProfile load(const std::filesystem::path& path);
};

struct BenchOptions {
  int repetitions = 10;
  std::uint64_t seed = 0;
  std::optional<double> jitter;  // overrides the profile's jitter when set
};

struct OverheadSample {
  EngineKind engine = EngineKind::SuspendOrchestrator;
  Scenario scenario = Scenario::Sequence;
  int n = 0;
  std::size_t payload_bytes = 0;
  int repetitions = 0;
  std::vector<Millis> overhead_ms;
  double mean_ms = 0;
  double stdev_ms = 0;
  bool available = true;  // false: the engine cannot run this size ("N/A")
  std::string note;

  void summarize();
};

inline constexpr Millis kSequenceSleepMs = 1'000;
inline constexpr Millis kParallelSleepMs = 20'000;
inline constexpr std::size_t kStatePayloadBytes = 32'768;

/// seq(n, sleep 1 s). TooManyActions yields an unavailable sample.
OverheadSample bench_sequence(const CalibrationProfile& profile, int n, const BenchOptions& options = {});
/// fan_out(n, sleep 20 s). Throws ParallelUnsupported.
OverheadSample bench_parallel(const CalibrationProfile& profile, int n, const BenchOptions& options = {});

struct StatePassingResult {
  OverheadSample without_payload;
  OverheadSample with_payload;
  [[nodiscard]] double increase_pct() const;
};

/// Sequence of 5 pass-through functions sleeping 1 s, first with an empty
/// payload then with `payload_bytes`. Throws StateTooLarge above the limit.
StatePassingResult bench_state(const CalibrationProfile& profile, std::size_t payload_bytes = kStatePayloadBytes,
                               const BenchOptions& options = {});

struct SuiteConfig {
  std::vector<Scenario> scenarios{Scenario::Sequence, Scenario::Parallel, Scenario::StatePassing};
  std::vector<EngineKind> sequence_engines{EngineKind::SequenceNative, EngineKind::ReactiveConductor,
                                           EngineKind::ClientScheduler, EngineKind::EventSourcing};
  std::vector<int> sequence_n{5, 10, 20, 40, 80};
  std::vector<EngineKind> parallel_engines{EngineKind::ClientScheduler, EngineKind::EventSourcing,
                                           EngineKind::SuspendOrchestrator};
  std::vector<int> parallel_n{5, 10, 20, 40, 80};
  std::vector<EngineKind> state_engines{EngineKind::SequenceNative, EngineKind::ReactiveConductor,
                                        EngineKind::ClientScheduler, EngineKind::EventSourcing};
  std::size_t payload_bytes = kStatePayloadBytes;
  BenchOptions options;
  std::filesystem::path profiles_dir = "profiles";
  std::map<EngineKind, std::filesystem::path> profile_files;  // overrides profiles_dir lookup
  unsigned threads = 0;                                      // 0: hardware concurrency

  /// Profile used for `engine`: explicit file, else <profiles_dir>/<name>.cfg
  /// (sequences -> ibmseq.cfg), else built-in defaults.
  [[nodiscard]] CalibrationProfile profile_for(EngineKind engine) const;

  /// [suite] keys: scenarios, sequence_engines, sequence_n, parallel_engines,
  /// parallel_n, state_engines, payload_bytes, repetitions, seed, jitter,
  /// profiles_dir, threads; [profiles] maps engine names to files.
  static SuiteConfig from_config(const Config& config);
};

struct SuiteReport {
  std::vector<OverheadSample> samples;  // ordered by scenario key
  std::vector<std::string> errors;
  std::vector<std::filesystem::path> files;
};

/// Runs every configured scenario and writes sequences.csv, parallel.csv,
/// state_passing.csv (one per configured scenario), the fig_sequences.svg /
/// fig_parallel.svg charts and, for multi-scenario suites, summary.csv.
SuiteReport run_suite(const SuiteConfig& config, const std::filesystem::path& out_dir);

/// Least-squares R² of overhead against n over the available samples.
double linear_fit_r2(const std::vector<OverheadSample>& samples);

}  // namespace faasflow
