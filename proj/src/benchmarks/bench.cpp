// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/benchmarks.hpp"
#include "faasflow/config.hpp"
#include "faasflow/error.hpp"
#include "faasflow/runtime.hpp"

namespace faasflow {

namespace {

const char* const kSleepAction = "sleepAction";
const char* const kSleep20 = "sleep20";

struct Experiment {
  Scenario scenario;
  int n;
  std::size_t payload_bytes;
};

OverheadSample repeat_runs(const CalibrationProfile& profile, const Experiment& ex, const CompositionSpec& spec,
                           const FunctionDef& function, const BenchOptions& options) {
  OverheadSample sample;
  sample.engine = profile.engine;
  sample.scenario = ex.scenario;
  sample.n = ex.n;
  sample.payload_bytes = ex.payload_bytes;

  LatencyModel latency = profile.latency;
  if (options.jitter) latency.jitter = *options.jitter;
  auto engine = make_engine(profile.settings_for(ex.scenario));
  const Payload input(ex.payload_bytes, 'x');
  for (int rep = 0; rep < options.repetitions; ++rep) {
    RuntimeOptions ro;
    ro.seed = options.seed + static_cast<std::uint64_t>(rep);
    Runtime rt(latency, ro);
    rt.register_function(function);
    const WorkflowResult result = engine->run(rt, spec, input);
    if (!result.ok) throw Error(ErrorCode::WorkflowFailed, result.error);
    sample.overhead_ms.push_back(overhead(result));
  }
  sample.summarize();
  return sample;
}

}  // namespace

const EngineProfile& CalibrationProfile::settings_for(Scenario scenario) const {
  const auto it = scenario_settings.find(scenario);
  return it == scenario_settings.end() ? settings : it->second;
}

CalibrationProfile CalibrationProfile::defaults(EngineKind engine) {
  CalibrationProfile p;
  p.name = std::string(engine_name(engine));
  p.engine = engine;
  p.settings = EngineProfile::defaults(engine);
  p.note = "built-in defaults, zero latency";
  return p;
}

CalibrationProfile CalibrationProfile::from_config(const Config& config) {
  const auto engine_text = config.raw("profile", "engine");
  if (!engine_text) throw Error(ErrorCode::ConfigError, "profile needs [profile] engine");
  CalibrationProfile p = defaults(parse_engine(*engine_text));
  p.name = config.string_or("profile", "name", p.name);
  p.note = config.string_or("profile", "note", "");
  p.latency = LatencyModel::from_config(config);
  p.settings = EngineProfile::from_config(config, p.engine);
  for (auto scenario : {Scenario::Sequence, Scenario::Parallel, Scenario::StatePassing}) {
    const std::string section = "engine." + std::string(scenario_name(scenario));
    if (config.has_section(section)) {
      p.scenario_settings[scenario] = EngineProfile::from_config(config, p.settings, section);
    }
  }
  return p;
}

CalibrationProfile CalibrationProfile::load(const std::filesystem::path& path) {
  return from_config(Config::load(path));
}

OverheadSample bench_sequence(const CalibrationProfile& profile, int n, const BenchOptions& options) {
  const Experiment ex{Scenario::Sequence, n, 0};
  try {
    return repeat_runs(profile, ex, seq(n, kSleepAction), FunctionDef::sleep(kSleepAction, kSequenceSleepMs),
                       options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooManyActions) throw;
    OverheadSample na;
    na.engine = profile.engine;
    na.scenario = Scenario::Sequence;
    na.n = n;
    na.available = false;
    na.note = e.what();
    return na;
  }
}

OverheadSample bench_parallel(const CalibrationProfile& profile, int n, const BenchOptions& options) {
  const Experiment ex{Scenario::Parallel, n, 0};
  return repeat_runs(profile, ex, fan_out(n, kSleep20), FunctionDef::sleep(kSleep20, kParallelSleepMs), options);
}

double StatePassingResult::increase_pct() const {
  if (without_payload.mean_ms == 0) return 0;
  return (with_payload.mean_ms - without_payload.mean_ms) / without_payload.mean_ms * 100.0;
}

StatePassingResult bench_state(const CalibrationProfile& profile, std::size_t payload_bytes,
                               const BenchOptions& options) {
  // Sleep returns its input, so the parameter travels through all five steps.
  const FunctionDef pass = FunctionDef::sleep(kSleepAction, kSequenceSleepMs);
  const CompositionSpec spec = seq(5, kSleepAction);
  StatePassingResult r;
  r.without_payload = repeat_runs(profile, {Scenario::StatePassing, 5, 0}, spec, pass, options);
  r.with_payload = repeat_runs(profile, {Scenario::StatePassing, 5, payload_bytes}, spec, pass, options);
  return r;
}

}  // namespace faasflow
