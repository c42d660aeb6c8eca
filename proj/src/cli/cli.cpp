// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "faasflow/accounting.hpp"
#include "faasflow/benchmarks.hpp"
#include "faasflow/config.hpp"
#include "faasflow/error.hpp"
#include "faasflow/runtime.hpp"
#include "faasflow/state_machine.hpp"

namespace faasflow::cli {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CompositionSpec parse_any(const nlohmann::json& doc, const std::string& text) {
  if (doc.is_object() && doc.contains("StartAt")) return compile(parse_state_machine(text));
  return parse_composition(text);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::UnsupportedState:
    case ErrorCode::InvalidCount:
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
    case ErrorCode::DuplicateName:
    case ErrorCode::UnknownFunction: return kUsage;
    default: return kEngineError;
  }
}

struct Common {
  std::string engine;
  std::string workflow;
  std::string profile;
  std::string input = "{}";
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool extended_sessions = false;
  std::optional<double> jitter;
  std::vector<std::string> functions;
  double epsilon = 1;
};

/// Everything a single run needs, resolved from flags, profile and config.
struct Setup {
  EngineProfile settings;
  LatencyModel latency;
  RuntimeOptions runtime;
  WorkflowFile workflow;
  Payload input;
};

std::optional<Config> environment_config() {
  const char* path = std::getenv("FAASFLOW_CONFIG");
  if (path == nullptr || *path == '\0') return std::nullopt;
  return Config::load(path);
}

Setup resolve(const Common& c) {
  Setup s;
  const EngineKind kind = parse_engine(c.engine);
  const auto env = environment_config();

  std::string profile = c.profile;
  if (profile.empty() && env) profile = env->string_or("cli", "profile", "");
  if (!profile.empty()) {
    const Config config = Config::load(profile);
    s.latency = LatencyModel::from_config(config);
    s.settings = EngineProfile::from_config(config, kind);
  } else {
    s.settings = EngineProfile::defaults(kind);
  }
  if (c.extended_sessions) s.settings.extended_sessions = true;
  if (c.jitter) s.latency.jitter = *c.jitter;
  s.latency.validate();
  s.runtime.seed = c.seed;

  s.workflow = load_workflow(c.workflow);
  if (env) {
    for (const auto& [name, spec] : env->section("functions")) s.workflow.functions.try_emplace(name, spec);
  }
  for (const auto& item : c.functions) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::ConfigError, "--function expects name=spec, got '" + item + "'");
    }
    s.workflow.functions[item.substr(0, eq)] = item.substr(eq + 1);
  }
  for (const auto& name : referenced_functions(s.workflow.spec)) {
    if (!s.workflow.functions.contains(name)) {
      throw Error(ErrorCode::UnknownFunction,
                  "no definition for '" + name + "' (add --function " + name + "=sleep:1000 or a [functions] entry)");
    }
  }
  s.input = c.input;
  if (!c.input.empty() && c.input.front() == '@') s.input = read_file(c.input.substr(1));
  return s;
}

faasflow::Setup registrar(const WorkflowFile& wf) {
  return [functions = wf.functions](Runtime& rt) {
    for (const auto& [name, spec] : functions) rt.register_function(parse_function_spec(name, spec));
  };
}

void add_common(CLI::App& cmd, Common& c, bool with_out) {
  cmd.add_option("--engine", c.engine, "asf, composer, sequences, adf, suspend or inline")->required();
  cmd.add_option("--workflow", c.workflow, "composition or state-machine JSON file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--profile", c.profile, "calibration profile (.cfg)")->check(CLI::ExistingFile);
  cmd.add_option("--input", c.input, "input payload, or @file")->capture_default_str();
  cmd.add_option("--seed", c.seed, "jitter seed")->capture_default_str();
  cmd.add_flag("--extended-sessions", c.extended_sessions, "keep event-sourced orchestrators in memory");
  cmd.add_option("--jitter", c.jitter, "uniform latency noise, fraction of each base latency");
  cmd.add_option("--function", c.functions, "function definition name=spec (sleep:MS, echo, increment:FIELD[:MS], flaky:N:MS)");
  if (with_out) cmd.add_option("--out", c.out_dir, "directory for trace and history files")->capture_default_str();
}

int cmd_run(const Common& c, std::ostream& out) {
  Setup s = resolve(c);
  Runtime rt(s.latency, s.runtime);
  registrar(s.workflow)(rt);
  auto engine = make_engine(s.settings);
  const WorkflowResult result = engine->run(rt, s.workflow.spec, s.input);

  std::filesystem::create_directories(c.out_dir);
  const auto trace_path = std::filesystem::path(c.out_dir) / "trace.ndjson";
  {
    std::ofstream f(trace_path, std::ios::binary);
    write_trace(f, result.trace);
  }
  json doc;
  doc["engine"] = std::string(engine_name(result.engine));
  doc["ok"] = result.ok;
  doc["output"] = result.output;
  if (!result.ok) doc["error"] = result.error;
  doc["wall_time_ms"] = result.wall_time_ms;
  doc["overhead_ms"] = overhead(result);
  doc["transitions"] = result.transitions;
  if (result.history) {
    const auto history_path = std::filesystem::path(c.out_dir) / "history.ndjson";
    std::ofstream f(history_path, std::ios::binary);
    write_history(f, *result.history);
    doc["replay_count"] = result.replay_count;
    doc["history_events"] = result.history->size();
    doc["history_bytes"] = result.history_bytes;
    doc["history_file"] = history_path.string();
  }
  doc["billing"] = json::parse(to_json(compute_billing(result, PricingModel::defaults(result.engine))));
  doc["trace_file"] = trace_path.string();
  out << doc.dump(2) << "\n";
  return result.ok ? kOk : kEngineError;
}

int cmd_verify(const Common& c, std::ostream& out) {
  Setup s = resolve(c);
  VerifyOptions options;
  options.latency = s.latency;
  options.epsilon_ms = static_cast<Millis>(c.epsilon);
  auto engine = make_engine(s.settings);
  const TrilemmaVerdict v = verify_trilemma(engine, s.workflow.spec, registrar(s.workflow), s.input, options);
  out << to_json(v, s.settings.kind) << "\n";
  return v.st_safe() ? kOk : kVerdictFailed;
}

struct BenchArgs {
  std::string suite = "default";
  std::string out_dir = "bench-out";
  std::optional<std::uint64_t> seed;
  std::optional<double> jitter;
  std::optional<int> repetitions;
  std::optional<unsigned> threads;
};

int cmd_bench(const BenchArgs& b, std::ostream& out, std::ostream& err) {
  SuiteConfig config;
  if (b.suite != "default" || std::filesystem::exists("suites/default.cfg")) {
    const std::filesystem::path path = b.suite == "default" ? "suites/default.cfg" : b.suite;
    config = SuiteConfig::from_config(Config::load(path));
  }
  if (b.seed) config.options.seed = *b.seed;
  if (b.jitter) config.options.jitter = *b.jitter;
  if (b.repetitions) config.options.repetitions = *b.repetitions;
  if (b.threads) config.threads = *b.threads;

  const SuiteReport report = run_suite(config, b.out_dir);
  out << std::left << std::setw(10) << "engine" << std::setw(10) << "scenario" << std::right << std::setw(5) << "n"
      << std::setw(9) << "payload" << std::setw(12) << "mean_ms" << std::setw(10) << "stdev_ms" << "\n";
  for (const auto& s : report.samples) {
    out << std::left << std::setw(10) << engine_name(s.engine) << std::setw(10) << scenario_name(s.scenario)
        << std::right << std::setw(5) << s.n << std::setw(9) << s.payload_bytes;
    if (s.available) {
      out << std::setw(12) << std::fixed << std::setprecision(1) << s.mean_ms << std::setw(10) << s.stdev_ms << "\n";
    } else {
      out << std::setw(12) << "N/A" << "\n";
    }
  }
  for (const auto& f : report.files) out << "wrote " << f.string() << "\n";
  for (const auto& e : report.errors) err << "error: " << e << "\n";
  return report.errors.empty() ? kOk : kPartialSuite;
}

int cmd_inspect(const std::string& trace_file, double epsilon, std::ostream& out) {
  std::ifstream in(trace_file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + trace_file);
  const auto trace = read_trace(in);
  out << std::left << std::setw(6) << "id" << std::setw(28) << "function" << std::setw(8) << "parent"
      << std::setw(6) << "exec" << std::setw(14) << "path" << std::setw(6) << "orch" << std::right << std::setw(10)
      << "start" << std::setw(10) << "end" << std::setw(10) << "billed" << "  state\n";
  Millis billed = 0, orchestration = 0;
  for (const auto& r : trace) {
    out << std::left << std::setw(6) << r.id.value << std::setw(28) << r.function << std::setw(8)
        << (r.parent ? std::to_string(r.parent->value) : "-") << std::setw(6) << r.execution << std::setw(14)
        << r.path << std::setw(6) << (r.orchestrator ? "yes" : "") << std::right << std::setw(10) << r.start_time
        << std::setw(10) << r.end_time << std::setw(10) << r.billed_ms() << "  " << to_string(r.state) << "\n";
    (r.orchestrator ? orchestration : billed) += r.billed_ms();
  }
  out << "records: " << trace.size() << ", function billed ms: " << billed
      << ", orchestrator billed ms: " << orchestration << "\n";
  const auto findings = detect_double_billing(trace, static_cast<Millis>(epsilon));
  out << "double-billing pairs (epsilon " << epsilon << " ms): " << findings.size() << "\n";
  for (const auto& f : findings) {
    out << "  orchestrator #" << f.orchestrator.value << " overlaps #" << f.descendant.value << " by " << f.overlap_ms
        << " ms\n";
  }
  return kOk;
}

}  // namespace

WorkflowFile parse_workflow(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
  WorkflowFile wf;
  if (doc.is_object() && doc.contains("workflow")) {
    if (doc.contains("functions")) {
      if (!doc["functions"].is_object()) throw ParseError(0, "\"functions\" must map names to specs");
      for (const auto& [name, spec] : doc["functions"].items()) {
        if (!spec.is_string()) throw ParseError(0, "function spec for '" + name + "' must be a string");
        wf.functions[name] = spec.get<std::string>();
      }
    }
    const std::string inner = doc["workflow"].dump();
    wf.spec = parse_any(doc["workflow"], inner);
  } else {
    wf.spec = parse_any(doc, text);
  }
  validate(wf.spec);
  return wf;
}

WorkflowFile load_workflow(const std::filesystem::path& path) { return parse_workflow(read_file(path)); }

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"faasflow: simulated function orchestration engines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "faasflow 0.1.0");

  Common run_args;
  auto* run = app.add_subcommand("run", "run a workflow on one engine and report overhead and billing");
  add_common(*run, run_args, true);

  Common verify_args;
  auto* verify = app.add_subcommand("verify", "check the serverless trilemma; exit 0 iff ST-safe");
  add_common(*verify, verify_args, false);
  verify->add_option("--epsilon", verify_args.epsilon, "tolerated overlap in ms")->capture_default_str();

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "run a benchmark suite and write CSV and SVG reports");
  bench->add_option("--suite", bench_args.suite, "suite config file, or 'default'")->capture_default_str();
  bench->add_option("--out", bench_args.out_dir, "output directory")->capture_default_str();
  bench->add_option("--seed", bench_args.seed, "seed for jitter streams");
  bench->add_option("--jitter", bench_args.jitter, "uniform latency noise fraction");
  bench->add_option("--repetitions", bench_args.repetitions, "runs per data point")->check(CLI::PositiveNumber);
  bench->add_option("--threads", bench_args.threads, "worker threads (0: all cores)");

  std::string trace_file;
  double inspect_epsilon = 1;
  auto* inspect = app.add_subcommand("inspect-trace", "summarize an exported trace and list double billing");
  inspect->add_option("trace", trace_file, "trace file (NDJSON)")->required();
  inspect->add_option("--epsilon", inspect_epsilon, "tolerated overlap in ms")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(run_args, out);
    if (*verify) return cmd_verify(verify_args, out);
    if (*bench) return cmd_bench(bench_args, out, err);
    return cmd_inspect(trace_file, inspect_epsilon, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kEngineError;
  }
}

}  // namespace faasflow::cli
