// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include <boost/algorithm/string.hpp>

#include "faasflow/benchmarks.hpp"
#include "faasflow/config.hpp"
#include "faasflow/error.hpp"

namespace faasflow {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(", "), boost::token_compress_on);
  std::erase_if(parts, [](const std::string& s) { return s.empty(); });
  return parts;
}

std::vector<EngineKind> engine_list(const std::string& text) {
  std::vector<EngineKind> out;
  for (const auto& name : split_list(text)) out.push_back(parse_engine(name));
  return out;
}

std::vector<int> count_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ConfigError, "expected positive counts, got '" + item + "'");
    }
  }
  return out;
}

std::string fixed(double v, int digits = 1) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

const char* csv_name(Scenario s) {
  switch (s) {
    case Scenario::Sequence: return "sequences.csv";
    case Scenario::Parallel: return "parallel.csv";
    case Scenario::StatePassing: return "state_passing.csv";
  }
  return "?";
}

void write_file(const std::filesystem::path& path, const std::string& text, SuiteReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  report.files.push_back(path);
}

std::string samples_csv(const std::vector<const OverheadSample*>& samples) {
  std::ostringstream out;
  out << "engine,scenario,n,payload_bytes,rep,overhead_ms\n";
  for (const auto* s : samples) {
    const std::string key = std::string(engine_name(s->engine)) + "," + std::string(scenario_name(s->scenario)) +
                            "," + std::to_string(s->n) + "," + std::to_string(s->payload_bytes) + ",";
    if (!s->available) {
      out << key << ",NA\n";
      continue;
    }
    for (std::size_t rep = 0; rep < s->overhead_ms.size(); ++rep) {
      out << key << rep << "," << s->overhead_ms[rep] << "\n";
    }
  }
  return out.str();
}

std::string summary_csv(const std::vector<OverheadSample>& samples) {
  std::ostringstream out;
  out << "engine,scenario,n,payload_bytes,repetitions,mean_ms,stdev_ms,status\n";
  for (const auto& s : samples) {
    out << engine_name(s.engine) << "," << scenario_name(s.scenario) << "," << s.n << "," << s.payload_bytes << ","
        << s.repetitions << ",";
    if (s.available) {
      out << fixed(s.mean_ms) << "," << fixed(s.stdev_ms) << ",ok\n";
    } else {
      out << ",," << (s.note.empty() ? "NA" : "error") << "\n";
    }
  }
  return out.str();
}

// Minimal line chart: one polyline per engine, overhead (s) against n.
std::string line_chart(const std::string& title, const std::vector<const OverheadSample*>& samples) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 130, kTop = 40, kBottom = 50;
  static const char* const kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

  std::map<EngineKind, std::vector<std::pair<int, double>>> series;
  std::set<int> xs;
  double ymax = 0;
  for (const auto* s : samples) {
    if (!s->available) continue;
    series[s->engine].emplace_back(s->n, s->mean_ms / 1000.0);
    xs.insert(s->n);
    ymax = std::max(ymax, s->mean_ms / 1000.0);
  }
  if (ymax <= 0) ymax = 1;
  const double xmax = xs.empty() ? 1 : *xs.rbegin();
  auto px = [&](double x) { return kLeft + x / xmax * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - y / ymax * (kH - kTop - kBottom); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << px(xmax) << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kLeft << "\" y2=\"" << py(ymax)
      << "\" stroke=\"black\"/>\n";
  for (int x : xs) {
    svg << "<text x=\"" << fixed(px(x)) << "\" y=\"" << py(0) + 18 << "\" text-anchor=\"middle\">" << x
        << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double y = ymax * i / 4;
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << fixed(py(y) + 4) << "\" text-anchor=\"end\">" << fixed(y, 2)
        << "</text>\n";
  }
  svg << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\">number of functions</text>\n";
  svg << "<text x=\"18\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 18 " << kH / 2
      << ")\" text-anchor=\"middle\">overhead (s)</text>\n";

  std::size_t color = 0;
  for (const auto& [engine, points] : series) {
    const char* c = kColors[color++ % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : points) svg << fixed(px(x)) << "," << fixed(py(y)) << " ";
    svg << "\"/>\n";
    for (const auto& [x, y] : points) {
      svg << "<circle cx=\"" << fixed(px(x)) << "\" cy=\"" << fixed(py(y)) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    }
    const double ly = kTop + 20.0 * static_cast<double>(color);
    svg << "<line x1=\"" << kW - kRight + 15 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 35 << "\" y2=\""
        << ly << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kW - kRight + 40 << "\" y=\"" << ly + 4 << "\">" << engine_name(engine) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

struct Job {
  Scenario scenario;
  EngineKind engine;
  int n;
};

}  // namespace

CalibrationProfile SuiteConfig::profile_for(EngineKind engine) const {
  if (const auto it = profile_files.find(engine); it != profile_files.end()) return CalibrationProfile::load(it->second);
  const std::string stem = engine == EngineKind::SequenceNative ? "ibmseq" : std::string(engine_name(engine));
  const auto path = profiles_dir / (stem + ".cfg");
  if (std::filesystem::exists(path)) return CalibrationProfile::load(path);
  return CalibrationProfile::defaults(engine);
}

SuiteConfig SuiteConfig::from_config(const Config& config) {
  SuiteConfig c;
  const std::string s = "suite";
  if (auto v = config.raw(s, "scenarios")) {
    c.scenarios.clear();
    for (const auto& name : split_list(*v)) c.scenarios.push_back(parse_scenario(name));
  }
  if (auto v = config.raw(s, "sequence_engines")) c.sequence_engines = engine_list(*v);
  if (auto v = config.raw(s, "sequence_n")) c.sequence_n = count_list(*v);
  if (auto v = config.raw(s, "parallel_engines")) c.parallel_engines = engine_list(*v);
  if (auto v = config.raw(s, "parallel_n")) c.parallel_n = count_list(*v);
  if (auto v = config.raw(s, "state_engines")) c.state_engines = engine_list(*v);
  c.payload_bytes = static_cast<std::size_t>(config.number_or(s, "payload_bytes", static_cast<double>(c.payload_bytes)));
  c.options.repetitions = static_cast<int>(config.number_or(s, "repetitions", c.options.repetitions));
  if (c.options.repetitions < 1) throw Error(ErrorCode::ConfigError, "repetitions must be >= 1");
  c.options.seed = static_cast<std::uint64_t>(config.number_or(s, "seed", 0));
  if (auto j = config.number(s, "jitter")) c.options.jitter = *j;
  c.threads = static_cast<unsigned>(config.number_or(s, "threads", 0));
  if (auto dir = config.raw(s, "profiles_dir")) {
    std::filesystem::path p = *dir;
    if (p.is_relative() && !config.origin().empty()) p = config.origin().parent_path() / p;
    c.profiles_dir = p;
  }
  for (const auto& [engine, file] : config.section("profiles")) {
    std::filesystem::path p = file;
    if (p.is_relative() && !config.origin().empty()) p = config.origin().parent_path() / p;
    c.profile_files[parse_engine(engine)] = p;
  }
  return c;
}

SuiteReport run_suite(const SuiteConfig& config, const std::filesystem::path& out_dir) {
  std::vector<Job> jobs;
  auto has = [&config](Scenario s) {
    return std::find(config.scenarios.begin(), config.scenarios.end(), s) != config.scenarios.end();
  };
  if (has(Scenario::Sequence)) {
    for (auto e : config.sequence_engines) {
      for (int n : config.sequence_n) jobs.push_back({Scenario::Sequence, e, n});
    }
  }
  if (has(Scenario::Parallel)) {
    for (auto e : config.parallel_engines) {
      for (int n : config.parallel_n) jobs.push_back({Scenario::Parallel, e, n});
    }
  }
  if (has(Scenario::StatePassing)) {
    for (auto e : config.state_engines) jobs.push_back({Scenario::StatePassing, e, 5});
  }

  // Profiles are loaded up front so that bad files fail before any work.
  std::map<EngineKind, CalibrationProfile> profiles;
  for (const auto& job : jobs) {
    if (!profiles.contains(job.engine)) profiles.emplace(job.engine, config.profile_for(job.engine));
  }

  // One simulation per job; each job owns its output slot, so the merged
  // result does not depend on scheduling.
  std::vector<std::vector<OverheadSample>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      const CalibrationProfile& profile = profiles.at(job.engine);
      try {
        switch (job.scenario) {
          case Scenario::Sequence: results[i].push_back(bench_sequence(profile, job.n, config.options)); break;
          case Scenario::Parallel: results[i].push_back(bench_parallel(profile, job.n, config.options)); break;
          case Scenario::StatePassing: {
            auto pair = bench_state(profile, config.payload_bytes, config.options);
            results[i].push_back(std::move(pair.without_payload));
            results[i].push_back(std::move(pair.with_payload));
            break;
          }
        }
      } catch (const std::exception& e) {
        errors[i] = std::string(scenario_name(job.scenario)) + " " + std::string(engine_name(job.engine)) +
                    " n=" + std::to_string(job.n) + ": " + e.what();
        OverheadSample failed;
        failed.engine = job.engine;
        failed.scenario = job.scenario;
        failed.n = job.n;
        failed.payload_bytes = job.scenario == Scenario::StatePassing ? config.payload_bytes : 0;
        failed.available = false;
        failed.note = e.what();
        results[i].push_back(std::move(failed));
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  SuiteReport report;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (auto& s : results[i]) report.samples.push_back(std::move(s));
    if (!errors[i].empty()) report.errors.push_back(errors[i]);
  }

  std::filesystem::create_directories(out_dir);
  for (auto scenario : config.scenarios) {
    std::vector<const OverheadSample*> rows;
    for (const auto& s : report.samples) {
      if (s.scenario == scenario) rows.push_back(&s);
    }
    write_file(out_dir / csv_name(scenario), samples_csv(rows), report);
    if (scenario == Scenario::Sequence) {
      write_file(out_dir / "fig_sequences.svg", line_chart("Overhead of sequential compositions", rows), report);
    } else if (scenario == Scenario::Parallel) {
      write_file(out_dir / "fig_parallel.svg", line_chart("Overhead of parallel compositions", rows), report);
    }
  }
  // A single-scenario suite is its own summary.
  if (config.scenarios.size() > 1) write_file(out_dir / "summary.csv", summary_csv(report.samples), report);
  return report;
}

}  // namespace faasflow
