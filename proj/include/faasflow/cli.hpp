// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "faasflow/composition.hpp"

namespace faasflow::cli {

/// Process exit codes. Scripts depend on these values.
enum ExitCode : int {
  kOk = 0,
  kVerdictFailed = 1,
  kUsage = 2,
  kEngineError = 3,
  kPartialSuite = 4,
};

/// A workflow file: either a composition document, a state machine
/// ("StartAt" at the top level), or an envelope
/// {"functions": {name: spec}, "workflow": <either>}.
struct WorkflowFile {
  CompositionSpec spec;
  std::map<std::string, std::string> functions;  // name -> function spec
};

WorkflowFile load_workflow(const std::filesystem::path& path);
WorkflowFile parse_workflow(const std::string& text);

/// Entry point shared by the executable and the tests. FAASFLOW_CONFIG names
/// a config file with [functions] definitions (and [cli] profile).
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace faasflow::cli
