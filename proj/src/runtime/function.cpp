// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/function.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "faasflow/error.hpp"

namespace faasflow {

Payload increment_field(const Payload& payload, const std::string& field) {
  auto doc = nlohmann::json::parse(payload, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return payload;
  auto it = doc.find(field);
  if (it == doc.end()) {
    doc[field] = 1;
  } else if (it->is_number_integer()) {
    *it = it->get<std::int64_t>() + 1;
  } else if (it->is_number()) {
    *it = it->get<double>() + 1.0;
  } else {
    return payload;
  }
  return doc.dump();
}

FunctionDef parse_function_spec(const std::string& name, const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream in(spec);
  for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
  if (parts.empty()) throw Error(ErrorCode::ConfigError, "empty function spec for " + name);

  auto number = [&](std::size_t i) -> Millis {
    if (i >= parts.size()) {
      throw Error(ErrorCode::ConfigError, "function '" + name + "': missing argument in '" + spec + "'");
    }
    try {
      std::size_t used = 0;
      const long long v = std::stoll(parts[i], &used);
      if (used != parts[i].size() || v < 0) throw std::invalid_argument("bad");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "function '" + name + "': bad number '" + parts[i] + "'");
    }
  };

  const std::string& kind = parts[0];
  if (kind == "sleep") return FunctionDef::sleep(name, number(1));
  if (kind == "echo") return FunctionDef::echo(name);
  if (kind == "increment") {
    if (parts.size() < 2) throw Error(ErrorCode::ConfigError, "increment needs a field");
    return FunctionDef::incrementer(name, parts[1], parts.size() > 2 ? number(2) : 0);
  }
  if (kind == "flaky") {
    return FunctionDef::flaky(name, static_cast<int>(number(1)), number(2));
  }
  throw Error(ErrorCode::ConfigError, "unknown function kind '" + kind + "' for " + name);
}

}  // namespace faasflow
