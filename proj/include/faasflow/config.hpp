// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace faasflow {

/// INI-style key=value configuration with optional [sections].
///
/// Lookups accept a dotted `section.key`; a bare `key` written before any
/// section header is also found by `get(section, key)` as a fallback so
/// flat key=value files work unchanged.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  [[nodiscard]] std::optional<std::string> raw(const std::string& section,
                                               const std::string& key) const;

  [[nodiscard]] std::optional<double> number(const std::string& section,
                                             const std::string& key) const;
  [[nodiscard]] std::optional<bool> flag(const std::string& section,
                                         const std::string& key) const;

  [[nodiscard]] double number_or(const std::string& section,
                                 const std::string& key, double fallback) const {
    return number(section, key).value_or(fallback);
  }
  [[nodiscard]] std::string string_or(const std::string& section,
                                      const std::string& key,
                                      std::string fallback) const {
    return raw(section, key).value_or(std::move(fallback));
  }

  /// Key/value pairs of one section, in file order.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> section(
      const std::string& name) const;

  [[nodiscard]] bool has_section(const std::string& name) const;

  [[nodiscard]] const std::filesystem::path& origin() const noexcept {
    return origin_;
  }

 private:
  boost::property_tree::ptree tree_;
  std::filesystem::path origin_;
};

}  // namespace faasflow
