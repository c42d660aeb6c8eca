// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "faasflow/error.hpp"

namespace faasflow {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

// ini_parser only accepts comments on their own line; strip trailing ones.
std::string strip_inline_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find(" #");
    const auto semi = line.find(" ;");
    const auto cut = std::min(hash, semi);
    if (cut != std::string::npos) line.erase(cut);
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config config;
  std::istringstream in(strip_inline_comments(text));
  try {
    boost::property_tree::ini_parser::read_ini(in, config.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError,
                "line " + std::to_string(e.line()) + ": " + e.message());
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Config config = parse(buffer.str());
  config.origin_ = path;
  return config;
}

std::optional<std::string> Config::raw(const std::string& section,
                                       const std::string& key) const {
  using boost::property_tree::ptree;
  if (!section.empty()) {
    if (auto child = tree_.get_child_optional(ptree::path_type(section, '\0'))) {
      if (auto value = child->get_optional<std::string>(ptree::path_type(key, '\0'))) {
        return trim(*value);
      }
    }
  }
  if (auto value = tree_.get_child_optional(ptree::path_type(key, '\0'))) {
    if (value->empty()) return trim(value->data());
  }
  return std::nullopt;
}

std::optional<double> Config::number(const std::string& section,
                                     const std::string& key) const {
  auto text = raw(section, key);
  if (!text) return std::nullopt;
  try {
    std::size_t used = 0;
    const double value = std::stod(*text, &used);
    if (used != text->size()) throw std::invalid_argument("trailing");
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError,
                "key '" + key + "' is not a number: '" + *text + "'");
  }
}

std::optional<bool> Config::flag(const std::string& section,
                                 const std::string& key) const {
  auto text = raw(section, key);
  if (!text) return std::nullopt;
  std::string lowered = *text;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lowered == "true" || lowered == "1" || lowered == "yes" || lowered == "on") {
    return true;
  }
  if (lowered == "false" || lowered == "0" || lowered == "no" || lowered == "off") {
    return false;
  }
  throw Error(ErrorCode::ConfigError,
              "key '" + key + "' is not a boolean: '" + *text + "'");
}

std::vector<std::pair<std::string, std::string>> Config::section(
    const std::string& name) const {
  using boost::property_tree::ptree;
  std::vector<std::pair<std::string, std::string>> out;
  auto child = tree_.get_child_optional(ptree::path_type(name, '\0'));
  if (!child) return out;
  for (const auto& [key, value] : *child) {
    out.emplace_back(key, trim(value.data()));
  }
  return out;
}

bool Config::has_section(const std::string& name) const {
  using boost::property_tree::ptree;
  auto child = tree_.get_child_optional(ptree::path_type(name, '\0'));
  return child && !child->empty();
}

}  // namespace faasflow
