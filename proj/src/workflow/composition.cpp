// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/composition.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "faasflow/error.hpp"

namespace faasflow {

using nlohmann::json;

bool operator==(const Sequence& a, const Sequence& b) { return a.steps == b.steps; }
bool operator==(const Parallel& a, const Parallel& b) { return a.branches == b.branches; }
bool operator==(const Choice& a, const Choice& b) {
  return a.predicate == b.predicate && a.then_branch == b.then_branch &&
         a.else_branch == b.else_branch;
}
bool operator==(const Retry& a, const Retry& b) {
  return a.max_attempts == b.max_attempts && a.backoff_ms == b.backoff_ms && a.body == b.body;
}
bool operator==(const Repeat& a, const Repeat& b) { return a.count == b.count && a.body == b.body; }

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

bool Predicate::evaluate(const Payload& payload) const {
  const auto doc = json::parse(payload, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return false;
  const auto it = doc.find(field);
  if (it == doc.end()) return false;

  auto compare = [this](const auto& lhs, const auto& rhs) {
    switch (op) {
      case CompareOp::Equal: return lhs == rhs;
      case CompareOp::Less: return lhs < rhs;
      case CompareOp::LessEqual: return lhs <= rhs;
      case CompareOp::Greater: return lhs > rhs;
      case CompareOp::GreaterEqual: return lhs >= rhs;
    }
    return false;
  };
  if (const auto* number = std::get_if<double>(&value)) {
    if (!it->is_number()) return false;
    return compare(it->get<double>(), *number);
  }
  if (!it->is_string()) return false;
  return compare(it->get<std::string>(), std::get<std::string>(value));
}

namespace compose {

Node task(std::string function) { return Node{Task{std::move(function)}}; }
Node sequence(std::vector<Node> steps) { return Node{Sequence{std::move(steps)}}; }
Node parallel(std::vector<Node> branches) { return Node{Parallel{std::move(branches)}}; }
Node choice(Predicate predicate, Node then_branch, Node else_branch) {
  return Node{Choice{std::move(predicate), std::move(then_branch), std::move(else_branch)}};
}
Node retry(Node body, int max_attempts, Millis backoff_ms) {
  return Node{Retry{std::move(body), max_attempts, backoff_ms}};
}
Node repeat(int count, Node body) { return Node{Repeat{count, std::move(body)}}; }
Node wait(Millis duration_ms) { return Node{Wait{duration_ms}}; }

}  // namespace compose

CompositionSpec seq(int n, const std::string& task) {
  if (n < 1) throw Error(ErrorCode::InvalidCount, "seq: n must be >= 1, got " + std::to_string(n));
  return CompositionSpec{compose::repeat(n, compose::task(task))};
}

CompositionSpec fan_out(int n, const std::string& task) {
  if (n < 1) throw Error(ErrorCode::InvalidCount, "fan_out: n must be >= 1, got " + std::to_string(n));
  return CompositionSpec{compose::parallel(std::vector<Node>(static_cast<std::size_t>(n), compose::task(task)))};
}

namespace {

void validate_node(const Node& node) {
  std::visit(Overloaded{
                 [](const Task& t) {
                   if (t.function.empty()) throw Error(ErrorCode::ValidationError, "task without function name");
                 },
                 [](const Sequence& s) {
                   for (const auto& step : s.steps) validate_node(step);
                 },
                 [](const Parallel& p) {
                   if (p.branches.empty()) throw Error(ErrorCode::ValidationError, "parallel without branches");
                   for (const auto& b : p.branches) validate_node(b);
                 },
                 [](const Choice& c) {
                   if (c.predicate.field.empty()) {
                     throw Error(ErrorCode::ValidationError, "choice predicate without field");
                   }
                   validate_node(*c.then_branch);
                   validate_node(*c.else_branch);
                 },
                 [](const Retry& r) {
                   if (r.max_attempts < 1) throw Error(ErrorCode::ValidationError, "retry max_attempts < 1");
                   if (r.backoff_ms < 0) throw Error(ErrorCode::ValidationError, "negative retry backoff");
                   validate_node(*r.body);
                 },
                 [](const Repeat& r) {
                   if (r.count < 1) throw Error(ErrorCode::ValidationError, "repeat count < 1");
                   validate_node(*r.body);
                 },
                 [](const Wait& w) {
                   if (w.duration_ms < 0) throw Error(ErrorCode::ValidationError, "negative wait");
                 },
             },
             node.value);
}

Node normalize_node(const Node& node) {
  return std::visit(
      Overloaded{
          [](const Task& t) { return Node{t}; },
          [](const Wait& w) { return Node{w}; },
          [](const Sequence& s) {
            std::vector<Node> flat;
            for (const auto& step : s.steps) {
              Node n = normalize_node(step);
              if (n.is<Sequence>()) {
                for (auto& inner : std::get<Sequence>(n.value).steps) flat.push_back(std::move(inner));
              } else {
                flat.push_back(std::move(n));
              }
            }
            if (flat.size() == 1) return std::move(flat.front());
            return compose::sequence(std::move(flat));
          },
          [](const Parallel& p) {
            std::vector<Node> branches;
            branches.reserve(p.branches.size());
            for (const auto& b : p.branches) branches.push_back(normalize_node(b));
            return compose::parallel(std::move(branches));
          },
          [](const Choice& c) {
            return compose::choice(c.predicate, normalize_node(*c.then_branch), normalize_node(*c.else_branch));
          },
          [](const Retry& r) {
            Node body = normalize_node(*r.body);
            if (r.max_attempts == 1) return body;
            return compose::retry(std::move(body), r.max_attempts, r.backoff_ms);
          },
          [](const Repeat& r) {
            Node body = normalize_node(*r.body);
            if (r.count == 1) return body;
            return compose::repeat(r.count, std::move(body));
          },
      },
      node.value);
}

void collect_functions(const Node& node, std::size_t multiplier, std::vector<std::string>& out) {
  std::visit(Overloaded{
                 [&](const Task& t) { out.insert(out.end(), multiplier, t.function); },
                 [&](const Sequence& s) {
                   for (const auto& step : s.steps) collect_functions(step, multiplier, out);
                 },
                 [&](const Parallel& p) {
                   for (const auto& b : p.branches) collect_functions(b, multiplier, out);
                 },
                 [&](const Choice& c) {
                   collect_functions(*c.then_branch, multiplier, out);
                   collect_functions(*c.else_branch, multiplier, out);
                 },
                 [&](const Retry& r) { collect_functions(*r.body, multiplier, out); },
                 [&](const Repeat& r) {
                   collect_functions(*r.body, multiplier * static_cast<std::size_t>(r.count), out);
                 },
                 [](const Wait&) {},
             },
             node.value);
}

const char* op_name(CompareOp op) {
  switch (op) {
    case CompareOp::Equal: return "eq";
    case CompareOp::Less: return "lt";
    case CompareOp::LessEqual: return "le";
    case CompareOp::Greater: return "gt";
    case CompareOp::GreaterEqual: return "ge";
  }
  return "eq";
}

CompareOp op_from_name(const std::string& s) {
  for (auto op : {CompareOp::Equal, CompareOp::Less, CompareOp::LessEqual, CompareOp::Greater,
                  CompareOp::GreaterEqual}) {
    if (s == op_name(op)) return op;
  }
  throw Error(ErrorCode::ParseError, "unknown comparison '" + s + "'");
}

json node_to_json(const Node& node) {
  return std::visit(
      Overloaded{
          [](const Task& t) { return json{{"task", t.function}}; },
          [](const Wait& w) { return json{{"wait", w.duration_ms}}; },
          [](const Sequence& s) {
            json steps = json::array();
            for (const auto& step : s.steps) steps.push_back(node_to_json(step));
            return json{{"sequence", steps}};
          },
          [](const Parallel& p) {
            json branches = json::array();
            for (const auto& b : p.branches) branches.push_back(node_to_json(b));
            return json{{"parallel", branches}};
          },
          [](const Choice& c) {
            json pred{{"field", c.predicate.field}, {"op", op_name(c.predicate.op)}};
            std::visit([&](const auto& v) { pred["value"] = v; }, c.predicate.value);
            return json{{"choice", {{"if", pred},
                                    {"then", node_to_json(*c.then_branch)},
                                    {"else", node_to_json(*c.else_branch)}}}};
          },
          [](const Retry& r) {
            return json{{"retry", {{"body", node_to_json(*r.body)},
                                   {"max_attempts", r.max_attempts},
                                   {"backoff_ms", r.backoff_ms}}}};
          },
          [](const Repeat& r) {
            return json{{"repeat", {{"count", r.count}, {"body", node_to_json(*r.body)}}}};
          },
      },
      node.value);
}

Node node_from_json(const json& j) {
  if (j.is_string()) return compose::task(j.get<std::string>());  // shorthand for {"task": name}
  if (!j.is_object() || j.size() != 1) throw Error(ErrorCode::ParseError, "node must be a single-key object");
  const auto& [kind, v] = *j.items().begin();
  if (kind == "task") return compose::task(v.get<std::string>());
  if (kind == "wait") return compose::wait(v.get<Millis>());
  if (kind == "sequence" || kind == "parallel") {
    std::vector<Node> children;
    for (const auto& c : v) children.push_back(node_from_json(c));
    return kind == "sequence" ? compose::sequence(std::move(children)) : compose::parallel(std::move(children));
  }
  if (kind == "choice") {
    const auto& p = v.at("if");
    Predicate pred{p.at("field").get<std::string>(), op_from_name(p.at("op").get<std::string>()), 0.0};
    if (p.at("value").is_string()) {
      pred.value = p.at("value").get<std::string>();
    } else {
      pred.value = p.at("value").get<double>();
    }
    return compose::choice(std::move(pred), node_from_json(v.at("then")), node_from_json(v.at("else")));
  }
  if (kind == "retry") {
    return compose::retry(node_from_json(v.at("body")), v.at("max_attempts").get<int>(),
                          v.value("backoff_ms", Millis{0}));
  }
  if (kind == "repeat") return compose::repeat(v.at("count").get<int>(), node_from_json(v.at("body")));
  throw Error(ErrorCode::ParseError, "unknown node kind '" + kind + "'");
}

}  // namespace

void validate(const CompositionSpec& spec) { validate_node(spec.root); }

CompositionSpec normalize(const CompositionSpec& spec) { return CompositionSpec{normalize_node(spec.root)}; }

std::size_t action_count(const Node& node) {
  return std::visit(Overloaded{
                        [](const Task&) -> std::size_t { return 1; },
                        [](const Wait&) -> std::size_t { return 0; },
                        [](const Sequence& s) {
                          std::size_t n = 0;
                          for (const auto& step : s.steps) n += action_count(step);
                          return n;
                        },
                        [](const Parallel& p) {
                          std::size_t n = 0;
                          for (const auto& b : p.branches) n += action_count(b);
                          return n;
                        },
                        [](const Choice& c) { return action_count(*c.then_branch) + action_count(*c.else_branch); },
                        [](const Retry& r) { return action_count(*r.body); },
                        [](const Repeat& r) { return static_cast<std::size_t>(r.count) * action_count(*r.body); },
                    },
                    node.value);
}

std::size_t action_count(const CompositionSpec& spec) { return action_count(spec.root); }

std::vector<std::string> referenced_functions(const CompositionSpec& spec) {
  std::vector<std::string> out;
  collect_functions(spec.root, 1, out);
  std::sort(out.begin(), out.end());
  return out;
}

bool contains_parallel(const Node& node) {
  return std::visit(Overloaded{
                        [](const Parallel&) { return true; },
                        [](const Task&) { return false; },
                        [](const Wait&) { return false; },
                        [](const Sequence& s) {
                          return std::any_of(s.steps.begin(), s.steps.end(),
                                             [](const Node& n) { return contains_parallel(n); });
                        },
                        [](const Choice& c) {
                          return contains_parallel(*c.then_branch) || contains_parallel(*c.else_branch);
                        },
                        [](const Retry& r) { return contains_parallel(*r.body); },
                        [](const Repeat& r) { return contains_parallel(*r.body); },
                    },
                    node.value);
}

std::size_t depth(const Node& node) {
  auto max_of = [](const std::vector<Node>& nodes) {
    std::size_t d = 0;
    for (const auto& n : nodes) d = std::max(d, depth(n));
    return d;
  };
  return 1 + std::visit(Overloaded{
                            [](const Task&) -> std::size_t { return 0; },
                            [](const Wait&) -> std::size_t { return 0; },
                            [&](const Sequence& s) { return max_of(s.steps); },
                            [&](const Parallel& p) { return max_of(p.branches); },
                            [](const Choice& c) { return std::max(depth(*c.then_branch), depth(*c.else_branch)); },
                            [](const Retry& r) { return depth(*r.body); },
                            [](const Repeat& r) { return depth(*r.body); },
                        },
                        node.value);
}

std::string serialize(const CompositionSpec& spec) { return node_to_json(spec.root).dump(2); }

CompositionSpec parse_composition(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
  try {
    return CompositionSpec{node_from_json(doc)};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("composition: ") + e.what());
  }
}

Payload join_outputs(const std::vector<Payload>& outputs) {
  json arr = json::array();
  for (const auto& out : outputs) {
    auto parsed = json::parse(out, nullptr, false);
    arr.push_back(parsed.is_discarded() ? json(out) : std::move(parsed));
  }
  return arr.dump();
}

namespace node_path {
std::string step(const std::string& parent, std::size_t index) { return parent + "/" + std::to_string(index); }
std::string branch(const std::string& parent, std::size_t index) {
  return parent + "/b" + std::to_string(index);
}
std::string then_arm(const std::string& parent) { return parent + "/t"; }
std::string else_arm(const std::string& parent) { return parent + "/e"; }
std::string iteration(const std::string& parent, int index) { return parent + "/r" + std::to_string(index); }
std::string retry_body(const std::string& parent) { return parent + "/try"; }
}  // namespace node_path

}  // namespace faasflow
