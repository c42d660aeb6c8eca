// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/state_machine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

#include "faasflow/error.hpp"

namespace faasflow {

using ojson = nlohmann::ordered_json;

bool operator==(const State&, const State&) = default;

std::string_view to_string(StateType type) noexcept {
  switch (type) {
    case StateType::Task: return "Task";
    case StateType::Parallel: return "Parallel";
    case StateType::Choice: return "Choice";
    case StateType::Wait: return "Wait";
    case StateType::Pass: return "Pass";
  }
  return "Pass";
}

namespace {

struct Comparator {
  const char* name;
  CompareOp op;
  bool numeric;
};

constexpr Comparator kComparators[] = {
    {"NumericEquals", CompareOp::Equal, true},
    {"NumericLessThan", CompareOp::Less, true},
    {"NumericLessThanEquals", CompareOp::LessEqual, true},
    {"NumericGreaterThan", CompareOp::Greater, true},
    {"NumericGreaterThanEquals", CompareOp::GreaterEqual, true},
    {"StringEquals", CompareOp::Equal, false},
    {"StringLessThan", CompareOp::Less, false},
    {"StringLessThanEquals", CompareOp::LessEqual, false},
    {"StringGreaterThan", CompareOp::Greater, false},
    {"StringGreaterThanEquals", CompareOp::GreaterEqual, false},
};

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::ValidationError, message); }

template <class T>
T field(const ojson& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) invalid(where + ": missing \"" + key + "\"");
  try {
    return it->get<T>();
  } catch (const ojson::exception&) {
    invalid(where + ": \"" + key + "\" has the wrong type");
  }
}

StateMachineDoc doc_from_json(const ojson& j, const std::string& where);

ChoiceRule rule_from_json(const ojson& j, const std::string& where) {
  if (!j.is_object()) invalid(where + ": choice rule must be an object");
  ChoiceRule rule;
  auto variable = field<std::string>(j, "Variable", where);
  if (variable.rfind("$.", 0) != 0 || variable.size() < 3) {
    invalid(where + ": Variable must look like $.field, got '" + variable + "'");
  }
  rule.predicate.field = variable.substr(2);
  rule.next = field<std::string>(j, "Next", where);
  int found = 0;
  for (const auto& c : kComparators) {
    const auto it = j.find(c.name);
    if (it == j.end()) continue;
    ++found;
    rule.predicate.op = c.op;
    if (c.numeric) {
      if (!it->is_number()) invalid(where + ": " + c.name + " needs a number");
      rule.predicate.value = it->get<double>();
    } else {
      if (!it->is_string()) invalid(where + ": " + c.name + " needs a string");
      rule.predicate.value = it->get<std::string>();
    }
  }
  if (found != 1) {
    throw Error(ErrorCode::UnsupportedState, where + ": choice rule needs exactly one supported comparator");
  }
  return rule;
}

State state_from_json(const std::string& name, const ojson& j) {
  const std::string where = "state '" + name + "'";
  if (!j.is_object()) invalid(where + ": must be an object");
  State s;
  const auto type = field<std::string>(j, "Type", where);
  if (type == "Task") {
    s.type = StateType::Task;
    s.resource = field<std::string>(j, "Resource", where);
  } else if (type == "Parallel") {
    s.type = StateType::Parallel;
    const auto branches = j.find("Branches");
    if (branches == j.end() || !branches->is_array()) invalid(where + ": Parallel needs a Branches array");
    for (std::size_t i = 0; i < branches->size(); ++i) {
      s.branches.push_back(doc_from_json((*branches)[i], where + " branch " + std::to_string(i)));
    }
  } else if (type == "Choice") {
    s.type = StateType::Choice;
    const auto choices = j.find("Choices");
    if (choices == j.end() || !choices->is_array()) invalid(where + ": Choice needs a Choices array");
    for (const auto& rule : *choices) s.choices.push_back(rule_from_json(rule, where));
    if (j.contains("Default")) s.default_next = field<std::string>(j, "Default", where);
  } else if (type == "Wait") {
    s.type = StateType::Wait;
    s.seconds = field<double>(j, "Seconds", where);
  } else if (type == "Pass") {
    s.type = StateType::Pass;
  } else {
    throw Error(ErrorCode::UnsupportedState, where + ": state type '" + type + "' is not supported");
  }
  if (j.contains("Next")) s.next = field<std::string>(j, "Next", where);
  if (j.contains("End")) s.end = field<bool>(j, "End", where);
  if (j.contains("Comment")) s.comment = field<std::string>(j, "Comment", where);
  if (const auto retry = j.find("Retry"); retry != j.end()) {
    if (!retry->is_array() || retry->size() != 1) invalid(where + ": Retry must hold exactly one retrier");
    const auto& r = (*retry)[0];
    s.retry = RetryPolicy{field<int>(r, "MaxAttempts", where), r.value("IntervalSeconds", 0.0)};
  }
  return s;
}

StateMachineDoc doc_from_json(const ojson& j, const std::string& where) {
  if (!j.is_object()) invalid(where + ": state machine must be an object");
  StateMachineDoc doc;
  if (j.contains("Comment")) doc.comment = field<std::string>(j, "Comment", where);
  doc.start_at = field<std::string>(j, "StartAt", where);
  const auto states = j.find("States");
  if (states == j.end() || !states->is_object()) invalid(where + ": missing States object");
  for (const auto& [name, body] : states->items()) doc.states.emplace(name, state_from_json(name, body));
  return doc;
}

ojson doc_to_json(const StateMachineDoc& doc);

ojson state_to_json(const State& s) {
  ojson j;
  j["Type"] = std::string(to_string(s.type));
  if (!s.comment.empty()) j["Comment"] = s.comment;
  switch (s.type) {
    case StateType::Task: j["Resource"] = s.resource; break;
    case StateType::Parallel: {
      ojson branches = ojson::array();
      for (const auto& b : s.branches) branches.push_back(doc_to_json(b));
      j["Branches"] = std::move(branches);
      break;
    }
    case StateType::Choice: {
      ojson rules = ojson::array();
      for (const auto& rule : s.choices) {
        ojson r;
        r["Variable"] = "$." + rule.predicate.field;
        const bool numeric = std::holds_alternative<double>(rule.predicate.value);
        for (const auto& c : kComparators) {
          if (c.op == rule.predicate.op && c.numeric == numeric) {
            std::visit([&](const auto& v) { r[c.name] = v; }, rule.predicate.value);
            break;
          }
        }
        r["Next"] = rule.next;
        rules.push_back(std::move(r));
      }
      j["Choices"] = std::move(rules);
      if (s.default_next) j["Default"] = *s.default_next;
      break;
    }
    case StateType::Wait: j["Seconds"] = s.seconds; break;
    case StateType::Pass: break;
  }
  if (s.retry) {
    j["Retry"] = ojson::array({ojson{{"ErrorEquals", ojson::array({"States.ALL"})},
                                     {"MaxAttempts", s.retry->max_attempts},
                                     {"IntervalSeconds", s.retry->interval_seconds},
                                     {"BackoffRate", 1.0}}});
  }
  if (s.next) j["Next"] = *s.next;
  if (s.end) j["End"] = true;
  return j;
}

ojson doc_to_json(const StateMachineDoc& doc) {
  ojson j;
  if (!doc.comment.empty()) j["Comment"] = doc.comment;
  j["StartAt"] = doc.start_at;
  ojson states = ojson::object();
  for (const auto& [name, s] : doc.states) states[name] = state_to_json(s);
  j["States"] = std::move(states);
  return j;
}

std::vector<std::string> successors(const State& s) {
  std::vector<std::string> out;
  if (s.type == StateType::Choice) {
    for (const auto& rule : s.choices) out.push_back(rule.next);
    if (s.default_next) out.push_back(*s.default_next);
  } else if (s.next) {
    out.push_back(*s.next);
  }
  return out;
}

void validate_doc(const StateMachineDoc& doc, const std::string& where) {
  if (doc.states.empty()) invalid(where + ": no states");
  if (!doc.states.contains(doc.start_at)) invalid(where + ": StartAt names unknown state '" + doc.start_at + "'");

  for (const auto& [name, s] : doc.states) {
    const std::string at = where + ": state '" + name + "'";
    if (s.type == StateType::Choice) {
      if (s.choices.empty()) invalid(at + ": Choice without rules");
      if (!s.default_next) invalid(at + ": Choice without Default");
      if (s.end || s.next) invalid(at + ": Choice cannot have Next or End");
    } else {
      if (s.end == s.next.has_value()) invalid(at + ": exactly one of Next and End is required");
    }
    if (s.type == StateType::Task && s.resource.empty()) invalid(at + ": empty Resource");
    if (s.type == StateType::Parallel) {
      if (s.branches.empty()) invalid(at + ": Parallel without branches");
      for (std::size_t i = 0; i < s.branches.size(); ++i) {
        validate_doc(s.branches[i], at + " branch " + std::to_string(i));
      }
    }
    if (s.type == StateType::Wait && !(s.seconds >= 0.0)) invalid(at + ": negative Seconds");
    if (s.retry && (s.retry->max_attempts < 0 || !(s.retry->interval_seconds >= 0.0))) {
      invalid(at + ": negative retry parameters");
    }
    if (s.retry && s.type != StateType::Task && s.type != StateType::Parallel) {
      invalid(at + ": Retry is only allowed on Task and Parallel");
    }
    for (const auto& next : successors(s)) {
      if (!doc.states.contains(next)) invalid(at + ": transition to unknown state '" + next + "'");
    }
  }

  // Depth-first walk: grey states on the stack reveal cycles, unvisited
  // states afterwards are unreachable.
  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> mark;
  for (const auto& [name, s] : doc.states) mark[name] = Mark::White;
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    mark[name] = Mark::Grey;
    for (const auto& next : successors(doc.states.at(name))) {
      if (mark[next] == Mark::Grey) invalid(where + ": cycle through state '" + next + "'");
      if (mark[next] == Mark::White) visit(next);
    }
    mark[name] = Mark::Black;
  };
  visit(doc.start_at);
  for (const auto& [name, m] : mark) {
    if (m == Mark::White) invalid(where + ": state '" + name + "' is unreachable");
  }
}

Millis to_millis(double seconds) { return static_cast<Millis>(std::llround(seconds * 1000.0)); }

std::string function_of(const std::string& resource) {
  const auto colon = resource.rfind(':');
  return colon == std::string::npos ? resource : resource.substr(colon + 1);
}

class Compiler {
 public:
  explicit Compiler(const StateMachineDoc& doc) : doc_(doc) {}

  Node run() { return region(doc_.start_at, kEnd); }

 private:
  inline static const std::string kEnd = "\x1f$end";

  const std::set<std::string>& postdominators(const std::string& name) {
    if (const auto it = memo_.find(name); it != memo_.end()) return it->second;
    std::set<std::string> result;
    if (name == kEnd) {
      result = {kEnd};
    } else {
      auto next = successors(doc_.states.at(name));
      if (next.empty()) next.push_back(kEnd);
      result = postdominators(next.front());
      for (std::size_t i = 1; i < next.size(); ++i) {
        const auto& other = postdominators(next[i]);
        std::set<std::string> both;
        std::set_intersection(result.begin(), result.end(), other.begin(), other.end(),
                              std::inserter(both, both.end()));
        result = std::move(both);
      }
      result.insert(name);
    }
    return memo_.emplace(name, std::move(result)).first->second;
  }

  std::string join_point(const std::string& name) {
    std::string best = kEnd;
    std::size_t best_size = 0;
    for (const auto& candidate : postdominators(name)) {
      if (candidate == name) continue;
      const std::size_t size = postdominators(candidate).size();
      if (size > best_size) {
        best = candidate;
        best_size = size;
      }
    }
    return best;
  }

  Node region(std::string cur, const std::string& stop) {
    std::vector<Node> steps;
    while (cur != stop && cur != kEnd) {
      const State& s = doc_.states.at(cur);
      switch (s.type) {
        case StateType::Task:
          steps.push_back(with_retry(compose::task(function_of(s.resource)), s));
          break;
        case StateType::Parallel: {
          std::vector<Node> branches;
          for (const auto& b : s.branches) branches.push_back(Compiler(b).run());
          steps.push_back(with_retry(compose::parallel(std::move(branches)), s));
          break;
        }
        case StateType::Wait: steps.push_back(compose::wait(to_millis(s.seconds))); break;
        case StateType::Pass: break;
        case StateType::Choice: {
          const std::string join = join_point(cur);
          Node node = region(*s.default_next, join);
          for (auto rule = s.choices.rbegin(); rule != s.choices.rend(); ++rule) {
            node = compose::choice(rule->predicate, region(rule->next, join), std::move(node));
          }
          steps.push_back(std::move(node));
          cur = join;
          continue;
        }
      }
      cur = s.end ? kEnd : *s.next;
    }
    return normalize(CompositionSpec{compose::sequence(std::move(steps))}).root;
  }

  static Node with_retry(Node node, const State& s) {
    if (!s.retry || s.retry->max_attempts == 0) return node;
    return compose::retry(std::move(node), s.retry->max_attempts + 1, to_millis(s.retry->interval_seconds));
  }

  const StateMachineDoc& doc_;
  std::map<std::string, std::set<std::string>> memo_;
};

class Decompiler {
 public:
  StateMachineDoc build(const Node& root, const std::string& comment) {
    doc_.comment = comment;
    auto entry = emit(root, std::nullopt);
    doc_.start_at = entry ? *entry : pass_end();
    return std::move(doc_);
  }

 private:
  using Target = std::optional<std::string>;

  std::string add(State s, const Target& next) {
    const std::string name = "S" + std::to_string(++counter_);
    if (s.type != StateType::Choice) {
      s.next = next;
      s.end = !next.has_value();
    }
    doc_.states.emplace(name, std::move(s));
    return name;
  }

  std::string pass_end() { return add(State{}, std::nullopt); }

  Target emit(const Node& node, const Target& next) {
    if (const auto* t = std::get_if<Task>(&node.value)) {
      State s;
      s.type = StateType::Task;
      s.resource = t->function;
      return add(std::move(s), next);
    }
    if (const auto* w = std::get_if<Wait>(&node.value)) {
      State s;
      s.type = StateType::Wait;
      s.seconds = static_cast<double>(w->duration_ms) / 1000.0;
      return add(std::move(s), next);
    }
    if (const auto* seq = std::get_if<Sequence>(&node.value)) {
      Target cur = next;
      for (auto it = seq->steps.rbegin(); it != seq->steps.rend(); ++it) cur = emit(*it, cur);
      return cur;
    }
    if (const auto* rep = std::get_if<Repeat>(&node.value)) {
      Target cur = next;
      for (int i = 0; i < rep->count; ++i) cur = emit(*rep->body, cur);
      return cur;
    }
    if (const auto* par = std::get_if<Parallel>(&node.value)) {
      State s;
      s.type = StateType::Parallel;
      for (const auto& b : par->branches) s.branches.push_back(Decompiler().build(b, {}));
      return add(std::move(s), next);
    }
    if (const auto* ch = std::get_if<Choice>(&node.value)) {
      State s;
      s.type = StateType::Choice;
      auto then_entry = emit(*ch->then_branch, next);
      auto else_entry = emit(*ch->else_branch, next);
      s.choices.push_back({ch->predicate, then_entry ? *then_entry : pass_end()});
      s.default_next = else_entry ? *else_entry : pass_end();
      return add(std::move(s), next);
    }
    const auto& retry = std::get<Retry>(node.value);
    const Node& body = *retry.body;
    if (!body.is<Task>() && !body.is<Parallel>()) {
      throw Error(ErrorCode::UnsupportedConstruct, "retry is only expressible around a Task or Parallel state");
    }
    auto entry = emit(body, next);
    if (retry.max_attempts > 1) {
      doc_.states.at(*entry).retry =
          RetryPolicy{retry.max_attempts - 1, static_cast<double>(retry.backoff_ms) / 1000.0};
    }
    return entry;
  }

  StateMachineDoc doc_;
  int counter_ = 0;
};

}  // namespace

StateMachineDoc parse_state_machine(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
  StateMachineDoc doc = doc_from_json(j, "state machine");
  validate_state_machine(doc);
  return doc;
}

void validate_state_machine(const StateMachineDoc& doc) { validate_doc(doc, "state machine"); }

std::string serialize_state_machine(const StateMachineDoc& doc) { return doc_to_json(doc).dump(2); }

CompositionSpec compile(const StateMachineDoc& doc) {
  validate_state_machine(doc);
  return CompositionSpec{Compiler(doc).run()};
}

StateMachineDoc to_state_machine(const CompositionSpec& spec, const std::string& comment) {
  return Decompiler().build(spec.root, comment);
}

StateMachineDoc sequence_machine(int n, const std::string& resource) {
  if (n < 1) throw Error(ErrorCode::InvalidCount, "sequence machine needs n >= 1");
  StateMachineDoc doc;
  doc.comment = "Chain of " + std::to_string(n) + " tasks";
  doc.start_at = "1";
  for (int i = 1; i <= n; ++i) {
    State s;
    s.type = StateType::Task;
    s.resource = resource;
    if (i < n) {
      s.next = std::to_string(i + 1);
    } else {
      s.end = true;
    }
    doc.states.emplace(std::to_string(i), std::move(s));
  }
  return doc;
}

StateMachineDoc parallel_machine(int n, const std::string& resource) {
  if (n < 1) throw Error(ErrorCode::InvalidCount, "parallel machine needs n >= 1");
  State par;
  par.type = StateType::Parallel;
  par.end = true;
  for (int i = 1; i <= n; ++i) {
    StateMachineDoc branch;
    branch.start_at = std::to_string(i);
    State task;
    task.type = StateType::Task;
    task.resource = resource;
    task.end = true;
    branch.states.emplace(branch.start_at, std::move(task));
    par.branches.push_back(std::move(branch));
  }
  StateMachineDoc doc;
  doc.comment = std::to_string(n) + " tasks in one parallel state";
  doc.start_at = "Parallel";
  doc.states.emplace("Parallel", std::move(par));
  return doc;
}

}  // namespace faasflow
