#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "uxv/ctl.hpp"
#include "uxv/diagnostic.hpp"
#include "uxv/grafcet.hpp"
#include "uxv/plan.hpp"
#include "uxv/semantics.hpp"

namespace uxv {

using KindPair = std::pair<CommandKind, CommandKind>;

struct StructuralRequirements {
  std::set<CommandKind> first;     // a mission must begin with one of these
  std::set<CommandKind> last;      // ... and end with one of these
  std::set<CommandKind> contains;  // ... and contain each of these
  std::vector<KindPair> order_pairs;
};

inline StructuralRequirements parse_requirements(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJson(e.what());
  }
  if (!doc.is_object()) throw SchemaViolation("$", "requirements must be a JSON object");
  auto kind = [](const nlohmann::json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaViolation(path, "expected a command kind");
    auto k = command_kind_from_string(j.get<std::string>());
    if (!k) throw SchemaViolation(path, "unknown command kind '" + j.get<std::string>() + "'");
    return *k;
  };
  auto kinds = [&](const char* name) {
    std::set<CommandKind> out;
    if (!doc.contains(name)) return out;
    const auto& arr = doc[name];
    if (!arr.is_array()) throw SchemaViolation(name, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      out.insert(kind(arr[i], std::string(name) + "[" + std::to_string(i) + "]"));
    return out;
  };
  StructuralRequirements req{kinds("first"), kinds("last"), kinds("contains"), {}};
  if (doc.contains("order_pairs")) {
    const auto& arr = doc["order_pairs"];
    if (!arr.is_array()) throw SchemaViolation("order_pairs", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "order_pairs[" + std::to_string(i) + "]";
      if (!arr[i].is_array() || arr[i].size() != 2) throw SchemaViolation(path, "expected [kindA, kindB]");
      req.order_pairs.emplace_back(kind(arr[i][0], path + "[0]"), kind(arr[i][1], path + "[1]"));
    }
  }
  return req;
}

namespace detail {

inline std::string join_kinds(const std::set<CommandKind>& kinds) {
  std::string out;
  for (auto k : kinds) {
    if (!out.empty()) out += "/";
    out += to_string(k);
  }
  return out;
}

}  // namespace detail

// Walks every sequence depth-first from its initial step and compares the
// command kinds met on the way against the requirements.
inline std::vector<Diagnostic> check_structural(const Grafcet& g, const StructuralRequirements& req) {
  std::vector<Diagnostic> out;
  for (std::size_t m = 0; m < g.sequences.size(); ++m) {
    const auto& seq = g.sequences[m];
    const std::string loc = "missions[" + std::to_string(m) + "]";

    std::vector<CommandKind> visited;
    std::set<int> seen;
    std::vector<int> stack{seq.steps.front()};
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      if (!seen.insert(id).second) continue;
      if (const auto* s = g.find_step(id); s && s->continuous_action)
        visited.push_back(s->continuous_action->kind);
      if (const auto* t = g.outgoing(id); t && t->downstream) stack.push_back(*t->downstream);
    }

    auto fail = [&](DiagCode code, std::string msg) {
      out.push_back(Diagnostic{Severity::Error, code, loc, "mission " + seq.vehicle_id + " " + msg});
    };
    if (!req.first.empty() && (visited.empty() || !req.first.contains(visited.front())))
      fail(DiagCode::StructuralFirst, "does not begin with " + detail::join_kinds(req.first));
    if (!req.last.empty() && (visited.empty() || !req.last.contains(visited.back())))
      fail(DiagCode::StructuralLast, "does not end with " + detail::join_kinds(req.last));
    for (auto k : req.contains)
      if (std::find(visited.begin(), visited.end(), k) == visited.end())
        fail(DiagCode::StructuralContains, "contains no " + std::string(to_string(k)) + " command");
  }
  return out;
}

struct NamedFormula {
  std::string name;
  std::string category;  // mutex | order | liveness | user
  ctl::Formula formula;
  ctl::Expectation expect = ctl::Expectation::Hold;
};

struct OrderProperties {
  std::vector<NamedFormula> formulas;
  std::vector<Diagnostic> diagnostics;
};

inline const std::vector<KindPair>& default_order_pairs() {
  static const std::vector<KindPair> pairs{{CommandKind::Grab, CommandKind::Drop}};
  return pairs;
}

// For each command of kind A, AG(step_A -> AF step_B) against the next
// command of kind B in the same mission (matching object_id when both carry
// one).
inline OrderProperties gen_order_properties(const MissionPlan& plan,
                                            const std::vector<KindPair>& pairs = default_order_pairs()) {
  OrderProperties out;
  for (std::size_t m = 0; m < plan.missions.size(); ++m) {
    const auto& cmds = plan.missions[m].commands;
    for (const auto& [first, second] : pairs) {
      for (std::size_t i = 0; i < cmds.size(); ++i) {
        if (cmds[i].kind != first) continue;
        const auto object = cmds[i].text("object_id");
        std::optional<std::size_t> match;
        for (std::size_t j = i + 1; j < cmds.size() && !match; ++j) {
          if (cmds[j].kind != second) continue;
          const auto other = cmds[j].text("object_id");
          if (!object || !other || *object == *other) match = j;
        }
        if (!match) {
          out.diagnostics.push_back(
              Diagnostic{Severity::Error, DiagCode::MissingCounterpart,
                         detail::command_path(m, i),
                         std::string(to_string(first)) + " command " + std::to_string(cmds[i].id) +
                             " has no following " + std::string(to_string(second))});
          continue;
        }
        const int a = step_id_for(plan, {m, i});
        const int b = step_id_for(plan, {m, *match});
        out.formulas.push_back(NamedFormula{
            "order:" + std::string(to_string(first)) + "(" + std::to_string(cmds[i].id) + ")->" +
                std::string(to_string(second)) + "(" + std::to_string(cmds[*match].id) + ")",
            "order",
            ctl::Formula::AG(ctl::Formula::implies(ctl::Formula::step(a),
                                                   ctl::Formula::AF(ctl::Formula::step(b)))),
            ctl::Expectation::Hold});
      }
    }
  }
  return out;
}

inline constexpr double kDefaultMatchDistance = 0.5;  // metres

namespace detail {

// Steps during which a mission is in possession of an object: from each grab
// up to (excluding) the next drop of the same object; a grab with no later
// drop contributes only its own step.
inline std::map<std::string, std::vector<std::vector<int>>> custody_spans(const MissionPlan& plan,
                                                                          std::size_t m) {
  std::map<std::string, std::vector<std::vector<int>>> out;
  const auto& cmds = plan.missions[m].commands;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (cmds[i].kind != CommandKind::Grab) continue;
    const auto object = *cmds[i].text("object_id");
    std::vector<int> span{step_id_for(plan, {m, i})};
    for (std::size_t j = i + 1; j < cmds.size(); ++j) {
      if (cmds[j].kind == CommandKind::Drop && cmds[j].text("object_id") == object) break;
      if (j + 1 == cmds.size()) {
        span.resize(1);
        break;
      }
      span.push_back(step_id_for(plan, {m, j}));
    }
    out[object].push_back(std::move(span));
  }
  return out;
}

}  // namespace detail

// Mutual-exclusion invariants AG !(step_i & step_j) between missions:
//  * movement commands whose horizontal targets lie within `eps` of each
//    other; the movement step and its successor (the action performed on
//    arrival) both count as being at the target;
//  * steps in which two missions hold the same object (grab through the
//    step before the matching drop).
inline std::vector<NamedFormula> gen_mutex_properties(const MissionPlan& plan, const Grafcet& g,
                                                      double eps = kDefaultMatchDistance) {
  std::set<std::pair<int, int>> pairs;
  auto add = [&](int a, int b) {
    if (!g.find_step(a) || !g.find_step(b)) return;
    pairs.emplace(std::min(a, b), std::max(a, b));
  };

  for (std::size_t m1 = 0; m1 < plan.missions.size(); ++m1) {
    for (std::size_t m2 = m1 + 1; m2 < plan.missions.size(); ++m2) {
      const auto& c1 = plan.missions[m1].commands;
      const auto& c2 = plan.missions[m2].commands;
      for (std::size_t i = 0; i < c1.size(); ++i) {
        if (!is_movement(c1[i].kind)) continue;
        for (std::size_t j = 0; j < c2.size(); ++j) {
          if (!is_movement(c2[j].kind)) continue;
          const double dx = *c1[i].number("pos_x") - *c2[j].number("pos_x");
          const double dy = *c1[i].number("pos_y") - *c2[j].number("pos_y");
          if (std::hypot(dx, dy) > eps) continue;
          std::vector<int> s1{step_id_for(plan, {m1, i})}, s2{step_id_for(plan, {m2, j})};
          if (i + 1 < c1.size()) s1.push_back(s1.front() + 1);
          if (j + 1 < c2.size()) s2.push_back(s2.front() + 1);
          for (int a : s1)
            for (int b : s2) add(a, b);
        }
      }

      const auto spans1 = detail::custody_spans(plan, m1);
      const auto spans2 = detail::custody_spans(plan, m2);
      for (const auto& [object, list1] : spans1) {
        auto it = spans2.find(object);
        if (it == spans2.end()) continue;
        for (const auto& span1 : list1)
          for (const auto& span2 : it->second)
            for (int a : span1)
              for (int b : span2) add(a, b);
      }
    }
  }

  std::vector<NamedFormula> out;
  for (auto [a, b] : pairs)
    out.push_back(NamedFormula{
        "mutex:step_" + std::to_string(a) + "/step_" + std::to_string(b), "mutex",
        ctl::Formula::AG(ctl::Formula::negate(
            ctl::Formula::conj(ctl::Formula::step(a), ctl::Formula::step(b)))),
        ctl::Expectation::Hold});
  return out;
}

// EF(var==true) for every condition variable.
inline std::vector<NamedFormula> gen_condition_liveness(const Grafcet& g) {
  std::vector<NamedFormula> out;
  for (const auto& v : g.variables)
    out.push_back(NamedFormula{"liveness:" + v.name, "liveness",
                               ctl::Formula::EF(ctl::Formula::var(v.name, true)),
                               ctl::Expectation::Hold});
  return out;
}

inline std::vector<GConfig> check_deadlocks(const StateGraph& k) {
  std::vector<GConfig> out;
  for (auto s : k.deadlocks) out.push_back(k.states[s]);
  return out;
}

}  // namespace uxv
