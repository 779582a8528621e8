#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uxv/plan.hpp"

namespace uxv {

// Which command id a condition variable `cond<id>` is named after.
enum class CondVarNaming { ConditionedCommand, FulfillingCommand };

struct GrafcetOptions {
  CondVarNaming naming = CondVarNaming::ConditionedCommand;
};

struct CommandAction {
  std::int64_t command_id = 0;
  CommandKind kind = CommandKind::Start;
  bool operator==(const CommandAction&) const = default;
};

struct Step {
  int step_id = 0;
  bool is_initial = false;
  std::size_t sequence = 0;
  std::optional<CommandAction> continuous_action;
  std::vector<std::string> stored_actions_on_deactivation;  // variables set true
  bool operator==(const Step&) const = default;
};

// Conjunction of at most one command-finished signal and any number of
// boolean variables. An empty conjunction is the literal `true`.
struct CondExpr {
  std::optional<std::int64_t> finished_signal;
  std::vector<std::string> vars;

  bool operator==(const CondExpr&) const = default;
  bool is_true() const { return !finished_signal && vars.empty(); }

  std::string to_string() const {
    if (is_true()) return "true";
    std::string out;
    if (finished_signal) out = "cmd" + std::to_string(*finished_signal) + "Finished";
    for (const auto& v : vars) {
      if (!out.empty()) out += " & ";
      out += v;
    }
    return out;
  }
};

struct Transition {
  int transition_id = 0;
  int upstream = 0;
  std::optional<int> downstream;  // absent for the final transition of a sequence
  CondExpr condition;
  bool operator==(const Transition&) const = default;
};

struct BoolVar {
  std::string name;
  std::int64_t guarded_command = 0;
  std::int64_t fulfilling_command = 0;
  bool operator==(const BoolVar&) const = default;
};

// One sequence per mission; `steps` lists the chain from the initial step on.
struct Sequence {
  std::string vehicle_id;
  std::vector<int> steps;
  bool operator==(const Sequence&) const = default;
};

struct Grafcet {
  std::vector<Step> steps;
  std::vector<Transition> transitions;
  std::vector<BoolVar> variables;
  std::vector<Sequence> sequences;

  bool operator==(const Grafcet&) const = default;

  std::vector<int> initial_steps() const {
    std::vector<int> out;
    for (const auto& s : steps)
      if (s.is_initial) out.push_back(s.step_id);
    return out;
  }

  const Step* find_step(int id) const {
    for (const auto& s : steps)
      if (s.step_id == id) return &s;
    return nullptr;
  }

  const Transition* outgoing(int step_id) const {
    for (const auto& t : transitions)
      if (t.upstream == step_id) return &t;
    return nullptr;
  }

  std::optional<std::size_t> variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (variables[i].name == name) return i;
    return std::nullopt;
  }

  std::optional<int> step_of_command(std::int64_t command_id) const {
    for (const auto& s : steps)
      if (s.continuous_action && s.continuous_action->command_id == command_id) return s.step_id;
    return std::nullopt;
  }
};

// Step-id stride between sequences: 10, or the next power of ten when a
// mission has ten or more commands, so ids never collide across sequences.
inline int step_stride(const MissionPlan& plan) {
  std::size_t longest = 0;
  for (const auto& m : plan.missions) longest = std::max(longest, m.commands.size());
  int stride = 10;
  while (static_cast<std::size_t>(stride) <= longest) stride *= 10;
  return stride;
}

// Initial step of mission i is stride*(i+1); its k-th command (1-based) is
// stride*(i+1)+k.
inline int step_id_for(const MissionPlan& plan, CommandLocation loc) {
  return step_stride(plan) * static_cast<int>(loc.mission + 1) + static_cast<int>(loc.index + 1);
}

inline std::string condition_variable_name(const MissionCommand& conditioned, CondVarNaming naming) {
  const auto id = naming == CondVarNaming::ConditionedCommand ? conditioned.id
                                                              : conditioned.condition->after_command;
  return "cond" + std::to_string(id);
}

inline Grafcet build_grafcet(const MissionPlan& plan, const GrafcetOptions& opts = {}) {
  for (const auto& d : validate_plan(plan))
    if (d.severity == Severity::Error) throw InvalidPlan(format_diagnostic(d));

  Grafcet g;
  const int stride = step_stride(plan);
  for (std::size_t m = 0; m < plan.missions.size(); ++m) {
    const auto& mission = plan.missions[m];
    const int base = stride * static_cast<int>(m + 1);
    Sequence seq{mission.vehicle_id, {}};

    g.steps.push_back(Step{base, true, m, std::nullopt, {}});
    seq.steps.push_back(base);
    for (std::size_t k = 0; k < mission.commands.size(); ++k) {
      const auto& c = mission.commands[k];
      const int id = base + static_cast<int>(k + 1);
      g.steps.push_back(Step{id, false, m, CommandAction{c.id, c.kind}, {}});
      seq.steps.push_back(id);
    }
    for (std::size_t k = 0; k < seq.steps.size(); ++k) {
      Transition t;
      t.transition_id = seq.steps[k];
      t.upstream = seq.steps[k];
      if (k + 1 < seq.steps.size()) t.downstream = seq.steps[k + 1];
      if (k > 0) t.condition.finished_signal = mission.commands[k - 1].id;
      g.transitions.push_back(std::move(t));
    }
    g.sequences.push_back(std::move(seq));
  }

  auto transition_from = [&](int step) -> Transition& {
    return *std::find_if(g.transitions.begin(), g.transitions.end(),
                         [&](const Transition& t) { return t.upstream == step; });
  };
  auto step_ref = [&](int id) -> Step& {
    return *std::find_if(g.steps.begin(), g.steps.end(),
                         [&](const Step& s) { return s.step_id == id; });
  };

  for (std::size_t m = 0; m < plan.missions.size(); ++m) {
    const auto& cmds = plan.missions[m].commands;
    for (std::size_t k = 0; k < cmds.size(); ++k) {
      if (!cmds[k].condition) continue;
      const auto var = condition_variable_name(cmds[k], opts.naming);
      const auto fulfilling = *find_command(plan, cmds[k].condition->after_command);
      const int guarded_step = step_id_for(plan, {m, k});
      transition_from(guarded_step - 1).condition.vars.push_back(var);
      step_ref(step_id_for(plan, fulfilling)).stored_actions_on_deactivation.push_back(var);
      g.variables.push_back(BoolVar{var, cmds[k].id, cmds[k].condition->after_command});
    }
  }
  return g;
}

// Graphviz rendering: steps are boxes (initial steps double-bordered),
// transitions are filled bars labelled with their condition.
inline std::string render_dot(const Grafcet& g) {
  std::ostringstream out;
  out << "digraph grafcet {\n"
      << "  rankdir=TB;\n"
      << "  node [fontname=\"Helvetica\"];\n";
  for (const auto& s : g.steps) {
    out << "  s" << s.step_id << " [shape=box";
    if (s.is_initial) out << ", peripheries=2";
    out << ", label=\"" << s.step_id;
    if (s.continuous_action)
      out << "\\n" << to_string(s.continuous_action->kind) << " (" << s.continuous_action->command_id
          << ")";
    for (const auto& v : s.stored_actions_on_deactivation) out << "\\n" << v << ":=1 on exit";
    out << "\"];\n";
  }
  for (const auto& t : g.transitions) {
    out << "  t" << t.transition_id
        << " [shape=rect, style=filled, fillcolor=black, height=0.04, width=0.5, label=\"\", "
           "xlabel=\""
        << t.condition.to_string() << "\"];\n";
    out << "  s" << t.upstream << " -> t" << t.transition_id << " [arrowhead=none];\n";
    if (t.downstream) out << "  t" << t.transition_id << " -> s" << *t.downstream << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace uxv
