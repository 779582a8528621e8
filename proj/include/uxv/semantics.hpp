#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "uxv/grafcet.hpp"

namespace uxv {

// A GRAFCET situation: the set of active steps plus the value of every
// declared variable (indexed like Grafcet::variables).
struct GConfig {
  std::vector<int> active_steps;  // sorted
  std::vector<bool> vars;

  auto operator<=>(const GConfig&) const = default;
  bool operator==(const GConfig&) const = default;

  bool is_active(int step) const {
    return std::binary_search(active_steps.begin(), active_steps.end(), step);
  }
};

inline GConfig initial_config(const Grafcet& g) {
  GConfig c;
  c.active_steps = g.initial_steps();
  std::sort(c.active_steps.begin(), c.active_steps.end());
  c.vars.assign(g.variables.size(), false);
  return c;
}

using SignalSet = std::set<std::int64_t>;  // finished command ids

namespace detail {

// Index-based view of a Grafcet used by the evolution rules.
class CompiledGrafcet {
 public:
  struct Trans {
    int id = 0;
    int upstream = 0;
    std::optional<int> downstream;
    std::optional<std::int64_t> signal;
    std::vector<std::size_t> vars;
  };

  explicit CompiledGrafcet(const Grafcet& g) {
    for (const auto& t : g.transitions) {
      Trans c{t.transition_id, t.upstream, t.downstream, t.condition.finished_signal, {}};
      for (const auto& v : t.condition.vars) c.vars.push_back(*g.variable_index(v));
      outgoing_[t.upstream].push_back(trans_.size());
      trans_.push_back(std::move(c));
    }
    for (const auto& s : g.steps) {
      auto& stored = stored_[s.step_id];
      for (const auto& v : s.stored_actions_on_deactivation) stored.push_back(*g.variable_index(v));
    }
  }

  const std::vector<Trans>& transitions() const { return trans_; }

  template <class Fn>
  void for_each_outgoing(const GConfig& c, Fn&& fn) const {
    for (int step : c.active_steps) {
      auto it = outgoing_.find(step);
      if (it == outgoing_.end()) continue;
      for (auto idx : it->second) fn(trans_[idx]);
    }
  }

  bool enabled(const Trans& t, const GConfig& c, const SignalSet& inputs) const {
    if (t.signal && !inputs.contains(*t.signal)) return false;
    for (auto v : t.vars)
      if (!c.vars[v]) return false;
    return true;
  }

  std::vector<int> enabled_ids(const GConfig& c, const SignalSet& inputs) const {
    std::vector<int> out;
    for_each_outgoing(c, [&](const Trans& t) {
      if (enabled(t, c, inputs)) out.push_back(t.id);
    });
    return out;
  }

  GConfig evolve(const GConfig& c, const SignalSet& inputs) const {
    std::vector<const Trans*> firing;
    for_each_outgoing(c, [&](const Trans& t) {
      if (enabled(t, c, inputs)) firing.push_back(&t);
    });
    if (firing.empty()) return c;

    GConfig next = c;
    std::set<int> active(c.active_steps.begin(), c.active_steps.end());
    for (const auto* t : firing) active.erase(t->upstream);
    for (const auto* t : firing) {
      if (t->downstream) active.insert(*t->downstream);
      if (auto it = stored_.find(t->upstream); it != stored_.end())
        for (auto v : it->second) next.vars[v] = true;
    }
    next.active_steps.assign(active.begin(), active.end());
    return next;
  }

  std::vector<std::int64_t> relevant_signals(const GConfig& c) const {
    std::set<std::int64_t> out;
    for_each_outgoing(c, [&](const Trans& t) {
      if (t.signal) out.insert(*t.signal);
    });
    return {out.begin(), out.end()};
  }

 private:
  std::vector<Trans> trans_;
  std::unordered_map<int, std::vector<std::size_t>> outgoing_;
  std::unordered_map<int, std::vector<std::size_t>> stored_;
};

struct GConfigHash {
  std::size_t operator()(const GConfig& c) const noexcept {
    std::size_t h = 1469598103934665603ull;
    auto mix = [&](std::size_t v) { h = (h ^ v) * 1099511628211ull; };
    for (int s : c.active_steps) mix(static_cast<std::size_t>(s));
    mix(0x9e3779b9u);
    for (bool b : c.vars) mix(b ? 2 : 1);
    return h;
  }
};

}  // namespace detail

// Transitions whose upstream step is active and whose condition holds under
// the given finished-signals and the configuration's variables.
inline std::set<int> enabled_transitions(const Grafcet& g, const GConfig& c, const SignalSet& inputs) {
  auto ids = detail::CompiledGrafcet(g).enabled_ids(c, inputs);
  return {ids.begin(), ids.end()};
}

// One evolution: every enabled transition fires at once. Stored actions of
// deactivated steps run; final transitions deactivate without successor.
inline GConfig evolve(const Grafcet& g, const GConfig& c, const SignalSet& inputs) {
  return detail::CompiledGrafcet(g).evolve(c, inputs);
}

// Explicit Kripke structure over reachable GRAFCET configurations. Models
// ctl::KripkeStructure; propositions are `step_<id>` followed by variables.
struct StateGraph {
  std::vector<GConfig> states;
  std::vector<std::vector<std::size_t>> edges;
  std::size_t initial = 0;
  std::vector<std::size_t> deadlocks;  // non-terminal sinks, before self-loops were added
  std::vector<int> step_ids;
  std::vector<std::string> variable_names;

  std::size_t state_count() const { return states.size(); }
  std::size_t initial_state() const { return initial; }
  const std::vector<std::size_t>& successors(std::size_t s) const { return edges[s]; }
  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& e : edges) n += e.size();
    return n;
  }

  std::optional<std::size_t> proposition(const std::string& name) const {
    if (name.rfind("step_", 0) == 0) {
      for (std::size_t i = 0; i < step_ids.size(); ++i)
        if (name == "step_" + std::to_string(step_ids[i])) return i;
      return std::nullopt;
    }
    for (std::size_t i = 0; i < variable_names.size(); ++i)
      if (variable_names[i] == name) return step_ids.size() + i;
    return std::nullopt;
  }

  bool holds(std::size_t s, std::size_t p) const {
    if (p < step_ids.size()) return states[s].is_active(step_ids[p]);
    return states[s].vars[p - step_ids.size()];
  }

  // Atomic propositions true in state s: `step_<id>` and `<var>==true`.
  std::vector<std::string> labels(std::size_t s) const {
    std::vector<std::string> out;
    for (int id : states[s].active_steps) out.push_back("step_" + std::to_string(id));
    for (std::size_t v = 0; v < variable_names.size(); ++v)
      if (states[s].vars[v]) out.push_back(variable_names[v] + "==true");
    return out;
  }
};

struct ExplorationOptions {
  std::size_t state_limit = 1'000'000;
};

// Breadth-first enumeration of reachable configurations. From each state,
// every subset of the currently relevant finished-signals is tried; moves
// that leave the configuration unchanged are not recorded as edges, so a
// command in progress is assumed to finish eventually. A state without
// outgoing moves gets a self-loop and, unless all sequences have ended, is
// recorded as a deadlock.
inline StateGraph build_state_graph(const Grafcet& g, const ExplorationOptions& opts = {}) {
  const detail::CompiledGrafcet cg(g);
  StateGraph k;
  for (const auto& s : g.steps) k.step_ids.push_back(s.step_id);
  for (const auto& v : g.variables) k.variable_names.push_back(v.name);

  std::unordered_map<GConfig, std::size_t, detail::GConfigHash> index;
  auto intern = [&](GConfig c) -> std::size_t {
    auto [it, inserted] = index.emplace(c, k.states.size());
    if (inserted) {
      if (k.states.size() >= opts.state_limit) throw StateLimitExceeded(opts.state_limit);
      k.states.push_back(std::move(c));
      k.edges.emplace_back();
    }
    return it->second;
  };

  k.initial = intern(initial_config(g));
  for (std::size_t s = 0; s < k.states.size(); ++s) {
    const GConfig current = k.states[s];
    const auto signals = cg.relevant_signals(current);
    std::set<std::size_t> succ;
    const std::size_t subsets = std::size_t{1} << signals.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      SignalSet inputs;
      for (std::size_t b = 0; b < signals.size(); ++b)
        if (mask & (std::size_t{1} << b)) inputs.insert(signals[b]);
      GConfig next = cg.evolve(current, inputs);
      if (next == current) continue;
      succ.insert(intern(std::move(next)));
    }
    if (succ.empty()) {
      if (!current.active_steps.empty()) k.deadlocks.push_back(s);
      succ.insert(s);
    }
    k.edges[s].assign(succ.begin(), succ.end());
  }
  return k;
}

inline nlohmann::json config_to_json(const StateGraph& k, const GConfig& c) {
  nlohmann::json vars = nlohmann::json::object();
  for (std::size_t v = 0; v < k.variable_names.size(); ++v) vars[k.variable_names[v]] = bool(c.vars[v]);
  return {{"active", c.active_steps}, {"vars", vars}};
}

// Debug dump: {states:[...], edges:[[i,j]...], labels:{...}, initial, deadlocks}.
inline nlohmann::json to_json(const StateGraph& k) {
  using nlohmann::json;
  json states = json::array(), edges = json::array(), labels = json::object();
  for (std::size_t s = 0; s < k.states.size(); ++s) {
    states.push_back(config_to_json(k, k.states[s]));
    for (auto t : k.edges[s]) edges.push_back({s, t});
    labels[std::to_string(s)] = k.labels(s);
  }
  return {{"states", states}, {"edges", edges}, {"labels", labels},
          {"initial", k.initial}, {"deadlocks", k.deadlocks}};
}

}  // namespace uxv
