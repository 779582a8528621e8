#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "json.hpp"
#include "uxv/error.hpp"
#include "uxv/geometry.hpp"

namespace uxv {

enum class VehicleClass { UGV, UAV };

inline std::string_view to_string(VehicleClass k) { return k == VehicleClass::UGV ? "UGV" : "UAV"; }

inline std::optional<VehicleClass> vehicle_class_from_string(std::string_view s) {
  if (s == "UGV") return VehicleClass::UGV;
  if (s == "UAV") return VehicleClass::UAV;
  return std::nullopt;
}

struct RestrictedArea {
  std::string id;
  Polygon polygon;
  std::optional<double> z_min, z_max;

  bool in_band(double z) const {
    return (!z_min || z >= *z_min) && (!z_max || z <= *z_max);
  }
  // Boundary counts as inside.
  bool contains(Vec3 p) const { return in_band(p.z) && point_in_polygon(p.xy(), polygon); }
  bool contains_strictly(Vec3 p) const {
    return (!z_min || p.z > *z_min) && (!z_max || p.z < *z_max) &&
           point_strictly_in_polygon(p.xy(), polygon);
  }
};

struct VehicleFacts {
  VehicleClass klass = VehicleClass::UGV;
  Vec3 position;
  double heading = 0;  // radians, [0, 2pi)
  double speed = 0;    // m/s
  double vertical_rate = 0;
  Vec3 impending_position;
};

struct FactBase {
  std::map<std::string, VehicleFacts> vehicles;
  std::vector<RestrictedArea> areas;
  double time = 0;
};

inline double normalize_heading(double h) {
  constexpr double two_pi = 2 * std::numbers::pi;
  h = std::fmod(h, two_pi);
  return h < 0 ? h + two_pi : h;
}

// Dead reckoning over `horizon` seconds from position, course and speed.
inline Vec3 compute_impending_position(Vec3 pos, double heading, double speed, double horizon,
                                       double vertical_rate = 0) {
  const double d = speed * horizon;
  return {pos.x + d * std::cos(heading), pos.y + d * std::sin(heading), pos.z + vertical_rate * horizon};
}

inline void refresh_impending_positions(FactBase& fb, double horizon) {
  for (auto& [id, v] : fb.vehicles)
    v.impending_position =
        compute_impending_position(v.position, v.heading, v.speed, horizon, v.vertical_rate);
}

// ---------------------------------------------------------------------------
// Rules

enum class AtomKind { VehicleClass, HasPosition, HasImpendingPosition, RestrictedArea, IsWithin, VelocityOf };
enum class EffectKind { RaiseFault, RaiseImpendingFault, SetVelocityScaled, SetVelocityAbsolute };

// Rule argument: a `?variable`, a string constant or a numeric constant.
struct Term {
  enum class Kind { Variable, Text, Number };
  Kind kind = Kind::Text;
  std::string text;
  double number = 0;

  static Term variable(std::string name) { return {Kind::Variable, std::move(name), 0}; }
  static Term constant(std::string s) { return {Kind::Text, std::move(s), 0}; }
  static Term numeric(double v) { return {Kind::Number, {}, v}; }
  bool is_variable() const { return kind == Kind::Variable; }
};

struct PremiseAtom {
  AtomKind kind;
  std::vector<Term> args;
};

struct Effect {
  EffectKind kind;
  Term vehicle;
  std::string message;  // RaiseFault / RaiseImpendingFault
  double value = 0;     // scale factor or absolute speed
};

struct Rule {
  std::string name;
  std::vector<PremiseAtom> premise;
  std::vector<Effect> conclusion;
};

enum class EventSeverity { ImpendingFault, Fault };

inline std::string_view to_string(EventSeverity s) {
  return s == EventSeverity::Fault ? "Fault" : "ImpendingFault";
}

struct RuleEvent {
  double time = 0;
  std::string rule;
  std::string vehicle;
  EventSeverity severity = EventSeverity::ImpendingFault;
  std::string message;
  std::string effect;  // applied counteraction, "none" for pure notifications

  bool operator==(const RuleEvent&) const = default;
  auto operator<=>(const RuleEvent& o) const {
    return std::tie(time, rule, vehicle, severity, message, effect) <=>
           std::tie(o.time, o.rule, o.vehicle, o.severity, o.message, o.effect);
  }
};

inline nlohmann::json to_json(const RuleEvent& e) {
  return {{"t", e.time},         {"rule", e.rule},       {"vehicle", e.vehicle},
          {"severity", std::string(to_string(e.severity))}, {"message", e.message},
          {"effect", e.effect}};
}

namespace detail {

struct AtomSignature {
  const char* name;
  AtomKind kind;
  std::size_t arity;
};

inline constexpr AtomSignature kAtoms[] = {
    {"VehicleClass", AtomKind::VehicleClass, 2},
    {"HasPosition", AtomKind::HasPosition, 2},
    {"HasImpendingPosition", AtomKind::HasImpendingPosition, 2},
    {"RestrictedArea", AtomKind::RestrictedArea, 1},
    {"IsWithin", AtomKind::IsWithin, 2},
    {"VelocityOf", AtomKind::VelocityOf, 2},
};

struct EffectSignature {
  const char* name;
  EffectKind kind;
};

inline constexpr EffectSignature kEffects[] = {
    {"RaiseFault", EffectKind::RaiseFault},
    {"RaiseImpendingFault", EffectKind::RaiseImpendingFault},
    {"SetVelocityScaled", EffectKind::SetVelocityScaled},
    {"SetVelocityAbsolute", EffectKind::SetVelocityAbsolute},
};

inline Term term_from_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return Term::numeric(j.get<double>());
  if (!j.is_string()) throw RuleParseError(where + ": arguments must be strings or numbers");
  auto s = j.get<std::string>();
  if (!s.empty() && s.front() == '?') return Term::variable(std::move(s));
  return Term::constant(std::move(s));
}

// Checks premise variable flow and conclusion binding; positions consumed by
// IsWithin must already be bound by an earlier atom.
inline void check_bindings(const Rule& r) {
  std::set<std::string> bound;
  for (const auto& a : r.premise) {
    if (a.kind == AtomKind::IsWithin && a.args[0].is_variable() && !bound.contains(a.args[0].text))
      throw UnboundVariable(r.name, a.args[0].text);
    for (const auto& t : a.args)
      if (t.is_variable()) bound.insert(t.text);
  }
  for (const auto& e : r.conclusion)
    if (e.vehicle.is_variable() && !bound.contains(e.vehicle.text)) throw UnboundVariable(r.name, e.vehicle.text);
}

}  // namespace detail

inline Rule rule_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw RuleParseError("rule must be an object");
  Rule r;
  r.name = j.value("name", std::string{});
  if (r.name.empty()) throw RuleParseError("rule without name");
  if (!j.contains("premise") || !j["premise"].is_array() || !j.contains("conclusion") ||
      !j["conclusion"].is_array())
    throw RuleParseError(r.name + ": premise and conclusion must be arrays");

  for (const auto& ja : j["premise"]) {
    const auto name = ja.value("atom", std::string{});
    const auto* sig = std::find_if(std::begin(detail::kAtoms), std::end(detail::kAtoms),
                                   [&](const auto& s) { return name == s.name; });
    if (sig == std::end(detail::kAtoms)) throw RuleParseError(r.name + ": unknown atom '" + name + "'");
    PremiseAtom atom{sig->kind, {}};
    if (!ja.contains("args") || !ja["args"].is_array() || ja["args"].size() != sig->arity)
      throw RuleParseError(r.name + ": " + name + " expects " + std::to_string(sig->arity) + " arguments");
    for (const auto& t : ja["args"]) atom.args.push_back(detail::term_from_json(t, r.name));
    bool position_slot = atom.kind == AtomKind::HasPosition || atom.kind == AtomKind::HasImpendingPosition;
    if ((position_slot && !atom.args[1].is_variable()) ||
        (atom.kind == AtomKind::IsWithin && !atom.args[0].is_variable()))
      throw RuleParseError(r.name + ": positions must be variables");
    r.premise.push_back(std::move(atom));
  }

  for (const auto& je : j["conclusion"]) {
    const auto name = je.value("effect", std::string{});
    const auto* sig = std::find_if(std::begin(detail::kEffects), std::end(detail::kEffects),
                                   [&](const auto& s) { return name == s.name; });
    if (sig == std::end(detail::kEffects)) throw RuleParseError(r.name + ": unknown effect '" + name + "'");
    if (!je.contains("args") || !je["args"].is_array() || je["args"].size() != 2)
      throw RuleParseError(r.name + ": " + name + " expects 2 arguments");
    Effect e{sig->kind, detail::term_from_json(je["args"][0], r.name), {}, 0};
    const auto& arg = je["args"][1];
    if (e.kind == EffectKind::RaiseFault || e.kind == EffectKind::RaiseImpendingFault) {
      if (!arg.is_string()) throw RuleParseError(r.name + ": " + name + " needs a message");
      e.message = arg.get<std::string>();
    } else {
      if (!arg.is_number()) throw RuleParseError(r.name + ": " + name + " needs a number");
      e.value = arg.get<double>();
      if (e.kind == EffectKind::SetVelocityScaled && !(e.value > 0 && e.value <= 1))
        throw RuleParseError(r.name + ": scale factor must lie in (0, 1]");
      if (e.kind == EffectKind::SetVelocityAbsolute && !(e.value >= 0))
        throw RuleParseError(r.name + ": absolute speed must be non-negative");
    }
    r.conclusion.push_back(std::move(e));
  }
  detail::check_bindings(r);
  return r;
}

// Rules file: [{name, premise:[{atom, args}], conclusion:[{effect, args}]}].
inline std::vector<Rule> parse_rules(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw RuleParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_array()) throw RuleParseError("rules file must be a JSON array");
  std::vector<Rule> out;
  for (const auto& j : doc) out.push_back(rule_from_json(j));
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

struct RuleEvaluation {
  std::map<std::string, double> speeds;  // resolved speed per counteracted vehicle
  std::vector<RuleEvent> events;
};

namespace detail {

using Value = std::variant<std::string, Vec3, double>;
using Env = std::map<std::string, Value>;

class Matcher {
 public:
  Matcher(const FactBase& fb, const Rule& rule) : fb_(fb), rule_(rule) {}

  template <class Fn>
  void for_each_match(Fn&& fn) {
    Env env;
    match(0, env, fn);
  }

 private:
  // Unifies a term with a value; returns false on mismatch.
  static bool unify(const Term& t, const Value& v, Env& env) {
    if (t.is_variable()) {
      auto it = env.find(t.text);
      if (it == env.end()) {
        env.emplace(t.text, v);
        return true;
      }
      return it->second == v;
    }
    if (t.kind == Term::Kind::Number) {
      auto* d = std::get_if<double>(&v);
      return d && *d == t.number;
    }
    auto* s = std::get_if<std::string>(&v);
    return s && *s == t.text;
  }

  const Value* lookup(const Term& t, const Env& env) const {
    if (!t.is_variable()) return nullptr;
    auto it = env.find(t.text);
    return it == env.end() ? nullptr : &it->second;
  }

  template <class Fn>
  void each_vehicle(const Term& t, const Env& env, Fn&& fn) const {
    std::optional<std::string> fixed;
    if (const auto* v = lookup(t, env)) {
      const auto* s = std::get_if<std::string>(v);
      if (!s) return;
      fixed = *s;
    } else if (!t.is_variable()) {
      fixed = t.text;
    }
    for (const auto& [id, facts] : fb_.vehicles)
      if (!fixed || *fixed == id) fn(id, facts);
  }

  template <class Fn>
  void match(std::size_t i, Env& env, Fn& fn) {
    if (i == rule_.premise.size()) {
      fn(static_cast<const Env&>(env));
      return;
    }
    const auto& atom = rule_.premise[i];
    auto try_bind = [&](std::initializer_list<std::pair<const Term*, Value>> bindings) {
      Env next = env;
      for (const auto& [term, value] : bindings)
        if (!unify(*term, value, next)) return;
      match(i + 1, next, fn);
    };

    switch (atom.kind) {
      case AtomKind::VehicleClass:
        each_vehicle(atom.args[0], env, [&](const std::string& id, const VehicleFacts& f) {
          try_bind({{&atom.args[0], id}, {&atom.args[1], std::string(to_string(f.klass))}});
        });
        break;
      case AtomKind::HasPosition:
      case AtomKind::HasImpendingPosition:
        each_vehicle(atom.args[0], env, [&](const std::string& id, const VehicleFacts& f) {
          const Vec3 p = atom.kind == AtomKind::HasPosition ? f.position : f.impending_position;
          try_bind({{&atom.args[0], id}, {&atom.args[1], p}});
        });
        break;
      case AtomKind::VelocityOf:
        each_vehicle(atom.args[0], env, [&](const std::string& id, const VehicleFacts& f) {
          try_bind({{&atom.args[0], id}, {&atom.args[1], f.speed}});
        });
        break;
      case AtomKind::RestrictedArea:
        for (const auto& area : fb_.areas) try_bind({{&atom.args[0], area.id}});
        break;
      case AtomKind::IsWithin: {
        const auto* pos = lookup(atom.args[0], env);
        const auto* p = pos ? std::get_if<Vec3>(pos) : nullptr;
        if (!p) throw UnboundVariable(rule_.name, atom.args[0].text);
        for (const auto& area : fb_.areas)
          if (area.contains(*p)) try_bind({{&atom.args[1], area.id}});
        break;
      }
    }
  }

  const FactBase& fb_;
  const Rule& rule_;
};

inline std::string describe_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace detail

// Evaluates every rule against the same snapshot, then resolves velocity
// effects per vehicle: min(absolute speeds..., speed * product of factors).
// A rule fires at most once per vehicle per evaluation.
inline RuleEvaluation evaluate_rules(const FactBase& fb, const std::vector<Rule>& rules) {
  struct Counteraction {
    std::vector<double> absolutes;
    double factor = 1.0;
    bool any = false;
  };
  std::map<std::string, Counteraction> pending;
  RuleEvaluation out;

  for (const auto& rule : rules) {
    detail::check_bindings(rule);
    std::set<std::string> fired;
    detail::Matcher(fb, rule).for_each_match([&](const detail::Env& env) {
      auto resolve = [&](const Term& t) -> std::string {
        if (!t.is_variable()) return t.text;
        return std::get<std::string>(env.at(t.text));
      };
      std::set<std::string> targets;
      for (const auto& e : rule.conclusion) targets.insert(resolve(e.vehicle));

      for (const auto& vehicle : targets) {
        if (!fb.vehicles.contains(vehicle) || !fired.insert(vehicle).second) continue;
        RuleEvent ev{fb.time, rule.name, vehicle, EventSeverity::ImpendingFault, {}, {}};
        bool raised = false;
        std::string effect;
        for (const auto& e : rule.conclusion) {
          if (resolve(e.vehicle) != vehicle) continue;
          auto& c = pending[vehicle];
          switch (e.kind) {
            case EffectKind::RaiseFault:
              ev.severity = EventSeverity::Fault;
              [[fallthrough]];
            case EffectKind::RaiseImpendingFault:
              if (!ev.message.empty()) ev.message += "; ";
              ev.message += e.message;
              raised = true;
              break;
            case EffectKind::SetVelocityScaled:
              c.factor *= e.value;
              c.any = true;
              effect += (effect.empty() ? "" : ", ") + std::string("speed*") + detail::describe_number(e.value);
              break;
            case EffectKind::SetVelocityAbsolute:
              c.absolutes.push_back(e.value);
              c.any = true;
              effect += (effect.empty() ? "" : ", ") + std::string("speed=") + detail::describe_number(e.value);
              break;
          }
        }
        if (!raised) ev.message = "counteraction applied";
        ev.effect = effect.empty() ? "none" : effect;
        out.events.push_back(std::move(ev));
      }
    });
  }

  for (const auto& [vehicle, c] : pending) {
    if (!c.any) continue;
    double speed = fb.vehicles.at(vehicle).speed * c.factor;
    for (double a : c.absolutes) speed = std::min(speed, a);
    out.speeds[vehicle] = speed;
  }
  return out;
}

}  // namespace uxv
