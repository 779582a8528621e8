#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "uxv/diagnostic.hpp"
#include "uxv/error.hpp"

namespace uxv {

enum class CommandKind { Start, Stop, TakeOff, Land, DriveTo, FlyTo, Grab, Drop };

inline constexpr CommandKind kAllCommandKinds[] = {
    CommandKind::Start, CommandKind::Stop,    CommandKind::TakeOff, CommandKind::Land,
    CommandKind::DriveTo, CommandKind::FlyTo, CommandKind::Grab,    CommandKind::Drop};

inline std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::Start: return "start";
    case CommandKind::Stop: return "stop";
    case CommandKind::TakeOff: return "takeOff";
    case CommandKind::Land: return "land";
    case CommandKind::DriveTo: return "driveTo";
    case CommandKind::FlyTo: return "flyTo";
    case CommandKind::Grab: return "grab";
    case CommandKind::Drop: return "drop";
  }
  return "?";
}

inline std::optional<CommandKind> command_kind_from_string(std::string_view s) {
  for (auto k : kAllCommandKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline bool is_movement(CommandKind k) {
  return k == CommandKind::DriveTo || k == CommandKind::FlyTo;
}

// Scalar parameter value. Integers and reals are kept apart so that a plan
// serializes back exactly as it was read.
using ParamValue = std::variant<std::int64_t, double, bool, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

struct ConditionRef {
  std::int64_t after_command = 0;
  bool operator==(const ConditionRef&) const = default;
};

struct MissionCommand {
  std::int64_t id = 0;
  CommandKind kind = CommandKind::Start;
  ParamMap params;
  std::int64_t timestamp = 0;
  std::optional<ConditionRef> condition;

  bool operator==(const MissionCommand&) const = default;

  std::optional<double> number(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) return std::nullopt;
    if (auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&it->second)) return *d;
    return std::nullopt;
  }

  std::optional<std::string> text(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) return std::nullopt;
    if (auto* s = std::get_if<std::string>(&it->second)) return *s;
    return std::nullopt;
  }
};

struct Mission {
  std::string vehicle_id;
  std::vector<MissionCommand> commands;
  bool operator==(const Mission&) const = default;
};

struct MissionPlan {
  std::string plan_id;
  std::vector<Mission> missions;

  bool operator==(const MissionPlan&) const = default;

  std::size_t command_count() const {
    std::size_t n = 0;
    for (const auto& m : missions) n += m.commands.size();
    return n;
  }

  std::size_t condition_count() const {
    std::size_t n = 0;
    for (const auto& m : missions)
      for (const auto& c : m.commands) n += c.condition.has_value();
    return n;
  }
};

struct CommandLocation {
  std::size_t mission = 0;
  std::size_t index = 0;
  bool operator==(const CommandLocation&) const = default;
};

inline std::optional<CommandLocation> find_command(const MissionPlan& plan, std::int64_t id) {
  for (std::size_t m = 0; m < plan.missions.size(); ++m) {
    const auto& cmds = plan.missions[m].commands;
    for (std::size_t i = 0; i < cmds.size(); ++i)
      if (cmds[i].id == id) return CommandLocation{m, i};
  }
  return std::nullopt;
}

namespace detail {

inline std::string command_path(std::size_t m, std::size_t i) {
  return "missions[" + std::to_string(m) + "].commands[" + std::to_string(i) + "]";
}

struct LocatedDiagnostic {
  Diagnostic diag;
  std::size_t mission = 0;
  std::size_t command = 0;
};

inline std::vector<LocatedDiagnostic> validate_located(const MissionPlan& plan) {
  std::vector<LocatedDiagnostic> out;
  auto error = [&](DiagCode code, std::string loc, std::string msg, std::size_t m = 0,
                   std::size_t i = 0) {
    out.push_back({Diagnostic{Severity::Error, code, std::move(loc), std::move(msg)}, m, i});
  };

  if (plan.missions.empty()) error(DiagCode::EmptyPlan, "missions", "plan has no missions");

  std::set<std::string> vehicles;
  std::map<std::int64_t, std::size_t> seen_ids;
  for (std::size_t m = 0; m < plan.missions.size(); ++m) {
    const auto& mission = plan.missions[m];
    const std::string mpath = "missions[" + std::to_string(m) + "]";
    if (!vehicles.insert(mission.vehicle_id).second)
      error(DiagCode::DuplicateVehicle, mpath + ".vehicle_id",
            "vehicle '" + mission.vehicle_id + "' has more than one mission", m);
    if (mission.commands.empty())
      error(DiagCode::EmptyMission, mpath + ".commands", "mission has no commands", m);

    for (std::size_t i = 0; i < mission.commands.size(); ++i) {
      const auto& c = mission.commands[i];
      const std::string cpath = command_path(m, i);
      if (!seen_ids.emplace(c.id, m).second)
        error(DiagCode::DuplicateCommandId, cpath + ".id",
              "command id " + std::to_string(c.id) + " is not unique", m, i);
      if (c.timestamp < 0)
        error(DiagCode::NegativeTimestamp, cpath + ".t", "timestamp is negative", m, i);
      if (i > 0 && c.timestamp <= mission.commands[i - 1].timestamp)
        error(DiagCode::NonMonotonicTimestamps, cpath + ".t",
              "timestamps of mission '" + mission.vehicle_id + "' are not strictly ascending", m,
              i);

      auto require_number = [&](const char* name) {
        if (!c.number(name))
          error(DiagCode::MissingParameter, cpath + ".params." + name,
                std::string(to_string(c.kind)) + " requires numeric parameter " + name, m, i);
      };
      if (is_movement(c.kind)) {
        require_number("pos_x");
        require_number("pos_y");
        if (c.kind == CommandKind::FlyTo) require_number("pos_z");
        auto vel = c.number("vel");
        if (!vel)
          require_number("vel");
        else if (!(*vel > 0.0))
          error(DiagCode::InvalidParameter, cpath + ".params.vel", "vel must be positive", m, i);
      }
      if (c.kind == CommandKind::Grab || c.kind == CommandKind::Drop) {
        if (!c.text("object_id"))
          error(DiagCode::MissingParameter, cpath + ".params.object_id",
                std::string(to_string(c.kind)) + " requires string parameter object_id", m, i);
      }
    }
  }

  for (std::size_t m = 0; m < plan.missions.size(); ++m) {
    const auto& cmds = plan.missions[m].commands;
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      if (!cmds[i].condition) continue;
      const std::string cpath = command_path(m, i) + ".condition.after";
      auto target = find_command(plan, cmds[i].condition->after_command);
      if (!target)
        error(DiagCode::DanglingCondition, cpath,
              "condition references unknown command " +
                  std::to_string(cmds[i].condition->after_command),
              m, i);
      else if (target->mission == m)
        error(DiagCode::SelfMissionCondition, cpath, "condition targets own mission", m, i);
    }
  }
  return out;
}

}  // namespace detail

// Checks every plan invariant; an empty result means the plan is valid.
inline std::vector<Diagnostic> validate_plan(const MissionPlan& plan) {
  std::vector<Diagnostic> out;
  for (auto& ld : detail::validate_located(plan)) out.push_back(std::move(ld.diag));
  return out;
}

// ---- JSON ----

namespace detail {

using nlohmann::json;

[[noreturn]] inline void schema(const std::string& path, const std::string& msg) {
  throw SchemaViolation(path, msg);
}

inline const json& field(const json& obj, const char* name, const std::string& path) {
  auto it = obj.find(name);
  if (it == obj.end()) schema(path + "." + name, "missing required field");
  return *it;
}

inline std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema(path, "expected an integer");
  return j.get<std::int64_t>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) schema(path, "expected a string");
  return j.get<std::string>();
}

inline ParamValue param_from_json(const json& j, const std::string& path) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  schema(path, "parameter values must be scalars");
}

inline json param_to_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

}  // namespace detail

// Builds a plan from the JSON document without checking cross-field
// invariants; parse_plan adds those.
inline MissionPlan plan_from_json(const nlohmann::json& doc) {
  using detail::field;
  using detail::schema;
  if (!doc.is_object()) schema("$", "plan must be a JSON object");

  MissionPlan plan;
  if (auto it = doc.find("plan_id"); it != doc.end()) plan.plan_id = detail::as_string(*it, "plan_id");

  const auto& missions = field(doc, "missions", "$");
  if (!missions.is_array()) schema("missions", "expected an array");
  for (std::size_t m = 0; m < missions.size(); ++m) {
    const std::string mpath = "missions[" + std::to_string(m) + "]";
    const auto& jm = missions[m];
    if (!jm.is_object()) schema(mpath, "expected an object");
    Mission mission;
    mission.vehicle_id = detail::as_string(field(jm, "vehicle_id", mpath), mpath + ".vehicle_id");
    const auto& cmds = field(jm, "commands", mpath);
    if (!cmds.is_array()) schema(mpath + ".commands", "expected an array");
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      const std::string cpath = detail::command_path(m, i);
      const auto& jc = cmds[i];
      if (!jc.is_object()) schema(cpath, "expected an object");
      MissionCommand c;
      c.id = detail::as_int(field(jc, "id", cpath), cpath + ".id");
      c.timestamp = detail::as_int(field(jc, "t", cpath), cpath + ".t");
      auto kind_name = detail::as_string(field(jc, "kind", cpath), cpath + ".kind");
      auto kind = command_kind_from_string(kind_name);
      if (!kind) schema(cpath + ".kind", "unknown command kind '" + kind_name + "'");
      c.kind = *kind;
      if (auto it = jc.find("params"); it != jc.end()) {
        if (!it->is_object()) schema(cpath + ".params", "expected an object");
        for (const auto& [name, value] : it->items())
          c.params.emplace(name, detail::param_from_json(value, cpath + ".params." + name));
      }
      if (auto it = jc.find("condition"); it != jc.end() && !it->is_null()) {
        if (!it->is_object()) schema(cpath + ".condition", "expected an object");
        c.condition = ConditionRef{
            detail::as_int(field(*it, "after", cpath + ".condition"), cpath + ".condition.after")};
      }
      mission.commands.push_back(std::move(c));
    }
    plan.missions.push_back(std::move(mission));
  }
  return plan;
}

// Parses and validates a plan document. Invariant violations are raised as
// the most specific error type available.
inline MissionPlan parse_plan(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJson(e.what());
  }
  MissionPlan plan = plan_from_json(doc);
  for (const auto& ld : detail::validate_located(plan)) {
    if (ld.diag.severity != Severity::Error) continue;
    switch (ld.diag.code) {
      case DiagCode::DanglingCondition:
      case DiagCode::SelfMissionCondition:
        throw DanglingCondition(plan.missions[ld.mission].commands[ld.command].id);
      case DiagCode::NonMonotonicTimestamps:
        throw NonMonotonicTimestamps(plan.missions[ld.mission].vehicle_id);
      default:
        throw SchemaViolation(ld.diag.location, ld.diag.message);
    }
  }
  return plan;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline MissionPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_text_file(path));
}

inline nlohmann::json to_json(const MissionPlan& plan) {
  using nlohmann::json;
  json missions = json::array();
  for (const auto& m : plan.missions) {
    json cmds = json::array();
    for (const auto& c : m.commands) {
      json params = json::object();
      for (const auto& [k, v] : c.params) params[k] = detail::param_to_json(v);
      json jc = {{"id", c.id}, {"t", c.timestamp}, {"kind", std::string(to_string(c.kind))},
                 {"params", params}};
      if (c.condition) jc["condition"] = {{"after", c.condition->after_command}};
      cmds.push_back(std::move(jc));
    }
    missions.push_back({{"vehicle_id", m.vehicle_id}, {"commands", std::move(cmds)}});
  }
  return {{"plan_id", plan.plan_id}, {"missions", std::move(missions)}};
}

inline std::string serialize_plan(const MissionPlan& plan) { return to_json(plan).dump(2); }

}  // namespace uxv
