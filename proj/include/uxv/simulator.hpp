#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "uxv/grafcet.hpp"
#include "uxv/plan.hpp"
#include "uxv/planner.hpp"
#include "uxv/rules.hpp"

namespace uxv {

struct SimParams {
  double margin = 1.0;         // detour clearance around restricted areas, m
  double pickup_radius = 0.5;  // horizontal grab distance, m
  double z_cruise = 10.0;      // default takeOff altitude, m
  double climb_rate = 1.0;     // m/s
  bool replan = true;
};

struct SimVehicle {
  std::string id;
  VehicleClass kind = VehicleClass::UGV;
  Vec3 position;
  double heading = 0;
  double speed = 0;
  double commanded_speed = 0;
  double max_speed = 1;
  std::vector<MissionCommand> mission;
  std::size_t program_counter = 0;
  std::optional<std::string> carried;
  std::map<std::string, bool> condition_flags;

  // execution state of the current command
  bool command_started = false;
  std::vector<Vec2> route;
  std::size_t route_index = 0;
  double vertical_rate = 0;
  bool counteracted = false;  // a rule changed the speed in the previous tick
  bool anomaly_reported = false;

  bool done() const { return program_counter >= mission.size(); }
};

struct ConditionLink {
  std::string vehicle;
  std::string flag;
};

struct World {
  std::vector<SimVehicle> vehicles;  // kept sorted by id
  std::vector<RestrictedArea> areas;
  std::map<std::string, Vec3> objects;
  double dt = 0.1;
  double horizon = 3.0;
  std::uint64_t rng_seed = 0;
  SimParams params;

  std::uint64_t tick = 0;
  double time = 0;
  std::map<std::int64_t, std::vector<ConditionLink>> condition_links;  // fulfilling command -> flags

  SimVehicle* find_vehicle(const std::string& id) {
    for (auto& v : vehicles)
      if (v.id == id) return &v;
    return nullptr;
  }
  bool missions_complete() const {
    return std::all_of(vehicles.begin(), vehicles.end(), [](const SimVehicle& v) { return v.done(); });
  }
};

struct VehicleSample {
  std::string id;
  Vec3 position;
  double heading = 0;
  double speed = 0;
  std::string command;
};

struct SimEvent {
  std::string vehicle;
  std::string kind;  // start | complete | replan | anomaly | intrusion
  std::string detail;
};

// State at the start of a tick (pose at `time`, speed applied over the tick)
// plus everything that happened during it.
struct TickRecord {
  std::uint64_t tick = 0;
  double time = 0;
  std::vector<VehicleSample> vehicles;
  std::vector<RuleEvent> rule_events;
  std::vector<SimEvent> events;
};

struct Trace {
  std::vector<TickRecord> ticks;
};

// ---------------------------------------------------------------------------
// World file

namespace detail {

inline Vec3 vec3_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) throw InvalidWorld(where + ": expected [x, y] or [x, y, z]");
  for (const auto& c : j)
    if (!c.is_number()) throw InvalidWorld(where + ": coordinates must be numbers");
  Vec3 v{j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0};
  if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
    throw InvalidWorld(where + ": coordinates must be finite");
  return v;
}

inline double positive(const nlohmann::json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number() || !(doc[key].get<double>() > 0))
    throw InvalidWorld(std::string(key) + " must be a positive number");
  return doc[key].get<double>();
}

}  // namespace detail

inline World world_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidWorld("world must be a JSON object");
  World w;
  w.dt = detail::positive(doc, "dt", 0.1);
  w.horizon = detail::positive(doc, "horizon", 3.0);
  w.params.margin = detail::positive(doc, "margin", w.params.margin);
  w.params.pickup_radius = detail::positive(doc, "pickup_radius", w.params.pickup_radius);
  w.params.z_cruise = detail::positive(doc, "z_cruise", w.params.z_cruise);
  w.params.climb_rate = detail::positive(doc, "climb_rate", w.params.climb_rate);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) throw InvalidWorld("seed must be an integer");
    w.rng_seed = doc["seed"].get<std::uint64_t>();
  }

  if (!doc.contains("vehicles") || !doc["vehicles"].is_array()) throw InvalidWorld("vehicles must be an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc["vehicles"].size(); ++i) {
    const auto& jv = doc["vehicles"][i];
    const std::string where = "vehicles[" + std::to_string(i) + "]";
    SimVehicle v;
    v.id = jv.value("id", std::string{});
    if (v.id.empty() || !ids.insert(v.id).second) throw InvalidWorld(where + ": missing or duplicate id");
    auto kind = vehicle_class_from_string(jv.value("kind", std::string{}));
    if (!kind) throw InvalidWorld(where + ": kind must be UGV or UAV");
    v.kind = *kind;
    v.position = detail::vec3_from_json(jv.value("position", nlohmann::json::array()), where + ".position");
    if (v.kind == VehicleClass::UGV && v.position.z != 0) throw InvalidWorld(where + ": UGV must start at z = 0");
    v.heading = normalize_heading(jv.value("heading", 0.0));
    v.max_speed = detail::positive(jv, "max_speed", 1.0);
    w.vehicles.push_back(std::move(v));
  }
  std::sort(w.vehicles.begin(), w.vehicles.end(),
            [](const SimVehicle& a, const SimVehicle& b) { return a.id < b.id; });

  if (doc.contains("areas")) {
    for (std::size_t i = 0; i < doc["areas"].size(); ++i) {
      const auto& ja = doc["areas"][i];
      const std::string where = "areas[" + std::to_string(i) + "]";
      RestrictedArea a;
      a.id = ja.value("id", where);
      for (const auto& p : ja.value("polygon", nlohmann::json::array())) {
        auto v = detail::vec3_from_json(p, where + ".polygon");
        a.polygon.push_back(v.xy());
      }
      try {
        require_nondegenerate(a.polygon);
      } catch (const DegeneratePolygon& e) {
        throw InvalidWorld(where + ": " + e.what());
      }
      if (!is_simple(a.polygon)) throw InvalidWorld(where + ": polygon is not simple");
      if (ja.contains("z_min")) a.z_min = ja["z_min"].get<double>();
      if (ja.contains("z_max")) a.z_max = ja["z_max"].get<double>();
      w.areas.push_back(std::move(a));
    }
  }
  if (doc.contains("objects")) {
    for (const auto& [id, pos] : doc["objects"].items())
      w.objects[id] = detail::vec3_from_json(pos, "objects." + id);
  }
  return w;
}

inline World parse_world(std::string_view text) {
  try {
    return world_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidWorld(std::string("malformed world file: ") + e.what());
  }
}

inline World load_world(const std::filesystem::path& path) { return parse_world(read_text_file(path)); }

// Hands each mission to the vehicle of the same id and wires the
// cross-mission condition flags.
inline void assign_missions(World& w, const MissionPlan& plan) {
  for (const auto& m : plan.missions) {
    auto* v = w.find_vehicle(m.vehicle_id);
    if (!v) throw InvalidWorld("plan references vehicle '" + m.vehicle_id + "' missing from the world");
    v->mission = m.commands;
    v->program_counter = 0;
    v->command_started = false;
    for (const auto& c : m.commands) {
      if (!c.condition) continue;
      const auto flag = condition_variable_name(c, CondVarNaming::ConditionedCommand);
      v->condition_flags[flag] = false;
      w.condition_links[c.condition->after_command].push_back({v->id, flag});
    }
  }
}

// ---------------------------------------------------------------------------
// Stepping

namespace detail {

inline std::string command_label(const MissionCommand& c) {
  return std::string(to_string(c.kind)) + "#" + std::to_string(c.id);
}

inline double target_altitude(const SimVehicle& v, const MissionCommand& c, const SimParams& p) {
  if (v.kind == VehicleClass::UGV) return 0.0;
  if (auto z = c.number("pos_z")) return *z;
  if (c.kind == CommandKind::TakeOff) return p.z_cruise;
  if (c.kind == CommandKind::Land) return 0.0;
  return v.position.z;
}

inline std::vector<Polygon> obstacles_for(const World& w, double z0, double z1) {
  std::vector<Polygon> out;
  const double lo = std::min(z0, z1), hi = std::max(z0, z1);
  for (const auto& a : w.areas)
    if ((!a.z_max || lo <= *a.z_max) && (!a.z_min || hi >= *a.z_min)) out.push_back(a.polygon);
  return out;
}

inline void start_command(World& w, SimVehicle& v, TickRecord& rec) {
  const auto& c = v.mission[v.program_counter];
  v.command_started = true;
  v.anomaly_reported = false;
  v.route.clear();
  v.route_index = 0;
  rec.events.push_back({v.id, "start", command_label(c)});
  if (!is_movement(c.kind)) return;

  const Vec2 goal{*c.number("pos_x"), *c.number("pos_y")};
  const auto obstacles = obstacles_for(w, v.position.z, target_altitude(v, c, w.params));
  if (w.params.replan)
    v.route = HullDetourPlanner(w.params.margin).plan(v.position.xy(), goal, obstacles);
  else
    v.route = StraightLinePlanner().plan(v.position.xy(), goal, obstacles);
  if (v.route.size() > 1)
    rec.events.push_back({v.id, "replan", command_label(c) + " via " + std::to_string(v.route.size() - 1) +
                                              " detour waypoint(s)"});
}

inline Vec3 waypoint3(const SimVehicle& v, const MissionCommand& c, const SimParams& p) {
  const Vec2 wp = v.route[v.route_index];
  return {wp.x, wp.y, target_altitude(v, c, p)};
}

// Sets heading, commanded speed and vertical rate for the current command;
// returns false while the command waits on its condition.
inline bool prepare(World& w, SimVehicle& v, TickRecord& rec) {
  v.vertical_rate = 0;
  v.commanded_speed = 0;
  if (v.done()) return true;
  const auto& c = v.mission[v.program_counter];
  if (!v.command_started) {
    if (c.condition && !v.condition_flags[condition_variable_name(c, CondVarNaming::ConditionedCommand)])
      return false;
    start_command(w, v, rec);
  }
  if (is_movement(c.kind)) {
    v.commanded_speed = std::min(*c.number("vel"), v.max_speed);
    const Vec3 delta = waypoint3(v, c, w.params) - v.position;
    if (std::hypot(delta.x, delta.y) > 0) v.heading = normalize_heading(std::atan2(delta.y, delta.x));
  } else if (v.kind == VehicleClass::UAV && (c.kind == CommandKind::TakeOff || c.kind == CommandKind::Land)) {
    const double dz = target_altitude(v, c, w.params) - v.position.z;
    v.vertical_rate = dz > 0 ? w.params.climb_rate : (dz < 0 ? -w.params.climb_rate : 0.0);
  }
  return true;
}

inline void anomaly(SimVehicle& v, TickRecord& rec, const std::string& what) {
  if (v.anomaly_reported) return;
  v.anomaly_reported = true;
  rec.events.push_back({v.id, "anomaly", what});
}

// Advances the current command by one tick; returns the id of a command
// completed in this tick, if any.
inline std::optional<std::int64_t> execute(World& w, SimVehicle& v, TickRecord& rec) {
  if (v.done() || !v.command_started) return std::nullopt;
  const auto& c = v.mission[v.program_counter];
  bool complete = false;

  switch (c.kind) {
    case CommandKind::Start:
    case CommandKind::Stop: complete = true; break;
    case CommandKind::DriveTo:
    case CommandKind::FlyTo: {
      const Vec3 target = waypoint3(v, c, w.params);
      const Vec3 delta = target - v.position;
      const double dist = norm(delta);
      const double step = v.speed * w.dt;
      if (dist <= step) {
        v.position = target;
        if (++v.route_index == v.route.size()) complete = true;
      } else if (step > 0) {
        v.position = v.position + delta * (step / dist);
      }
      break;
    }
    case CommandKind::TakeOff:
    case CommandKind::Land: {
      const double z = target_altitude(v, c, w.params);
      const double step = w.params.climb_rate * w.dt;
      if (std::abs(z - v.position.z) <= step) {
        v.position.z = z;
        complete = true;
      } else {
        v.position.z += z > v.position.z ? step : -step;
      }
      break;
    }
    case CommandKind::Grab: {
      const auto object = *c.text("object_id");
      auto it = w.objects.find(object);
      bool held = std::any_of(w.vehicles.begin(), w.vehicles.end(),
                              [&](const SimVehicle& o) { return o.carried == object; });
      if (it == w.objects.end())
        anomaly(v, rec, "unknown object " + object);
      else if (v.carried || held)
        anomaly(v, rec, "cannot grab " + object + ": already carrying or held");
      else if (distance(it->second.xy(), v.position.xy()) > w.params.pickup_radius)
        anomaly(v, rec, "object " + object + " out of reach");
      else {
        v.carried = object;
        complete = true;
      }
      break;
    }
    case CommandKind::Drop: {
      const auto object = *c.text("object_id");
      if (v.carried != object) {
        anomaly(v, rec, "cannot drop " + object + ": not carried");
      } else {
        v.carried.reset();
        w.objects[object] = {v.position.x, v.position.y, 0.0};
        complete = true;
      }
      break;
    }
  }
  if (v.carried) w.objects[*v.carried] = v.position;
  if (!complete) return std::nullopt;

  rec.events.push_back({v.id, "complete", command_label(c)});
  const auto id = c.id;
  ++v.program_counter;
  v.command_started = false;
  v.route.clear();
  v.route_index = 0;
  return id;
}

}  // namespace detail

// Advances the world by one tick:
//  1. prepare commands and refresh the fact base (incl. dead reckoning),
//  2. evaluate rules on that snapshot and apply speed counteractions,
//  3. move / act,
//  4. publish completions to condition flags (visible from the next tick).
inline World step_world(const World& current, const std::vector<Rule>& rules, TickRecord* record = nullptr) {
  World w = current;
  TickRecord rec;
  rec.tick = w.tick;
  rec.time = static_cast<double>(w.tick) * w.dt;

  std::vector<bool> waiting(w.vehicles.size());
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) waiting[i] = !detail::prepare(w, w.vehicles[i], rec);

  FactBase fb;
  fb.time = rec.time;
  fb.areas = w.areas;
  std::vector<double> proposed(w.vehicles.size());
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
    auto& v = w.vehicles[i];
    proposed[i] = v.counteracted ? std::min(v.speed, v.commanded_speed) : v.commanded_speed;
    VehicleFacts f;
    f.klass = v.kind;
    f.position = v.position;
    f.heading = v.heading;
    f.speed = proposed[i];
    f.vertical_rate = v.vertical_rate;
    if (!v.done() && v.command_started && is_movement(v.mission[v.program_counter].kind)) {
      const Vec3 delta = detail::waypoint3(v, v.mission[v.program_counter], w.params) - v.position;
      const double len = norm(delta);
      f.vertical_rate = len > 0 ? proposed[i] * delta.z / len : 0.0;
    }
    fb.vehicles.emplace(v.id, f);
  }
  refresh_impending_positions(fb, w.horizon);

  auto eval = evaluate_rules(fb, rules);
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
    auto& v = w.vehicles[i];
    if (auto it = eval.speeds.find(v.id); it != eval.speeds.end()) {
      v.speed = it->second;
      v.counteracted = true;
    } else {
      v.speed = proposed[i];
      v.counteracted = false;
    }
    std::string label = "done";
    if (!v.done()) {
      label = detail::command_label(v.mission[v.program_counter]);
      if (waiting[i]) label = "wait:" + label;
    }
    rec.vehicles.push_back({v.id, v.position, v.heading, v.speed, label});
    for (const auto& a : w.areas)
      if (a.contains_strictly(v.position)) rec.events.push_back({v.id, "intrusion", a.id});
  }
  rec.rule_events = std::move(eval.events);

  std::vector<std::int64_t> completed;
  for (auto& v : w.vehicles)
    if (auto id = detail::execute(w, v, rec)) completed.push_back(*id);
  for (auto id : completed) {
    auto it = w.condition_links.find(id);
    if (it == w.condition_links.end()) continue;
    for (const auto& link : it->second)
      if (auto* v = w.find_vehicle(link.vehicle)) v->condition_flags[link.flag] = true;
  }

  ++w.tick;
  w.time = static_cast<double>(w.tick) * w.dt;
  if (record) *record = std::move(rec);
  return w;
}

struct Verdict {
  bool mission_success = false;
  bool safety = true;  // no Fault events and no intrusion into a restricted area
  bool timeout = false;
  std::size_t fault_events = 0;
  std::size_t impending_fault_events = 0;
  std::size_t intrusion_samples = 0;
  std::size_t ticks = 0;
  double time = 0;
};

struct RunResult {
  Trace trace;
  Verdict verdict;
  World final_world;
};

inline RunResult run(World world, const MissionPlan& plan, const std::vector<Rule>& rules, std::size_t max_ticks) {
  assign_missions(world, plan);
  RunResult r;
  while (!world.missions_complete() && r.trace.ticks.size() < max_ticks) {
    TickRecord rec;
    world = step_world(world, rules, &rec);
    r.trace.ticks.push_back(std::move(rec));
  }
  auto& v = r.verdict;
  v.mission_success = world.missions_complete();
  v.timeout = !v.mission_success;
  v.ticks = r.trace.ticks.size();
  v.time = world.time;
  for (const auto& t : r.trace.ticks) {
    for (const auto& e : t.rule_events)
      (e.severity == EventSeverity::Fault ? v.fault_events : v.impending_fault_events)++;
    for (const auto& e : t.events) v.intrusion_samples += e.kind == "intrusion";
  }
  v.safety = v.fault_events == 0 && v.intrusion_samples == 0;
  r.final_world = std::move(world);
  return r;
}

// ---------------------------------------------------------------------------
// Trace output

namespace detail {

inline std::string number_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline nlohmann::json to_json(const TickRecord& t) {
  using nlohmann::json;
  json vehicles = json::array(), rule_events = json::array(), events = json::array();
  for (const auto& v : t.vehicles)
    vehicles.push_back({{"id", v.id},         {"x", v.position.x},   {"y", v.position.y},
                        {"z", v.position.z},  {"heading", v.heading}, {"speed", v.speed},
                        {"cmd", v.command}});
  for (const auto& e : t.rule_events) rule_events.push_back(to_json(e));
  for (const auto& e : t.events) events.push_back({{"vehicle", e.vehicle}, {"kind", e.kind}, {"detail", e.detail}});
  return {{"tick", t.tick}, {"t", t.time}, {"vehicles", vehicles}, {"rule_events", rule_events}, {"events", events}};
}

inline std::string trace_to_jsonl(const Trace& trace) {
  std::string out;
  for (const auto& t : trace.ticks) out += to_json(t).dump() + "\n";
  return out;
}

// One row per vehicle per tick: t,vehicle,x,y,z,speed,cmd,event
inline std::string trace_to_csv(const Trace& trace) {
  using detail::number_text;
  std::string out = "t,vehicle,x,y,z,speed,cmd,event\n";
  for (const auto& t : trace.ticks) {
    for (const auto& v : t.vehicles) {
      std::string events;
      auto add = [&](const std::string& s) {
        if (!events.empty()) events += "|";
        events += s;
      };
      for (const auto& e : t.rule_events)
        if (e.vehicle == v.id) add(std::string(to_string(e.severity)) + ":" + e.rule);
      for (const auto& e : t.events)
        if (e.vehicle == v.id) add(e.kind + ":" + e.detail);
      out += number_text(t.time) + "," + detail::csv_field(v.id) + "," + number_text(v.position.x) + "," +
             number_text(v.position.y) + "," + number_text(v.position.z) + "," + number_text(v.speed) + "," +
             detail::csv_field(v.command) + "," + detail::csv_field(events) + "\n";
    }
  }
  return out;
}

// Rule event log, one RuleEvent per line.
inline std::string rule_events_to_jsonl(const Trace& trace) {
  std::string out;
  for (const auto& t : trace.ticks)
    for (const auto& e : t.rule_events) out += to_json(e).dump() + "\n";
  return out;
}

inline nlohmann::json to_json(const Verdict& v) {
  return {{"mission_success", v.mission_success}, {"safety", v.safety},
          {"timeout", v.timeout},                 {"fault_events", v.fault_events},
          {"impending_fault_events", v.impending_fault_events},
          {"intrusion_samples", v.intrusion_samples},
          {"ticks", v.ticks},                     {"time", v.time}};
}

}  // namespace uxv
