// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "support/ctl_oracle.hpp"
#include "support/geometry_oracle.hpp"
#include "support/random_plan.hpp"
#include "uxv/uxv.hpp"

namespace {

const std::string kData = UXV_DATA_DIR;

// Pinned limits.
constexpr double kRuntimeLimitSeconds = 5.0;
constexpr double kHalvingRelTolerance = 1e-12;
constexpr double kDeliveryTolerance = 0.5;  // m
constexpr double kBoundaryTolerance = 1e-9;  // m, oracle-side boundary band
constexpr int kRandomKripke = 500;
constexpr int kFormulasPerKripke = 20;
constexpr std::size_t kMaxStates = 8, kMaxAtoms = 3, kMaxFormulaDepth = 4;
constexpr int kPolygonPairs = 1000;
constexpr std::size_t kMaxPolygonVertices = 12;
constexpr int kRandomPlans = 100;
constexpr std::size_t kMaxMissions = 4, kMaxCommands = 8;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

uxv::World usecase_world() { return uxv::load_world(kData + "/usecase/world.json"); }
uxv::MissionPlan usecase_plan() { return uxv::load_plan(kData + "/usecase/plan.json"); }

std::vector<uxv::Rule> load_rules(std::initializer_list<const char*> files) {
  std::vector<uxv::Rule> out;
  for (const char* f : files) {
    auto part = uxv::parse_rules(uxv::read_text_file(kData + "/rules/" + f));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

Outcome ac1_usecase() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto plan = usecase_plan();
  const auto g = uxv::build_grafcet(plan);

  std::set<int> ids;
  for (const auto& s : g.steps) ids.insert(s.step_id);
  const std::set<int> expected_ids{10, 11, 12, 13, 14, 15, 16, 17, 20, 21, 22, 23, 24, 25, 26, 27};
  const bool vars_ok = g.variables.size() == 1 && g.variables[0].name == "cond352";

  uxv::VerifyOptions opts;
  opts.requirements = uxv::parse_requirements(uxv::read_text_file(kData + "/usecase/requirements.json"));
  const auto report = uxv::verify_plan(plan, opts);
  auto passed = [&](const std::string& name) {
    for (const auto& p : report.properties)
      if (p.name == name) return p.holds && p.passed;
    return false;
  };
  const bool mutex_ok = passed("mutex:step_13/step_23") && passed("mutex:step_14/step_23") &&
                        passed("mutex:step_13/step_24") && passed("mutex:step_14/step_24");
  const bool live_ok = passed("liveness:cond352");
  const bool order_ok = passed("order:grab(343)->drop(345)") && passed("order:grab(354)->drop(356)") &&
                        report.count("order") == 2;
  const bool structural_ok = !uxv::has_errors(report.diagnostics);
  const bool deadlock_ok = report.deadlocks.empty();
  const double secs = seconds_since(t0);

  const bool pass = ids == expected_ids && vars_ok && mutex_ok && live_ok && order_ok && structural_ok &&
                    deadlock_ok && report.status == uxv::VerifyStatus::Ok && secs < kRuntimeLimitSeconds;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "steps=%zu vars=%zu mutex4=%d liveness=%d order=%d structural=%d deadlocks=%zu t=%.3fs",
                g.steps.size(), g.variables.size(), mutex_ok, live_ok, order_ok, structural_ok,
                report.deadlocks.size(), secs);
  return {pass, buf};
}

Outcome ac2_deadlock() {
  const auto t0 = std::chrono::steady_clock::now();
  uxv::VerifyInputs in;
  in.plan = kData + "/deadlock/plan.json";
  const auto report = uxv::run_verify(in);
  const auto text = uxv::format_report(report);
  const double secs = seconds_since(t0);
  const int code = uxv::exit_code(report.status);
  const bool printed = text.find("blocked: active {10, 20}") != std::string::npos;
  char buf[160];
  std::snprintf(buf, sizeof buf, "exit=%d deadlocks=%zu printed=%d t=%.3fs", code, report.deadlocks.size(),
                printed, secs);
  return {code == 1 && !report.deadlocks.empty() && printed && secs < kRuntimeLimitSeconds, buf};
}

Outcome ac3_ctl_oracle() {
  std::mt19937_64 rng(20240501);
  std::size_t pairs = 0, agree = 0;
  for (int i = 0; i < kRandomKripke; ++i) {
    const auto k = oracle::random_kripke(rng, kMaxStates, kMaxAtoms);
    const uxv::ctl::Checker<uxv::ctl::ExplicitKripke> checker(k);
    oracle::NaiveCtl naive(k);
    for (int j = 0; j < kFormulasPerKripke; ++j) {
      const auto f = oracle::random_formula(rng, k.propositions, kMaxFormulaDepth);
      const auto res = checker.check(f);
      bool same = res.holds == naive.holds_initially(f);
      for (std::size_t s = 0; s < k.state_count(); ++s) same = same && res.satisfied[s] == naive.holds(f, s);
      ++pairs;
      agree += same;
    }
  }
  return {agree == pairs, std::to_string(agree) + "/" + std::to_string(pairs) + " (structure, formula) pairs agree"};
}

Outcome ac4_rule_arithmetic() {
  const auto rules = load_rules({"r1_ugv.json", "r2_ugv.json"});
  const uxv::RestrictedArea area{"RA", {{18, -1}, {26, -1}, {26, 12}, {18, 12}}, {}, {}};
  auto speed_after = [&](uxv::Vec3 pos, double heading, double speed) {
    uxv::FactBase fb;
    fb.areas = {area};
    uxv::VehicleFacts f;
    f.position = pos;
    f.heading = heading;
    f.speed = speed;
    fb.vehicles["UGV"] = f;
    uxv::refresh_impending_positions(fb, 3.0);
    auto eval = uxv::evaluate_rules(fb, rules);
    auto it = eval.speeds.find("UGV");
    return it == eval.speeds.end() ? speed : it->second;
  };
  // 2 m/s for 3 s: from x=14 the forecast lands at x=20 (inside); from x=20
  // heading back west the forecast lands at x=14 (outside).
  const double impending = speed_after({14, 5, 0}, 0.0, 2.0);
  const double inside = speed_after({20, 5, 0}, std::numbers::pi, 2.0);
  const double both = speed_after({20, 5, 0}, 0.0, 2.0);

  // Ten ticks, each with the impending position pinned inside the area and
  // the previous tick's output fed back as the current speed.
  double h = 2.0;
  for (int i = 0; i < 10; ++i) {
    uxv::FactBase fb;
    fb.areas = {area};
    uxv::VehicleFacts f;
    f.position = {17.5, 5, 0};
    f.heading = 0.0;
    f.speed = h;
    fb.vehicles["UGV"] = f;
    fb.vehicles["UGV"].impending_position = {20, 5, 0};
    auto eval = uxv::evaluate_rules(fb, rules);
    h = eval.speeds.count("UGV") ? eval.speeds.at("UGV") : h;
  }
  const double bound = 2.0 * std::pow(0.5, 10);
  const bool halving_ok = h <= bound * (1 + kHalvingRelTolerance);

  char buf[200];
  std::snprintf(buf, sizeof buf, "impending=%.17g inside=%.17g both=%.17g after10=%.17g bound=%.17g", impending,
                inside, both, h, bound);
  return {impending == 1.0 && inside == 0.0 && both == 0.0 && halving_ok, buf};
}

Outcome ac5_geometry() {
  std::mt19937_64 rng(777);
  int agree = 0, boundary = 0;
  for (int i = 0; i < kPolygonPairs; ++i) {
    const auto poly = oracle::random_simple_polygon(rng, kMaxPolygonVertices);
    const auto p = oracle::random_probe(rng, poly);
    const auto pts = oracle::to_points(poly);
    const bool expected = oracle::inside_or_on({p.x, p.y}, pts, kBoundaryTolerance);
    for (std::size_t e = 0; e < pts.size(); ++e)
      if (oracle::point_segment_distance({p.x, p.y}, pts[e], pts[(e + 1) % pts.size()]) <= kBoundaryTolerance) {
        ++boundary;
        break;
      }
    agree += uxv::point_in_polygon(p, poly) == expected;
  }
  return {agree == kPolygonPairs, std::to_string(agree) + "/" + std::to_string(kPolygonPairs) +
                                      " agree (" + std::to_string(boundary) + " boundary probes)"};
}

Outcome ac6_end_to_end() {
  const auto plan = usecase_plan();
  const auto world = usecase_world();
  const auto full = load_rules({"r1_ugv.json", "r2_ugv.json", "uav.json"});
  const std::size_t max_ticks = 100000;

  const auto run1 = uxv::run(world, plan, full, max_ticks);
  const auto run2 = uxv::run(world, plan, full, max_ticks);
  const bool deterministic = uxv::trace_to_jsonl(run1.trace) == uxv::trace_to_jsonl(run2.trace);

  std::size_t strictly_inside = 0;
  auto count_inside = [&](uxv::Vec3 pos) {
    for (const auto& a : world.areas) {
      const auto pts = oracle::to_points(a.polygon);
      const oracle::P p{pos.x, pos.y};
      bool on_edge = false;
      for (std::size_t e = 0; e < pts.size(); ++e)
        on_edge = on_edge || oracle::point_segment_distance(p, pts[e], pts[(e + 1) % pts.size()]) <= kBoundaryTolerance;
      if (!on_edge && oracle::winding_number(p, pts) != 0 && a.in_band(pos.z)) ++strictly_inside;
    }
  };
  for (const auto& t : run1.trace.ticks)
    for (const auto& v : t.vehicles) count_inside(v.position);
  for (const auto& v : run1.final_world.vehicles) count_inside(v.position);

  // Delivery target: the horizontal target of the move preceding the last drop.
  uxv::Vec2 target;
  for (const auto& m : plan.missions)
    for (std::size_t i = 1; i < m.commands.size(); ++i)
      if (m.commands[i].kind == uxv::CommandKind::Drop && uxv::is_movement(m.commands[i - 1].kind))
        target = {*m.commands[i - 1].number("pos_x"), *m.commands[i - 1].number("pos_y")};
  const auto pkg = run1.final_world.objects.at("pkg");
  const double miss = uxv::distance(pkg.xy(), target);

  // Forced violation: straight-line paths, R1 removed.
  auto forced_world = world;
  forced_world.params.replan = false;
  const auto forced = uxv::run(forced_world, plan, load_rules({"r2_ugv.json", "uav.json"}), 3000);
  std::string offender;
  for (const auto& t : forced.trace.ticks)
    for (const auto& e : t.rule_events)
      if (offender.empty() && e.severity == uxv::EventSeverity::Fault) offender = e.vehicle;
  bool stopped = !offender.empty();
  bool entered = false;
  std::size_t inside_ticks = 0;
  for (const auto& t : forced.trace.ticks) {
    for (const auto& v : t.vehicles) {
      if (v.id != offender) continue;
      entered = entered || oracle::inside_or_on({v.position.x, v.position.y},
                                                oracle::to_points(world.areas[0].polygon), kBoundaryTolerance);
      if (entered) {
        ++inside_ticks;
        stopped = stopped && v.speed == 0.0;
      }
    }
  }

  char buf[300];
  std::snprintf(buf, sizeof buf,
                "success=%d faults=%zu inside_samples=%zu delivery_miss=%.3gm deterministic=%d | forced: faults=%zu "
                "offender=%s inside_ticks=%zu speed0=%d",
                run1.verdict.mission_success, run1.verdict.fault_events, strictly_inside, miss, deterministic,
                forced.verdict.fault_events, offender.c_str(), inside_ticks, stopped);
  const bool pass = run1.verdict.mission_success && strictly_inside == 0 && miss <= kDeliveryTolerance &&
                    deterministic && forced.verdict.fault_events >= 1 && entered && stopped;
  return {pass, buf};
}

Outcome ac7_transformation() {
  std::mt19937_64 rng(4242);
  int ok = 0;
  std::size_t total_states = 0;
  for (int i = 0; i < kRandomPlans; ++i) {
    const auto plan = oracle::random_plan(rng, kMaxMissions, kMaxCommands);
    if (uxv::has_errors(uxv::validate_plan(plan))) continue;
    const auto g = uxv::build_grafcet(plan);
    std::size_t commands = 0, conditions = 0;
    for (const auto& m : plan.missions)
      for (const auto& c : m.commands) {
        ++commands;
        conditions += c.condition.has_value();
      }
    bool good = g.steps.size() == plan.missions.size() + commands && g.variables.size() == conditions;
    const auto k = uxv::build_state_graph(g);
    total_states += k.state_count();
    for (std::size_t s = 0; s < k.state_count() && good; ++s)
      for (auto t : k.successors(s))
        for (std::size_t v = 0; v < g.variables.size(); ++v)
          good = good && (!k.states[s].vars[v] || k.states[t].vars[v]);
    ok += good;
  }
  return {ok == kRandomPlans,
          std::to_string(ok) + "/" + std::to_string(kRandomPlans) + " plans (" + std::to_string(total_states) +
              " reachable states checked)"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"AC1 use-case reproduction", ac1_usecase},
      {"AC2 deadlock detection", ac2_deadlock},
      {"AC3 CTL oracle equivalence", ac3_ctl_oracle},
      {"AC4 rule arithmetic", ac4_rule_arithmetic},
      {"AC5 geometry vs winding number", ac5_geometry},
      {"AC6 end-to-end safety", ac6_end_to_end},
      {"AC7 transformation invariants", ac7_transformation},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  return failed;
}
