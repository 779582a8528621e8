#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "uxv/ctl.hpp"
#include "uxv/diagnostic.hpp"
#include "uxv/grafcet.hpp"
#include "uxv/plan.hpp"
#include "uxv/properties.hpp"
#include "uxv/rules.hpp"
#include "uxv/semantics.hpp"
#include "uxv/simulator.hpp"

namespace uxv {

inline constexpr int kReportSchemaVersion = 1;

enum class VerifyStatus { Ok, Violated, InputError, StateLimit };

inline int exit_code(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Ok: return 0;
    case VerifyStatus::Violated: return 1;
    case VerifyStatus::InputError: return 2;
    case VerifyStatus::StateLimit: return 3;
  }
  return 2;
}

struct PropertyOutcome {
  std::string name;
  std::string category;
  std::string formula;
  ctl::Expectation expect = ctl::Expectation::Hold;
  bool holds = false;
  bool passed = false;
  std::optional<ctl::Evidence> evidence;
};

struct VerifyReport {
  VerifyStatus status = VerifyStatus::Ok;
  std::string error;  // set for InputError and StateLimit
  std::string plan_id;
  std::size_t steps = 0, transitions = 0, variables = 0;
  std::size_t states = 0, edges = 0;
  std::vector<Diagnostic> diagnostics;
  std::vector<PropertyOutcome> properties;
  std::vector<nlohmann::json> deadlocks;  // blocked configurations
  std::vector<std::string> deadlock_text;
  std::vector<std::string> state_text;  // printable configuration per state, for evidence

  std::size_t count(const std::string& category) const {
    std::size_t n = 0;
    for (const auto& p : properties) n += p.category == category;
    return n;
  }
};

struct VerifyOptions {
  std::optional<StructuralRequirements> requirements;
  std::vector<ctl::PropertySpec> user_properties;
  double eps = kDefaultMatchDistance;
  std::size_t state_limit = ExplorationOptions{}.state_limit;
};

namespace detail {

inline std::string config_text(const StateGraph& k, const GConfig& c) {
  std::string out = "active {";
  for (std::size_t i = 0; i < c.active_steps.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(c.active_steps[i]);
  }
  out += "}";
  for (std::size_t v = 0; v < k.variable_names.size(); ++v)
    out += " " + k.variable_names[v] + "=" + (c.vars[v] ? "true" : "false");
  return out;
}

inline VerifyStatus classify(const VerifyReport& r) {
  if (has_errors(r.diagnostics) || !r.deadlocks.empty()) return VerifyStatus::Violated;
  for (const auto& p : r.properties)
    if (!p.passed) return VerifyStatus::Violated;
  return VerifyStatus::Ok;
}

}  // namespace detail

// Grafcet construction, state-space exploration and property checking for an
// already parsed plan. Library errors propagate to the caller.
inline VerifyReport verify_plan(const MissionPlan& plan, const VerifyOptions& opts = {}) {
  VerifyReport r;
  r.plan_id = plan.plan_id;
  r.diagnostics = validate_plan(plan);
  const Grafcet g = build_grafcet(plan);
  r.steps = g.steps.size();
  r.transitions = g.transitions.size();
  r.variables = g.variables.size();

  std::vector<NamedFormula> formulas;
  if (opts.requirements) {
    auto structural = check_structural(g, *opts.requirements);
    r.diagnostics.insert(r.diagnostics.end(), structural.begin(), structural.end());
  }
  const auto& pairs = opts.requirements && !opts.requirements->order_pairs.empty()
                          ? opts.requirements->order_pairs
                          : default_order_pairs();
  auto order = gen_order_properties(plan, pairs);
  r.diagnostics.insert(r.diagnostics.end(), order.diagnostics.begin(), order.diagnostics.end());
  for (auto& f : gen_mutex_properties(plan, g, opts.eps)) formulas.push_back(std::move(f));
  for (auto& f : order.formulas) formulas.push_back(std::move(f));
  for (auto& f : gen_condition_liveness(g)) formulas.push_back(std::move(f));
  for (const auto& p : opts.user_properties) formulas.push_back({p.name, "user", p.formula, p.expect});

  const StateGraph k = build_state_graph(g, {opts.state_limit});
  r.states = k.state_count();
  r.edges = k.edge_count();
  for (const auto& c : check_deadlocks(k)) {
    r.deadlocks.push_back(config_to_json(k, c));
    r.deadlock_text.push_back(detail::config_text(k, c));
  }

  const ctl::Checker<StateGraph> checker(k);
  for (const auto& f : formulas) {
    checker.check_atoms(f.formula);
    auto res = checker.check(f.formula);
    PropertyOutcome o{f.name, f.category, ctl::to_string(f.formula), f.expect, res.holds, false,
                      std::move(res.evidence)};
    o.passed = f.expect == ctl::Expectation::Report || (f.expect == ctl::Expectation::Hold) == o.holds;
    r.properties.push_back(std::move(o));
  }
  for (std::size_t s = 0; s < k.state_count(); ++s) r.state_text.push_back(detail::config_text(k, k.states[s]));
  r.status = detail::classify(r);
  return r;
}

struct VerifyInputs {
  std::filesystem::path plan;
  std::optional<std::filesystem::path> properties;
  std::optional<std::filesystem::path> requirements;
  double eps = kDefaultMatchDistance;
  std::size_t state_limit = ExplorationOptions{}.state_limit;
};

// File-level entry point: every failure is folded into the report.
inline VerifyReport run_verify(const VerifyInputs& in) {
  VerifyReport failed;
  try {
    VerifyOptions opts;
    opts.eps = in.eps;
    opts.state_limit = in.state_limit;
    if (in.requirements) opts.requirements = parse_requirements(read_text_file(*in.requirements));
    if (in.properties) opts.user_properties = ctl::parse_property_file(read_text_file(*in.properties));
    return verify_plan(load_plan(in.plan), opts);
  } catch (const StateLimitExceeded& e) {
    failed.status = VerifyStatus::StateLimit;
    failed.error = e.what();
  } catch (const SchemaViolation& e) {
    failed.status = VerifyStatus::InputError;
    failed.error = e.path() + ": " + e.what();
  } catch (const std::exception& e) {
    failed.status = VerifyStatus::InputError;
    failed.error = e.what();
  }
  return failed;
}

inline std::string format_evidence(const VerifyReport& r, const ctl::Evidence& e) {
  std::string out;
  for (std::size_t i = 0; i < e.states.size(); ++i) {
    const auto s = e.states[i];
    out += "      ";
    out += e.loop_start && *e.loop_start == i ? "loop> " : "      ";
    out += "s" + std::to_string(s) + ": " + (s < r.state_text.size() ? r.state_text[s] : "?") + "\n";
  }
  if (e.loop_start) out += "      (back to s" + std::to_string(e.states[*e.loop_start]) + ")\n";
  return out;
}

inline std::string format_report(const VerifyReport& r) {
  std::ostringstream os;
  if (r.status == VerifyStatus::InputError) {
    os << "input error: " << r.error << "\n";
    return os.str();
  }
  if (r.status == VerifyStatus::StateLimit) {
    os << "state limit exceeded: " << r.error << "\n";
    return os.str();
  }
  os << "plan " << r.plan_id << ": " << r.steps << " steps, " << r.transitions << " transitions, "
     << r.variables << " condition variables\n";
  os << "state graph: " << r.states << " states, " << r.edges << " edges\n";
  for (const auto& d : r.diagnostics) os << format_diagnostic(d) << "\n";
  for (const auto& p : r.properties) {
    os << (p.passed ? "PASS " : "FAIL ") << p.name << "  " << p.formula << "  (" << (p.holds ? "holds" : "fails");
    if (p.expect != ctl::Expectation::Hold) os << ", expected " << to_string(p.expect);
    os << ")\n";
    if (!p.passed && p.evidence) {
      os << "    " << (p.evidence->kind == ctl::Evidence::Kind::Counterexample ? "counterexample" : "witness")
         << ":\n"
         << format_evidence(r, *p.evidence);
    }
  }
  os << "deadlocks: " << r.deadlocks.size() << "\n";
  for (const auto& d : r.deadlock_text) os << "  blocked: " << d << "\n";
  os << "summary: " << r.count("mutex") << " mutex, " << r.count("order") << " order, " << r.count("liveness")
     << " liveness, " << r.count("user") << " user properties; "
     << (r.status == VerifyStatus::Ok ? "all hold" : "VIOLATED") << "\n";
  return os.str();
}

inline nlohmann::json to_json(const VerifyReport& r) {
  using nlohmann::json;
  json props = json::array();
  for (const auto& p : r.properties) {
    json jp = {{"name", p.name},   {"category", p.category}, {"formula", p.formula},
               {"expect", to_string(p.expect)}, {"holds", p.holds}, {"passed", p.passed}};
    if (p.evidence) {
      jp["evidence"] = {
          {"kind", p.evidence->kind == ctl::Evidence::Kind::Witness ? "witness" : "counterexample"},
          {"states", p.evidence->states},
          {"loop_start", p.evidence->loop_start ? json(*p.evidence->loop_start) : json(nullptr)}};
    }
    props.push_back(std::move(jp));
  }
  json diags = json::array();
  for (const auto& d : r.diagnostics)
    diags.push_back({{"severity", to_string(d.severity)}, {"location", d.location}, {"message", d.message}});
  static constexpr const char* status_names[] = {"ok", "violated", "input_error", "state_limit"};
  return {{"schema_version", kReportSchemaVersion},
          {"status", status_names[static_cast<int>(r.status)]},
          {"exit_code", exit_code(r.status)},
          {"error", r.error},
          {"plan_id", r.plan_id},
          {"grafcet", {{"steps", r.steps}, {"transitions", r.transitions}, {"variables", r.variables}}},
          {"state_graph", {{"states", r.states}, {"edges", r.edges}}},
          {"diagnostics", diags},
          {"properties", props},
          {"deadlocks", r.deadlocks}};
}

// ---------------------------------------------------------------------------
// simulate

enum class SimulateStatus { Success, Fault, InputError, VerificationFailed, Timeout };

struct SimulateInputs {
  std::filesystem::path plan;
  std::filesystem::path world;
  std::vector<std::filesystem::path> rules;
  std::optional<double> dt, horizon;
  std::optional<std::uint64_t> seed;
  std::size_t max_ticks = 100000;
  bool replan = true;
  bool skip_verify = false;
  std::size_t state_limit = ExplorationOptions{}.state_limit;
};

struct SimulateReport {
  SimulateStatus status = SimulateStatus::Success;
  std::string error;
  std::optional<VerifyReport> verification;
  RunResult result;
};

inline int exit_code(const SimulateReport& r) {
  switch (r.status) {
    case SimulateStatus::Success: return 0;
    case SimulateStatus::Fault: return 1;
    case SimulateStatus::InputError: return 2;
    case SimulateStatus::VerificationFailed: return exit_code(r.verification->status);
    case SimulateStatus::Timeout: return 4;
  }
  return 2;
}

// Safety violations take precedence over a timeout: a vehicle halted inside
// an area never finishes its mission.
inline SimulateStatus classify(const Verdict& v) {
  if (!v.safety) return SimulateStatus::Fault;
  if (!v.mission_success) return SimulateStatus::Timeout;
  return SimulateStatus::Success;
}

inline SimulateReport run_simulate(const SimulateInputs& in) {
  SimulateReport r;
  try {
    const auto plan = load_plan(in.plan);
    World world = load_world(in.world);
    std::vector<Rule> rules;
    for (const auto& p : in.rules) {
      auto part = parse_rules(read_text_file(p));
      rules.insert(rules.end(), part.begin(), part.end());
    }
    if (in.dt) {
      if (!(*in.dt > 0)) throw InvalidWorld("dt must be positive");
      world.dt = *in.dt;
    }
    if (in.horizon) {
      if (!(*in.horizon > 0)) throw InvalidWorld("horizon must be positive");
      world.horizon = *in.horizon;
    }
    if (in.seed) world.rng_seed = *in.seed;
    world.params.replan = in.replan;

    if (!in.skip_verify) {
      VerifyOptions vo;
      vo.state_limit = in.state_limit;
      r.verification = verify_plan(plan, vo);
      if (r.verification->status != VerifyStatus::Ok) {
        r.status = SimulateStatus::VerificationFailed;
        return r;
      }
    }
    r.result = run(std::move(world), plan, rules, in.max_ticks);
    r.status = classify(r.result.verdict);
  } catch (const StateLimitExceeded& e) {
    r.verification = VerifyReport{};
    r.verification->status = VerifyStatus::StateLimit;
    r.verification->error = e.what();
    r.status = SimulateStatus::VerificationFailed;
  } catch (const std::exception& e) {
    r.status = SimulateStatus::InputError;
    r.error = e.what();
  }
  return r;
}

inline std::string format_verdict(const SimulateReport& r) {
  std::ostringstream os;
  switch (r.status) {
    case SimulateStatus::InputError: os << "input error: " << r.error << "\n"; return os.str();
    case SimulateStatus::VerificationFailed:
      os << "verification failed, simulation not started\n" << format_report(*r.verification);
      return os.str();
    default: break;
  }
  const auto& v = r.result.verdict;
  os << "ticks: " << v.ticks << " (t = " << v.time << " s)\n"
     << "mission_success: " << (v.mission_success ? "true" : "false") << "\n"
     << "safety: " << (v.safety ? "true" : "false") << "\n"
     << "fault events: " << v.fault_events << "\n"
     << "impending fault events: " << v.impending_fault_events << "\n"
     << "intrusion samples: " << v.intrusion_samples << "\n";
  if (v.timeout) os << "timeout after " << v.ticks << " ticks\n";
  return os.str();
}

}  // namespace uxv
