// uxv: verify mission plans, then simulate them under the runtime rules.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "uxv/uxv.hpp"

namespace {

std::size_t state_limit_from_env() {
  const char* raw = std::getenv("MV_STATE_LIMIT");
  if (!raw || !*raw) return uxv::ExplorationOptions{}.state_limit;
  char* end = nullptr;
  const auto v = std::strtoull(raw, &end, 10);
  if (*end != '\0' || v == 0) throw uxv::Error(std::string("MV_STATE_LIMIT must be a positive integer, got ") + raw);
  return static_cast<std::size_t>(v);
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mission plan verification and simulation for unmanned vehicles"};
  app.require_subcommand(1);

  uxv::VerifyInputs vin;
  std::string props, req, json_out, dot_out;
  auto* verify = app.add_subcommand("verify", "Model-check a mission plan");
  verify->add_option("plan", vin.plan, "Mission plan JSON")->required();
  verify->add_option("--props", props, "CTL property file");
  verify->add_option("--req", req, "Structural requirements file");
  verify->add_option("--eps", vin.eps, "Target matching distance for mutex generation, m")
      ->check(CLI::PositiveNumber);
  verify->add_option("--json", json_out, "Write the machine-readable report here");
  verify->add_option("--dot", dot_out, "Write the GRAFCET as Graphviz here");

  uxv::SimulateInputs sin;
  std::string trace_out, events_out;
  std::vector<std::string> rule_files;
  bool no_replan = false;
  auto* simulate = app.add_subcommand("simulate", "Verify, then simulate a mission plan");
  simulate->add_option("plan", sin.plan, "Mission plan JSON")->required();
  simulate->add_option("world", sin.world, "World JSON")->required();
  simulate->add_option("rules", rule_files, "Rule files");
  simulate->add_option("--dt", sin.dt, "Seconds per tick");
  simulate->add_option("--horizon", sin.horizon, "Dead-reckoning horizon, s");
  simulate->add_option("--max-ticks", sin.max_ticks, "Tick budget");
  simulate->add_option("--seed", sin.seed, "Scenario seed");
  simulate->add_option("--trace", trace_out, "Trace output (.csv for CSV, JSON lines otherwise)");
  simulate->add_option("--events", events_out, "Rule event log output, JSON lines");
  simulate->add_flag("--no-replan", no_replan, "Follow straight segments only");
  simulate->add_flag("--skip-verify", sin.skip_verify, "Do not verify the plan first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::size_t state_limit = 0;
  try {
    state_limit = state_limit_from_env();
  } catch (const uxv::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (*verify) {
    vin.state_limit = state_limit;
    if (!props.empty()) vin.properties = props;
    if (!req.empty()) vin.requirements = req;
    const auto report = uxv::run_verify(vin);
    std::cout << uxv::format_report(report);
    if (!json_out.empty() && !write_file(json_out, uxv::to_json(report).dump(2) + "\n")) return 2;
    if (!dot_out.empty() && report.status != uxv::VerifyStatus::InputError) {
      try {
        if (!write_file(dot_out, uxv::render_dot(uxv::build_grafcet(uxv::load_plan(vin.plan))))) return 2;
      } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
      }
    }
    return uxv::exit_code(report.status);
  }

  sin.state_limit = state_limit;
  sin.replan = !no_replan;
  for (const auto& f : rule_files) sin.rules.emplace_back(f);
  const auto report = uxv::run_simulate(sin);
  std::cout << uxv::format_verdict(report);
  const bool ran = report.status != uxv::SimulateStatus::InputError &&
                   report.status != uxv::SimulateStatus::VerificationFailed;
  if (ran && !trace_out.empty()) {
    const bool csv = std::filesystem::path(trace_out).extension() == ".csv";
    const auto& trace = report.result.trace;
    if (!write_file(trace_out, csv ? uxv::trace_to_csv(trace) : uxv::trace_to_jsonl(trace))) return 2;
  }
  if (ran && !events_out.empty() && !write_file(events_out, uxv::rule_events_to_jsonl(report.result.trace)))
    return 2;
  return uxv::exit_code(report);
}
