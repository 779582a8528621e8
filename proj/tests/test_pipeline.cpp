#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "uxv/pipeline.hpp"

namespace {

const std::string kData = UXV_DATA_DIR;

std::vector<std::filesystem::path> rule_files(std::initializer_list<const char*> names) {
  std::vector<std::filesystem::path> out;
  for (const char* n : names) out.emplace_back(kData + "/rules/" + n);
  return out;
}

uxv::SimulateInputs usecase_sim() {
  uxv::SimulateInputs in;
  in.plan = kData + "/usecase/plan.json";
  in.world = kData + "/usecase/world.json";
  in.rules = rule_files({"r1_ugv.json", "r2_ugv.json", "uav.json"});
  return in;
}

// Runs the CLI binary, returns its exit status; skips when not available.
int cli(const std::string& args) {
  const char* exe = std::getenv("UXV_CLI");
  if (!exe) return -1;
  const int raw = std::system(("\"" + std::string(exe) + "\" " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST(Verify, UseCaseIsOk) {
  uxv::VerifyInputs in;
  in.plan = kData + "/usecase/plan.json";
  in.requirements = kData + "/usecase/requirements.json";
  in.properties = kData + "/usecase/properties.json";
  const auto r = uxv::run_verify(in);
  EXPECT_EQ(r.status, uxv::VerifyStatus::Ok) << uxv::format_report(r);
  EXPECT_EQ(uxv::exit_code(r.status), 0);
  EXPECT_EQ(r.states, 31u);
  EXPECT_EQ(r.count("mutex"), 7u);
  EXPECT_EQ(r.count("order"), 2u);
  EXPECT_EQ(r.count("liveness"), 1u);
  EXPECT_EQ(r.count("user"), 3u);
  const auto j = uxv::to_json(r);
  EXPECT_EQ(j["schema_version"], 1);
}

TEST(Verify, DeadlockIsViolation) {
  uxv::VerifyInputs in;
  in.plan = kData + "/deadlock/plan.json";
  const auto r = uxv::run_verify(in);
  EXPECT_EQ(r.status, uxv::VerifyStatus::Violated);
  EXPECT_EQ(uxv::exit_code(r.status), 1);
  ASSERT_EQ(r.deadlock_text.size(), 1u);
  EXPECT_NE(r.deadlock_text[0].find("active {10, 20}"), std::string::npos);
  EXPECT_NE(uxv::format_report(r).find("blocked: active {10, 20}"), std::string::npos);
}

TEST(Verify, InputErrors) {
  uxv::VerifyInputs in;
  in.plan = kData + "/does-not-exist.json";
  EXPECT_EQ(uxv::exit_code(uxv::run_verify(in).status), 2);
  in.plan = kData + "/usecase/world.json";  // not a plan
  EXPECT_EQ(uxv::run_verify(in).status, uxv::VerifyStatus::InputError);
}

TEST(Verify, StateLimit) {
  uxv::VerifyInputs in;
  in.plan = kData + "/usecase/plan.json";
  in.state_limit = 10;
  const auto r = uxv::run_verify(in);
  EXPECT_EQ(r.status, uxv::VerifyStatus::StateLimit);
  EXPECT_EQ(uxv::exit_code(r.status), 3);
}

TEST(Verify, FailedUserExpectationIsViolation) {
  const auto plan = uxv::load_plan(kData + "/usecase/plan.json");
  uxv::VerifyOptions opts;
  opts.user_properties = uxv::ctl::parse_property_file(R"j([{"name":"wrong","formula":"AG !(step_16 & step_23)"}])j");
  const auto r = uxv::verify_plan(plan, opts);
  EXPECT_EQ(r.status, uxv::VerifyStatus::Violated);
  const auto& last = r.properties.back();
  EXPECT_EQ(last.name, "wrong");
  EXPECT_FALSE(last.holds);
  EXPECT_FALSE(last.passed);
  ASSERT_TRUE(last.evidence);
}

TEST(Simulate, UseCaseSucceeds) {
  const auto r = uxv::run_simulate(usecase_sim());
  EXPECT_EQ(r.status, uxv::SimulateStatus::Success) << uxv::format_verdict(r);
  EXPECT_EQ(uxv::exit_code(r), 0);
}

TEST(Simulate, ForcedIntrusionIsFault) {
  auto in = usecase_sim();
  in.replan = false;
  in.rules = rule_files({"r2_ugv.json", "uav.json"});
  in.max_ticks = 3000;
  const auto r = uxv::run_simulate(in);
  EXPECT_EQ(r.status, uxv::SimulateStatus::Fault);
  EXPECT_EQ(uxv::exit_code(r), 1);
}

TEST(Simulate, Timeout) {
  auto in = usecase_sim();
  in.max_ticks = 1;
  EXPECT_EQ(uxv::exit_code(uxv::run_simulate(in)), 4);
}

TEST(Simulate, InputErrors) {
  auto in = usecase_sim();
  in.world = kData + "/missing.json";
  EXPECT_EQ(uxv::exit_code(uxv::run_simulate(in)), 2);
  in = usecase_sim();
  in.dt = 0.0;
  EXPECT_EQ(uxv::exit_code(uxv::run_simulate(in)), 2);
}

TEST(Simulate, VerificationGatesTheRun) {
  auto in = usecase_sim();
  in.plan = kData + "/deadlock/plan.json";
  const auto r = uxv::run_simulate(in);
  EXPECT_EQ(r.status, uxv::SimulateStatus::VerificationFailed);
  EXPECT_EQ(uxv::exit_code(r), 1);
  EXPECT_TRUE(r.result.trace.ticks.empty());
}

TEST(Simulate, ClassifyPrefersFaultOverTimeout) {
  uxv::Verdict v;
  v.safety = false;
  v.timeout = true;
  EXPECT_EQ(uxv::classify(v), uxv::SimulateStatus::Fault);
  v.safety = true;
  EXPECT_EQ(uxv::classify(v), uxv::SimulateStatus::Timeout);
  v.mission_success = true;
  EXPECT_EQ(uxv::classify(v), uxv::SimulateStatus::Success);
}

TEST(Cli, ExitCodes) {
  if (!std::getenv("UXV_CLI")) GTEST_SKIP() << "UXV_CLI not set";
  const std::string plan = kData + "/usecase/plan.json";
  const std::string world = kData + "/usecase/world.json";
  const std::string rules = kData + "/rules/r1_ugv.json " + kData + "/rules/r2_ugv.json " + kData + "/rules/uav.json";
  EXPECT_EQ(cli("verify " + plan), 0);
  EXPECT_EQ(cli("verify " + kData + "/deadlock/plan.json"), 1);
  EXPECT_EQ(cli("verify " + kData + "/nope.json"), 2);
  EXPECT_EQ(cli("simulate " + plan + " " + world + " " + rules), 0);
  EXPECT_EQ(cli("simulate " + plan + " " + world + " " + rules + " --max-ticks 1"), 4);
  EXPECT_EQ(cli("--bogus"), 2);
}

TEST(Cli, VerifyStateLimitFromEnvironment) {
  if (!std::getenv("UXV_CLI")) GTEST_SKIP() << "UXV_CLI not set";
  const std::string cmd =
      "MV_STATE_LIMIT=10 \"" + std::string(std::getenv("UXV_CLI")) + "\" verify " + kData + "/usecase/plan.json > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(raw));
  EXPECT_EQ(WEXITSTATUS(raw), 3);
}

TEST(Cli, WritesTraceFiles) {
  if (!std::getenv("UXV_CLI")) GTEST_SKIP() << "UXV_CLI not set";
  const auto dir = std::filesystem::temp_directory_path() / "uxv_cli_trace_test";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "trace.csv", events = dir / "events.jsonl";
  EXPECT_EQ(cli("simulate " + kData + "/usecase/plan.json " + kData + "/usecase/world.json " + kData +
                "/rules/r1_ugv.json --trace " + csv.string() + " --events " + events.string()),
            0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,vehicle,x,y,z,speed,cmd,event");
  std::filesystem::remove_all(dir);
}
