#include <gtest/gtest.h>

#include <random>
#include <regex>
#include <set>

#include "support/random_plan.hpp"
#include "uxv/grafcet.hpp"

namespace {

const std::string kData = UXV_DATA_DIR;

std::size_t count_matches(const std::string& text, const std::regex& re) {
  return std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator());
}

}  // namespace

TEST(Grafcet, UseCaseStructure) {
  const auto g = uxv::build_grafcet(uxv::load_plan(kData + "/usecase/plan.json"));
  ASSERT_EQ(g.sequences.size(), 2u);
  EXPECT_EQ(g.sequences[0].steps, (std::vector<int>{10, 11, 12, 13, 14, 15, 16, 17}));
  EXPECT_EQ(g.sequences[1].steps, (std::vector<int>{20, 21, 22, 23, 24, 25, 26, 27}));
  EXPECT_EQ(g.initial_steps(), (std::vector<int>{10, 20}));

  ASSERT_EQ(g.variables.size(), 1u);
  EXPECT_EQ(g.variables[0].name, "cond352");
  EXPECT_EQ(g.variables[0].guarded_command, 352);
  EXPECT_EQ(g.variables[0].fulfilling_command, 345);

  // takeOff (step 21) is guarded on the transition leaving the initial step
  const auto* t20 = g.outgoing(20);
  ASSERT_TRUE(t20);
  EXPECT_FALSE(t20->condition.finished_signal);
  EXPECT_EQ(t20->condition.vars, (std::vector<std::string>{"cond352"}));
  EXPECT_EQ(t20->condition.to_string(), "cond352");
  // UGV drop (step 15) stores cond352 when it is left
  EXPECT_EQ(g.find_step(15)->stored_actions_on_deactivation, (std::vector<std::string>{"cond352"}));
  EXPECT_EQ(g.find_step(15)->continuous_action->kind, uxv::CommandKind::Drop);
  EXPECT_EQ(g.outgoing(15)->condition.to_string(), "cmd345Finished");
  EXPECT_EQ(*g.step_of_command(352), 21);
}

TEST(Grafcet, SingleCommand) {
  const auto plan = uxv::parse_plan(R"({"missions":[{"vehicle_id":"V","commands":[{"id":5,"t":0,"kind":"start"}]}]})");
  const auto g = uxv::build_grafcet(plan);
  ASSERT_EQ(g.steps.size(), 2u);
  EXPECT_EQ(g.steps[0].step_id, 10);
  EXPECT_TRUE(g.steps[0].is_initial);
  EXPECT_FALSE(g.steps[0].continuous_action);
  EXPECT_EQ(g.steps[1].step_id, 11);
  ASSERT_EQ(g.transitions.size(), 2u);
  EXPECT_TRUE(g.transitions[0].condition.is_true());
  EXPECT_EQ(g.transitions[0].downstream, 11);
  EXPECT_EQ(g.transitions[1].condition.finished_signal, 5);
  EXPECT_FALSE(g.transitions[1].downstream);  // final transition
  EXPECT_TRUE(g.variables.empty());
}

TEST(Grafcet, MutuallyConditionedMissions) {
  const auto g = uxv::build_grafcet(uxv::load_plan(kData + "/deadlock/plan.json"));
  ASSERT_EQ(g.variables.size(), 2u);
  EXPECT_EQ(g.outgoing(10)->condition.vars, (std::vector<std::string>{"cond341"}));
  EXPECT_EQ(g.outgoing(20)->condition.vars, (std::vector<std::string>{"cond352"}));
  EXPECT_EQ(g.find_step(25)->stored_actions_on_deactivation, (std::vector<std::string>{"cond341"}));
  EXPECT_EQ(g.find_step(15)->stored_actions_on_deactivation, (std::vector<std::string>{"cond352"}));
}

TEST(Grafcet, ConditionOnLaterCommandJoinsFinishedSignal) {
  const auto plan = uxv::parse_plan(R"({"missions":[
    {"vehicle_id":"A","commands":[{"id":1,"t":0,"kind":"start"},{"id":2,"t":1,"kind":"stop"}]},
    {"vehicle_id":"B","commands":[{"id":3,"t":0,"kind":"start"},{"id":4,"t":1,"kind":"stop","condition":{"after":1}}]}]})");
  const auto g = uxv::build_grafcet(plan);
  EXPECT_EQ(g.outgoing(21)->condition.to_string(), "cmd3Finished & cond4");
  const auto fulfilling = uxv::build_grafcet(plan, {uxv::CondVarNaming::FulfillingCommand});
  EXPECT_EQ(fulfilling.variables[0].name, "cond1");
}

TEST(Grafcet, LongMissionsWidenTheStride) {
  std::string cmds;
  for (int i = 0; i < 12; ++i) cmds += std::string(i ? "," : "") + R"({"id":)" + std::to_string(i + 1) + R"(,"t":)" +
                                       std::to_string(i) + R"(,"kind":"start"})";
  const auto plan = uxv::parse_plan(R"({"missions":[{"vehicle_id":"A","commands":[)" + cmds +
                                    R"(]},{"vehicle_id":"B","commands":[{"id":99,"t":0,"kind":"start"}]}]})");
  EXPECT_EQ(uxv::step_stride(plan), 100);
  const auto g = uxv::build_grafcet(plan);
  EXPECT_EQ(g.sequences[0].steps.back(), 112);
  EXPECT_EQ(g.sequences[1].steps, (std::vector<int>{200, 201}));
}

TEST(Grafcet, InvalidPlanIsRejected) {
  uxv::MissionPlan plan;
  EXPECT_THROW(uxv::build_grafcet(plan), uxv::InvalidPlan);
}

TEST(GrafcetDot, EmptyGrafcetIsHeaderAndFooter) {
  EXPECT_EQ(uxv::render_dot(uxv::Grafcet{}),
            "digraph grafcet {\n  rankdir=TB;\n  node [fontname=\"Helvetica\"];\n}\n");
}

TEST(GrafcetDot, NodeCounts) {
  const std::regex step_node(R"(\n  s\d+ \[shape=box)"), bar(R"(\n  t\d+ \[shape=rect)"),
      initial(R"(peripheries=2)");
  const auto usecase = uxv::render_dot(uxv::build_grafcet(uxv::load_plan(kData + "/usecase/plan.json")));
  EXPECT_EQ(count_matches(usecase, step_node), 16u);
  EXPECT_EQ(count_matches(usecase, initial), 2u);
  const auto single = uxv::render_dot(uxv::build_grafcet(
      uxv::parse_plan(R"({"missions":[{"vehicle_id":"V","commands":[{"id":5,"t":0,"kind":"start"}]}]})")));
  EXPECT_EQ(count_matches(single, step_node), 2u);
  EXPECT_EQ(count_matches(single, bar), 2u);
  EXPECT_EQ(usecase, uxv::render_dot(uxv::build_grafcet(uxv::load_plan(kData + "/usecase/plan.json"))));
}

TEST(GrafcetProperty, StructuralInvariantsOnRandomPlans) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto plan = oracle::random_plan(rng, 4, 8);
    const auto g = uxv::build_grafcet(plan);
    EXPECT_EQ(g.steps.size(), plan.missions.size() + plan.command_count());
    EXPECT_EQ(g.variables.size(), plan.condition_count());
    EXPECT_EQ(g.transitions.size(), g.steps.size());

    std::set<int> ids;
    for (const auto& s : g.steps) {
      EXPECT_TRUE(ids.insert(s.step_id).second);
      EXPECT_EQ(s.is_initial, !s.continuous_action.has_value());
    }
    for (const auto& seq : g.sequences) {
      EXPECT_TRUE(g.find_step(seq.steps.front())->is_initial);
      // simple chain: each step's only transition leads to the next one
      for (std::size_t k = 0; k < seq.steps.size(); ++k) {
        const auto* t = g.outgoing(seq.steps[k]);
        ASSERT_TRUE(t);
        if (k + 1 < seq.steps.size())
          EXPECT_EQ(t->downstream, seq.steps[k + 1]);
        else
          EXPECT_FALSE(t->downstream);
      }
    }
    // conditions only mention declared variables
    for (const auto& t : g.transitions)
      for (const auto& v : t.condition.vars) EXPECT_TRUE(g.variable_index(v));
  }
}
