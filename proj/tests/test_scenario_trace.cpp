#include <string>

#include <gtest/gtest.h>

#include "fixsim/scenario.hpp"
#include "fixsim/trace.hpp"

using namespace fixsim;

TEST(Trace, AppendsIncreasingSamples) {
  TraceSet set;
  set.register_trace("robot1_mx", Channel::mx);
  set.record("robot1_mx", 1.0, -5.0);
  set.record("robot1_mx", 2.0, -6.0);
  const auto& t = set.get("robot1_mx");
  ASSERT_EQ(t.samples.size(), 2u);
  EXPECT_DOUBLE_EQ(t.samples[1].value, -6.0);
}

TEST(Trace, RejectsNonMonotonicTime) {
  TraceSet set;
  set.register_trace("robot1_mx", Channel::mx);
  set.record("robot1_mx", 2.0, 0.0);
  for (double t : {1.0, 2.0}) {
    try {
      set.record("robot1_mx", t, 0.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::non_monotonic_time);
    }
  }
}

TEST(Trace, UnknownChannel) {
  TraceSet set;
  try {
    set.record("nope", 0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_channel);
  }
}

TEST(SimClock, AdvancesInWholeTicks) {
  SimClock c(0.01);
  for (int i = 0; i < 1000; ++i) c.tick();
  EXPECT_DOUBLE_EQ(c.t(), 10.0);
  c.advance(0.015);
  EXPECT_EQ(c.ticks(), 1002);
  c.sync_to(900);
  EXPECT_EQ(c.ticks(), 1002);
  EXPECT_THROW(SimClock(0.0), Error);
}

// ---------------------------------------------------------------------------

TEST(Scenario, EmptyTextGivesDefaults) {
  EXPECT_EQ(parse_scenario(""), Scenario{});
  EXPECT_EQ(parse_scenario("# only a comment\n\n"), Scenario{});
}

TEST(Scenario, VariantSelection) {
  const auto s = parse_scenario("[tools]\nvariant = constant_load_spring\n");
  EXPECT_EQ(s.tools.drill.variant, DrillVariant::constant_load_spring);
  const auto r = parse_scenario("[tools]\nvariant = regular_spring  # comment\n");
  EXPECT_EQ(r.tools.drill.variant, DrillVariant::regular_spring);
}

TEST(Scenario, DefaultsMatchNominalSetup) {
  const Scenario s;
  EXPECT_EQ(s.tools.drill.variant, DrillVariant::constant_load_spring);
  EXPECT_DOUBLE_EQ(s.tools.drill.constant_load, 147.0);
  EXPECT_DOUBLE_EQ(s.tools.drill.spring_rate, 2150.0);
  EXPECT_DOUBLE_EQ(s.tools.drill.feed_speed, 0.00225);
  EXPECT_DOUBLE_EQ(s.sensors.limits.moment_limit, 30.0);
  EXPECT_DOUBLE_EQ(s.sensors.limits.force_limit, 1000.0);
  EXPECT_DOUBLE_EQ(s.thresholds.insertion_end_moment, 25.0);
  EXPECT_DOUBLE_EQ(s.thresholds.hammering_end_moment, 27.0);
  EXPECT_DOUBLE_EQ(s.thresholds.approach_force_z, 50.0);
  EXPECT_DOUBLE_EQ(s.tools.nut.target_torque, 50.0);
  EXPECT_DOUBLE_EQ(s.robot.params.reach, 1.298);
  EXPECT_DOUBLE_EQ(s.robot.params.payload, 13.0);
  EXPECT_DOUBLE_EQ(s.procedure.dt, 0.01);
  EXPECT_DOUBLE_EQ(s.sensors.camera.p_detect, 0.98);
}

namespace {

ScenarioError parse_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e;
  }
  ADD_FAILURE() << "no ScenarioError for:\n" << text;
  return ScenarioError("", 0, "");
}

}  // namespace

TEST(Scenario, RejectsInvalidInput) {
  auto e = parse_error("[tools]\nvariant = banana\n");
  EXPECT_EQ(e.field(), "tools.variant");
  EXPECT_EQ(e.line(), 2);
  EXPECT_EQ(e.code(), ErrorCode::scenario_invalid);

  EXPECT_EQ(parse_error("[tools]\nbanana = 1\n").field(), "tools.banana");
  EXPECT_EQ(parse_error("[nowhere]\n").field(), "nowhere");
  EXPECT_EQ(parse_error("dt = 0.01\n").field(), "dt");
  EXPECT_EQ(parse_error("[procedure]\ndt = 0.01\ndt = 0.02\n").line(), 3);
  EXPECT_EQ(parse_error("[procedure]\ndt = fast\n").field(), "procedure.dt");
  EXPECT_EQ(parse_error("[procedure]\ndt = 0.01x\n").field(), "procedure.dt");
  EXPECT_EQ(parse_error("[procedure]\ndt =\n").field(), "procedure.dt");
  EXPECT_EQ(parse_error("[part]\nhole_count = 1.5\n").field(), "part.hole_count");
  EXPECT_EQ(parse_error("[procedure]\njust words\n").line(), 2);
  EXPECT_EQ(parse_error("[wall\n").line(), 1);
}

TEST(Scenario, SemanticValidation) {
  EXPECT_EQ(parse_error("[part]\nhole_count = 0\n").field(), "part.hole_count");
  EXPECT_EQ(parse_error("[procedure]\ndt = 0\n").field(), "procedure.dt");
  EXPECT_EQ(parse_error("[procedure]\nhammering_end_moment = 31\n").field(), "procedure.hammering_end_moment");
  EXPECT_EQ(parse_error("[wall]\nthickness = 0.05\n").field(), "wall.thickness");
  EXPECT_EQ(parse_error("[procedure]\ndrill_depth = 0.06\n").field(), "procedure.hammer_success_depth");
}

TEST(Scenario, RenderParseRoundTrip) {
  Scenario s;
  s.wall.yaw_deg = 5.0;
  s.wall.distance = 0.6543210987654321;
  s.part.hole_count = 6;
  s.tools.drill.variant = DrillVariant::regular_spring;
  s.sensors.laser_sigma = 1.0 / 3.0 * 1e-4;
  s.procedure.dt = 0.005;
  s.procedure.parallel_min_points = 5;
  EXPECT_EQ(parse_scenario(render_scenario(s)), s);
  EXPECT_EQ(parse_scenario(render_scenario(s, false)), s);
  EXPECT_EQ(parse_scenario(render_scenario(Scenario{})), Scenario{});
}

TEST(Scenario, RenderingDocumentsEveryKey) {
  const std::string text = render_scenario(Scenario{});
  Scenario s;
  for (const auto& f : detail::scenario_fields(s)) {
    EXPECT_NE(text.find(std::string(f.key) + " = "), std::string::npos) << f.key;
    EXPECT_FALSE(f.doc.empty()) << f.key;
  }
  for (const char* section : {"[wall]", "[part]", "[tools]", "[sensors]", "[robot]", "[procedure]"})
    EXPECT_NE(text.find(section), std::string::npos);
}

TEST(Scenario, HashTracksContent) {
  Scenario a, b;
  EXPECT_EQ(scenario_hash(a), scenario_hash(b));
  EXPECT_EQ(scenario_hash(a).size(), 16u);
  b.procedure.dt = 0.005;
  EXPECT_NE(scenario_hash(a), scenario_hash(b));
}
