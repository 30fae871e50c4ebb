#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "fixsim/engine.hpp"
#include "fixsim/export.hpp"

using namespace fixsim;

namespace {

std::string fingerprint(const RunResult& r) {
  std::string out = report_json(r.report, r.world.scenario, r.world.seed).dump();
  for (const auto& id : r.traces().ids()) out += trace_csv(r.traces().get(id));
  return out;
}

}  // namespace

TEST(Engine, SameSeedSameOutput) {
  EXPECT_EQ(fingerprint(run(Scenario{}, 7)), fingerprint(run(Scenario{}, 7)));
  EXPECT_EQ(fingerprint(drill_test(Scenario{}, 7)), fingerprint(drill_test(Scenario{}, 7)));
  EXPECT_NE(fingerprint(run(Scenario{}, 7)), fingerprint(run(Scenario{}, 8)));
}

TEST(Engine, RegistersEveryChannelForBothArms) {
  const auto w = make_world(Scenario{}, 1);
  EXPECT_EQ(w.traces.ids().size(), 18u);
  EXPECT_TRUE(w.traces.contains("robot1_mx"));
  EXPECT_TRUE(w.traces.contains("robot2_slip"));
}

TEST(Engine, InvalidScenarioRejected) {
  Scenario s;
  s.procedure.dt = -1.0;
  try {
    run(s, 1);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.field(), "procedure.dt");
  }
}

TEST(Engine, TracesAreStrictlyIncreasing) {
  const auto r = run(Scenario{}, 2);
  for (const auto& id : r.traces().ids()) {
    const auto& s = r.traces().get(id).samples;
    for (std::size_t i = 1; i < s.size(); ++i) ASSERT_GT(s[i].t, s[i - 1].t) << id;
  }
}

TEST(Engine, DrillTraceFollowsMomentModel) {
  Scenario s;
  s.sensors.ft = {0.0, 0.0};
  const auto r = drill_test(s, 1);
  ASSERT_TRUE(r.report.success);
  const auto& mx = r.traces().get("robot1_mx").samples;
  const auto& fz = r.traces().get("robot1_fz").samples;
  ASSERT_EQ(mx.size(), fz.size());
  // contact: moment grows with the tip force at the drill lever
  std::size_t i = 0;
  while (i < mx.size() && fz[i].value < s.thresholds.contact_force) {
    EXPECT_NEAR(mx[i].value, -0.1 * fz[i].value, 1e-9);
    ++i;
  }
  ASSERT_LT(i, mx.size());
  // feeding: mx = 147*0.2 - 0.1*(280 + 2000 d), decreasing towards -14.6
  const double last = mx.back().value;
  EXPECT_NEAR(last, 1.4 - 200.0 * 0.08, 0.25);
  for (std::size_t k = i + 2; k < mx.size(); ++k) EXPECT_LE(mx[k].value, mx[k - 1].value + 1e-12);
}

TEST(Engine, TimestepRefinementKeepsOutcomes) {
  Scenario fine;
  fine.procedure.dt = 0.005;
  auto compare = [](const RunResult& a, const RunResult& b) {
    ASSERT_EQ(a.report.steps.size(), b.report.steps.size());
    for (std::size_t i = 0; i < a.report.steps.size(); ++i) {
      EXPECT_EQ(a.report.steps[i].step, b.report.steps[i].step);
      EXPECT_EQ(a.report.steps[i].ok, b.report.steps[i].ok);
      for (const char* m : {"depth", "stuck_depth"}) {
        const auto x = a.report.steps[i].metric(m), y = b.report.steps[i].metric(m);
        ASSERT_EQ(x.has_value(), y.has_value());
        if (x) {
          EXPECT_NEAR(*x, *y, 0.0005) << m;
        }
      }
    }
  };
  compare(run(Scenario{}, 2), run(fine, 2));
  compare(hammer_test(Scenario{}, 1), hammer_test(fine, 1));
  for (auto v : {DrillVariant::offset_uncompensated, DrillVariant::regular_spring, DrillVariant::constant_load_spring}) {
    Scenario a, b = fine;
    a.tools.drill.variant = b.tools.drill.variant = v;
    compare(drill_test(a, 1), drill_test(b, 1));
  }
}
