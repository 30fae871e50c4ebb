#include <cmath>

#include <gtest/gtest.h>

#include "fixsim/tools.hpp"
#include "fixsim/worksite.hpp"

using namespace fixsim;

namespace {

Wall facing_wall() {
  Wall w;
  w.frame = make_wall_frame({0.7, 0.0, 0.3}, 0.0, 0.0);
  return w;
}

Worksite make_site(int parts = 1, std::vector<int> anchors = {2, 2}) {
  StructuralPart part;
  part.hole_positions = linear_hole_pattern(2, 0.15);
  return Worksite(facing_wall(), part, parts, std::move(anchors));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST(Worksite, RegisterHoleAtWallCentre) {
  auto site = make_site();
  const auto& wall = site.wall();
  const auto& h = site.register_drilled_hole(wall.frame.origin, wall.into(), 0.08);
  EXPECT_DOUBLE_EQ(h.depth, 0.08);
  EXPECT_EQ(h.id, 0);
  EXPECT_FALSE(h.anchor.has_value());
}

TEST(Worksite, RejectsBadHoles) {
  auto site = make_site();
  const auto& wall = site.wall();
  EXPECT_EQ(code_of([&] { site.register_drilled_hole(wall.frame.origin, wall.into(), 0.0); }),
            ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { site.register_drilled_hole(wall.frame.origin - wall.into() * 1.0, wall.into(), 0.05); }),
            ErrorCode::off_wall);
  EXPECT_EQ(code_of([&] { site.register_drilled_hole(wall.frame.origin, wall.into(), 0.14); }), ErrorCode::too_deep);
  EXPECT_TRUE(site.holes().empty());
}

TEST(Worksite, ThinWallRejected) {
  Wall w = facing_wall();
  w.thickness = 0.09;
  EXPECT_THROW(w.validate(), Error);
}

TEST(AnchorEngagement, ClearanceGeometry) {
  DrilledHole h;
  h.position = {0.7, 0.0, 0.3};
  h.axis = {1, 0, 0};
  h.depth = 0.08;
  EXPECT_EQ(anchor_engagement(h, h.position), Engagement::engaged);
  EXPECT_EQ(anchor_engagement(h, h.position + Vec3{0.01, 0, 0}), Engagement::engaged);  // along the axis
  EXPECT_EQ(anchor_engagement(h, h.position + Vec3{0, kInsertionClearance + 0.0005, 0}), Engagement::rim_contact);
  EXPECT_EQ(anchor_engagement(h, h.position + Vec3{0, 0, 0.010}), Engagement::surface_contact);
  EXPECT_THROW(anchor_engagement(h, h.position + Vec3{0, 0.2, 0}), Error);
}

TEST(Worksite, PartLifecycle) {
  auto site = make_site();
  EXPECT_EQ(code_of([&] { site.place_part(Frame{}); }), ErrorCode::state_violation);
  site.grasp_part();
  EXPECT_EQ(site.part().state, PartState::grasped);
  EXPECT_EQ(site.parts_in_stand(), 0);
  site.place_part(site.wall().frame);
  EXPECT_EQ(site.part().state, PartState::held_on_wall);
  EXPECT_EQ(code_of([&] { site.grasp_part(); }), ErrorCode::part_already_placed);
  // fixed points must follow tightened anchors
  EXPECT_EQ(code_of([&] { site.mark_point_fixed(); }), ErrorCode::state_violation);
}

TEST(Worksite, EmptyPartStand) {
  auto site = make_site(0);
  EXPECT_EQ(code_of([&] { site.grasp_part(); }), ErrorCode::stand_empty);
}

TEST(Worksite, AnchorLifecycleAndFixedCount) {
  auto site = make_site(1, {1, 0});
  site.grasp_part();
  site.place_part(site.wall().frame);
  const auto& wall = site.wall();
  const int hole = site.register_drilled_hole(wall.frame.origin, wall.into(), 0.08).id;
  const int a = site.take_anchor(0);
  EXPECT_EQ(code_of([&] { site.take_anchor(0); }), ErrorCode::stand_empty);
  EXPECT_EQ(code_of([&] { site.seat_anchor(a, 0.07); }), ErrorCode::state_violation);
  site.stick_anchor(a, hole, 0.007);
  EXPECT_EQ(site.hole(hole).anchor, a);
  EXPECT_EQ(code_of([&] { site.seat_anchor(a, 0.005); }), ErrorCode::invalid_argument);
  site.seat_anchor(a, 0.079);
  site.tighten_anchor(a, 50.0);
  site.mark_point_fixed();
  EXPECT_EQ(site.part().state, PartState::partially_fixed);
  EXPECT_EQ(site.part().fixed_points, 1);
}

TEST(LinearHolePattern, CentredOnOrigin) {
  const auto h = linear_hole_pattern(3, 0.1);
  ASSERT_EQ(h.size(), 3u);
  EXPECT_DOUBLE_EQ(h[0].x, -0.1);
  EXPECT_DOUBLE_EQ(h[1].x, 0.0);
  EXPECT_DOUBLE_EQ(h[2].x, 0.1);
}

// ---------------------------------------------------------------------------

namespace {

// closed form re-derived from the lever arms: M = F_support * L_s - F_thrust * L_d
double moment_oracle(DrillVariant v, double d) {
  const double thrust = 280.0 + 2000.0 * d;
  switch (v) {
    case DrillVariant::offset_uncompensated: return -0.1 * thrust;
    case DrillVariant::regular_spring: return 2150.0 * (0.1 + d) * 0.2 - 0.1 * thrust;
    case DrillVariant::constant_load_spring: return 147.0 * 0.2 - 0.1 * thrust;
    case DrillVariant::aligned_axis: return -0.45 * std::sin(10.0 * M_PI / 180.0) * thrust;
  }
  return 0.0;
}

DrillToolConfig drill(DrillVariant v) {
  DrillToolConfig c;
  c.variant = v;
  return c;
}

}  // namespace

TEST(DrillThrust, AffineInDepth) {
  EXPECT_DOUBLE_EQ(drill_thrust(0.0), 280.0);
  EXPECT_DOUBLE_EQ(drill_thrust(0.01), 300.0);
  EXPECT_THROW(drill_thrust(-0.001), Error);
  EXPECT_THROW(drill_thrust(0.1), Error);
}

TEST(DrillReactionMoment, VariantExamples) {
  EXPECT_NEAR(drill_reaction_moment(drill(DrillVariant::offset_uncompensated), 0.010), -30.0, 1e-12);
  const auto reg = drill(DrillVariant::regular_spring);
  EXPECT_NEAR(drill_reaction_moment(reg, 0.0), 15.0, 1e-12);
  EXPECT_NEAR(drill_reaction_moment(reg, 0.01) - drill_reaction_moment(reg, 0.0), 2.30, 1e-12);
  EXPECT_NEAR((30.0 - 15.0) / 230.0, 0.065, 0.001);
  const auto cl = drill(DrillVariant::constant_load_spring);
  EXPECT_NEAR(drill_reaction_moment(cl, 0.0), 1.4, 1e-12);
  EXPECT_NEAR(drill_reaction_moment(cl, 0.08), -14.6, 1e-12);
}

TEST(DrillReactionMoment, MatchesClosedFormOverDepth) {
  for (auto v : {DrillVariant::aligned_axis, DrillVariant::offset_uncompensated, DrillVariant::regular_spring,
                 DrillVariant::constant_load_spring})
    for (int i = 0; i <= 80; ++i) {
      const double d = i * 0.001;
      EXPECT_NEAR(drill_reaction_moment(drill(v), d), moment_oracle(v, d), 1e-12) << to_string(v) << " d=" << d;
    }
}

TEST(DrillReactionMoment, ConstantLoadStaysInsideLimit) {
  const auto cl = drill(DrillVariant::constant_load_spring);
  for (int i = 0; i <= 800; ++i) EXPECT_LT(std::abs(drill_reaction_moment(cl, i * 1e-4)), 30.0);
}

TEST(DrillVariant, NamesRoundTrip) {
  for (auto v : {DrillVariant::aligned_axis, DrillVariant::offset_uncompensated, DrillVariant::regular_spring,
                 DrillVariant::constant_load_spring})
    EXPECT_EQ(parse_drill_variant(to_string(v)), v);
  EXPECT_FALSE(parse_drill_variant("banana"));
}

namespace {

DrilledHole hole80() {
  DrilledHole h;
  h.depth = 0.08;
  return h;
}

}  // namespace

TEST(HammerBlow, AtBottomGivesEndMoment) {
  HammerTool t;
  const auto r = hammer_blow(t, 0.08, hole80());
  EXPECT_DOUBLE_EQ(r.depth, 0.08);
  EXPECT_GE(r.peak_moment, 27.0);
}

TEST(HammerBlow, ShallowAnchorAdvances) {
  HammerTool t;
  const auto r = hammer_blow(t, 0.007, hole80());
  EXPECT_NEAR(r.depth, 0.007 + 0.001 * (1.0 - 0.007 / 0.08), 1e-15);
  EXPECT_NEAR(r.depth, 0.00791, 1e-5);
  EXPECT_DOUBLE_EQ(r.peak_moment, 8.0);
}

TEST(HammerBlow, RampsNearBottom) {
  HammerTool t;
  const auto h = hole80();
  double depth = 0.0795;
  double last = 0.0;
  for (int i = 0; i < 3; ++i) {
    const auto r = hammer_blow(t, depth, h);
    EXPECT_GT(r.peak_moment, last);
    last = r.peak_moment;
    depth = r.depth;
  }
  EXPECT_DOUBLE_EQ(last, t.bottom_moment);
}

TEST(HammerBlow, InflatedGripperRejected) {
  HammerTool t;
  t.gripper = GripperState::inflated;
  try {
    hammer_blow(t, 0.01, hole80());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::gripper_inflated);
  }
}

TEST(NutRunner, LastPulseReachesTarget) {
  NutRunnerTool n;
  n.engaged = true;
  const auto p = nutrunner_pulse(49.0, n);
  EXPECT_DOUBLE_EQ(p.torque, 50.0);
  EXPECT_DOUBLE_EQ(p.flange_moment, 20.0);
}

TEST(NutRunner, MonotoneRampBoundedMoment) {
  NutRunnerTool n;
  n.engaged = true;
  double torque = 0.0;
  int pulses = 0;
  while (torque < n.target_torque) {
    const auto p = nutrunner_pulse(torque, n);
    EXPECT_GT(p.torque, torque);
    EXPECT_LE(p.flange_moment, 20.0);
    torque = p.torque;
    ++pulses;
  }
  EXPECT_EQ(pulses, 50);
}

TEST(NutRunner, NotEngaged) {
  NutRunnerTool n;
  try {
    nutrunner_pulse(0.0, n);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::socket_not_engaged);
  }
}

TEST(GripperSet, InflateAtStandGraspsAnchor) {
  auto site = make_site();
  HammerTool h;
  GripperTool g;
  GripContext ctx;
  ctx.anchor_stand = 0;
  const auto out = gripper_set(h, g, GripAction::inflate, ctx, site);
  ASSERT_TRUE(out.held_anchor);
  EXPECT_EQ(site.anchor(*out.held_anchor).state, AnchorState::grasped);
  EXPECT_EQ(h.gripper, GripperState::inflated);
}

TEST(GripperSet, DeflateKeepsStuckAnchor) {
  auto site = make_site();
  const auto& wall = site.wall();
  const int hole = site.register_drilled_hole(wall.frame.origin, wall.into(), 0.08).id;
  HammerTool h;
  GripperTool g;
  GripContext ctx;
  ctx.anchor_stand = 0;
  const int a = *gripper_set(h, g, GripAction::inflate, ctx, site).held_anchor;
  site.stick_anchor(a, hole, 0.007);
  GripContext release;
  release.held_anchor = a;
  release.anchor_supported = true;
  const auto out = gripper_set(h, g, GripAction::deflate, release, site);
  EXPECT_FALSE(out.held_anchor);
  EXPECT_FALSE(out.anchor_dropped);
  EXPECT_EQ(site.anchor(a).state, AnchorState::stuck);
  EXPECT_DOUBLE_EQ(site.anchor(a).depth, 0.007);
}

TEST(GripperSet, DeflateInFreeSpaceDropsAnchor) {
  auto site = make_site();
  HammerTool h;
  GripperTool g;
  GripContext ctx;
  ctx.anchor_stand = 1;
  const int a = *gripper_set(h, g, GripAction::inflate, ctx, site).held_anchor;
  GripContext release;
  release.held_anchor = a;
  const auto out = gripper_set(h, g, GripAction::deflate, release, site);
  EXPECT_TRUE(out.anchor_dropped);
  EXPECT_EQ(site.anchor(a).state, AnchorState::dropped);
}

TEST(GripperSet, MagnetOffWithoutSupportDropsPart) {
  auto site = make_site();
  HammerTool h;
  GripperTool g;
  GripContext ctx;
  ctx.part_within_reach = true;
  const auto on = gripper_set(h, g, GripAction::magnet_on, ctx, site);
  EXPECT_TRUE(on.holding_part);
  GripContext off;
  off.holding_part = true;
  const auto out = gripper_set(h, g, GripAction::magnet_off, off, site);
  EXPECT_TRUE(out.part_dropped);
}
