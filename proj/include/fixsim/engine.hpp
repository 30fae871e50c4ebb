#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "fixsim/procedure.hpp"
#include "fixsim/scenario.hpp"

namespace fixsim {

// Site layout in robot 1's base frame (x towards the wall, y left, z up).
// Robot 2 mirrors robot 1's stands about its own base.
struct SiteLayout {
  Point3 tool_stand{0.25, -0.45, 0.25};
  Point3 anchor_pick{0.35, -0.30, 0.15};
  Point3 home{0.40, 0.0, 0.30};
  Point3 part_stand{0.30, 0.30, 0.05};  // relative to robot 2's base
};

inline Vec3 mirror_y(const Vec3& v) { return {v.x, -v.y, v.z}; }

inline World make_world(const Scenario& scenario, std::uint64_t seed, const SiteLayout& layout = {}) {
  validate(scenario);
  World w;
  w.scenario = scenario;
  w.seed = seed;

  const auto& ws = scenario.wall;
  Wall wall;
  wall.frame = make_wall_frame({ws.distance, ws.centre_y, ws.centre_z}, ws.yaw_deg, ws.pitch_deg);
  wall.width = ws.width;
  wall.height = ws.height;
  wall.thickness = ws.thickness;
  wall.compressive_strength = ws.compressive_strength;

  StructuralPart part;
  part.hole_positions = linear_hole_pattern(scenario.part.hole_count, scenario.part.hole_spacing);
  part.hole_diameter = scenario.part.hole_diameter;
  const int anchors = scenario.procedure.anchors_per_stand;
  w.site = Worksite(wall, part, scenario.part.stand_count, {anchors, anchors});

  const Point3 base2{0.0, scenario.robot.robot2_base_y, 0.0};
  w.part_stand = base2 + layout.part_stand;

  for (ArmId id : {ArmId::robot1, ArmId::robot2}) {
    auto& arm = w.arm(id);
    const bool second = id == ArmId::robot2;
    const Point3 base = second ? base2 : Point3{};
    auto place = [&](const Point3& p) { return base + (second ? mirror_y(p) : p); };
    const std::string name(to_string(id));

    arm.state.id = id;
    arm.state.base = base;
    arm.state.flange_pose = Frame::identity();
    arm.state.flange_pose.origin = place(layout.home);
    arm.state.tool_stand = place(layout.tool_stand);
    arm.state.stand_slots = {ToolId::drill, ToolId::hammer, ToolId::nut_runner};
    if (second) arm.state.stand_slots.insert(ToolId::gripper);
    arm.state.platform.slip_coefficient = scenario.robot.params.slip_coefficient;
    arm.state.payload_capacity = scenario.robot.params.payload;
    arm.state.reach = scenario.robot.params.reach;

    arm.clock = SimClock(scenario.procedure.dt);
    arm.ft_rng = RandomStream(seed, name + ".ft");
    arm.laser_rng = RandomStream(seed, name + ".laser");
    arm.camera_rng = RandomStream(seed, name + ".camera");
    arm.socket_rng = RandomStream(seed, name + ".socket");
    arm.placement_rng = RandomStream(seed, name + ".placement");

    arm.drill = scenario.tools.drill;
    arm.hammer = scenario.tools.hammer;
    arm.nut = scenario.tools.nut;
    arm.anchor_stand = static_cast<int>(index_of(id));
    arm.anchor_pick = place(layout.anchor_pick);
    arm.home = arm.state.flange_pose.origin;

    for (std::size_t i = 0; i < std::size(kAllChannels); ++i) {
      arm.trace_names[i] = trace_id(name, kAllChannels[i]);
      w.traces.register_trace(arm.trace_names[i], kAllChannels[i]);
    }
  }
  return w;
}

struct RunResult {
  FixationReport report;
  World world;

  const TraceSet& traces() const { return world.traces; }
};

/// Full fixation procedure for (scenario, seed).
inline RunResult run(const Scenario& scenario, std::uint64_t seed, const FaultPlan& faults = {}) {
  RunResult r{{}, make_world(scenario, seed)};
  r.world.faults = faults;
  r.report = run_fixation(r.world);
  return r;
}

// ---------------------------------------------------------------------------
// Single-experiment rigs
// ---------------------------------------------------------------------------

namespace rig {

inline void assume_true_frame(World& w) {
  w.wall_estimate = w.site.wall().frame;
  w.centre_estimate = w.site.wall().frame.origin;
}

inline Detection exact(DetectionKind kind, const Point3& p) { return {kind, p, 1.0}; }

template <class Fn>
RunResult single(World w, Fn&& body) {
  RunResult r{{}, std::move(w)};
  body(r.world, r.report);
  exec::finish_report(r.world, r.report);
  r.report.success = r.report.failure() == nullptr;
  return r;
}

}  // namespace rig

/// Drilling at the wall centre with the true wall frame and an exact target.
inline RunResult drill_test(const Scenario& scenario, std::uint64_t seed, const FaultPlan& faults = {}) {
  World w = make_world(scenario, seed);
  w.faults = faults;
  rig::assume_true_frame(w);
  return rig::single(std::move(w), [](World& w, FixationReport& rep) {
    const auto target = rig::exact(DetectionKind::part_hole, w.site.wall().frame.origin);
    run_step(w, rep, FixationStep::DrillHole, ArmId::robot1, 0, [&] { drill_hole(w, ArmId::robot1, target); });
  });
}

/// Anchor pick, insertion and hammering into a pre-drilled hole at the
/// wall centre. `detection_offset` shifts the detected hole position along
/// the wall x axis. `hole_depth` overrides the drilled depth.
inline RunResult hammer_test(const Scenario& scenario, std::uint64_t seed, double detection_offset = 0.0,
                             const FaultPlan& faults = {}, std::optional<double> hole_depth = {}) {
  World w = make_world(scenario, seed);
  w.faults = faults;
  rig::assume_true_frame(w);
  const Frame wf = w.site.wall().frame;
  w.site.register_drilled_hole(wf.origin, wf.z_axis, hole_depth.value_or(scenario.thresholds.drill_depth_target));
  return rig::single(std::move(w), [&](World& w, FixationReport& rep) {
    const auto det = rig::exact(DetectionKind::wall_hole, wf.origin + wf.x_axis * detection_offset);
    if (!run_step(w, rep, FixationStep::PickAnchor, ArmId::robot1, 0, [&] { pick_anchor(w, ArmId::robot1); })) return;
    if (!run_step(w, rep, FixationStep::InsertAnchor, ArmId::robot1, 0, [&] { insert_anchor(w, ArmId::robot1, det); }))
      return;
    run_step(w, rep, FixationStep::HammerAnchor, ArmId::robot1, 0, [&] { hammer_anchor(w, ArmId::robot1); });
  });
}

/// Nut fastening on an anchor already seated at the wall centre.
inline RunResult nut_test(const Scenario& scenario, std::uint64_t seed, bool with_anchor = true) {
  World w = make_world(scenario, seed);
  rig::assume_true_frame(w);
  const Frame wf = w.site.wall().frame;
  const double depth = scenario.thresholds.drill_depth_target;
  const int hole = w.site.register_drilled_hole(wf.origin, wf.z_axis, depth).id;
  if (with_anchor) {
    const int anchor = w.site.take_anchor(0);
    w.site.stick_anchor(anchor, hole, scenario.tools.contact.anchor_stick_depth);
    w.site.seat_anchor(anchor, depth - 0.001);
  }
  return rig::single(std::move(w), [&](World& w, FixationReport& rep) {
    const auto det = rig::exact(DetectionKind::anchor_bolt, wf.origin);
    run_step(w, rep, FixationStep::TightenNut, ArmId::robot1, 0, [&] { tighten_nut(w, ArmId::robot1, det); });
  });
}

/// Wall orientation estimate on its own.
inline RunResult frame_test(const Scenario& scenario, std::uint64_t seed) {
  return rig::single(make_world(scenario, seed), [](World& w, FixationReport& rep) {
    run_step(w, rep, FixationStep::EstimateOrientation, ArmId::robot1, 0,
             [&] { estimate_orientation(w, ArmId::robot1); });
  });
}

}  // namespace fixsim
