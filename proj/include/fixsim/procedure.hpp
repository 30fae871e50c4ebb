#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fixsim/errors.hpp"
#include "fixsim/geometry.hpp"
#include "fixsim/random.hpp"
#include "fixsim/robot.hpp"
#include "fixsim/scenario.hpp"
#include "fixsim/sensors.hpp"
#include "fixsim/tools.hpp"
#include "fixsim/trace.hpp"
#include "fixsim/worksite.hpp"

namespace fixsim {

enum class FixationStep {
  EstimateOrientation,
  PickPlacePart,
  DetectPartHole,
  DrillHole,
  DetectWallHole,
  PickAnchor,
  InsertAnchor,
  HammerAnchor,
  TightenNut,
  ReleaseRepeat,
};

inline constexpr std::string_view to_string(FixationStep s) {
  switch (s) {
    case FixationStep::EstimateOrientation: return "EstimateOrientation";
    case FixationStep::PickPlacePart: return "PickPlacePart";
    case FixationStep::DetectPartHole: return "DetectPartHole";
    case FixationStep::DrillHole: return "DrillHole";
    case FixationStep::DetectWallHole: return "DetectWallHole";
    case FixationStep::PickAnchor: return "PickAnchor";
    case FixationStep::InsertAnchor: return "InsertAnchor";
    case FixationStep::HammerAnchor: return "HammerAnchor";
    case FixationStep::TightenNut: return "TightenNut";
    case FixationStep::ReleaseRepeat: return "ReleaseRepeat";
  }
  return "?";
}

// Order for the first fixation point.
inline constexpr std::array<FixationStep, 10> kFirstPointOrder = {
    FixationStep::EstimateOrientation, FixationStep::PickPlacePart, FixationStep::DetectPartHole,
    FixationStep::DrillHole,           FixationStep::DetectWallHole, FixationStep::PickAnchor,
    FixationStep::InsertAnchor,        FixationStep::HammerAnchor,   FixationStep::TightenNut,
    FixationStep::ReleaseRepeat};

// Steps repeated for every further point.
inline constexpr std::array<FixationStep, 7> kPointSteps = {
    FixationStep::DetectPartHole, FixationStep::DrillHole,    FixationStep::DetectWallHole,
    FixationStep::PickAnchor,     FixationStep::InsertAnchor, FixationStep::HammerAnchor,
    FixationStep::TightenNut};

// ---------------------------------------------------------------------------
// Spiral hole search
// ---------------------------------------------------------------------------

struct SpiralParams {
  double pitch{0.0003};          // m between turns
  double probe_spacing{0.0002};  // m of arc between probes
  double probe_period{0.1};      // s per probe
  double timeout{60.0};          // s
};

inline constexpr double kTwoPi = 6.28318530717958647692;

/// Arc length of r = b*theta from the centre to angle theta.
inline double spiral_arc_length(double theta, double b) {
  return 0.5 * b * (theta * std::sqrt(1.0 + theta * theta) + std::asinh(theta));
}

/// Angle at which the arc length from the centre equals `s`.
inline double spiral_theta_at(double s, double b) {
  if (s <= 0.0) return 0.0;
  double theta = std::sqrt(2.0 * s / b);
  for (int i = 0; i < 60; ++i) {
    const double step = (spiral_arc_length(theta, b) - s) / (b * std::sqrt(1.0 + theta * theta));
    theta -= step;
    if (std::abs(step) < 1e-13 * std::max(1.0, theta)) break;
  }
  return theta;
}

struct SpiralProbe {
  double x;
  double y;
  double theta;
};

/// In-plane offset of probe k; probe 0 sits on the centre.
inline SpiralProbe spiral_probe(int k, const SpiralParams& p) {
  const double b = p.pitch / kTwoPi;
  const double theta = spiral_theta_at(k * p.probe_spacing, b);
  const double r = b * theta;
  return {r * std::cos(theta), r * std::sin(theta), theta};
}

/// Index of the last probe that fits into the timeout.
inline int spiral_last_probe(const SpiralParams& p) {
  return static_cast<int>(std::floor(p.timeout / p.probe_period + 1e-9));
}

inline double spiral_last_radius(const SpiralParams& p) {
  const auto probe = spiral_probe(spiral_last_probe(p), p);
  return std::hypot(probe.x, probe.y);
}

/// Radius inside which every point is bracketed by two completed turns and
/// therefore found by the search.
inline double spiral_max_radius(const SpiralParams& p) {
  const double turns = std::floor(spiral_probe(spiral_last_probe(p), p).theta / kTwoPi);
  return p.pitch * std::max(0.0, turns - 1.0);
}

struct SpiralHit {
  Point3 position;
  int probe;
  double duration;  // s
};

/// Probes the Archimedean spiral around `centre` in the plane spanned by `u`
/// and `v`. `probe(k, position)` reports engagement; the caller is expected
/// to spend `probe_period` of simulated time between probes.
inline SpiralHit spiral_search(const Point3& centre, const Vec3& u, const Vec3& v, const SpiralParams& p,
                               const std::function<bool(int, const Point3&)>& probe) {
  if (!(p.pitch > 0.0) || !(p.probe_spacing > 0.0) || !(p.probe_period > 0.0))
    fail(ErrorCode::invalid_argument, "spiral parameters must be positive");
  const int last = spiral_last_probe(p);
  for (int k = 0; k <= last; ++k) {
    const auto o = spiral_probe(k, p);
    const Point3 pos = centre + u * o.x + v * o.y;
    if (probe(k, pos)) return {pos, k, k * p.probe_period};
  }
  fail(ErrorCode::search_timeout, "hole not found within " + std::to_string(p.timeout) + " s");
}

// ---------------------------------------------------------------------------
// Dual-arm plan
// ---------------------------------------------------------------------------

struct PointAssignment {
  int point;
  ArmId arm;
  bool after_first;  // starts only once point 0 is fixed
  bool parallel;     // runs concurrently with the other arm
};

struct ExecutionPlan {
  int points{0};
  bool parallel{false};
  std::vector<PointAssignment> assignments;  // point 0 first

  std::vector<int> points_of(ArmId arm) const {
    std::vector<int> out;
    for (const auto& a : assignments)
      if (a.arm == arm) out.push_back(a.point);
    return out;
  }
};

/// Point 0 is always fixed by robot 1 while robot 2 holds the part. With
/// more than three points the rest are split between both arms.
inline ExecutionPlan schedule_dual_arm(int points, int parallel_min_points = 4) {
  if (points < 1) fail(ErrorCode::invalid_argument, "part needs at least one fixation point");
  ExecutionPlan plan;
  plan.points = points;
  plan.parallel = points >= parallel_min_points;
  plan.assignments.push_back({0, ArmId::robot1, false, false});
  const int rest = points - 1;
  const int first_half = (rest + 1) / 2;
  for (int i = 1; i < points; ++i) {
    const ArmId arm = plan.parallel && (i - 1) >= first_half ? ArmId::robot2 : ArmId::robot1;
    plan.assignments.push_back({i, arm, true, plan.parallel});
  }
  return plan;
}

// ---------------------------------------------------------------------------
// World state shared by the executive and the engine
// ---------------------------------------------------------------------------

inline constexpr double kPartMass = 0.5;      // kg
inline constexpr double kNutHeight = 0.010;   // m
inline constexpr double kLaserBack = 0.10;    // m, laser behind the tool tip
inline constexpr double kLaserSide = 0.04;    // m, laser beside the tool axis

enum class DepthSource { laser, commanded };

struct FaultPlan {
  bool magnet_off_during_carry{false};
  bool skip_deflate{false};
  DepthSource drill_stop{DepthSource::laser};
};

struct ArmContext {
  ArmState state{};
  SimClock clock{};
  RandomStream ft_rng{}, laser_rng{}, camera_rng{}, socket_rng{}, placement_rng{};
  DrillToolConfig drill{};
  HammerTool hammer{};
  NutRunnerTool nut{};
  GripperTool gripper{};
  std::optional<int> held_anchor;
  bool holding_part{false};
  int anchor_stand{0};
  Point3 anchor_pick{};
  Point3 home{};
  std::array<std::string, std::size(kAllChannels)> trace_names{};

  std::string_view name() const { return to_string(state.id); }
};

struct World {
  Scenario scenario{};
  std::uint64_t seed{0};
  Worksite site{};
  std::array<ArmContext, 2> arms{};
  TraceSet traces{};
  std::optional<Frame> wall_estimate;
  Point3 centre_estimate{};
  Point3 part_stand{};
  FaultPlan faults{};

  // filled by the step currently running
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> substeps;

  ArmContext& arm(ArmId id) { return arms[index_of(id)]; }
  const ArmContext& arm(ArmId id) const { return arms[index_of(id)]; }
};

namespace exec {

inline void metric(World& w, const std::string& name, double value) {
  for (auto& [k, v] : w.metrics)
    if (k == name) {
      v = value;
      return;
    }
  w.metrics.emplace_back(name, value);
}

inline const Frame& estimate(const World& w) {
  if (!w.wall_estimate) fail(ErrorCode::state_violation, "wall orientation has not been estimated");
  return *w.wall_estimate;
}

// The wheeled base slips away from the wall, so a commanded pose lands
// short of where it would be on a rigid base.
inline Vec3 slip_shift(const World& w, const ArmContext& arm) {
  return w.site.wall().into() * arm.state.platform.slip_offset;
}
inline Point3 true_point(const World& w, const ArmContext& arm, const Point3& cmd) { return cmd - slip_shift(w, arm); }
inline Point3 arm_point(const World& w, const ArmContext& arm, const Point3& p) { return p + slip_shift(w, arm); }

inline void slip(ArmContext& arm, double force) {
  arm.state.platform = platform_slip_step(arm.state.platform, force, arm.clock.dt());
}

inline FTReading sense(World& w, ArmContext& arm, const Wrench& truth) {
  return read_ft(truth, w.scenario.sensors.ft, arm.ft_rng, arm.clock.t());
}

inline std::size_t channel_index(Channel c) { return static_cast<std::size_t>(c); }

inline void record(World& w, ArmContext& arm, const FTReading& r, std::optional<double> laser_depth = {},
                   std::optional<double> commanded_depth = {}) {
  const double t = arm.clock.t();
  const auto& f = r.wrench;
  const std::array<std::pair<Channel, double>, 6> values = {
      {{Channel::fx, f.fx}, {Channel::fy, f.fy}, {Channel::fz, f.fz}, {Channel::mx, f.mx}, {Channel::my, f.my}, {Channel::mz, f.mz}}};
  for (const auto& [channel, value] : values) w.traces.record(arm.trace_names[channel_index(channel)], t, value);
  if (laser_depth) w.traces.record(arm.trace_names[channel_index(Channel::laser_depth)], t, *laser_depth);
  if (commanded_depth)
    w.traces.record(arm.trace_names[channel_index(Channel::commanded_depth)], t, *commanded_depth);
  w.traces.record(arm.trace_names[channel_index(Channel::slip)], t, arm.state.platform.slip_offset);
}

struct Peaks {
  double max_abs_moment{0.0};
  double max_abs_mx{0.0};
  double max_abs_force{0.0};

  void update(const FTReading& r) {
    max_abs_mx = std::max(max_abs_mx, std::abs(r.wrench.mx));
    max_abs_moment = std::max({max_abs_moment, std::abs(r.wrench.mx), std::abs(r.wrench.my), std::abs(r.wrench.mz)});
    max_abs_force = std::max({max_abs_force, std::abs(r.wrench.fx), std::abs(r.wrench.fy), std::abs(r.wrench.fz)});
  }
};

inline void guard(World& w, const FTReading& r, double travelled) {
  if (const auto g = overload_guard(r, w.scenario.sensors.limits)) {
    metric(w, "halt_value", g.value);
    metric(w, "halt_travel", travelled);
    throw GuardHalt(g.axis, g.value, travelled);
  }
}

inline double laser_depth(World& w, ArmContext& arm, const Point3& tip_true) {
  const Frame& est = estimate(w);
  const Ray beam{tip_true - est.z_axis * kLaserBack + est.y_axis * kLaserSide, est.z_axis};
  return kLaserBack - read_laser(beam, w.site.wall(), w.scenario.sensors.laser_sigma, arm.laser_rng);
}

inline double averaged_laser_depth(World& w, ArmContext& arm, const Point3& tip_true) {
  const int n = w.scenario.procedure.laser_samples;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += laser_depth(w, arm, tip_true);
  return sum / n;
}

inline void transit(World& w, ArmContext& arm, const Point3& target, std::optional<double> speed = {}) {
  if (!within_reach(arm.state, target)) fail(ErrorCode::out_of_reach, "target outside the arm reach");
  const double v = speed.value_or(w.scenario.robot.params.transit_speed);
  arm.clock.advance(distance(arm.state.flange_pose.origin, target) / v);
  arm.state.flange_pose.origin = target;
}

inline void to_stand(World& w, ArmContext& arm) { transit(w, arm, arm.state.tool_stand); }

inline void attach(World& w, ArmContext& arm, ToolId tool) {
  to_stand(w, arm);
  auto change = attach_tool(arm.state, tool, w.scenario.robot.params);
  arm.state = std::move(change.arm);
  arm.clock.advance(change.duration);
}

inline void detach(World& w, ArmContext& arm) {
  to_stand(w, arm);
  auto change = detach_tool(arm.state, w.scenario.robot.params);
  arm.state = std::move(change.arm);
  arm.clock.advance(change.duration);
}

inline void require_tool(const ArmContext& arm, ToolId tool) {
  if (arm.state.attached_tool != tool)
    fail(ErrorCode::no_tool, std::string(to_string(tool)) + " is not attached to " + std::string(arm.name()));
}

struct Contact {
  Point3 cmd;
  double travelled;
  FTReading reading;
  Wrench truth;
};

/// Guarded approach along `dir` at the approach speed until the measured fz
/// reaches `threshold`. `model` maps the true tip position to the wrench.
template <class Model>
Contact approach(World& w, ArmContext& arm, const Point3& start, const Vec3& dir, double threshold, double max_travel,
                 Peaks& peaks, Model&& model) {
  const double v = w.scenario.procedure.approach_speed;
  const double dt = arm.clock.dt();
  for (std::int64_t k = 1;; ++k) {
    const double travelled = v * dt * static_cast<double>(k);
    if (travelled > max_travel) fail(ErrorCode::no_contact, "no contact within " + std::to_string(max_travel) + " m");
    const Point3 cmd = start + dir * travelled;
    arm.clock.tick();
    const Wrench truth = model(true_point(w, arm, cmd));
    slip(arm, truth.fz);
    const FTReading r = sense(w, arm, truth);
    record(w, arm, r);
    peaks.update(r);
    arm.state.flange_pose.origin = cmd;
    guard(w, r, travelled);
    if (r.wrench.fz >= threshold) return {cmd, travelled, r, truth};
  }
}

/// Retracts from the wall back to `target` at the retract speed.
inline void retract(World& w, ArmContext& arm, const Point3& target) {
  transit(w, arm, target, w.scenario.procedure.retract_speed);
}

inline Point3 planned_hole(const World& w, int point) {
  const Frame& est = estimate(w);
  const auto& part = w.site.part();
  const Point3 local = part.hole_positions.at(static_cast<std::size_t>(point));
  Frame centred = est;
  centred.origin = w.centre_estimate;
  return from_frame(centred, {w.scenario.part.target_x + local.x, w.scenario.part.target_y + local.y, 0.0});
}

}  // namespace exec

// ---------------------------------------------------------------------------
// Fixation steps
// ---------------------------------------------------------------------------

/// Step 1: three laser measurements at fixed offsets in the base yz plane.
inline Frame estimate_orientation(World& w, ArmId id) {
  using namespace exec;
  auto& arm = w.arm(id);
  const auto& ws = w.scenario.wall;
  const auto& pr = w.scenario.procedure;
  const double h = 0.5 * pr.laser_offset;
  const Vec3 beam_dir{1.0, 0.0, 0.0};
  const Point3 o1{ws.distance - pr.laser_standoff, ws.centre_y + h, ws.centre_z + h};
  const std::array<Point3, 3> origins = {o1, o1 - Vec3{0.0, pr.laser_offset, 0.0}, o1 - Vec3{0.0, 0.0, pr.laser_offset}};
  std::array<Point3, 3> pts;
  for (std::size_t i = 0; i < 3; ++i) {
    transit(w, arm, origins[i]);
    arm.clock.advance(pr.capture_time);
    const Ray beam{true_point(w, arm, origins[i]), beam_dir};
    double sum = 0.0;
    for (int s = 0; s < pr.laser_samples; ++s)
      sum += read_laser(beam, w.site.wall(), w.scenario.sensors.laser_sigma, arm.laser_rng);
    pts[i] = origins[i] + beam_dir * (sum / pr.laser_samples);
  }
  const Frame frame = estimate_wall_frame(pts[0], pts[1], pts[2]);
  w.wall_estimate = frame;
  // nominal centre carried along the beam onto the estimated plane
  const Point3 nominal{ws.distance, ws.centre_y, ws.centre_z};
  const double denom = dot(beam_dir, frame.z_axis);
  if (std::abs(denom) < 1e-9) fail(ErrorCode::degenerate_geometry, "estimated wall is parallel to the beam");
  w.centre_estimate = nominal + beam_dir * (dot(frame.origin - nominal, frame.z_axis) / denom);
  metric(w, "angle_error_deg", rad_to_deg(max_axis_angle(frame, w.site.wall().frame)));
  metric(w, "normal_error_deg", rad_to_deg(angle_between(frame.z_axis, w.site.wall().frame.z_axis)));
  return frame;
}

/// Step 2: robot 2 carries the part from its stand to the target pose.
inline void pick_place_part(World& w, ArmId id) {
  using namespace exec;
  auto& arm = w.arm(id);
  const Frame& est = estimate(w);
  const auto& pr = w.scenario.procedure;
  const auto& ps = w.scenario.part;

  attach(w, arm, ToolId::gripper);
  transit(w, arm, w.part_stand);
  GripContext ctx;
  ctx.part_within_reach = true;
  auto out = gripper_set(arm.hammer, arm.gripper, GripAction::magnet_on, ctx, w.site);
  arm.holding_part = out.holding_part;
  arm.state.held_mass += kPartMass;
  arm.clock.advance(pr.gripper_time);

  Frame centred = est;
  centred.origin = w.centre_estimate;
  const Point3 target_cmd = from_frame(centred, {ps.target_x, ps.target_y, 0.0});
  const Point3 above = target_cmd - est.z_axis * pr.approach_standoff;

  if (w.faults.magnet_off_during_carry) {
    transit(w, arm, w.part_stand + (above - w.part_stand) * 0.5);
    ctx.holding_part = arm.holding_part;
    out = gripper_set(arm.hammer, arm.gripper, GripAction::magnet_off, ctx, w.site);
    arm.holding_part = false;
    arm.state.held_mass -= kPartMass;
    if (out.part_dropped) fail(ErrorCode::part_dropped, "magnet released the part during transport");
  }

  transit(w, arm, above);
  transit(w, arm, target_cmd, pr.approach_speed);

  const double ex = arm.placement_rng.normal(0.0, ps.placement_sigma);
  const double ey = arm.placement_rng.normal(0.0, ps.placement_sigma);
  const Frame& wall = w.site.wall().frame;
  Frame pose = wall;
  pose.origin = wall.origin + wall.x_axis * (ps.target_x + ex) + wall.y_axis * (ps.target_y + ey);
  w.site.place_part(pose);
  metric(w, "placement_error", std::hypot(ex, ey));
}

/// Steps 3 and 5: camera capture aimed at `aim` (arm coordinates), retried
/// up to the configured number of attempts.
inline Detection detect(World& w, ArmId id, DetectionKind kind, const Point3& aim) {
  using namespace exec;
  auto& arm = w.arm(id);
  const Frame& est = estimate(w);
  const auto& pr = w.scenario.procedure;
  const Point3 origin = aim - est.z_axis * pr.camera_standoff;
  transit(w, arm, origin);
  const Ray axis{true_point(w, arm, origin), est.z_axis};
  for (int attempt = 1; attempt <= pr.camera_attempts; ++attempt) {
    arm.clock.advance(pr.capture_time);
    if (auto d = camera_detect(kind, w.site, axis, w.scenario.sensors.camera, arm.camera_rng)) {
      metric(w, "attempts", attempt);
      metric(w, "confidence", d->confidence);
      d->position = arm_point(w, arm, d->position);
      return *d;
    }
  }
  fail(ErrorCode::detection_missing,
       std::string(to_string(kind)) + " not found after " + std::to_string(pr.camera_attempts) + " captures");
}

/// Step 4: drill through the detected part hole. Returns the new hole id.
inline int drill_hole(World& w, ArmId id, const Detection& target) {
  using namespace exec;
  auto& arm = w.arm(id);
  const Frame& est = estimate(w);
  const auto& sc = w.scenario;
  const auto& pr = sc.procedure;
  const auto& cfg = arm.drill;
  cfg.validate();

  attach(w, arm, ToolId::drill);
  const Vec3 dir = est.z_axis;
  const Point3 start = target.position - dir * pr.approach_standoff;
  transit(w, arm, start);

  const double lever = cfg.variant == DrillVariant::aligned_axis ? cfg.aligned_lever() : cfg.drill_offset;
  const double k_env = sc.tools.contact.environment_stiffness;
  Peaks peaks;
  const Contact touch = approach(w, arm, start, dir, sc.thresholds.contact_force, 3.0 * pr.approach_standoff, peaks,
                                 [&](const Point3& tip) {
                                   const double f = k_env * std::max(0.0, w.site.wall().depth_of(tip));
                                   return Wrench{0.0, 0.0, f, -f * lever, 0.0, 0.0};
                                 });
  arm.clock.advance(pr.spindle_time);

  const double target_depth = sc.thresholds.drill_depth_target;
  const double dt = arm.clock.dt();
  const double slip0 = arm.state.platform.slip_offset;
  const double depth0 = averaged_laser_depth(w, arm, true_point(w, arm, touch.cmd));
  double depth = std::max(0.0, w.site.wall().depth_of(true_point(w, arm, touch.cmd)));
  double advance = 0.0;
  double laser = depth0;
  double commanded = depth0;
  Point3 cmd = touch.cmd;
  metric(w, "contact_fz", touch.reading.wrench.fz);

  for (std::int64_t k = 1;; ++k) {
    advance = cfg.feed_speed * dt * static_cast<double>(k);
    if (advance > target_depth + 0.02) fail(ErrorCode::state_violation, "drill depth target not reached");
    cmd = touch.cmd + dir * advance;
    arm.clock.tick();
    slip(arm, drill_axial_force(cfg, depth));
    depth = std::max(depth, w.site.wall().depth_of(true_point(w, arm, cmd)));
    const Wrench truth{0.0, 0.0, drill_axial_force(cfg, depth), drill_reaction_moment(cfg, depth), 0.0, 0.0};
    const FTReading r = sense(w, arm, truth);
    laser = laser_depth(w, arm, true_point(w, arm, cmd));
    commanded = depth0 + advance;
    record(w, arm, r, laser, commanded);
    peaks.update(r);
    arm.state.flange_pose.origin = cmd;
    metric(w, "depth", depth);
    metric(w, "max_abs_mx", peaks.max_abs_mx);
    guard(w, r, advance);
    const double measured = w.faults.drill_stop == DepthSource::laser ? laser : commanded;
    if (measured >= target_depth) break;
  }
  arm.clock.advance(pr.spindle_time);

  const Point3 tip = true_point(w, arm, cmd);
  const auto& hole = w.site.register_drilled_hole(w.site.wall().project(tip), dir, depth);
  metric(w, "laser_depth", laser);
  metric(w, "commanded_depth", commanded);
  metric(w, "commanded_advance", advance);
  metric(w, "slip", arm.state.platform.slip_offset - slip0);
  metric(w, "feed_time", advance / cfg.feed_speed);
  metric(w, "max_abs_moment", peaks.max_abs_moment);
  const int hole_id = hole.id;

  retract(w, arm, start);
  detach(w, arm);
  return hole_id;
}

/// Step 6: hammer tool on, anchor picked from the arm's anchor stand.
inline void pick_anchor(World& w, ArmId id) {
  using namespace exec;
  auto& arm = w.arm(id);
  attach(w, arm, ToolId::hammer);
  transit(w, arm, arm.anchor_pick);
  GripContext ctx;
  ctx.anchor_stand = arm.anchor_stand;
  const auto out = gripper_set(arm.hammer, arm.gripper, GripAction::inflate, ctx, w.site);
  arm.held_anchor = out.held_anchor;
  arm.state.held_mass += w.site.anchor(*arm.held_anchor).mass;
  arm.clock.advance(w.scenario.procedure.gripper_time);
  metric(w, "anchor", *arm.held_anchor);
}

namespace exec {

inline std::optional<int> free_hole_near(const World& w, const Point3& p) {
  std::optional<int> best;
  double best_d = kEngagementReach;
  for (const auto& h : w.site.holes()) {
    if (h.anchor) continue;
    const double d = distance(h.position, w.site.wall().project(p));
    if (d <= best_d) {
      best_d = d;
      best = h.id;
    }
  }
  return best;
}

inline double radial_offset(const DrilledHole& hole, const Point3& p) {
  const Vec3 rel = p - hole.position;
  return norm(rel - hole.axis * dot(rel, hole.axis));
}

}  // namespace exec

/// Step 7: approach the detected hole, search if the tip lands on the
/// surface, then push until the insertion end moment. Returns the anchor id.
inline int insert_anchor(World& w, ArmId id, const Detection& hole_detection) {
  using namespace exec;
  auto& arm = w.arm(id);
  const Frame& est = estimate(w);
  const auto& sc = w.scenario;
  const auto& pr = sc.procedure;
  const auto& cc = sc.tools.contact;
  require_tool(arm, ToolId::hammer);
  if (!arm.held_anchor) fail(ErrorCode::state_violation, "no anchor in the gripper");
  if (arm.hammer.gripper != GripperState::inflated) fail(ErrorCode::state_violation, "gripper is not inflated");
  const int anchor = *arm.held_anchor;
  const double offset = arm.hammer.offset;

  const Vec3 dir = est.z_axis;
  const Point3 start = hole_detection.position - dir * pr.approach_standoff;
  transit(w, arm, start);

  const std::optional<int> hole_id = free_hole_near(w, true_point(w, arm, hole_detection.position));
  bool engaged = false;
  auto tip_force = [&](const Point3& tip) {
    const double d = w.site.wall().depth_of(tip);
    if (engaged) {
      if (d <= 0.0) return 0.0;
      return cc.insertion_friction + cc.jam_stiffness * std::max(0.0, d - cc.anchor_stick_depth);
    }
    return cc.environment_stiffness * std::max(0.0, d);
  };
  auto wrench = [&](double f) { return Wrench{0.0, 0.0, f, -f * offset, 0.0, 0.0}; };
  auto engagement = [&](const Point3& tip) {
    if (!hole_id) return Engagement::surface_contact;
    const auto& hole = w.site.hole(*hole_id);
    if (distance(hole.position, tip) > kEngagementReach) return Engagement::surface_contact;
    return anchor_engagement(hole, tip);
  };

  Peaks peaks;
  Point3 first_tip{};
  bool first_checked = false;
  const Contact touch = approach(w, arm, start, dir, sc.thresholds.contact_force, 3.0 * pr.approach_standoff, peaks,
                                 [&](const Point3& tip) {
                                   if (!first_checked && w.site.wall().depth_of(tip) >= 0.0) {
                                     first_checked = true;
                                     first_tip = tip;
                                     engaged = engagement(tip) == Engagement::engaged;
                                   }
                                   return wrench(tip_force(tip));
                                 });
  const Engagement first = engagement(first_tip);
  metric(w, "first_engagement", static_cast<double>(first));
  metric(w, "engaged_first_try", engaged ? 1.0 : 0.0);
  if (hole_id) metric(w, "initial_offset", radial_offset(w.site.hole(*hole_id), first_tip));

  Point3 cmd = touch.cmd;
  double search_time = 0.0;
  if (!engaged) {
    const SpiralParams sp{pr.spiral_pitch, pr.probe_spacing, pr.probe_period, sc.thresholds.search_timeout};
    const std::int64_t ticks_per_probe = arm.clock.ticks_for(pr.probe_period);
    const Wrench hold = wrench(pr.search_force);
    const auto hit = spiral_search(touch.cmd, est.x_axis, est.y_axis, sp, [&](int k, const Point3& probe_cmd) {
      if (k > 0) {
        for (std::int64_t i = 0; i < ticks_per_probe; ++i) {
          arm.clock.tick();
          slip(arm, hold.fz);
          const FTReading r = sense(w, arm, hold);
          record(w, arm, r);
          peaks.update(r);
          guard(w, r, 0.0);
        }
      }
      arm.state.flange_pose.origin = probe_cmd;
      return engagement(true_point(w, arm, probe_cmd)) == Engagement::engaged;
    });
    engaged = true;
    cmd = hit.position;
    search_time = hit.duration;
    metric(w, "probes", hit.probe);
  }
  metric(w, "search_time", search_time);

  const double dt = arm.clock.dt();
  const Point3 push_start = cmd;
  const double push_depth0 = std::max(0.0, w.site.wall().depth_of(true_point(w, arm, push_start)));
  double depth = 0.0;
  for (std::int64_t k = 1;; ++k) {
    const double advance = pr.insertion_speed * dt * static_cast<double>(k);
    cmd = push_start + dir * advance;
    arm.clock.tick();
    const Point3 tip = true_point(w, arm, cmd);
    depth = std::max(0.0, w.site.wall().depth_of(tip));
    if (hole_id && depth > w.site.hole(*hole_id).depth) fail(ErrorCode::state_violation, "anchor reached the hole bottom");
    const Wrench truth = wrench(tip_force(tip));
    slip(arm, truth.fz);
    const FTReading r = sense(w, arm, truth);
    const double laser = laser_depth(w, arm, tip);
    record(w, arm, r, laser, push_depth0 + advance);
    peaks.update(r);
    arm.state.flange_pose.origin = cmd;
    metric(w, "max_abs_mx", peaks.max_abs_mx);
    guard(w, r, advance);
    if (std::abs(r.wrench.mx) >= sc.thresholds.insertion_end_moment) break;
  }
  w.site.stick_anchor(anchor, *hole_id, depth);
  metric(w, "stuck_depth", depth);
  metric(w, "max_abs_moment", peaks.max_abs_moment);
  return anchor;
}

/// Step 8: release the anchor and hammer it to the hole bottom.
inline void hammer_anchor(World& w, ArmId id) {
  using namespace exec;
  auto& arm = w.arm(id);
  const auto& sc = w.scenario;
  const auto& pr = sc.procedure;
  require_tool(arm, ToolId::hammer);
  if (!arm.held_anchor) fail(ErrorCode::state_violation, "no anchor to hammer");
  const int anchor_id = *arm.held_anchor;
  const AnchorBolt anchor = w.site.anchor(anchor_id);
  if (anchor.state != AnchorState::stuck || !anchor.hole) fail(ErrorCode::state_violation, "anchor is not stuck in a hole");
  const DrilledHole hole = w.site.hole(*anchor.hole);

  if (!w.faults.skip_deflate) {
    GripContext ctx;
    ctx.held_anchor = anchor_id;
    ctx.anchor_supported = true;
    gripper_set(arm.hammer, arm.gripper, GripAction::deflate, ctx, w.site);
    arm.held_anchor.reset();
    arm.state.held_mass -= anchor.mass;
    arm.clock.advance(pr.gripper_time);
  }

  auto& tool = arm.hammer;
  tool.bottom_blows = 0;
  const Vec3 dir = hole.axis;
  const Point3 cmd0 = arm.state.flange_pose.origin;
  const std::int64_t t0 = arm.clock.ticks();
  const double dt = arm.clock.dt();
  double depth = anchor.depth;
  double peak = tool.free_moment;
  int blows = 0;
  Peaks peaks;
  double laser = depth;
  double displacement = 0.0;

  while (true) {
    arm.clock.tick();
    const double elapsed = static_cast<double>(arm.clock.ticks() - t0) * dt;
    if (elapsed > pr.hammer_timeout) fail(ErrorCode::hammer_timeout, "hammering end criteria not met in time");
    const auto due = static_cast<int>(std::floor(elapsed * tool.blow_rate + 1e-9));
    while (blows < due) {
      const BlowResult b = hammer_blow(tool, depth, hole);
      depth = b.depth;
      peak = b.peak_moment;
      ++blows;
    }
    const double force = peak / tool.offset;
    slip(arm, force);
    const Point3 tip = hole.position + dir * depth;
    const Point3 cmd = arm_point(w, arm, tip);
    displacement = dot(cmd - cmd0, dir);
    arm.state.flange_pose.origin = cmd;
    const FTReading r = sense(w, arm, Wrench{0.0, 0.0, force, -peak, 0.0, 0.0});
    laser = laser_depth(w, arm, tip);
    record(w, arm, r, laser, anchor.depth + displacement);
    peaks.update(r);
    metric(w, "depth", depth);
    metric(w, "displacement", displacement);
    metric(w, "max_abs_mx", peaks.max_abs_mx);
    guard(w, r, displacement);
    if (std::abs(r.wrench.mx) >= sc.thresholds.hammering_end_moment) {
      if (!(laser > sc.thresholds.hammer_success_depth))
        fail(ErrorCode::depth_criterion_unmet, "hammering end moment reached at laser depth " +
                                                   std::to_string(laser * 1000.0) + " mm, below " +
                                                   std::to_string(sc.thresholds.hammer_success_depth * 1000.0) + " mm");
      metric(w, "stop_mx", r.wrench.mx);
      break;
    }
  }
  w.site.seat_anchor(anchor_id, depth);
  metric(w, "laser_depth", laser);
  metric(w, "blows", blows);
  metric(w, "hammer_time", static_cast<double>(arm.clock.ticks() - t0) * dt);
  metric(w, "max_abs_moment", peaks.max_abs_moment);

  retract(w, arm, arm.state.flange_pose.origin - dir * (depth + pr.approach_standoff));
  detach(w, arm);
}

/// Step 9: the six-step nut fastening protocol.
inline void tighten_nut(World& w, ArmId id, const Detection& anchor_detection) {
  using namespace exec;
  auto& arm = w.arm(id);
  const Frame& est = estimate(w);
  const auto& sc = w.scenario;
  const auto& pr = sc.procedure;
  auto& nut = arm.nut;
  const double threshold = sc.thresholds.approach_force_z;

  attach(w, arm, ToolId::nut_runner);
  nut.engaged = false;
  const Vec3 dir = est.z_axis;
  const Vec3 into = w.site.wall().into();
  const Point3 start = anchor_detection.position - dir * (pr.approach_standoff + sc.tools.contact.nut_gap + kNutHeight);
  transit(w, arm, start);

  // the seated anchor whose nut the socket lands on, if any
  std::optional<int> target;
  {
    const Point3 axis_point = true_point(w, arm, anchor_detection.position);
    for (const auto& a : w.site.anchors()) {
      if (a.state != AnchorState::seated || !a.hole) continue;
      if (radial_offset(w.site.hole(*a.hole), axis_point) <= nut.socket_capture_radius) target = a.id;
    }
  }
  double gap = sc.tools.contact.nut_gap;
  bool fitted = false;
  double mz = 0.0;

  auto compression = [&](const Point3& tip) {
    if (!target) return std::max(0.0, w.site.wall().depth_of(tip));
    const auto& hole = w.site.hole(*w.site.anchor(*target).hole);
    const Point3 face = hole.position - into * (gap + kNutHeight);
    const double pen = dot(tip - face, into);
    return std::max(0.0, pen - (fitted ? kNutHeight : 0.0));
  };
  auto spring = [&](double c) {
    const double travel = nut.socket_spring_travel;
    if (c <= travel) return nut.socket_spring_rate * c;
    return nut.socket_spring_rate * travel + sc.tools.contact.environment_stiffness * (c - travel);
  };
  auto wrench = [&](double f) { return Wrench{0.0, 0.0, f, -f * nut.runner_offset, 0.0, mz}; };

  Peaks peaks;
  auto hold_tick = [&](const Point3& cmd) {
    arm.clock.tick();
    const Wrench truth = wrench(spring(compression(true_point(w, arm, cmd))));
    slip(arm, truth.fz);
    const FTReading r = sense(w, arm, truth);
    record(w, arm, r);
    peaks.update(r);
    guard(w, r, 0.0);
    return r;
  };
  auto press = [&](const Point3& from, const char* label) {
    const Contact c = approach(w, arm, from, dir, threshold, 0.05, peaks,
                               [&](const Point3& tip) { return wrench(spring(compression(tip))); });
    w.substeps.emplace_back(label);
    metric(w, std::string(label) + "_fz", c.reading.wrench.fz);
    metric(w, std::string(label) + "_true_fz", c.truth.fz);
    return c.cmd;
  };

  // (1) approach until the socket spring carries the threshold force
  Point3 cmd = press(start, "approach");

  // (2) alternate rotation until the socket drops over the nut flats
  {
    const double phase = arm.socket_rng.uniform(0.0, 60.0);
    const double dt = arm.clock.dt();
    const double c0 = compression(true_point(w, arm, cmd));
    double angle = 0.0;
    double elapsed = 0.0;
    int segment = 1;
    double seg_left = nut.fit_half_period;
    double direction = 1.0;
    bool found = false;
    while (!found) {
      elapsed += dt;
      if (elapsed > pr.socket_fit_timeout + 1e-9) fail(ErrorCode::socket_fit_timeout, "socket did not fit the nut");
      angle += direction * nut.fit_rotation_speed * dt;
      seg_left -= dt;
      if (seg_left <= 1e-12) {
        ++segment;
        direction = -direction;
        seg_left += segment * nut.fit_half_period;
      }
      const double rel = std::fmod(std::fmod(angle - phase, 60.0) + 60.0, 60.0);
      if (target && std::min(rel, 60.0 - rel) <= nut.fit_tolerance_deg) fitted = true;
      const FTReading r = hold_tick(cmd);
      const double extension = c0 - compression(true_point(w, arm, cmd));
      if (r.wrench.fz < pr.socket_fit_force && extension > pr.socket_fit_extension) {
        found = true;
        metric(w, "fit_extension", extension);
      }
    }
    metric(w, "fit_time", elapsed);
    nut.engaged = true;
    w.substeps.emplace_back("fit");
  }

  // (3) re-approach
  cmd = press(cmd, "reapproach");

  // (4) run the nut down to the part while the arm holds still
  mz = nut.rundown_torque;
  while (gap > 0.0) {
    gap = std::max(0.0, gap - nut.rundown_speed * arm.clock.dt());
    hold_tick(cmd);
  }
  mz = 0.0;
  w.substeps.emplace_back("rundown");

  // (5) re-approach
  cmd = press(cmd, "final_approach");

  // (6) pulse tightening
  double torque = 0.0;
  {
    const std::int64_t t0 = arm.clock.ticks();
    const double dt = arm.clock.dt();
    int pulses = 0;
    while (torque < nut.target_torque) {
      arm.clock.tick();
      const double elapsed = static_cast<double>(arm.clock.ticks() - t0) * dt;
      const auto due = static_cast<int>(std::floor(elapsed * nut.pulse_rate + 1e-9));
      mz = 0.0;
      while (pulses < due && torque < nut.target_torque) {
        const PulseResult p = nutrunner_pulse(torque, nut);
        torque = p.torque;
        mz = p.flange_moment;
        ++pulses;
      }
      const Wrench truth = wrench(spring(compression(true_point(w, arm, cmd))));
      slip(arm, truth.fz);
      const FTReading r = sense(w, arm, truth);
      record(w, arm, r);
      peaks.update(r);
      guard(w, r, 0.0);
    }
    mz = 0.0;
    metric(w, "pulses", pulses);
    w.substeps.emplace_back("tighten");
  }
  w.site.tighten_anchor(*target, torque);
  nut.engaged = false;
  metric(w, "torque", torque);
  metric(w, "max_abs_moment", peaks.max_abs_moment);

  retract(w, arm, start);
  detach(w, arm);
}

/// Step 10: robot 2 lets go of the part and parks the gripper.
inline void release_part(World& w, ArmId id) {
  using namespace exec;
  auto& arm = w.arm(id);
  if (!arm.holding_part) fail(ErrorCode::state_violation, std::string(arm.name()) + " is not holding the part");
  GripContext ctx;
  ctx.holding_part = true;
  ctx.part_supported = w.site.part().fixed_points > 0;
  const auto out = gripper_set(arm.hammer, arm.gripper, GripAction::magnet_off, ctx, w.site);
  arm.holding_part = false;
  arm.state.held_mass -= kPartMass;
  arm.clock.advance(w.scenario.procedure.gripper_time);
  if (out.part_dropped) fail(ErrorCode::part_dropped, "part released before any point was fixed");
  retract(w, arm, arm.state.flange_pose.origin - estimate(w).z_axis * w.scenario.procedure.approach_standoff);
  detach(w, arm);
}

// ---------------------------------------------------------------------------
// Report and orchestration
// ---------------------------------------------------------------------------

struct StepOutcome {
  FixationStep step{FixationStep::EstimateOrientation};
  ArmId arm{ArmId::robot1};
  int point{0};
  double start{0.0};     // s
  double duration{0.0};  // s
  bool ok{true};
  std::optional<ErrorCode> error;
  std::string message;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> substeps;

  std::optional<double> metric(std::string_view name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    return std::nullopt;
  }
};

struct AnchorSummary {
  int id;
  int hole;
  AnchorState state;
  double depth;
  double torque;
};

struct FixationReport {
  bool success{false};
  std::vector<StepOutcome> steps;
  double total_duration{0.0};  // s, completion time of the last arm
  ExecutionPlan plan{};
  PartState part_state{PartState::in_stand};
  int fixed_points{0};
  std::vector<AnchorSummary> anchors;
  std::vector<std::string> trace_ids;  // traces holding samples

  const StepOutcome* failure() const {
    for (const auto& s : steps)
      if (!s.ok) return &s;
    return nullptr;
  }

  const StepOutcome* find(FixationStep step, int point = 0) const {
    for (const auto& s : steps)
      if (s.step == step && s.point == point) return &s;
    return nullptr;
  }

  double step_sum() const {
    double sum = 0.0;
    for (const auto& s : steps) sum += s.duration;
    return sum;
  }

  /// Time spent on one fixation point, excluding part handling by robot 2.
  double point_duration(int point) const {
    double sum = 0.0;
    for (const auto& s : steps)
      if (s.point == point && s.step != FixationStep::PickPlacePart && s.step != FixationStep::ReleaseRepeat)
        sum += s.duration;
    return sum;
  }
};

/// Runs one step on `arm`, capturing its outcome. Returns false on failure.
template <class Fn>
bool run_step(World& w, FixationReport& report, FixationStep step, ArmId arm, int point, Fn&& fn) {
  auto& ctx = w.arm(arm);
  StepOutcome out;
  out.step = step;
  out.arm = arm;
  out.point = point;
  out.start = ctx.clock.t();
  w.metrics.clear();
  w.substeps.clear();
  try {
    fn();
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.code();
    out.message = e.what();
  }
  out.duration = ctx.clock.t() - out.start;
  out.metrics = std::move(w.metrics);
  out.substeps = std::move(w.substeps);
  w.metrics.clear();
  w.substeps.clear();
  report.steps.push_back(std::move(out));
  return report.steps.back().ok;
}

namespace exec {

// Per-arm progress through steps 3 to 9 of its assigned points.
struct PointQueue {
  ArmId arm{ArmId::robot1};
  std::vector<int> points{};
  std::size_t point_index{0};
  std::size_t step_index{0};
  std::optional<Detection> part_hole{};
  std::optional<Detection> wall_hole{};

  bool done() const { return point_index >= points.size(); }
};

inline void sync_clocks(World& w) {
  const auto t = std::max(w.arms[0].clock.ticks(), w.arms[1].clock.ticks());
  for (auto& a : w.arms) a.clock.sync_to(t);
}

inline bool run_point_step(World& w, FixationReport& report, PointQueue& q) {
  const int point = q.points[q.point_index];
  const FixationStep step = kPointSteps[q.step_index];
  const bool ok = run_step(w, report, step, q.arm, point, [&] {
    switch (step) {
      case FixationStep::DetectPartHole:
        q.part_hole = detect(w, q.arm, DetectionKind::part_hole, planned_hole(w, point));
        break;
      case FixationStep::DrillHole: {
        const int hole = drill_hole(w, q.arm, *q.part_hole);
        metric(w, "hole", hole);
        break;
      }
      case FixationStep::DetectWallHole:
        q.wall_hole = detect(w, q.arm, DetectionKind::wall_hole, q.part_hole->position);
        break;
      case FixationStep::PickAnchor: pick_anchor(w, q.arm); break;
      case FixationStep::InsertAnchor: insert_anchor(w, q.arm, *q.wall_hole); break;
      case FixationStep::HammerAnchor: hammer_anchor(w, q.arm); break;
      case FixationStep::TightenNut:
        tighten_nut(w, q.arm, *q.wall_hole);
        if (w.site.part().state == PartState::held_on_wall || w.site.part().state == PartState::partially_fixed)
          w.site.mark_point_fixed();
        break;
      default: break;
    }
  });
  if (++q.step_index == kPointSteps.size()) {
    q.step_index = 0;
    ++q.point_index;
  }
  return ok;
}

inline void finish_report(const World& w, FixationReport& report) {
  report.total_duration = std::max(w.arms[0].clock.t(), w.arms[1].clock.t());
  report.part_state = w.site.part().state;
  report.fixed_points = w.site.part().fixed_points;
  for (const auto& a : w.site.anchors())
    if (a.hole) report.anchors.push_back({a.id, *a.hole, a.state, a.depth, a.torque});
  for (const auto& id : w.traces.ids())
    if (!w.traces.get(id).samples.empty()) report.trace_ids.push_back(id);
}

}  // namespace exec

/// Full procedure: point 0 in order of steps 1 to 10, then the remaining
/// points as planned. Aborts at the first failed step.
inline FixationReport run_fixation(World& w) {
  using namespace exec;
  FixationReport report;
  report.plan = schedule_dual_arm(static_cast<int>(w.site.part().hole_count()), w.scenario.procedure.parallel_min_points);
  const auto finish = [&] {
    finish_report(w, report);
    report.success = report.failure() == nullptr && w.site.part().state == PartState::fixed;
    return report;
  };

  sync_clocks(w);
  if (!run_step(w, report, FixationStep::EstimateOrientation, ArmId::robot1, 0,
                [&] { estimate_orientation(w, ArmId::robot1); }))
    return finish();
  sync_clocks(w);
  if (!run_step(w, report, FixationStep::PickPlacePart, ArmId::robot2, 0, [&] { pick_place_part(w, ArmId::robot2); }))
    return finish();

  PointQueue first;
  first.points = {0};
  while (!first.done()) {
    sync_clocks(w);
    if (!run_point_step(w, report, first)) return finish();
  }
  sync_clocks(w);
  if (!run_step(w, report, FixationStep::ReleaseRepeat, ArmId::robot2, 0, [&] { release_part(w, ArmId::robot2); }))
    return finish();
  sync_clocks(w);

  std::array<PointQueue, 2> queues{};
  queues[1].arm = ArmId::robot2;
  for (const auto& a : report.plan.assignments)
    if (a.after_first) queues[index_of(a.arm)].points.push_back(a.point);

  // step-granular interleaving: the arm that is behind in time goes next,
  // robot 1 on ties
  while (!queues[0].done() || !queues[1].done()) {
    std::size_t pick = 0;
    if (queues[0].done()) pick = 1;
    else if (!queues[1].done() && w.arms[1].clock.ticks() < w.arms[0].clock.ticks()) pick = 1;
    if (!report.plan.parallel) sync_clocks(w);
    if (!run_point_step(w, report, queues[pick])) return finish();
  }
  return finish();
}

}  // namespace fixsim
