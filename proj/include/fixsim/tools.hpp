#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "fixsim/errors.hpp"
#include "fixsim/worksite.hpp"

namespace fixsim {

// ---------------------------------------------------------------------------
// Hole drilling tool
// ---------------------------------------------------------------------------

enum class DrillVariant { aligned_axis, offset_uncompensated, regular_spring, constant_load_spring };

inline constexpr std::string_view to_string(DrillVariant v) {
  switch (v) {
    case DrillVariant::aligned_axis: return "aligned_axis";
    case DrillVariant::offset_uncompensated: return "offset_uncompensated";
    case DrillVariant::regular_spring: return "regular_spring";
    case DrillVariant::constant_load_spring: return "constant_load_spring";
  }
  return "?";
}

inline std::optional<DrillVariant> parse_drill_variant(std::string_view name) {
  for (auto v : {DrillVariant::aligned_axis, DrillVariant::offset_uncompensated, DrillVariant::regular_spring,
                 DrillVariant::constant_load_spring})
    if (to_string(v) == name) return v;
  return std::nullopt;
}

// Thrust is modelled as affine in depth. Calibrated so that the offset
// tool without support arm reaches -30 Nm at 10 mm, the regular spring
// overcompensates before 80 mm and the constant load spring stays inside
// the moment limit over the full depth.
struct DrillThrust {
  double base{280.0};    // N at zero depth
  double slope{2000.0};  // N/m

  bool operator==(const DrillThrust&) const = default;
};

struct DrillToolConfig {
  DrillVariant variant{DrillVariant::constant_load_spring};
  double drill_offset{0.10};        // m, drill axis to flange axis
  double support_arm_offset{0.20};  // m, support rod to flange axis
  double spring_rate{2150.0};       // N/m, regular spring
  double spring_preload{0.10};      // m, regular spring compression at contact
  double constant_load{147.0};      // N, constant load spring
  double aligned_tip_length{0.45};  // m, flange to bit tip for the aligned tool
  double perpendicularity_error_deg{10.0};
  double bit_diameter{kDrillBitDiameter};
  double bit_length{0.160};
  double feed_speed{0.00225};  // m/s
  DrillThrust thrust{};

  void validate() const {
    if (!(drill_offset > 0.0) || !(support_arm_offset > 0.0))
      fail(ErrorCode::invalid_argument, "drill and support arm offsets must be positive");
    if (variant == DrillVariant::regular_spring && !(spring_rate > 0.0))
      fail(ErrorCode::invalid_argument, "regular spring needs a positive spring rate");
    if (variant == DrillVariant::constant_load_spring && !(constant_load > 0.0))
      fail(ErrorCode::invalid_argument, "constant load spring needs a positive load");
    if (!(feed_speed > 0.0)) fail(ErrorCode::invalid_argument, "feed speed must be positive");
    if (!(thrust.slope >= 0.0)) fail(ErrorCode::invalid_argument, "thrust must be nondecreasing in depth");
  }

  /// Lever of the thrust about the flange for the aligned tool: bit length
  /// times the sine of the perpendicularity error.
  double aligned_lever() const { return aligned_tip_length * std::sin(deg_to_rad(perpendicularity_error_deg)); }

  bool operator==(const DrillToolConfig&) const = default;
};

// The laser stop can trail the true depth by a few sensor sigmas.
inline constexpr double kDrillOvershoot = 0.001;  // m

inline void require_drill_depth(double depth) {
  if (!(depth >= 0.0) || depth > kMaxDrillDepth + kDrillOvershoot)
    fail(ErrorCode::invalid_argument, "drilling depth outside [0, 0.08] m");
}

/// Axial drilling thrust (N) at the given depth (m).
inline double drill_thrust(double depth, const DrillThrust& model = {}) {
  require_drill_depth(depth);
  return model.base + model.slope * depth;
}

/// Force the support arm presses into the wall (N); zero without support arm.
inline double support_force(const DrillToolConfig& cfg, double depth) {
  switch (cfg.variant) {
    case DrillVariant::regular_spring: return cfg.spring_rate * (cfg.spring_preload + depth);
    case DrillVariant::constant_load_spring: return cfg.constant_load;
    default: return 0.0;
  }
}

/// Reaction moment about the flange x axis (Nm) while drilling at `depth`.
/// The drill thrust acts at the drill offset and produces a negative moment;
/// the support arm pushes back at its own offset with a positive one.
inline double drill_reaction_moment(const DrillToolConfig& cfg, double depth) {
  const double thrust = drill_thrust(depth, cfg.thrust);
  switch (cfg.variant) {
    case DrillVariant::offset_uncompensated: return -thrust * cfg.drill_offset;
    case DrillVariant::regular_spring:
    case DrillVariant::constant_load_spring:
      return support_force(cfg, depth) * cfg.support_arm_offset - thrust * cfg.drill_offset;
    case DrillVariant::aligned_axis: return -thrust * cfg.aligned_lever();
  }
  return 0.0;
}

/// Axial load on the flange (N): drill thrust plus support arm reaction.
inline double drill_axial_force(const DrillToolConfig& cfg, double depth) {
  return drill_thrust(depth, cfg.thrust) + support_force(cfg, depth);
}

// ---------------------------------------------------------------------------
// Anchor hammering tool
// ---------------------------------------------------------------------------

enum class GripperState { deflated, inflated };

struct HammerTool {
  GripperState gripper{GripperState::deflated};
  double inflation_pressure{0.15};  // MPa
  double blow_rate{3.0};            // effective hammer cycles per second
  double blow_advance{0.001};       // m per blow in an empty hole
  double free_moment{8.0};          // Nm while the anchor advances
  double bottom_moment{28.5};       // Nm once the anchor rests on the hole bottom
  int ramp_blows{3};
  double bottom_band{0.001};  // m above the bottom where contact starts
  double offset{0.08};        // m, hammer axis to flange axis
  int bottom_blows{0};        // blows delivered since bottom contact

  void validate() const {
    if (!(inflation_pressure > 0.0) || !(blow_rate > 0.0) || !(blow_advance > 0.0) || !(offset > 0.0))
      fail(ErrorCode::invalid_argument, "hammer parameters must be positive");
    if (ramp_blows < 1) fail(ErrorCode::invalid_argument, "hammer ramp needs at least one blow");
    if (!(bottom_moment >= free_moment)) fail(ErrorCode::invalid_argument, "bottom moment below free moment");
  }

  bool operator==(const HammerTool&) const = default;
};

struct BlowResult {
  double depth;        // m
  double peak_moment;  // Nm, magnitude
};

/// One hammer blow on a stuck anchor. The advance shrinks linearly with the
/// remaining hole depth; once within `bottom_band` of the bottom the peak
/// moment ramps from the free value to the bottom value over `ramp_blows`.
inline BlowResult hammer_blow(HammerTool& tool, double current_depth, const DrilledHole& hole) {
  if (tool.gripper == GripperState::inflated)
    fail(ErrorCode::gripper_inflated, "deflate the rubber gripper before hammering");
  if (!(current_depth >= 0.0) || current_depth > hole.depth + 1e-12)
    fail(ErrorCode::invalid_argument, "anchor depth outside the hole");

  const double remaining = std::max(0.0, 1.0 - current_depth / hole.depth);
  const double depth = std::min(hole.depth, current_depth + tool.blow_advance * remaining);

  if (current_depth >= hole.depth) {
    tool.bottom_blows = tool.ramp_blows;
    return {hole.depth, tool.bottom_moment};
  }
  if (current_depth >= hole.depth - tool.bottom_band) {
    tool.bottom_blows = std::min(tool.bottom_blows + 1, tool.ramp_blows);
    const double frac = static_cast<double>(tool.bottom_blows) / tool.ramp_blows;
    return {depth, tool.free_moment + (tool.bottom_moment - tool.free_moment) * frac};
  }
  tool.bottom_blows = 0;
  return {depth, tool.free_moment};
}

// ---------------------------------------------------------------------------
// Nut runner
// ---------------------------------------------------------------------------

struct NutRunnerTool {
  double target_torque{50.0};        // Nm
  double pulse_attenuation{0.4};     // share of nut torque reaching the flange
  double torque_per_pulse{1.0};      // Nm
  double pulse_rate{10.0};           // Hz
  double socket_spring_travel{0.008};  // m
  double socket_spring_rate{12500.0};  // N/m
  double runner_offset{0.06};          // m
  double rundown_speed{0.00175};       // m/s nut advance (M12 pitch at 1 rev/s)
  double rundown_torque{2.0};          // Nm while running the nut down
  double socket_capture_radius{0.006};  // m lateral misalignment the socket chamfer absorbs
  double fit_rotation_speed{360.0};     // deg/s while searching for the nut flats
  double fit_half_period{0.1};          // s between direction reversals
  double fit_tolerance_deg{3.0};
  bool engaged{false};

  void validate() const {
    if (!(target_torque > 0.0)) fail(ErrorCode::invalid_argument, "target torque must be positive");
    if (!(socket_spring_travel > 0.0)) fail(ErrorCode::invalid_argument, "socket spring travel must be positive");
    if (!(pulse_attenuation > 0.0) || pulse_attenuation > 1.0)
      fail(ErrorCode::invalid_argument, "pulse attenuation must lie in (0, 1]");
    if (!(torque_per_pulse > 0.0) || !(pulse_rate > 0.0) || !(socket_spring_rate > 0.0))
      fail(ErrorCode::invalid_argument, "nut runner rates must be positive");
  }

  bool operator==(const NutRunnerTool&) const = default;
};

struct PulseResult {
  double torque;          // Nm on the nut
  double flange_moment;   // Nm transmitted to the flange
};

inline PulseResult nutrunner_pulse(double current_torque, const NutRunnerTool& cfg) {
  if (!cfg.engaged) fail(ErrorCode::socket_not_engaged, "socket is not seated on the nut");
  const double torque = std::min(current_torque + cfg.torque_per_pulse, cfg.target_torque);
  return {torque, cfg.pulse_attenuation * torque};
}

// ---------------------------------------------------------------------------
// Gripper actions
// ---------------------------------------------------------------------------

enum class MagnetState { off, on };

struct GripperTool {
  MagnetState magnet{MagnetState::off};
};

enum class GripAction { inflate, deflate, magnet_on, magnet_off };

// What the gripper currently holds and where, as seen by gripper_set.
struct GripContext {
  std::optional<int> held_anchor;
  std::optional<int> anchor_stand;  // stand whose pick slot is under the gripper
  bool anchor_supported{false};            // held anchor is stuck in a hole
  bool part_within_reach{false};
  bool holding_part{false};
  bool part_supported{false};  // part pressed to the wall or already anchored
};

struct GripOutcome {
  std::optional<int> held_anchor;
  bool holding_part{false};
  bool anchor_dropped{false};
  bool part_dropped{false};
};

/// Switches the rubber gripper or the magnet and applies the grasp/release
/// side effects to the worksite.
inline GripOutcome gripper_set(HammerTool& hammer, GripperTool& gripper, GripAction action, const GripContext& ctx,
                               Worksite& site) {
  GripOutcome out{ctx.held_anchor, ctx.holding_part, false, false};
  switch (action) {
    case GripAction::inflate:
      hammer.gripper = GripperState::inflated;
      if (!ctx.held_anchor && ctx.anchor_stand) out.held_anchor = site.take_anchor(*ctx.anchor_stand);
      break;
    case GripAction::deflate:
      hammer.gripper = GripperState::deflated;
      if (ctx.held_anchor) {
        if (!ctx.anchor_supported) {
          site.drop_anchor(*ctx.held_anchor);
          out.anchor_dropped = true;
        }
        out.held_anchor.reset();
      }
      break;
    case GripAction::magnet_on:
      gripper.magnet = MagnetState::on;
      if (!ctx.holding_part && ctx.part_within_reach) {
        site.grasp_part();
        out.holding_part = true;
      }
      break;
    case GripAction::magnet_off:
      gripper.magnet = MagnetState::off;
      if (ctx.holding_part) {
        if (!ctx.part_supported) {
          site.drop_part();
          out.part_dropped = true;
        }
        out.holding_part = false;
      }
      break;
  }
  return out;
}

}  // namespace fixsim
