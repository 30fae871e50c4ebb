#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fixsim/errors.hpp"
#include "fixsim/geometry.hpp"
#include "fixsim/sensors.hpp"

namespace fixsim {

enum class ArmId { robot1, robot2 };

inline constexpr std::string_view to_string(ArmId id) { return id == ArmId::robot1 ? "robot1" : "robot2"; }
inline constexpr std::size_t index_of(ArmId id) { return id == ArmId::robot1 ? 0 : 1; }

enum class ToolId { drill, hammer, nut_runner, gripper };

inline constexpr std::string_view to_string(ToolId t) {
  switch (t) {
    case ToolId::drill: return "drill";
    case ToolId::hammer: return "hammer";
    case ToolId::nut_runner: return "nut_runner";
    case ToolId::gripper: return "gripper";
  }
  return "?";
}

struct RobotParams {
  double reach{1.298};   // m
  double payload{13.0};  // kg
  double mass_drill{6.0};
  double mass_hammer{4.0};
  double mass_nut_runner{5.0};
  double mass_gripper{1.0};
  double tool_change_time{25.0};  // s per attach or detach
  double transit_speed{0.05};     // m/s for free-space moves
  double slip_coefficient{2e-7};  // m/(N s)

  double tool_mass(ToolId t) const {
    switch (t) {
      case ToolId::drill: return mass_drill;
      case ToolId::hammer: return mass_hammer;
      case ToolId::nut_runner: return mass_nut_runner;
      case ToolId::gripper: return mass_gripper;
    }
    return 0.0;
  }

  bool operator==(const RobotParams&) const = default;
};

// Slippage of the wheeled base away from the wall while the arm pushes.
struct PlatformState {
  double slip_offset{0.0};  // m, along the wall normal, away from the wall
  double slip_coefficient{2e-7};
};

inline PlatformState platform_slip_step(PlatformState platform, double applied_force, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "time step must be positive");
  platform.slip_offset += platform.slip_coefficient * std::max(applied_force, 0.0) * dt;
  return platform;
}

struct ArmState {
  ArmId id{ArmId::robot1};
  Point3 base{};            // site frame, before slip
  Frame flange_pose{};      // commanded, in the arm's (possibly slipped) base-aligned site frame
  std::optional<ToolId> attached_tool;
  double held_mass{0.0};    // kg carried by the attached tool
  Point3 tool_stand{};      // flange position for tool exchange
  std::set<ToolId> stand_slots;  // tools currently parked in this arm's stand
  PlatformState platform{};
  double payload_capacity{13.0};
  double reach{1.298};

  double attached_mass(const RobotParams& params) const {
    return (attached_tool ? params.tool_mass(*attached_tool) : 0.0) + held_mass;
  }
};

inline bool within_reach(const ArmState& arm, const Point3& target) { return distance(arm.base, target) <= arm.reach; }

struct TimedPose {
  double t{0.0};  // s from motion start
  Point3 position{};
};

using MotionGuard = std::function<GuardDecision(const TimedPose&)>;

/// Straight-line, constant-speed flange motion sampled every `dt`. The last
/// sample sits exactly at the target at t = distance / speed. A guard, when
/// supplied, is evaluated on every sample and halts the motion immediately.
inline std::vector<TimedPose> move_linear(const ArmState& arm, const Point3& target, double speed, double dt,
                                          const MotionGuard& guard = {}) {
  if (!(speed > 0.0)) fail(ErrorCode::invalid_argument, "speed must be positive");
  if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "time step must be positive");
  if (!within_reach(arm, target)) fail(ErrorCode::out_of_reach, "target outside the arm reach");

  const Point3 start = arm.flange_pose.origin;
  const double length = distance(start, target);
  const double duration = length / speed;
  const Vec3 dir = length > 0.0 ? (target - start) / length : Vec3{};

  std::vector<TimedPose> out;
  const auto ticks = static_cast<std::int64_t>(std::ceil(duration / dt - 1e-9));
  out.reserve(static_cast<std::size_t>(ticks + 1));
  for (std::int64_t k = 0; k <= ticks; ++k) {
    const double t = std::min(static_cast<double>(k) * dt, duration);
    const TimedPose pose{t, k == ticks ? target : start + dir * (speed * t)};
    out.push_back(pose);
    if (guard) {
      if (const auto g = guard(pose)) throw GuardHalt(g.axis, g.value, speed * t);
    }
  }
  return out;
}

struct ToolChange {
  ArmState arm;
  double duration;  // s
};

inline constexpr double kStandPoseTolerance = 1e-3;  // m

inline ToolChange attach_tool(ArmState arm, ToolId tool, const RobotParams& params) {
  if (arm.attached_tool) fail(ErrorCode::flange_occupied, "flange already carries " + std::string(to_string(*arm.attached_tool)));
  if (distance(arm.flange_pose.origin, arm.tool_stand) > kStandPoseTolerance)
    fail(ErrorCode::wrong_pose, "arm is not at its tool stand");
  if (!arm.stand_slots.contains(tool)) fail(ErrorCode::tool_missing, std::string(to_string(tool)) + " is not in the stand");
  if (params.tool_mass(tool) + arm.held_mass > arm.payload_capacity)
    fail(ErrorCode::payload_exceeded, "tool exceeds the arm payload");
  arm.stand_slots.erase(tool);
  arm.attached_tool = tool;
  return {std::move(arm), params.tool_change_time};
}

inline ToolChange detach_tool(ArmState arm, const RobotParams& params) {
  if (!arm.attached_tool) fail(ErrorCode::no_tool, "no tool attached");
  if (distance(arm.flange_pose.origin, arm.tool_stand) > kStandPoseTolerance)
    fail(ErrorCode::wrong_pose, "arm is not at its tool stand");
  if (arm.held_mass > 0.0) fail(ErrorCode::state_violation, "tool still holds an object");
  arm.stand_slots.insert(*arm.attached_tool);
  arm.attached_tool.reset();
  return {std::move(arm), params.tool_change_time};
}

}  // namespace fixsim
