#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fixsim {

enum class ErrorCode {
  invalid_argument,
  degenerate_geometry,
  off_wall,
  too_deep,
  gripper_inflated,
  socket_not_engaged,
  no_return,
  out_of_reach,
  halted_by_guard,
  wrong_pose,
  flange_occupied,
  no_tool,
  tool_missing,
  payload_exceeded,
  detection_missing,
  no_contact,
  search_timeout,
  socket_fit_timeout,
  hammer_timeout,
  depth_criterion_unmet,
  anchor_dropped,
  part_dropped,
  stand_empty,
  part_already_placed,
  state_violation,
  scenario_invalid,
  non_monotonic_time,
  unknown_channel,
  io_failure,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::degenerate_geometry: return "DegenerateGeometry";
    case ErrorCode::off_wall: return "OffWall";
    case ErrorCode::too_deep: return "TooDeep";
    case ErrorCode::gripper_inflated: return "GripperInflated";
    case ErrorCode::socket_not_engaged: return "SocketNotEngaged";
    case ErrorCode::no_return: return "NoReturn";
    case ErrorCode::out_of_reach: return "OutOfReach";
    case ErrorCode::halted_by_guard: return "HaltedByGuard";
    case ErrorCode::wrong_pose: return "WrongPose";
    case ErrorCode::flange_occupied: return "FlangeOccupied";
    case ErrorCode::no_tool: return "NoTool";
    case ErrorCode::tool_missing: return "ToolMissing";
    case ErrorCode::payload_exceeded: return "PayloadExceeded";
    case ErrorCode::detection_missing: return "DetectionMissing";
    case ErrorCode::no_contact: return "NoContact";
    case ErrorCode::search_timeout: return "SearchTimeout";
    case ErrorCode::socket_fit_timeout: return "SocketFitTimeout";
    case ErrorCode::hammer_timeout: return "HammerTimeout";
    case ErrorCode::depth_criterion_unmet: return "DepthCriterionUnmet";
    case ErrorCode::anchor_dropped: return "AnchorDropped";
    case ErrorCode::part_dropped: return "PartDropped";
    case ErrorCode::stand_empty: return "StandEmpty";
    case ErrorCode::part_already_placed: return "PartAlreadyPlaced";
    case ErrorCode::state_violation: return "StateViolation";
    case ErrorCode::scenario_invalid: return "ScenarioInvalid";
    case ErrorCode::non_monotonic_time: return "NonMonotonicTime";
    case ErrorCode::unknown_channel: return "UnknownChannel";
    case ErrorCode::io_failure: return "IoFailure";
  }
  return "Unknown";
}

/// Base of every error the library raises. The code identifies the failure
/// class; the message carries the human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace fixsim
