#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "fixsim/errors.hpp"
#include "fixsim/random.hpp"
#include "fixsim/robot.hpp"
#include "fixsim/sensors.hpp"
#include "fixsim/tools.hpp"
#include "fixsim/worksite.hpp"

namespace fixsim {

struct WallSpec {
  double distance{0.70};  // m, robot 1 base to wall face along base x
  double centre_y{0.0};
  double centre_z{0.30};
  double yaw_deg{0.0};
  double pitch_deg{0.0};
  double width{0.200};
  double height{0.300};
  double thickness{0.150};
  double compressive_strength{24.0};

  bool operator==(const WallSpec&) const = default;
};

struct PartSpec {
  int hole_count{2};
  double hole_spacing{0.15};
  double hole_diameter{0.014};
  double target_x{0.0};  // m, part centre relative to wall centre, wall frame
  double target_y{0.0};
  double placement_sigma{0.002};
  int stand_count{1};

  bool operator==(const PartSpec&) const = default;
};

// Contact physics that is not a property of one tool.
struct ContactSpec {
  double environment_stiffness{2.0e5};  // N/m, tool tip against concrete
  double insertion_friction{20.0};      // N while the anchor slides in
  double jam_stiffness{1.0e6};          // N/m once the wedge jams
  double anchor_stick_depth{0.007};     // m
  double nut_gap{0.003};                // m between nut and part after hammering

  bool operator==(const ContactSpec&) const = default;
};

struct Thresholds {
  double insertion_end_moment{25.0};  // Nm
  double hammering_end_moment{27.0};  // Nm
  double hammer_success_depth{0.070};  // m
  double approach_force_z{50.0};       // N, nut runner approaches
  double contact_force{20.0};          // N, touch detection for drill/anchor/part
  double drill_depth_target{0.080};    // m
  double search_timeout{60.0};         // s

  bool operator==(const Thresholds&) const = default;
};

struct ProcedureParams {
  double dt{0.01};
  double spiral_pitch{0.0003};   // m
  double probe_spacing{0.0002};  // m along the spiral arc
  double probe_period{0.1};      // s
  double search_force{20.0};     // N held while probing
  double insertion_speed{0.002};  // m/s
  double approach_speed{0.002};   // m/s, guarded approaches
  double retract_speed{0.01};     // m/s
  double approach_standoff{0.03};  // m
  double laser_offset{0.10};       // m between wall orientation measurement points
  int laser_samples{10};           // readings averaged per measurement point
  double laser_standoff{0.25};     // m, laser to wall during orientation measurement
  double camera_standoff{0.15};    // m
  double capture_time{1.0};        // s per camera capture
  int camera_attempts{3};
  double socket_fit_timeout{10.0};  // s
  double socket_fit_force{10.0};    // N, force must fall below this on fit
  double socket_fit_extension{0.001};  // m, spring extension on fit
  double hammer_timeout{300.0};     // s
  double gripper_time{1.0};         // s to inflate/deflate or switch the magnet
  double spindle_time{1.0};         // s to start or stop a tool motor
  int anchors_per_stand{4};
  int parallel_min_points{4};  // plans split work across arms from this many points

  bool operator==(const ProcedureParams&) const = default;
};

struct SensorSpec {
  FtNoise ft{};
  SafetyLimits limits{};
  double laser_sigma{0.0001};  // m
  CameraModel camera{};

  bool operator==(const SensorSpec&) const = default;
};

struct RobotSpec {
  RobotParams params{};
  double robot2_base_y{0.60};  // m, robot 2 base offset along site y

  bool operator==(const RobotSpec&) const = default;
};

struct ToolSpec {
  DrillToolConfig drill{};
  HammerTool hammer{};
  NutRunnerTool nut{};
  ContactSpec contact{};

  bool operator==(const ToolSpec&) const = default;
};

struct Scenario {
  WallSpec wall{};
  PartSpec part{};
  ToolSpec tools{};
  SensorSpec sensors{};
  RobotSpec robot{};
  Thresholds thresholds{};
  ProcedureParams procedure{};

  bool operator==(const Scenario&) const = default;
};

class ScenarioError : public Error {
 public:
  ScenarioError(std::string field, int line, const std::string& reason)
      : Error(ErrorCode::scenario_invalid, "ScenarioInvalid(" + field + (line > 0 ? ", line " + std::to_string(line) : "") +
                                               "): " + reason),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

namespace detail {

struct VariantField {
  DrillVariant* value;
};

using FieldRef = std::variant<double*, int*, VariantField>;

struct FieldInfo {
  std::string_view section;
  std::string_view key;
  FieldRef ref;
  std::string_view doc;
};

// Every scenario key, in rendering order. Units and meaning live in `doc`.
inline std::vector<FieldInfo> scenario_fields(Scenario& s) {
  auto& w = s.wall;
  auto& p = s.part;
  auto& d = s.tools.drill;
  auto& h = s.tools.hammer;
  auto& n = s.tools.nut;
  auto& c = s.tools.contact;
  auto& se = s.sensors;
  auto& r = s.robot;
  auto& t = s.thresholds;
  auto& pr = s.procedure;
  return {
      {"wall", "distance", &w.distance, "m, robot 1 base to wall face along base x"},
      {"wall", "centre_y", &w.centre_y, "m, wall centre along base y"},
      {"wall", "centre_z", &w.centre_z, "m, wall centre height in the base frame"},
      {"wall", "yaw_deg", &w.yaw_deg, "deg, wall normal rotation about vertical"},
      {"wall", "pitch_deg", &w.pitch_deg, "deg, wall normal tilt towards vertical"},
      {"wall", "width", &w.width, "m"},
      {"wall", "height", &w.height, "m"},
      {"wall", "thickness", &w.thickness, "m, must exceed 0.10"},
      {"wall", "compressive_strength", &w.compressive_strength, "N/mm^2"},

      {"part", "hole_count", &p.hole_count, "fixation points"},
      {"part", "hole_spacing", &p.hole_spacing, "m between adjacent holes"},
      {"part", "hole_diameter", &p.hole_diameter, "m"},
      {"part", "target_x", &p.target_x, "m, part centre right of wall centre"},
      {"part", "target_y", &p.target_y, "m, part centre below wall centre"},
      {"part", "placement_sigma", &p.placement_sigma, "m per in-plane axis"},
      {"part", "stand_count", &p.stand_count, "parts stored in the part stand"},

      {"tools", "variant", VariantField{&d.variant},
       "aligned_axis | offset_uncompensated | regular_spring | constant_load_spring"},
      {"tools", "drill_offset", &d.drill_offset, "m, drill axis to flange axis"},
      {"tools", "support_arm_offset", &d.support_arm_offset, "m, support rod to flange axis"},
      {"tools", "spring_rate", &d.spring_rate, "N/m, regular spring"},
      {"tools", "spring_preload", &d.spring_preload, "m, regular spring compression at contact"},
      {"tools", "constant_load", &d.constant_load, "N, constant load spring"},
      {"tools", "thrust_base", &d.thrust.base, "N, drilling thrust at zero depth"},
      {"tools", "thrust_slope", &d.thrust.slope, "N/m, thrust increase with depth"},
      {"tools", "aligned_tip_length", &d.aligned_tip_length, "m, aligned tool flange to bit tip"},
      {"tools", "perpendicularity_error_deg", &d.perpendicularity_error_deg, "deg, aligned tool"},
      {"tools", "bit_length", &d.bit_length, "m"},
      {"tools", "feed_speed", &d.feed_speed, "m/s"},
      {"tools", "hammer_pressure", &h.inflation_pressure, "MPa, rubber gripper"},
      {"tools", "blow_rate", &h.blow_rate, "Hz, effective hammer cycles"},
      {"tools", "blow_advance", &h.blow_advance, "m per blow in an empty hole"},
      {"tools", "hammer_free_moment", &h.free_moment, "Nm while the anchor advances"},
      {"tools", "hammer_bottom_moment", &h.bottom_moment, "Nm at the hole bottom"},
      {"tools", "hammer_ramp_blows", &h.ramp_blows, "blows from bottom contact to full moment"},
      {"tools", "hammer_offset", &h.offset, "m, hammer axis to flange axis"},
      {"tools", "nut_target_torque", &n.target_torque, "Nm"},
      {"tools", "nut_pulse_attenuation", &n.pulse_attenuation, "flange moment per nut torque"},
      {"tools", "nut_torque_per_pulse", &n.torque_per_pulse, "Nm"},
      {"tools", "nut_pulse_rate", &n.pulse_rate, "Hz"},
      {"tools", "socket_spring_travel", &n.socket_spring_travel, "m"},
      {"tools", "socket_spring_rate", &n.socket_spring_rate, "N/m"},
      {"tools", "runner_offset", &n.runner_offset, "m, nut runner axis to flange axis"},
      {"tools", "nut_rundown_speed", &n.rundown_speed, "m/s nut advance while running down"},
      {"tools", "nut_rundown_torque", &n.rundown_torque, "Nm while running down"},
      {"tools", "socket_capture_radius", &n.socket_capture_radius, "m lateral error the socket absorbs"},
      {"tools", "environment_stiffness", &c.environment_stiffness, "N/m, tool against concrete"},
      {"tools", "insertion_friction", &c.insertion_friction, "N while the anchor slides in"},
      {"tools", "jam_stiffness", &c.jam_stiffness, "N/m after the wedge jams"},
      {"tools", "anchor_stick_depth", &c.anchor_stick_depth, "m, depth where the wedge jams"},
      {"tools", "nut_gap", &c.nut_gap, "m, nut to part surface after hammering"},

      {"sensors", "ft_sigma_force", &se.ft.sigma_force, "N"},
      {"sensors", "ft_sigma_moment", &se.ft.sigma_moment, "Nm"},
      {"sensors", "force_limit", &se.limits.force_limit, "N, overload stop"},
      {"sensors", "moment_limit", &se.limits.moment_limit, "Nm, overload stop"},
      {"sensors", "laser_sigma", &se.laser_sigma, "m"},
      {"sensors", "camera_p_detect", &se.camera.p_detect, "probability a target in view is found"},
      {"sensors", "camera_sigma_hole", &se.camera.sigma_hole, "m per axis, wall holes and anchors (assumed)"},
      {"sensors", "camera_sigma_part", &se.camera.sigma_part, "m per axis, part holes (assumed)"},
      {"sensors", "camera_fov", &se.camera.field_of_view, "m lateral from the optical axis"},

      {"robot", "reach", &r.params.reach, "m"},
      {"robot", "payload", &r.params.payload, "kg"},
      {"robot", "mass_drill", &r.params.mass_drill, "kg"},
      {"robot", "mass_hammer", &r.params.mass_hammer, "kg"},
      {"robot", "mass_nut_runner", &r.params.mass_nut_runner, "kg"},
      {"robot", "mass_gripper", &r.params.mass_gripper, "kg"},
      {"robot", "tool_change_time", &r.params.tool_change_time, "s per attach or detach"},
      {"robot", "transit_speed", &r.params.transit_speed, "m/s"},
      {"robot", "slip_coefficient", &r.params.slip_coefficient, "m/(N s), platform slip (assumed)"},
      {"robot", "robot2_base_y", &r.robot2_base_y, "m"},

      {"procedure", "dt", &pr.dt, "s, simulation step"},
      {"procedure", "insertion_end_moment", &t.insertion_end_moment, "Nm"},
      {"procedure", "hammering_end_moment", &t.hammering_end_moment, "Nm"},
      {"procedure", "hammer_success_depth", &t.hammer_success_depth, "m"},
      {"procedure", "approach_force", &t.approach_force_z, "N, nut runner approach threshold"},
      {"procedure", "contact_force", &t.contact_force, "N, touch detection"},
      {"procedure", "drill_depth", &t.drill_depth_target, "m"},
      {"procedure", "search_timeout", &t.search_timeout, "s"},
      {"procedure", "spiral_pitch", &pr.spiral_pitch, "m between spiral turns"},
      {"procedure", "probe_spacing", &pr.probe_spacing, "m along the spiral"},
      {"procedure", "probe_period", &pr.probe_period, "s per probe"},
      {"procedure", "search_force", &pr.search_force, "N held while probing"},
      {"procedure", "insertion_speed", &pr.insertion_speed, "m/s"},
      {"procedure", "approach_speed", &pr.approach_speed, "m/s"},
      {"procedure", "retract_speed", &pr.retract_speed, "m/s"},
      {"procedure", "approach_standoff", &pr.approach_standoff, "m"},
      {"procedure", "laser_offset", &pr.laser_offset, "m between orientation measurement points"},
      {"procedure", "laser_samples", &pr.laser_samples, "readings averaged per point"},
      {"procedure", "laser_standoff", &pr.laser_standoff, "m"},
      {"procedure", "camera_standoff", &pr.camera_standoff, "m"},
      {"procedure", "capture_time", &pr.capture_time, "s"},
      {"procedure", "camera_attempts", &pr.camera_attempts, "captures before DetectionMissing"},
      {"procedure", "socket_fit_timeout", &pr.socket_fit_timeout, "s"},
      {"procedure", "socket_fit_force", &pr.socket_fit_force, "N"},
      {"procedure", "socket_fit_extension", &pr.socket_fit_extension, "m"},
      {"procedure", "hammer_timeout", &pr.hammer_timeout, "s"},
      {"procedure", "gripper_time", &pr.gripper_time, "s"},
      {"procedure", "spindle_time", &pr.spindle_time, "s"},
      {"procedure", "anchors_per_stand", &pr.anchors_per_stand, "anchors in each arm's stand"},
      {"procedure", "parallel_min_points", &pr.parallel_min_points, "points from which both arms fix in parallel"},
  };
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void validate(const Scenario& s) {
  auto bad = [](const char* field, const char* reason) { throw ScenarioError(field, 0, reason); };
  if (s.part.hole_count < 1) bad("part.hole_count", "at least one hole required");
  if (!(s.part.hole_spacing > 0.0)) bad("part.hole_spacing", "must be positive");
  if (!(s.part.hole_diameter > s.tools.drill.bit_diameter)) bad("part.hole_diameter", "must exceed the drill bit");
  if (s.part.stand_count < 0) bad("part.stand_count", "must not be negative");
  if (s.part.placement_sigma < 0.0) bad("part.placement_sigma", "must not be negative");
  if (!(s.wall.thickness >= kMaxDrillDepth + kWallDepthMargin)) bad("wall.thickness", "must be at least 0.10 m");
  if (!(s.wall.width > 0.0) || !(s.wall.height > 0.0)) bad("wall.width", "wall size must be positive");
  if (!(s.wall.compressive_strength > 0.0)) bad("wall.compressive_strength", "must be positive");
  if (!(s.procedure.dt > 0.0) || s.procedure.dt > 0.1) bad("procedure.dt", "must lie in (0, 0.1] s");
  if (!(s.thresholds.hammering_end_moment < s.sensors.limits.moment_limit))
    bad("procedure.hammering_end_moment", "must stay below the safety moment limit");
  if (!(s.thresholds.hammer_success_depth < s.thresholds.drill_depth_target))
    bad("procedure.hammer_success_depth", "must be shallower than the drilling target");
  if (!(s.thresholds.drill_depth_target > 0.0) || s.thresholds.drill_depth_target > kMaxDrillDepth)
    bad("procedure.drill_depth", "must lie in (0, 0.08] m");
  if (!(s.sensors.limits.force_limit > 0.0)) bad("sensors.force_limit", "must be positive");
  if (!(s.sensors.limits.moment_limit > 0.0)) bad("sensors.moment_limit", "must be positive");
  if (s.sensors.ft.sigma_force < 0.0 || s.sensors.ft.sigma_moment < 0.0) bad("sensors.ft_sigma_force", "must not be negative");
  if (s.sensors.laser_sigma < 0.0) bad("sensors.laser_sigma", "must not be negative");
  if (s.sensors.camera.p_detect < 0.0 || s.sensors.camera.p_detect > 1.0) bad("sensors.camera_p_detect", "must lie in [0, 1]");
  if (!(s.procedure.spiral_pitch > 0.0)) bad("procedure.spiral_pitch", "must be positive");
  if (!(s.procedure.probe_spacing > 0.0)) bad("procedure.probe_spacing", "must be positive");
  if (!(s.procedure.probe_period > 0.0)) bad("procedure.probe_period", "must be positive");
  if (s.procedure.laser_samples < 1) bad("procedure.laser_samples", "must be at least 1");
  if (s.procedure.camera_attempts < 1) bad("procedure.camera_attempts", "must be at least 1");
  if (s.procedure.anchors_per_stand < 0) bad("procedure.anchors_per_stand", "must not be negative");
  if (!(s.robot.params.transit_speed > 0.0)) bad("robot.transit_speed", "must be positive");
  if (!(s.procedure.approach_speed > 0.0)) bad("procedure.approach_speed", "must be positive");
  if (!(s.procedure.retract_speed > 0.0)) bad("procedure.retract_speed", "must be positive");
  if (!(s.procedure.insertion_speed > 0.0)) bad("procedure.insertion_speed", "must be positive");
  try {
    s.tools.drill.validate();
    s.tools.hammer.validate();
    s.tools.nut.validate();
  } catch (const Error& e) {
    throw ScenarioError("tools", 0, e.what());
  }
}

/// Parses the sectioned key/value scenario format. Missing keys keep their
/// defaults; unknown sections or keys, duplicates and malformed values are
/// rejected with the offending field and line.
inline Scenario parse_scenario(std::string_view text) {
  Scenario s;
  auto fields = detail::scenario_fields(s);
  std::set<std::string> seen;
  std::string section;
  int line_no = 0;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ScenarioError(std::string(line), line_no, "malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const auto& f : fields) known = known || f.section == section;
      if (!known) throw ScenarioError(section, line_no, "unknown section");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ScenarioError(std::string(line), line_no, "expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    const std::string field = section + "." + key;
    if (section.empty()) throw ScenarioError(key, line_no, "key outside of a section");

    auto it = std::find_if(fields.begin(), fields.end(),
                           [&](const detail::FieldInfo& f) { return f.section == section && f.key == key; });
    if (it == fields.end()) throw ScenarioError(field, line_no, "unknown key");
    if (!seen.insert(field).second) throw ScenarioError(field, line_no, "duplicate key");
    if (value.empty()) throw ScenarioError(field, line_no, "missing value");

    std::visit(
        [&](auto ref) {
          using T = decltype(ref);
          if constexpr (std::is_same_v<T, double*>) {
            double v{};
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v))
              throw ScenarioError(field, line_no, "expected a number, got '" + std::string(value) + "'");
            *ref = v;
          } else if constexpr (std::is_same_v<T, int*>) {
            int v{};
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || ptr != value.data() + value.size())
              throw ScenarioError(field, line_no, "expected an integer, got '" + std::string(value) + "'");
            *ref = v;
          } else {
            const auto variant = parse_drill_variant(value);
            if (!variant) throw ScenarioError(field, line_no, "unknown drill variant '" + std::string(value) + "'");
            *ref.value = *variant;
          }
        },
        it->ref);
  }

  validate(s);
  return s;
}

/// Canonical text form; parse_scenario(render_scenario(s)) == s.
inline std::string render_scenario(const Scenario& scenario, bool with_docs = true) {
  Scenario copy = scenario;
  std::ostringstream out;
  std::string_view section;
  for (const auto& f : detail::scenario_fields(copy)) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    std::string value = std::visit(
        [](auto ref) -> std::string {
          using T = decltype(ref);
          if constexpr (std::is_same_v<T, double*>) return detail::format_double(*ref);
          else if constexpr (std::is_same_v<T, int*>) return std::to_string(*ref);
          else return std::string(to_string(*ref.value));
        },
        f.ref);
    out << f.key << " = " << value;
    if (with_docs) out << "  # " << f.doc;
    out << '\n';
  }
  return out.str();
}

inline std::string scenario_hash(const Scenario& s) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(render_scenario(s, false));
  return out.str();
}

}  // namespace fixsim
