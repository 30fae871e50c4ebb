#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fixsim/errors.hpp"
#include "fixsim/geometry.hpp"

namespace fixsim {

inline constexpr double kMaxDrillDepth = 0.080;      // m
inline constexpr double kWallDepthMargin = 0.020;    // m left behind the deepest hole
inline constexpr double kDrillBitDiameter = 0.012;   // m
inline constexpr double kSurfaceTolerance = 1e-6;    // m

// Concrete wall. Its frame has the origin at the centre of the exposed
// surface, x to the right, y downwards and z pointing into the concrete.
struct Wall {
  Frame frame{};
  double width{0.200};
  double height{0.300};
  double thickness{0.150};
  double compressive_strength{24.0};  // N/mm^2

  Vec3 into() const { return frame.z_axis; }

  void validate() const {
    if (!frame.valid()) fail(ErrorCode::invalid_argument, "wall frame is not orthonormal");
    if (!(width > 0.0) || !(height > 0.0)) fail(ErrorCode::invalid_argument, "wall size must be positive");
    if (!(thickness >= kMaxDrillDepth + kWallDepthMargin))
      fail(ErrorCode::invalid_argument, "wall thinner than the deepest drillable hole plus margin");
    if (!(compressive_strength > 0.0)) fail(ErrorCode::invalid_argument, "compressive strength must be positive");
  }

  /// Signed distance of `p` from the surface plane, positive inside the concrete.
  double depth_of(const Point3& p) const { return dot(p - frame.origin, frame.z_axis); }

  bool within_face(const Point3& p) const {
    const Point3 local = to_frame(frame, p);
    return std::abs(local.x) <= 0.5 * width + 1e-12 && std::abs(local.y) <= 0.5 * height + 1e-12;
  }

  bool on_surface(const Point3& p, double tol = kSurfaceTolerance) const {
    return std::abs(depth_of(p)) <= tol && within_face(p);
  }

  /// Orthogonal projection onto the surface plane.
  Point3 project(const Point3& p) const { return p - frame.z_axis * depth_of(p); }
};

enum class PartState { in_stand, grasped, held_on_wall, partially_fixed, fixed };

inline constexpr const char* to_string(PartState s) {
  switch (s) {
    case PartState::in_stand: return "in_stand";
    case PartState::grasped: return "grasped";
    case PartState::held_on_wall: return "held_on_wall";
    case PartState::partially_fixed: return "partially_fixed";
    case PartState::fixed: return "fixed";
  }
  return "?";
}

struct StructuralPart {
  std::vector<Point3> hole_positions;  // part-local, z = 0 on the wall-facing side
  double hole_diameter{0.014};
  Frame pose{};
  PartState state{PartState::in_stand};
  int fixed_points{0};

  std::size_t hole_count() const { return hole_positions.size(); }

  Point3 hole_world(std::size_t i) const { return from_frame(pose, hole_positions.at(i)); }
};

/// Evenly spaced holes along the part x axis, centred on the part origin.
inline std::vector<Point3> linear_hole_pattern(int count, double spacing) {
  std::vector<Point3> holes;
  holes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) holes.push_back({(i - 0.5 * (count - 1)) * spacing, 0.0, 0.0});
  return holes;
}

struct DrilledHole {
  int id{-1};
  Point3 position{};  // hole mouth on the wall surface
  Vec3 axis{0.0, 0.0, 1.0};
  double depth{0.0};
  double diameter{kDrillBitDiameter};
  std::optional<int> anchor;
};

enum class AnchorState { in_stand, grasped, stuck, seated, tightened, dropped };

inline constexpr const char* to_string(AnchorState s) {
  switch (s) {
    case AnchorState::in_stand: return "in_stand";
    case AnchorState::grasped: return "grasped";
    case AnchorState::stuck: return "stuck";
    case AnchorState::seated: return "seated";
    case AnchorState::tightened: return "tightened";
    case AnchorState::dropped: return "dropped";
  }
  return "?";
}

// Wedge anchor, picked with its nut already attached.
struct AnchorBolt {
  int id{-1};
  int stand{0};
  double diameter{0.012};
  double length{0.126};
  double mass{0.113};
  bool nut_attached{true};
  AnchorState state{AnchorState::in_stand};
  double depth{0.0};   // m, valid when stuck/seated/tightened
  double torque{0.0};  // Nm, valid when tightened
  std::optional<int> hole;
};

enum class Engagement { engaged, rim_contact, surface_contact };

inline constexpr const char* to_string(Engagement e) {
  switch (e) {
    case Engagement::engaged: return "engaged";
    case Engagement::rim_contact: return "rim_contact";
    case Engagement::surface_contact: return "surface_contact";
  }
  return "?";
}

inline constexpr double kInsertionClearance = 0.0002;  // m
inline constexpr double kRimBand = 0.001;              // m
inline constexpr double kEngagementReach = 0.05;       // m

/// Classifies where an anchor tip lands relative to a drilled hole.
inline Engagement anchor_engagement(const DrilledHole& hole, const Point3& tip,
                                    double clearance = kInsertionClearance, double rim_band = kRimBand) {
  const Vec3 rel = tip - hole.position;
  if (norm(rel) > kEngagementReach) fail(ErrorCode::invalid_argument, "anchor tip is not near the hole mouth");
  const double radial = norm(rel - hole.axis * dot(rel, hole.axis));
  if (radial < clearance) return Engagement::engaged;
  // the 1e-12 absorbs rounding in clearance + band so the band edge is inclusive
  if (radial <= clearance + rim_band + 1e-12) return Engagement::rim_contact;
  return Engagement::surface_contact;
}

class Worksite {
 public:
  Worksite() = default;
  Worksite(Wall wall, StructuralPart part, int parts_in_stand, std::vector<int> anchors_per_stand)
      : wall_(std::move(wall)), part_(std::move(part)), parts_in_stand_(parts_in_stand) {
    wall_.validate();
    if (part_.hole_positions.empty()) fail(ErrorCode::invalid_argument, "structural part needs at least one hole");
    for (std::size_t stand = 0; stand < anchors_per_stand.size(); ++stand) {
      for (int i = 0; i < anchors_per_stand[stand]; ++i) {
        AnchorBolt a;
        a.id = static_cast<int>(anchors_.size());
        a.stand = static_cast<int>(stand);
        anchors_.push_back(a);
      }
    }
  }

  const Wall& wall() const { return wall_; }
  const StructuralPart& part() const { return part_; }
  const std::vector<DrilledHole>& holes() const { return holes_; }
  const std::vector<AnchorBolt>& anchors() const { return anchors_; }
  int parts_in_stand() const { return parts_in_stand_; }

  const DrilledHole& hole(int id) const { return holes_.at(static_cast<std::size_t>(id)); }
  const AnchorBolt& anchor(int id) const { return anchors_.at(static_cast<std::size_t>(id)); }

  const DrilledHole& register_drilled_hole(const Point3& position, const Vec3& axis, double depth) {
    if (!(depth > 0.0)) fail(ErrorCode::invalid_argument, "hole depth must be positive");
    if (!wall_.on_surface(position)) fail(ErrorCode::off_wall, "hole position is not on the wall surface");
    if (depth > wall_.thickness - kWallDepthMargin) fail(ErrorCode::too_deep, "hole deeper than wall allows");
    DrilledHole h;
    h.id = static_cast<int>(holes_.size());
    h.position = position;
    h.axis = normalize(axis);
    h.depth = depth;
    h.diameter = kDrillBitDiameter;
    holes_.push_back(h);
    return holes_.back();
  }

  /// Closest registered hole whose mouth lies within `tol` of `p`.
  std::optional<int> hole_near(const Point3& p, double tol) const {
    std::optional<int> best;
    double best_d = tol;
    for (const auto& h : holes_) {
      const double d = distance(h.position, p);
      if (d <= best_d) {
        best_d = d;
        best = h.id;
      }
    }
    return best;
  }

  // -- part ---------------------------------------------------------------

  void grasp_part() {
    if (part_.state != PartState::in_stand) fail(ErrorCode::part_already_placed, "part already left the stand");
    if (parts_in_stand_ <= 0) fail(ErrorCode::stand_empty, "fixing part stand is empty");
    --parts_in_stand_;
    part_.state = PartState::grasped;
  }

  void drop_part() {
    if (part_.state != PartState::grasped) fail(ErrorCode::state_violation, "part is not being carried");
    part_.state = PartState::in_stand;  // lost; not returned to the stand count
  }

  void place_part(const Frame& pose) {
    if (part_.state != PartState::grasped) fail(ErrorCode::state_violation, "part must be grasped before placing");
    part_.pose = pose;
    part_.state = PartState::held_on_wall;
  }

  /// Records one more fixed point; the part is fixed once every hole has a
  /// tightened anchor.
  void mark_point_fixed() {
    if (part_.state != PartState::held_on_wall && part_.state != PartState::partially_fixed)
      fail(ErrorCode::state_violation, "part is not on the wall");
    const int tightened = count_tightened();
    if (tightened != part_.fixed_points + 1)
      fail(ErrorCode::state_violation, "fixed point count must follow tightened anchors");
    ++part_.fixed_points;
    part_.state = part_.fixed_points == static_cast<int>(part_.hole_count()) ? PartState::fixed
                                                                              : PartState::partially_fixed;
  }

  // -- anchors ------------------------------------------------------------

  int take_anchor(int stand) {
    for (auto& a : anchors_) {
      if (a.stand == stand && a.state == AnchorState::in_stand) {
        a.state = AnchorState::grasped;
        return a.id;
      }
    }
    fail(ErrorCode::stand_empty, "anchor stand " + std::to_string(stand) + " is empty");
  }

  void drop_anchor(int id) {
    auto& a = anchor_mut(id);
    if (a.state != AnchorState::grasped) fail(ErrorCode::state_violation, "only a carried anchor can drop");
    a.state = AnchorState::dropped;
  }

  void stick_anchor(int id, int hole_id, double depth) {
    auto& a = anchor_mut(id);
    auto& h = holes_.at(static_cast<std::size_t>(hole_id));
    if (a.state != AnchorState::grasped) fail(ErrorCode::state_violation, "anchor must be grasped to insert");
    if (h.anchor) fail(ErrorCode::state_violation, "hole already holds an anchor");
    if (a.hole) fail(ErrorCode::state_violation, "anchor already sits in a hole");
    if (depth < 0.0 || depth > h.depth) fail(ErrorCode::invalid_argument, "stuck depth outside the hole");
    a.state = AnchorState::stuck;
    a.depth = depth;
    a.hole = hole_id;
    h.anchor = id;
  }

  void seat_anchor(int id, double depth) {
    auto& a = anchor_mut(id);
    if (a.state != AnchorState::stuck) fail(ErrorCode::state_violation, "anchor must be stuck before seating");
    if (depth < a.depth || depth > hole(*a.hole).depth)
      fail(ErrorCode::invalid_argument, "seated depth must lie between stuck depth and hole depth");
    a.state = AnchorState::seated;
    a.depth = depth;
  }

  void tighten_anchor(int id, double torque) {
    auto& a = anchor_mut(id);
    if (a.state != AnchorState::seated) fail(ErrorCode::state_violation, "anchor must be seated before tightening");
    if (!a.nut_attached) fail(ErrorCode::state_violation, "anchor has no nut");
    a.state = AnchorState::tightened;
    a.torque = torque;
  }

  int count_tightened() const {
    int n = 0;
    for (const auto& a : anchors_) n += a.state == AnchorState::tightened ? 1 : 0;
    return n;
  }

 private:
  AnchorBolt& anchor_mut(int id) { return anchors_.at(static_cast<std::size_t>(id)); }

  Wall wall_{};
  StructuralPart part_{};
  int parts_in_stand_{1};
  std::vector<DrilledHole> holes_;
  std::vector<AnchorBolt> anchors_;
};

/// Wall frame from a surface centre and the into-wall normal heading given as
/// yaw (about site z) and pitch (tilt of the normal towards site z), degrees.
inline Frame make_wall_frame(const Point3& centre, double yaw_deg, double pitch_deg) {
  const double yaw = deg_to_rad(yaw_deg);
  const double pitch = deg_to_rad(pitch_deg);
  const Vec3 into{std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), std::sin(pitch)};
  const Vec3 up{0.0, 0.0, 1.0};
  Frame f;
  f.origin = centre;
  f.z_axis = into;
  f.x_axis = normalize(cross(into, up));  // right, seen from the robot
  f.y_axis = cross(f.z_axis, f.x_axis);   // down
  return f;
}

}  // namespace fixsim
