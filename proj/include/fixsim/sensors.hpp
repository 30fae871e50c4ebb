#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "fixsim/errors.hpp"
#include "fixsim/geometry.hpp"
#include "fixsim/random.hpp"
#include "fixsim/worksite.hpp"

namespace fixsim {

enum class Axis { fx, fy, fz, mx, my, mz };

inline constexpr std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::fx: return "fx";
    case Axis::fy: return "fy";
    case Axis::fz: return "fz";
    case Axis::mx: return "mx";
    case Axis::my: return "my";
    case Axis::mz: return "mz";
  }
  return "?";
}

// Force (N) and moment (Nm) at the flange, flange frame. Positive fz is the
// compressive load when pushing a tool into the wall.
struct Wrench {
  double fx{0.0}, fy{0.0}, fz{0.0};
  double mx{0.0}, my{0.0}, mz{0.0};

  constexpr std::array<double, 6> components() const { return {fx, fy, fz, mx, my, mz}; }
  constexpr bool operator==(const Wrench&) const = default;
};

struct FTReading {
  Wrench wrench{};
  double timestamp{0.0};  // s
};

struct FtNoise {
  double sigma_force{0.5};    // N
  double sigma_moment{0.02};  // Nm

  bool operator==(const FtNoise&) const = default;
};

inline FTReading read_ft(const Wrench& truth, const FtNoise& noise, RandomStream& rng, double timestamp) {
  FTReading r;
  r.timestamp = timestamp;
  r.wrench.fx = rng.normal(truth.fx, noise.sigma_force);
  r.wrench.fy = rng.normal(truth.fy, noise.sigma_force);
  r.wrench.fz = rng.normal(truth.fz, noise.sigma_force);
  r.wrench.mx = rng.normal(truth.mx, noise.sigma_moment);
  r.wrench.my = rng.normal(truth.my, noise.sigma_moment);
  r.wrench.mz = rng.normal(truth.mz, noise.sigma_moment);
  return r;
}

struct SafetyLimits {
  double force_limit{1000.0};  // N
  double moment_limit{30.0};   // Nm

  void validate() const {
    if (!(force_limit > 0.0) || !(moment_limit > 0.0))
      fail(ErrorCode::invalid_argument, "safety limits must be positive");
  }

  bool operator==(const SafetyLimits&) const = default;
};

struct GuardDecision {
  bool stop{false};
  Axis axis{Axis::fx};
  double value{0.0};

  explicit operator bool() const { return stop; }
};

/// Stops on the first component whose magnitude strictly exceeds its limit.
inline GuardDecision overload_guard(const FTReading& r, const SafetyLimits& lim) {
  const auto c = r.wrench.components();
  for (std::size_t i = 0; i < 6; ++i) {
    const double limit = i < 3 ? lim.force_limit : lim.moment_limit;
    if (std::abs(c[i]) > limit) return {true, static_cast<Axis>(i), c[i]};
  }
  return {};
}

/// Motion halted by the overload guard.
class GuardHalt : public Error {
 public:
  GuardHalt(Axis axis, double value, double travelled)
      : Error(ErrorCode::halted_by_guard, "HaltedByGuard(" + std::string(to_string(axis)) + "): reading " +
                                              std::to_string(value) + " after " +
                                              std::to_string(travelled * 1000.0) + " mm"),
        axis_(axis),
        value_(value),
        travelled_(travelled) {}

  Axis axis() const noexcept { return axis_; }
  double value() const noexcept { return value_; }
  double travelled() const noexcept { return travelled_; }

 private:
  Axis axis_;
  double value_;
  double travelled_;
};

// ---------------------------------------------------------------------------
// Laser distance sensor
// ---------------------------------------------------------------------------

struct Ray {
  Point3 origin{};
  Vec3 direction{1.0, 0.0, 0.0};
};

/// Exact distance along the beam to the wall face.
inline double laser_range(const Ray& beam, const Wall& wall) {
  const Vec3 dir = normalize(beam.direction);
  const double denom = dot(dir, wall.into());
  if (std::abs(denom) < 1e-9) fail(ErrorCode::no_return, "laser beam parallel to the wall");
  const double t = -wall.depth_of(beam.origin) / denom;
  if (!(t > 0.0)) fail(ErrorCode::no_return, "wall is behind the laser");
  if (!wall.within_face(beam.origin + dir * t)) fail(ErrorCode::no_return, "laser beam misses the wall face");
  return t;
}

inline double read_laser(const Ray& beam, const Wall& wall, double sigma, RandomStream& rng) {
  return rng.normal(laser_range(beam, wall), sigma);
}

// ---------------------------------------------------------------------------
// Camera
// ---------------------------------------------------------------------------

enum class DetectionKind { part_hole, wall_hole, anchor_bolt };

inline constexpr std::string_view to_string(DetectionKind k) {
  switch (k) {
    case DetectionKind::part_hole: return "part_hole";
    case DetectionKind::wall_hole: return "wall_hole";
    case DetectionKind::anchor_bolt: return "anchor_bolt";
  }
  return "?";
}

struct Detection {
  DetectionKind kind{DetectionKind::wall_hole};
  Point3 position{};
  double confidence{1.0};
};

// Stochastic stand-in for the camera's matching modules: a target in view
// is found with probability p_detect and reported with Gaussian error.
struct CameraModel {
  double p_detect{0.98};
  double sigma_hole{0.0015};  // m, wall holes and anchor bolts
  double sigma_part{0.0010};  // m, structural part holes
  double field_of_view{0.20};  // m lateral from the optical axis

  double sigma_for(DetectionKind k) const { return k == DetectionKind::part_hole ? sigma_part : sigma_hole; }

  bool operator==(const CameraModel&) const = default;
};

/// Candidate targets of the requested kind currently on the worksite.
inline std::vector<Point3> camera_targets(DetectionKind kind, const Worksite& site) {
  std::vector<Point3> out;
  switch (kind) {
    case DetectionKind::part_hole:
      if (site.part().state == PartState::held_on_wall || site.part().state == PartState::partially_fixed ||
          site.part().state == PartState::fixed)
        for (std::size_t i = 0; i < site.part().hole_count(); ++i) out.push_back(site.part().hole_world(i));
      break;
    case DetectionKind::wall_hole:
      for (const auto& h : site.holes())
        if (!h.anchor) out.push_back(h.position);
      break;
    case DetectionKind::anchor_bolt:
      for (const auto& a : site.anchors())
        if (a.hole && (a.state == AnchorState::stuck || a.state == AnchorState::seated ||
                       a.state == AnchorState::tightened))
          out.push_back(site.hole(*a.hole).position);
      break;
  }
  return out;
}

/// Detects the target of `kind` closest to the camera's optical axis.
/// Returns nullopt (NotFound) when nothing lies within the field of view or
/// the detector misses.
inline std::optional<Detection> camera_detect(DetectionKind kind, const Worksite& site, const Ray& optical_axis,
                                              const CameraModel& model, RandomStream& rng) {
  const Vec3 dir = normalize(optical_axis.direction);
  std::optional<Point3> best;
  double best_lateral = model.field_of_view;
  for (const auto& p : camera_targets(kind, site)) {
    const Vec3 rel = p - optical_axis.origin;
    const double along = dot(rel, dir);
    if (along <= 0.0) continue;
    const double lateral = norm(rel - dir * along);
    if (lateral <= best_lateral) {
      best_lateral = lateral;
      best = p;
    }
  }
  // the detection draw happens even without a target so the stream advances
  // identically regardless of scene content
  const double hit = rng.uniform();
  const double sigma = model.sigma_for(kind);
  const Vec3 err{rng.normal(0.0, sigma), rng.normal(0.0, sigma), rng.normal(0.0, sigma)};
  if (!best || hit >= model.p_detect) return std::nullopt;

  Detection d;
  d.kind = kind;
  d.position = *best + err;
  const double spread = 3.0 * sigma;
  d.confidence = spread > 0.0 ? std::exp(-0.5 * dot(err, err) / (spread * spread)) : 1.0;
  return d;
}

}  // namespace fixsim
