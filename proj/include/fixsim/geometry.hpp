#pragma once

#include <algorithm>
#include <cmath>

#include "fixsim/errors.hpp"

namespace fixsim {

// 3D vector / point in metres, expressed in the site (robot 1 base) frame
// unless stated otherwise.
struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;
};

using Point3 = Vec3;

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

inline Vec3 normalize(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorCode::degenerate_geometry, "cannot normalize a zero vector");
  return v / n;
}

/// Rigid frame stored as an origin plus three unit axes (columns of the
/// rotation from frame-local to site coordinates).
struct Frame {
  Point3 origin{};
  Vec3 x_axis{1.0, 0.0, 0.0};
  Vec3 y_axis{0.0, 1.0, 0.0};
  Vec3 z_axis{0.0, 0.0, 1.0};

  static constexpr Frame identity() { return Frame{}; }

  /// Orthonormal and right-handed within `tol`.
  bool valid(double tol = 1e-9) const {
    if (!is_finite(origin) || !is_finite(x_axis) || !is_finite(y_axis) || !is_finite(z_axis)) return false;
    if (std::abs(norm(x_axis) - 1.0) > tol || std::abs(norm(y_axis) - 1.0) > tol ||
        std::abs(norm(z_axis) - 1.0) > tol)
      return false;
    if (std::abs(dot(x_axis, y_axis)) > tol || std::abs(dot(y_axis, z_axis)) > tol ||
        std::abs(dot(z_axis, x_axis)) > tol)
      return false;
    return norm(cross(x_axis, y_axis) - z_axis) <= tol;
  }

  /// Direction given in frame-local coordinates, rotated into site coordinates.
  Vec3 rotate_out(const Vec3& local) const { return x_axis * local.x + y_axis * local.y + z_axis * local.z; }

  Vec3 rotate_in(const Vec3& v) const { return {dot(v, x_axis), dot(v, y_axis), dot(v, z_axis)}; }
};

inline constexpr double kDegenerateTriangleArea = 1e-9;  // m^2

/// Wall coordinate system from three laser-measured surface points.
/// x points from p1 to p2, z is normal to the plane through the points,
/// y completes the right-handed triad. Origin is p1.
inline Frame estimate_wall_frame(const Point3& p1, const Point3& p2, const Point3& p3) {
  if (!is_finite(p1) || !is_finite(p2) || !is_finite(p3))
    fail(ErrorCode::invalid_argument, "non-finite measurement point");
  const Vec3 e1 = p2 - p1;
  const Vec3 e2 = p3 - p1;
  const double area = 0.5 * norm(cross(e1, e2));
  if (!(area > kDegenerateTriangleArea))
    fail(ErrorCode::degenerate_geometry, "measurement points coincide or are collinear");

  Frame f;
  f.origin = p1;
  f.x_axis = normalize(e1);
  f.z_axis = normalize(cross(f.x_axis, e2));
  f.y_axis = cross(f.z_axis, f.x_axis);
  return f;
}

/// Coordinates of `p` expressed in `frame`.
inline Point3 to_frame(const Frame& frame, const Point3& p) { return frame.rotate_in(p - frame.origin); }

inline Point3 from_frame(const Frame& frame, const Point3& local) { return frame.origin + frame.rotate_out(local); }

/// Angle in radians between two unit vectors, robust near 0 and pi.
inline double angle_between(const Vec3& a, const Vec3& b) { return std::atan2(norm(cross(a, b)), dot(a, b)); }

/// Largest axis-to-axis angle between two frames (radians).
inline double max_axis_angle(const Frame& a, const Frame& b) {
  const double ax = angle_between(a.x_axis, b.x_axis);
  const double ay = angle_between(a.y_axis, b.y_axis);
  const double az = angle_between(a.z_axis, b.z_axis);
  return std::max(ax, std::max(ay, az));
}

inline constexpr double deg_to_rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / 3.14159265358979323846; }

}  // namespace fixsim
