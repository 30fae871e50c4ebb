#include <array>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixsim/geometry.hpp"
#include "fixsim/worksite.hpp"

using namespace fixsim;

namespace oracle {

// Independent plain-array vector code for cross-checking the frame builder.
using V = std::array<double, 3>;

V sub(const V& a, const V& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
V crs(const V& a, const V& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
V unit(const V& a) {
  const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  return {a[0] / n, a[1] / n, a[2] / n};
}

struct Axes {
  V x, y, z;
};

Axes frame(const V& p1, const V& p2, const V& p3) {
  Axes f;
  f.x = unit(sub(p2, p1));
  f.z = unit(crs(sub(p2, p1), sub(p3, p1)));
  f.y = crs(f.z, f.x);
  return f;
}

}  // namespace oracle

namespace {

Vec3 to_vec(const oracle::V& v) { return {v[0], v[1], v[2]}; }

void expect_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

}  // namespace

TEST(EstimateWallFrame, AxisAlignedTriple) {
  const Frame f = estimate_wall_frame({0, 0, 1}, {1, 0, 1}, {0, -1, 1});
  expect_near(f.x_axis, {1, 0, 0}, 1e-15);
  expect_near(f.z_axis, {0, 0, -1}, 1e-15);
  expect_near(f.y_axis, {0, -1, 0}, 1e-15);
  EXPECT_TRUE(f.valid());
}

TEST(EstimateWallFrame, CollinearPointsAreDegenerate) {
  try {
    estimate_wall_frame({0, 0, 0}, {1, 0, 0}, {2, 0, 0});
    FAIL() << "expected DegenerateGeometry";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_geometry);
  }
  EXPECT_THROW(estimate_wall_frame({1, 1, 1}, {1, 1, 1}, {0, 2, 0}), Error);
}

TEST(EstimateWallFrame, MatchesOracleOnRandomTriples) {
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int checked = 0;
  while (checked < 1000) {
    const oracle::V a{u(gen), u(gen), u(gen)}, b{u(gen), u(gen), u(gen)}, c{u(gen), u(gen), u(gen)};
    const auto n = oracle::crs(oracle::sub(b, a), oracle::sub(c, a));
    if (0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) < 1e-3) continue;
    const Frame f = estimate_wall_frame(to_vec(a), to_vec(b), to_vec(c));
    const auto o = oracle::frame(a, b, c);
    expect_near(f.x_axis, to_vec(o.x), 1e-9);
    expect_near(f.y_axis, to_vec(o.y), 1e-9);
    expect_near(f.z_axis, to_vec(o.z), 1e-9);
    expect_near(f.origin, to_vec(a), 0.0);
    EXPECT_TRUE(f.valid());
    ++checked;
  }
}

TEST(EstimateWallFrame, TranslationMovesOnlyTheOrigin) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Point3 a{u(gen), u(gen), u(gen)}, b{u(gen), u(gen), u(gen)}, c{u(gen), u(gen), u(gen)};
    const Vec3 t{u(gen), u(gen), u(gen)};
    if (norm(cross(b - a, c - a)) < 1e-3) continue;
    const Frame f = estimate_wall_frame(a, b, c);
    const Frame g = estimate_wall_frame(a + t, b + t, c + t);
    expect_near(g.x_axis, f.x_axis, 1e-9);
    expect_near(g.z_axis, f.z_axis, 1e-9);
    expect_near(g.origin, f.origin + t, 1e-12);
  }
}

TEST(EstimateWallFrame, SwappingSecondAndThirdFlipsTheNormal) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Point3 a{u(gen), u(gen), u(gen)}, b{u(gen), u(gen), u(gen)}, c{u(gen), u(gen), u(gen)};
    if (norm(cross(b - a, c - a)) < 1e-3) continue;
    const Frame f = estimate_wall_frame(a, b, c);
    const Frame g = estimate_wall_frame(a, c, b);
    expect_near(g.z_axis, -f.z_axis, 1e-9);
  }
}

TEST(ToFrame, IdentityAndOrigin) {
  expect_near(to_frame(Frame::identity(), {1, 2, 3}), {1, 2, 3}, 0.0);
  const Frame f = estimate_wall_frame({0, 0, 1}, {1, 0, 1}, {0, -1, 1});
  expect_near(to_frame(f, f.origin), {0, 0, 0}, 0.0);
}

TEST(ToFrame, RoundTrip) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Point3 a{u(gen), u(gen), u(gen)}, b{u(gen), u(gen), u(gen)}, c{u(gen), u(gen), u(gen)};
    if (norm(cross(b - a, c - a)) < 1e-2) continue;
    const Frame f = estimate_wall_frame(a, b, c);
    const Point3 p{u(gen), u(gen), u(gen)};
    expect_near(from_frame(f, to_frame(f, p)), p, 1e-12);
  }
}

TEST(Frame, ValidRejectsNonOrthonormal) {
  Frame f;
  EXPECT_TRUE(f.valid());
  f.y_axis = {0.0, 1.0, 0.1};
  EXPECT_FALSE(f.valid());
  Frame left;
  left.z_axis = {0, 0, -1};
  EXPECT_FALSE(left.valid());
}

TEST(MakeWallFrame, RightHandedForAnyHeading) {
  for (double yaw : {-20.0, 0.0, 5.0, 30.0})
    for (double pitch : {-10.0, 0.0, 7.5}) {
      const Frame f = make_wall_frame({0.7, 0.0, 0.3}, yaw, pitch);
      EXPECT_TRUE(f.valid(1e-12));
      EXPECT_LE(f.y_axis.z, 0.0);  // y points down the wall
    }
  const Frame f = make_wall_frame({0.7, 0.0, 0.3}, 0.0, 0.0);
  expect_near(f.z_axis, {1, 0, 0}, 1e-15);
  expect_near(f.x_axis, {0, -1, 0}, 1e-15);
  expect_near(f.y_axis, {0, 0, -1}, 1e-15);
}

TEST(Normalize, ZeroVectorThrows) { EXPECT_THROW(normalize({}), Error); }
