#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "drs/lipm.hpp"

using namespace drs;

namespace {

std::mt19937 rng(23);

double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

LipmState make_state(double z0, const Vec2& pos, const Vec2& vel,
                     double zdd_ws) {
  LipmState s;
  s.z0 = z0;
  s.r_sc = Vec3(pos.x(), pos.y(), z0);
  s.rd_sc = Vec3(vel.x(), vel.y(), 0.0);
  s.support_acc = Vec3(0.0, 0.0, zdd_ws);
  return s;
}

// Integrates the homogeneous pendulum xdd = (g_eff / z0) x with RK4.
void roll_homogeneous(Vec2& x, Vec2& xd, double k, double dt, double t_final) {
  double t = 0.0;
  while (t < t_final - 0.5 * dt) {
    const Vec2 k1x = xd, k1v = k * x;
    const Vec2 k2x = xd + 0.5 * dt * k1v, k2v = k * (x + 0.5 * dt * k1x);
    const Vec2 k3x = xd + 0.5 * dt * k2v, k3v = k * (x + 0.5 * dt * k2x);
    const Vec2 k4x = xd + dt * k3v, k4v = k * (x + dt * k3x);
    x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    xd += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    t += dt;
  }
}

}  // namespace

TEST_CASE("axial force at rest carries the full weight") {
  LipmState s = make_state(0.4, Vec2::Zero(), Vec2::Zero(), 0.0);
  CHECK(axial_force(s) == doctest::Approx(245.25).epsilon(1e-14));
}

TEST_CASE("axial force grows with surface heave and leg angle") {
  LipmState s = make_state(0.4, Vec2::Zero(), Vec2::Zero(), 1.0);
  s.r_sc.x() = 0.4 * std::tan(std::numbers::pi / 6.0);  // 30 degree lean
  // m (g + zdd_ws) / cos(30 deg)
  CHECK(axial_force(s) == doctest::Approx(312.0578204969927).epsilon(1e-12));
}

TEST_CASE("axial force throws when the support free-falls faster than g") {
  LipmState s = make_state(0.4, Vec2::Zero(), Vec2::Zero(), -9.82);
  CHECK_THROWS_AS((void)axial_force(s), std::domain_error);
}

TEST_CASE("horizontal acceleration on a static surface") {
  LipmState s = make_state(0.4, Vec2(0.1, 0.0), Vec2::Zero(), 0.0);
  const Vec2 acc = lipm_accel(s);
  CHECK(acc.x() == doctest::Approx(2.4525).epsilon(1e-14));
  CHECK(acc.y() == 0.0);
}

TEST_CASE("support acceleration enters as a negative forcing term") {
  LipmState s = make_state(0.4, Vec2(0.1, -0.05), Vec2::Zero(), 0.3);
  s.support_acc.x() = 0.7;
  s.support_acc.y() = -0.2;
  const Vec2 homog = lipm_accel(s, true);
  const Vec2 forced = lipm_accel(s, false);
  CHECK((forced - (homog - s.support_acc.head<2>())).norm() == 0.0);
  CHECK(homog.x() == doctest::Approx((9.81 + 0.3) / 0.4 * 0.1).epsilon(1e-14));
}

TEST_CASE("orbital energy frozen value and conservation along the flow") {
  LipmState s = make_state(0.4, Vec2(-0.05, 0.0), Vec2(0.3, 0.0), 0.0);
  CHECK(std::abs(orbital_energy(s).x() - 0.01434375) < 1e-15);

  // Constant heave keeps the homogeneous system autonomous, so E is exact.
  for (int trial = 0; trial < 10; ++trial) {
    const double z0 = uniform(0.3, 0.6);
    const double zdd = uniform(-2.0, 2.0);
    LipmState a = make_state(z0, Vec2(uniform(-0.2, 0.2), uniform(-0.2, 0.2)),
                             Vec2(uniform(-0.4, 0.4), uniform(-0.4, 0.4)), zdd);
    const Vec2 e0 = orbital_energy(a);
    Vec2 x = a.r_sc.head<2>(), xd = a.rd_sc.head<2>();
    roll_homogeneous(x, xd, a.g_eff() / z0, 1e-4, 1.0);
    LipmState b = make_state(z0, x, xd, zdd);
    CHECK((orbital_energy(b) - e0).norm() < 1e-9);
  }
}

TEST_CASE("positive orbital energy passes over the support, negative reverses") {
  // E > 0: starts moving toward the support and crosses it.
  LipmState pass = make_state(0.4, Vec2(-0.1, 0.0), Vec2(0.6, 0.0), 0.0);
  CHECK(orbital_energy(pass).x() > 0.0);
  Vec2 x = pass.r_sc.head<2>(), xd = pass.rd_sc.head<2>();
  roll_homogeneous(x, xd, pass.g_eff() / 0.4, 1e-4, 1.0);
  CHECK(x.x() > 0.0);

  // E < 0: slows, stops short of the support, and rolls back.
  LipmState back = make_state(0.4, Vec2(-0.1, 0.0), Vec2(0.2, 0.0), 0.0);
  CHECK(orbital_energy(back).x() < 0.0);
  x = back.r_sc.head<2>();
  xd = back.rd_sc.head<2>();
  roll_homogeneous(x, xd, back.g_eff() / 0.4, 1e-4, 1.0);
  CHECK(x.x() < 0.0);
  CHECK(xd.x() < 0.0);
}

TEST_CASE("capture point on a static surface reduces to the classic formula") {
  for (int i = 0; i < 200; ++i) {
    const double z0 = uniform(0.2, 0.8);
    const Vec2 vel(uniform(-0.5, 0.5), uniform(-0.5, 0.5));
    LipmState s = make_state(z0, Vec2(uniform(-0.2, 0.2), uniform(-0.2, 0.2)),
                             vel, 0.0);
    const CaptureResult c = capture_point(s);
    REQUIRE(c.exists);
    const double tc = std::sqrt(z0 / s.gravity);
    CHECK(c.x_cap == tc * vel.x());
    CHECK(c.y_cap == tc * vel.y());
  }
}

TEST_CASE("capture point frozen value at the nominal walking speed") {
  LipmState s = make_state(0.4, Vec2::Zero(), Vec2(0.08, 0.0), 0.0);
  const CaptureResult c = capture_point(s);
  CHECK(c.x_cap == doctest::Approx(0.016154200875076873).epsilon(1e-14));
  CHECK(c.z_cap == 0.0);
}

TEST_CASE("capture point does not exist when the support outruns gravity") {
  LipmState s = make_state(0.4, Vec2::Zero(), Vec2(0.1, 0.0), -9.81);
  CHECK_FALSE(capture_point(s).exists);
  s.support_acc.z() = -12.0;
  const CaptureResult c = capture_point(s);
  CHECK_FALSE(c.exists);
  CHECK(c.k_a > 0.0);  // apparent spring now pushes away from the support
}

TEST_CASE("stepping onto the capture point brings the mass to rest") {
  for (int trial = 0; trial < 20; ++trial) {
    const double z0 = uniform(0.3, 0.6);
    const double zdd = uniform(-0.3 * 9.81, 0.3 * 9.81);
    LipmState s = make_state(z0, Vec2(uniform(-0.2, 0.2), uniform(-0.2, 0.2)),
                             Vec2(uniform(-0.09, 0.09), uniform(-0.09, 0.09)),
                             zdd);
    const CaptureResult c = capture_point(s);
    REQUIRE(c.exists);
    // Relocate the support to the capture point; relative position becomes
    // the negated capture offset while the velocity is unchanged.
    Vec2 x(-c.x_cap, -c.y_cap);
    Vec2 xd = s.rd_sc.head<2>();
    const double horizon = 5.0 * std::sqrt(z0 / s.g_eff());
    roll_homogeneous(x, xd, s.g_eff() / z0, 1e-4, horizon);
    CHECK(xd.norm() < 1e-3);
  }
}
