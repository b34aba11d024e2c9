#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "drs/geometry.hpp"

using namespace drs;

namespace {

std::mt19937 rng(11);

Vec3 random_vec(double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return Vec3(d(rng), d(rng), d(rng));
}

}  // namespace

TEST_CASE("axis rotations are orthonormal and match known values") {
  for (double a : {-1.3, -0.2, 0.0, 0.7, 2.9}) {
    for (const Mat3& r : {rot_x(a), rot_y(a), rot_z(a)}) {
      CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-14);
      CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  const double h = std::numbers::pi / 2.0;
  CHECK((rot_z(h) * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-15);
  CHECK((rot_x(h) * Vec3::UnitY() - Vec3::UnitZ()).norm() < 1e-15);
  CHECK((rot_y(h) * Vec3::UnitZ() - Vec3::UnitX()).norm() < 1e-15);
}

TEST_CASE("skew matrix reproduces the cross product") {
  for (int i = 0; i < 20; ++i) {
    const Vec3 v = random_vec(2.0);
    const Vec3 w = random_vec(2.0);
    CHECK((skew(v) * w - v.cross(w)).norm() < 1e-14);
  }
}

TEST_CASE("euler composition order is Rz(yaw) Ry(pitch) Rx(roll)") {
  for (int i = 0; i < 20; ++i) {
    const Vec3 rpy = random_vec(1.4);
    const Mat3 expected = rot_z(rpy.z()) * rot_y(rpy.y()) * rot_x(rpy.x());
    CHECK((euler_zyx_to_rot(rpy) - expected).norm() < 1e-14);
  }
}

TEST_CASE("angular velocity matches the finite difference of the rotation") {
  const double h = 1e-6;
  for (int i = 0; i < 30; ++i) {
    const Vec3 rpy = random_vec(1.2);
    const Vec3 rpy_dot = random_vec(2.0);
    const Mat3 r0 = euler_zyx_to_rot(rpy - h * rpy_dot);
    const Mat3 r1 = euler_zyx_to_rot(rpy + h * rpy_dot);
    const Mat3 rdot = (r1 - r0) / (2.0 * h);
    const Mat3 omega_hat = rdot * euler_zyx_to_rot(rpy).transpose();
    const Vec3 omega_fd(omega_hat(2, 1), omega_hat(0, 2), omega_hat(1, 0));
    const Vec3 omega = euler_zyx_omega(rpy, rpy_dot);
    CHECK((omega - omega_fd).norm() < 1e-7);
    CHECK((euler_rate_map(rpy) * rpy_dot - omega).norm() < 1e-14);
  }
}

TEST_CASE("angular acceleration matches the finite difference of omega") {
  const double h = 1e-6;
  for (int i = 0; i < 30; ++i) {
    const Vec3 rpy = random_vec(1.2);
    const Vec3 rpy_dot = random_vec(1.5);
    const Vec3 rpy_ddot = random_vec(1.5);
    auto omega_at = [&](double t) {
      return euler_zyx_omega(rpy + t * rpy_dot + 0.5 * t * t * rpy_ddot,
                             rpy_dot + t * rpy_ddot);
    };
    const Vec3 alpha_fd = (omega_at(h) - omega_at(-h)) / (2.0 * h);
    const Vec3 alpha = euler_zyx_alpha(rpy, rpy_dot, rpy_ddot);
    CHECK((alpha - alpha_fd).norm() < 1e-6);
  }
}

TEST_CASE("rate map derivative matches the finite difference of the map") {
  const double h = 1e-6;
  for (int i = 0; i < 30; ++i) {
    const Vec3 rpy = random_vec(1.2);
    const Vec3 rpy_dot = random_vec(1.5);
    const Mat3 e0 = euler_rate_map(rpy - h * rpy_dot);
    const Mat3 e1 = euler_rate_map(rpy + h * rpy_dot);
    const Mat3 edot_fd = (e1 - e0) / (2.0 * h);
    CHECK((euler_rate_map_dot(rpy, rpy_dot) - edot_fd).norm() < 1e-6);
  }
}
