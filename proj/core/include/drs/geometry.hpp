#pragma once

#include "drs/types.hpp"

namespace drs {

Mat3 rot_x(double a);
Mat3 rot_y(double a);
Mat3 rot_z(double a);

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

// Z-Y-X Euler angles stored as (roll, pitch, yaw): R = Rz(yaw) Ry(pitch) Rx(roll).
Mat3 euler_zyx_to_rot(const Vec3& rpy);

// Maps Euler angle rates to the world frame angular velocity: omega = E(rpy) * rpy_dot.
Mat3 euler_rate_map(const Vec3& rpy);

// Time derivative of the rate map along (rpy, rpy_dot), so that the angular
// acceleration with zero Euler accelerations is Edot * rpy_dot.
Mat3 euler_rate_map_dot(const Vec3& rpy, const Vec3& rpy_dot);

// Angular velocity and acceleration of a frame given Euler angles and their
// first/second derivatives.
Vec3 euler_zyx_omega(const Vec3& rpy, const Vec3& rpy_dot);
Vec3 euler_zyx_alpha(const Vec3& rpy, const Vec3& rpy_dot, const Vec3& rpy_ddot);

}  // namespace drs
