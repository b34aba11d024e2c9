#include "drs/geometry.hpp"

#include <cmath>

namespace drs {

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

Mat3 euler_zyx_to_rot(const Vec3& rpy) {
  return rot_z(rpy.z()) * rot_y(rpy.y()) * rot_x(rpy.x());
}

Mat3 euler_rate_map(const Vec3& rpy) {
  // omega = roll_dot * (Rz Ry x) + pitch_dot * (Rz y) + yaw_dot * z
  const Mat3 rz = rot_z(rpy.z());
  Mat3 e;
  e.col(0) = rz * rot_y(rpy.y()) * Vec3::UnitX();
  e.col(1) = rz * Vec3::UnitY();
  e.col(2) = Vec3::UnitZ();
  return e;
}

Mat3 euler_rate_map_dot(const Vec3& rpy, const Vec3& rpy_dot) {
  const Mat3 rz = rot_z(rpy.z());
  const Vec3 c_roll = rz * rot_y(rpy.y()) * Vec3::UnitX();
  const Vec3 c_pitch = rz * Vec3::UnitY();
  // The roll column rotates with yaw and pitch, the pitch column with yaw only,
  // and the yaw column is fixed.
  const Vec3 omega_zy =
      rpy_dot.z() * Vec3::UnitZ() + rpy_dot.y() * c_pitch;
  Mat3 edot;
  edot.col(0) = omega_zy.cross(c_roll);
  edot.col(1) = rpy_dot.z() * Vec3::UnitZ().cross(c_pitch);
  edot.col(2) = Vec3::Zero();
  return edot;
}

Vec3 euler_zyx_omega(const Vec3& rpy, const Vec3& rpy_dot) {
  return euler_rate_map(rpy) * rpy_dot;
}

Vec3 euler_zyx_alpha(const Vec3& rpy, const Vec3& rpy_dot, const Vec3& rpy_ddot) {
  return euler_rate_map(rpy) * rpy_ddot + euler_rate_map_dot(rpy, rpy_dot) * rpy_dot;
}

}  // namespace drs
