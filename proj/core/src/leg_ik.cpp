#include "drs/leg_ik.hpp"

#include <algorithm>
#include <cmath>

namespace drs {

LegIkResult leg_ik(const Vec3& foot_rel_hip, double l1, double l2,
                   double knee_dir) {
  LegIkResult out;
  const double py = foot_rel_hip.y();
  const double pz = foot_rel_hip.z();

  // Hip roll aligns the remaining two-link chain with its pitch plane.
  const double q1 =
      (py == 0.0 && pz == 0.0) ? 0.0 : std::atan2(py, -pz);

  const double c1 = std::cos(q1);
  const double s1 = std::sin(q1);
  const double vx = foot_rel_hip.x();
  const double vz = -s1 * py + c1 * pz;  // Rx(q1)^T applied to (0, py, pz)

  double r2 = vx * vx + vz * vz;
  const double r_max = l1 + l2;
  const double r_min = std::abs(l1 - l2);
  double c3 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c3 > 1.0 || c3 < -1.0) {
    out.reachable = false;
    c3 = std::clamp(c3, -1.0, 1.0);
    const double r = std::clamp(std::sqrt(r2), r_min, r_max);
    r2 = r * r;
  }
  const double q3 = std::copysign(std::acos(c3), knee_dir);
  const double s3 = std::sin(q3);

  const double a = l1 + l2 * c3;
  const double b = l2 * s3;
  double q2 = 0.0;
  if (r2 > 1e-16) {
    const double s2 = (-a * vx + b * vz) / r2;
    const double c2 = (-b * vx - a * vz) / r2;
    q2 = std::atan2(s2, c2);
  }

  out.q = Vec3(q1, q2, q3);
  return out;
}

LegIkResult leg_ik(const RobotParams& params, const Vec3& foot_rel_hip) {
  return leg_ik(foot_rel_hip, params.upper_leg_length,
                params.lower_leg_length);
}

LegIkResult leg_ik(const RobotParams& params, FootId foot,
                   const Vec3& foot_rel_hip) {
  return leg_ik(foot_rel_hip, params.upper_leg_length,
                params.lower_leg_length,
                params.knee_bend[static_cast<size_t>(foot)]);
}

Vec3 world_to_hip(const RobotParams& params, const Vec3& base_pos,
                  const Mat3& base_rot, FootId foot, const Vec3& world_point) {
  return base_rot.transpose() * (world_point - base_pos) -
         params.hip_offsets[static_cast<size_t>(foot)];
}

VecX standing_joint_angles(const RobotParams& params, double depth) {
  VecX q = VecX::Zero(kNumJoints);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const LegIkResult ik =
        leg_ik(params, static_cast<FootId>(leg), Vec3(0.0, 0.0, -depth));
    q.segment<3>(3 * leg) = ik.q;
  }
  return q;
}

}  // namespace drs
