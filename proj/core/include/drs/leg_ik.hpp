#pragma once

#include "drs/robot.hpp"
#include "drs/types.hpp"

namespace drs {

struct LegIkResult {
  Vec3 q = Vec3::Zero();  // hip roll, hip pitch, knee
  bool reachable = true;
};

// Closed-form inverse kinematics for one leg. The target is the foot point
// expressed in the base frame relative to the hip origin. knee_dir picks the
// fold branch: negative bends the knee behind the hip-foot line (knee angle
// <= 0), positive ahead of it. Targets outside the annulus
// [|l1 - l2|, l1 + l2] are clamped to the nearest reachable radius and
// flagged.
LegIkResult leg_ik(const Vec3& foot_rel_hip, double l1, double l2,
                   double knee_dir = -1.0);

// Convenience wrapper using the robot link lengths and knee-back branch.
LegIkResult leg_ik(const RobotParams& params, const Vec3& foot_rel_hip);

// Per-leg wrapper honouring the robot's knee bend pattern.
LegIkResult leg_ik(const RobotParams& params, FootId foot,
                   const Vec3& foot_rel_hip);

// Maps a world-frame point into the hip-relative base frame of one leg.
Vec3 world_to_hip(const RobotParams& params, const Vec3& base_pos,
                  const Mat3& base_rot, FootId foot, const Vec3& world_point);

// Joint angles that place all four feet directly below their hips at the
// given depth, with zero base orientation.
VecX standing_joint_angles(const RobotParams& params, double depth);

}  // namespace drs
