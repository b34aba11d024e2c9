#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace drs {

// Generalized coordinate layout, 18 total:
//   q[0..2]   base position in world frame [m]
//   q[3..5]   base orientation as Z-Y-X Euler angles stored (roll, pitch, yaw) [rad]
//   q[6..17]  joint angles, legs in order FL, FR, RL, RR,
//             each leg (hip roll, hip pitch, knee pitch) [rad]
inline constexpr int kNumQ = 18;
inline constexpr int kNumJoints = 12;
inline constexpr int kNumLegs = 4;
inline constexpr int kJointsPerLeg = 3;
// Three stance feet, three force components each.
inline constexpr int kNumContactRows = 9;
// Decision vector of the whole body QP: 12 torques + 9 contact forces.
inline constexpr int kNumDecision = kNumJoints + kNumContactRows;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

using VecQ = Eigen::Matrix<double, kNumQ, 1>;
using MatQ = Eigen::Matrix<double, kNumQ, kNumQ>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat9x18 = Eigen::Matrix<double, 9, kNumQ>;
using Mat3x18 = Eigen::Matrix<double, 3, kNumQ>;
using Mat18x12 = Eigen::Matrix<double, kNumQ, kNumJoints>;

enum class FootId : int { FL = 0, FR = 1, RL = 2, RR = 3 };

inline constexpr std::array<FootId, kNumLegs> kAllFeet{FootId::FL, FootId::FR,
                                                       FootId::RL, FootId::RR};

inline const char* foot_name(FootId f) {
  switch (f) {
    case FootId::FL: return "FL";
    case FootId::FR: return "FR";
    case FootId::RL: return "RL";
    case FootId::RR: return "RR";
  }
  return "??";
}

inline bool is_right_side(FootId f) {
  return f == FootId::FR || f == FootId::RR;
}

}  // namespace drs
