#pragma once

#include "drs/types.hpp"

#include <array>

namespace drs {

enum class LinkInertiaModel {
  kPointMassAtMidLink,
  kUniformRod,
};

// Quadruped with a box body and three revolute joints per leg
// (hip roll about x, hip pitch about y, knee pitch about y), point feet.
// Leg mass is split between the two links proportionally to length; the
// remaining mass is a uniform box at the base origin.
struct RobotParams {
  double total_mass = 25.0;  // kg
  double leg_mass = 2.9;     // kg per leg
  Vec3 body_dims = Vec3(0.56, 0.35, 0.60);  // m, overall length/width/height
  // The 0.60 m overall height includes the legs; the torso box itself is much
  // flatter, and its thickness sets the roll/pitch inertia of the base.
  double torso_thickness = 0.20;  // m
  std::array<Vec3, kNumLegs> hip_offsets = {
      Vec3(0.28, 0.175, 0.0),   // FL
      Vec3(0.28, -0.175, 0.0),  // FR
      Vec3(-0.28, 0.175, 0.0),  // RL
      Vec3(-0.28, -0.175, 0.0)  // RR
  };
  double upper_leg_length = 0.25;  // m
  double lower_leg_length = 0.25;  // m
  // Knee fold direction per leg, front pair ahead of the hip-foot line and
  // rear pair behind it. With legs this heavy an all-backward fold drags the
  // whole-body center of mass ~3 cm behind the base origin, which the
  // support polygon cannot cover right after a front-foot touchdown.
  std::array<double, kNumLegs> knee_bend = {1.0, 1.0, -1.0, -1.0};
  Vec3 torque_limits = Vec3(20.0, 55.0, 55.0);  // N*m per joint type
  double gravity = 9.81;                        // m/s^2
  LinkInertiaModel link_inertia = LinkInertiaModel::kUniformRod;

  double body_mass() const { return total_mass - kNumLegs * leg_mass; }
  double upper_mass() const {
    return leg_mass * upper_leg_length / (upper_leg_length + lower_leg_length);
  }
  double lower_mass() const {
    return leg_mass * lower_leg_length / (upper_leg_length + lower_leg_length);
  }
  Vec12 torque_limit_vector() const;
  // Throws std::invalid_argument when a mass or length is not positive.
  void validate() const;
};

struct RobotState {
  VecQ q = VecQ::Zero();
  VecQ qd = VecQ::Zero();

  Vec3 base_pos() const { return q.segment<3>(0); }
  Vec3 base_rpy() const { return q.segment<3>(3); }
  Vec3 base_vel() const { return qd.segment<3>(0); }
  Vec3 base_rpy_dot() const { return qd.segment<3>(3); }
};

struct DynamicsTerms {
  MatQ mass_matrix = MatQ::Zero();
  VecQ bias = VecQ::Zero();  // Coriolis, centrifugal and gravity terms
};

// One swing foot, three stance feet (ascending foot id), at all times.
struct ContactSet {
  FootId swing = FootId::FL;
  std::array<FootId, 3> stance = {FootId::FR, FootId::RL, FootId::RR};

  static ContactSet with_swing(FootId swing);
  bool is_stance(FootId f) const;
  // Index of a foot within the stance array, -1 for the swing foot.
  int stance_index(FootId f) const;
};

// World frame kinematics of every body and joint, computed in one pass and
// shared by the dynamics and Jacobian assembly below.
struct KinematicsCache {
  Vec3 base_pos, base_vel;
  Mat3 base_rot;
  Vec3 base_omega, base_alpha_bias;
  Mat3 euler_map, euler_map_dot;

  struct Leg {
    Vec3 hip_origin;          // hip roll/pitch joint location
    Vec3 knee_origin;
    Vec3 foot;
    Vec3 axis[3];             // world joint axes
    Vec3 omega2, omega3;      // angular velocity after hip pitch / knee
    Vec3 alpha2_bias, alpha3_bias;
    Vec3 hip_vel, knee_vel, foot_vel;
    Vec3 hip_acc_bias, knee_acc_bias, foot_acc_bias;
    Mat3 r2, r3;              // world rotations of upper and lower link frames
    Vec3 upper_com, lower_com;
    Vec3 upper_com_vel, lower_com_vel;
    Vec3 upper_com_acc_bias, lower_com_acc_bias;
  };
  std::array<Leg, kNumLegs> leg;
};

KinematicsCache compute_kinematics(const RobotParams& params, const RobotState& state);

// Mass matrix and bias vector of M(q) qdd + bias(q, qd) = B u + J^T F.
DynamicsTerms dynamics_terms(const RobotParams& params, const RobotState& state);
DynamicsTerms dynamics_terms(const RobotParams& params, const RobotState& state,
                             const KinematicsCache& kin);

// Constant actuation map (torques act on the joint coordinates only).
Mat18x12 input_matrix();

Vec3 foot_position(const RobotParams& params, const RobotState& state, FootId foot);
Vec3 hip_position(const RobotParams& params, const RobotState& state, FootId foot);

// World translational Jacobian of one foot and its velocity product term
// d(J qd)/dt - J qdd (the bias acceleration of the foot point).
void foot_jacobian(const RobotParams& params, const RobotState& state,
                   const KinematicsCache& kin, FootId foot, Mat3x18& jac,
                   Vec3& jdot_qd);

// Stacked stance foot Jacobian in stance order. Swing columns are zero rows
// only in the sense that the swing foot does not appear at all.
void contact_jacobian(const RobotParams& params, const RobotState& state,
                      const KinematicsCache& kin, const ContactSet& contacts,
                      Mat9x18& jac, Vec9& jdot_qd);

// Output map h = [base position; base Euler angles; swing foot position].
// The top six rows are an identity on the base coordinates.
void output_jacobian(const RobotParams& params, const RobotState& state,
                     const KinematicsCache& kin, FootId swing, Mat9x18& jac,
                     Vec9& jdot_qd);

// Whole body center of mass position and velocity.
void com_state(const RobotParams& params, const RobotState& state,
               const KinematicsCache& kin, Vec3& com, Vec3& com_vel);

// Kinetic plus gravitational potential energy (potential zero at z = 0).
double total_energy(const RobotParams& params, const RobotState& state);

}  // namespace drs
