#pragma once

#include <Eigen/Dense>

#include "drs/planner.hpp"
#include "drs/qp.hpp"
#include "drs/robot.hpp"
#include "drs/surface.hpp"
#include "drs/types.hpp"

namespace drs {

// Weights and limits for the force/torque allocation problem.
struct ControllerGains {
  Vec9 kp_diag = Vec9::Constant(120.0);
  Vec9 kd_diag = Vec9::Constant(22.0);
  double q_torque = 1000.0;  // effort block of the tracking cost
  double q_force = 1.0;
  double w_torque = 0.1;     // smoothing toward the previous solution
  double w_force = 1e-4;
  double mu = 0.5;
  double f_z_min = 1.0;  // minimum normal force per stance foot, N

  Eigen::Matrix<double, kNumDecision, kNumDecision> q_matrix() const;
  Eigen::Matrix<double, kNumDecision, kNumDecision> w_matrix() const;
  void validate() const;
};

enum class ControlMode {
  kFullQp,  // tracking with friction and torque constraints
  kIoOnly,  // exact output dynamics, no feasibility constraints
};

const char* control_mode_name(ControlMode mode);

// Everything the simulator and trace need from one control step.
struct ControlDecision {
  Vec12 u = Vec12::Zero();
  Vec9 F_surface = Vec9::Zero();  // stance forces in surface axes
  Vec9 F_world = Vec9::Zero();
  Vec9 y = Vec9::Zero();   // output error h(q) - h_d
  Vec9 yd = Vec9::Zero();
  Vec9 v = Vec9::Zero();   // feedback acceleration command
  QpStatus status = QpStatus::kOptimal;
  bool failed = false;     // no solve on the fallback ladder succeeded
  int fallback_level = 0;  // 0 means the nominal problem solved
  int iterations = 0;
  double objective = 0.0;
  double solve_time = 0.0;  // assembly plus solve, seconds
  double margin_friction = 0.0;  // slack of the tightest pyramid row, N
  double margin_normal = 0.0;    // smallest commanded normal force, N
  double margin_torque = 0.0;    // smallest headroom to a torque limit, Nm
};

// Intermediate task quantities, exposed for testing.
struct TaskMatrices {
  MatX a_contact;  // 9 x 21, contact-consistency rows
  VecX b_contact;
  MatX a_output;   // 9 x 21, output-dynamics rows
  VecX b_output;
  Vec9 y = Vec9::Zero();
  Vec9 yd = Vec9::Zero();
  Vec9 v = Vec9::Zero();
  Vec9 rp_dd = Vec9::Zero();  // stance anchor accelerations
};

// Linearized friction pyramid plus minimum normal force for three stance
// feet, written on the world-frame force block of the decision vector.
void contact_inequalities(const Mat3& surface_rot, double mu, double f_z_min,
                          Eigen::Matrix<double, 15, kNumDecision>& a_in,
                          Eigen::Matrix<double, 15, 1>& b_in);

class Controller {
 public:
  Controller(const RobotParams& robot, const ControllerGains& gains,
             const SurfaceMotion& surface,
             ControlMode mode = ControlMode::kFullQp);

  void set_mode(ControlMode mode) { mode_ = mode; }
  ControlMode mode() const { return mode_; }

  // Drops solution memory and restarts the smoothing-weight ramp.
  void reset();

  ControlDecision decide(const RobotState& state, const KinematicsCache& kin,
                         const ContactSet& contacts,
                         const ReferenceSnapshot& ref, double t);

  // Builds the allocation problem without touching controller state.
  // w_scale scales the smoothing block, kp_scale the position feedback.
  QpProblem build_qp(const RobotState& state, const KinematicsCache& kin,
                     const ContactSet& contacts, const ReferenceSnapshot& ref,
                     double t, double w_scale, double kp_scale,
                     TaskMatrices* aux = nullptr) const;

  TaskMatrices assemble_tasks(const RobotState& state,
                              const KinematicsCache& kin,
                              const ContactSet& contacts,
                              const ReferenceSnapshot& ref, double t,
                              double kp_scale = 1.0) const;

  const RobotParams& robot() const { return robot_; }
  const ControllerGains& gains() const { return gains_; }

 private:
  RobotParams robot_;
  ControllerGains gains_;
  SurfaceMotion surface_;
  ControlMode mode_;
  QpSolver solver_;
  VecX x_prev_;
  int steps_ = 0;
};

}  // namespace drs
