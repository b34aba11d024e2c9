#include "drs/controller.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Eigen::Matrix<double, kNumDecision, kNumDecision> ControllerGains::q_matrix()
    const {
  Eigen::Matrix<double, kNumDecision, kNumDecision> q;
  q.setZero();
  q.diagonal().head<kNumJoints>().setConstant(q_torque);
  q.diagonal().tail<kNumContactRows>().setConstant(q_force);
  return q;
}

Eigen::Matrix<double, kNumDecision, kNumDecision> ControllerGains::w_matrix()
    const {
  Eigen::Matrix<double, kNumDecision, kNumDecision> w;
  w.setZero();
  w.diagonal().head<kNumJoints>().setConstant(w_torque);
  w.diagonal().tail<kNumContactRows>().setConstant(w_force);
  return w;
}

void ControllerGains::validate() const {
  if ((kp_diag.array() < 0.0).any() || (kd_diag.array() < 0.0).any())
    throw std::invalid_argument("feedback gains must be nonnegative");
  if (q_torque <= 0.0 || q_force <= 0.0 || w_torque < 0.0 || w_force < 0.0)
    throw std::invalid_argument("cost weights out of range");
  if (mu <= 0.0) throw std::invalid_argument("friction coefficient must be positive");
  if (f_z_min < 0.0) throw std::invalid_argument("normal force floor must be nonnegative");
}

const char* control_mode_name(ControlMode mode) {
  switch (mode) {
    case ControlMode::kFullQp:
      return "full_qp";
    case ControlMode::kIoOnly:
      return "io_only";
  }
  return "unknown";
}

void contact_inequalities(const Mat3& surface_rot, double mu, double f_z_min,
                          Eigen::Matrix<double, 15, kNumDecision>& a_in,
                          Eigen::Matrix<double, 15, 1>& b_in) {
  a_in.setZero();
  b_in.setZero();
  const Vec3 t1 = surface_rot.col(0);
  const Vec3 t2 = surface_rot.col(1);
  const Vec3 n = surface_rot.col(2);
  const double c = mu / std::sqrt(2.0);
  for (int i = 0; i < 3; ++i) {
    const int col = kNumJoints + 3 * i;
    const int row = 5 * i;
    a_in.block<1, 3>(row + 0, col) = (t1 - c * n).transpose();
    a_in.block<1, 3>(row + 1, col) = (-t1 - c * n).transpose();
    a_in.block<1, 3>(row + 2, col) = (t2 - c * n).transpose();
    a_in.block<1, 3>(row + 3, col) = (-t2 - c * n).transpose();
    a_in.block<1, 3>(row + 4, col) = -n.transpose();
    b_in(row + 4) = -f_z_min;
  }
}

Controller::Controller(const RobotParams& robot, const ControllerGains& gains,
                       const SurfaceMotion& surface, ControlMode mode)
    : robot_(robot), gains_(gains), surface_(surface), mode_(mode) {
  robot_.validate();
  gains_.validate();
  reset();
}

void Controller::reset() {
  steps_ = 0;
  x_prev_ = VecX::Zero(kNumDecision);
  const double share = robot_.total_mass * robot_.gravity / 3.0;
  for (int i = 0; i < 3; ++i) x_prev_(kNumJoints + 3 * i + 2) = share;
}

TaskMatrices Controller::assemble_tasks(const RobotState& state,
                                        const KinematicsCache& kin,
                                        const ContactSet& contacts,
                                        const ReferenceSnapshot& ref, double t,
                                        double kp_scale) const {
  TaskMatrices out;

  const DynamicsTerms dyn = dynamics_terms(robot_, state, kin);
  const Mat18x12 b_mat = input_matrix();

  Mat9x18 j_f;
  Vec9 jdot_qd_f;
  contact_jacobian(robot_, state, kin, contacts, j_f, jdot_qd_f);
  Mat9x18 j_h;
  Vec9 jdot_qd_h;
  output_jacobian(robot_, state, kin, contacts.swing, j_h, jdot_qd_h);

  const Eigen::LLT<MatQ> llt(dyn.mass_matrix);
  const Eigen::Matrix<double, kNumQ, kNumJoints> minv_b = llt.solve(b_mat);
  const Eigen::Matrix<double, kNumQ, kNumContactRows> minv_jt =
      llt.solve(j_f.transpose());
  const VecQ minv_c = llt.solve(dyn.bias);

  for (int i = 0; i < 3; ++i) {
    const Vec3 foot = kin.leg[static_cast<int>(contacts.stance[i])].foot;
    const Vec3 anchor = material_coords(surface_, foot, t);
    out.rp_dd.segment<3>(3 * i) = point_state(surface_, anchor, t).acc;
  }

  out.a_contact.resize(kNumContactRows, kNumDecision);
  out.a_contact << j_f * minv_b, j_f * minv_jt;
  out.b_contact = out.rp_dd - jdot_qd_f + j_f * minv_c;

  const auto& swing_leg = kin.leg[static_cast<int>(contacts.swing)];
  Vec9 h_now;
  h_now.segment<3>(0) = state.base_pos();
  h_now.segment<3>(3) = state.base_rpy();
  h_now.segment<3>(6) = swing_leg.foot;
  out.y = h_now - ref.h;
  out.yd = j_h * state.qd - ref.hd;
  out.v = -(kp_scale * gains_.kp_diag.array() * out.y.array()).matrix() -
          (gains_.kd_diag.array() * out.yd.array()).matrix();

  out.a_output.resize(kNumContactRows, kNumDecision);
  out.a_output << j_h * minv_b, j_h * minv_jt;
  out.b_output = ref.hdd + out.v - jdot_qd_h + j_h * minv_c;
  return out;
}

QpProblem Controller::build_qp(const RobotState& state,
                               const KinematicsCache& kin,
                               const ContactSet& contacts,
                               const ReferenceSnapshot& ref, double t,
                               double w_scale, double kp_scale,
                               TaskMatrices* aux) const {
  const TaskMatrices tasks =
      assemble_tasks(state, kin, contacts, ref, t, kp_scale);

  QpProblem qp;
  qp.A_eq.resize(2 * kNumContactRows, kNumDecision);
  qp.A_eq.topRows(kNumContactRows) = tasks.a_contact;
  qp.A_eq.bottomRows(kNumContactRows) = tasks.a_output;
  qp.b_eq.resize(2 * kNumContactRows);
  qp.b_eq.head(kNumContactRows) = tasks.b_contact;
  qp.b_eq.tail(kNumContactRows) = tasks.b_output;

  if (mode_ == ControlMode::kIoOnly) {
    qp.H = 2.0 * gains_.q_matrix();
    qp.f = VecX::Zero(kNumDecision);
  } else {
    const auto w_eff = (w_scale * gains_.w_matrix()).eval();
    qp.H = 2.0 * (gains_.q_matrix() + w_eff);
    qp.f = -2.0 * (w_eff * x_prev_);

    Eigen::Matrix<double, 15, kNumDecision> a_in;
    Eigen::Matrix<double, 15, 1> b_in;
    contact_inequalities(surface_pose(surface_, t).rotation, gains_.mu,
                         gains_.f_z_min, a_in, b_in);
    qp.A_in = a_in;
    qp.b_in = b_in;

    const Vec12 limits = robot_.torque_limit_vector();
    qp.lb = VecX::Constant(kNumDecision, -kInf);
    qp.ub = VecX::Constant(kNumDecision, kInf);
    qp.lb.head<kNumJoints>() = -limits;
    qp.ub.head<kNumJoints>() = limits;
  }

  if (aux) *aux = tasks;
  return qp;
}

ControlDecision Controller::decide(const RobotState& state,
                                   const KinematicsCache& kin,
                                   const ContactSet& contacts,
                                   const ReferenceSnapshot& ref, double t) {
  const auto t_start = std::chrono::steady_clock::now();

  ControlDecision out;
  const double ramp = std::min(1.0, steps_ / 10.0);
  ++steps_;

  struct Attempt {
    double w_scale;
    double kp_scale;
  };
  const Attempt ladder[] = {
      {ramp, 1.0}, {0.0, 1.0}, {0.0, 0.5}, {0.0, 0.25}, {0.0, 0.125}};
  const int n_attempts = mode_ == ControlMode::kIoOnly ? 1 : 5;

  TaskMatrices tasks;
  QpSolution sol;
  bool solved = false;
  for (int a = 0; a < n_attempts; ++a) {
    const QpProblem qp = build_qp(state, kin, contacts, ref, t,
                                  ladder[a].w_scale, ladder[a].kp_scale,
                                  &tasks);
    sol = solver_.solve(qp);
    if (sol.status == QpStatus::kOptimal) {
      solved = true;
      out.fallback_level = a;
      break;
    }
  }

  VecX x;
  if (solved) {
    x = sol.x;
    x_prev_ = x;
  } else {
    // Hold the last allocation; the simulator decides when persistent
    // failure becomes a run abort.
    x = x_prev_;
    out.failed = true;
    out.fallback_level = n_attempts;
  }
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.objective = sol.objective;
  out.y = tasks.y;
  out.yd = tasks.yd;
  out.v = tasks.v;

  out.u = x.head<kNumJoints>();
  out.F_world = x.tail<kNumContactRows>();
  const Mat3 rs = surface_pose(surface_, t).rotation;
  for (int i = 0; i < 3; ++i) {
    out.F_surface.segment<3>(3 * i) =
        rs.transpose() * out.F_world.segment<3>(3 * i);
  }

  const double c = gains_.mu / std::sqrt(2.0);
  out.margin_friction = kInf;
  out.margin_normal = kInf;
  for (int i = 0; i < 3; ++i) {
    const Vec3 f = out.F_surface.segment<3>(3 * i);
    out.margin_friction = std::min({out.margin_friction,
                                    c * f.z() - std::abs(f.x()),
                                    c * f.z() - std::abs(f.y())});
    out.margin_normal = std::min(out.margin_normal, f.z());
  }
  const Vec12 limits = robot_.torque_limit_vector();
  out.margin_torque = (limits - out.u.cwiseAbs()).minCoeff();

  out.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return out;
}

}  // namespace drs
