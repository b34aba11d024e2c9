#include "drs/robot.hpp"

#include "drs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drs {

Vec12 RobotParams::torque_limit_vector() const {
  Vec12 lim;
  for (int l = 0; l < kNumLegs; ++l) {
    lim.segment<3>(3 * l) = torque_limits;
  }
  return lim;
}

void RobotParams::validate() const {
  if (total_mass <= 0.0 || leg_mass <= 0.0 || body_mass() <= 0.0) {
    throw std::invalid_argument("robot masses must be positive");
  }
  if (upper_leg_length <= 0.0 || lower_leg_length <= 0.0 ||
      body_dims.minCoeff() <= 0.0 || torso_thickness <= 0.0) {
    throw std::invalid_argument("robot lengths must be positive");
  }
  if (torque_limits.minCoeff() <= 0.0) {
    throw std::invalid_argument("torque limits must be positive");
  }
}

ContactSet ContactSet::with_swing(FootId swing) {
  ContactSet c;
  c.swing = swing;
  int k = 0;
  for (FootId f : kAllFeet) {
    if (f != swing) c.stance[k++] = f;
  }
  return c;
}

bool ContactSet::is_stance(FootId f) const { return f != swing; }

int ContactSet::stance_index(FootId f) const {
  for (int i = 0; i < 3; ++i) {
    if (stance[i] == f) return i;
  }
  return -1;
}

KinematicsCache compute_kinematics(const RobotParams& params,
                                   const RobotState& state) {
  KinematicsCache kin;
  kin.base_pos = state.base_pos();
  kin.base_vel = state.base_vel();
  const Vec3 rpy = state.base_rpy();
  const Vec3 rpyd = state.base_rpy_dot();
  kin.base_rot = euler_zyx_to_rot(rpy);
  kin.euler_map = euler_rate_map(rpy);
  kin.euler_map_dot = euler_rate_map_dot(rpy, rpyd);
  kin.base_omega = kin.euler_map * rpyd;
  kin.base_alpha_bias = kin.euler_map_dot * rpyd;

  const double l1 = params.upper_leg_length;
  const double l2 = params.lower_leg_length;

  for (int l = 0; l < kNumLegs; ++l) {
    auto& leg = kin.leg[l];
    const int j = 6 + kJointsPerLeg * l;
    const double q1 = state.q[j], q2 = state.q[j + 1], q3 = state.q[j + 2];
    const double qd1 = state.qd[j], qd2 = state.qd[j + 1], qd3 = state.qd[j + 2];

    leg.hip_origin = kin.base_pos + kin.base_rot * params.hip_offsets[l];
    leg.axis[0] = kin.base_rot.col(0);  // hip roll about the body x axis
    const Mat3 r1 = kin.base_rot * rot_x(q1);
    leg.axis[1] = r1.col(1);            // hip pitch about the rolled y axis
    leg.r2 = r1 * rot_y(q2);
    leg.axis[2] = leg.r2.col(1);        // knee pitch, parallel to hip pitch
    leg.r3 = leg.r2 * rot_y(q3);

    const Vec3 w1 = kin.base_omega + leg.axis[0] * qd1;
    leg.omega2 = w1 + leg.axis[1] * qd2;
    leg.omega3 = leg.omega2 + leg.axis[2] * qd3;

    const Vec3 al1 = kin.base_alpha_bias + kin.base_omega.cross(leg.axis[0]) * qd1;
    leg.alpha2_bias = al1 + w1.cross(leg.axis[1]) * qd2;
    leg.alpha3_bias = leg.alpha2_bias + leg.omega2.cross(leg.axis[2]) * qd3;

    const Vec3 r_hip = leg.hip_origin - kin.base_pos;
    leg.hip_vel = kin.base_vel + kin.base_omega.cross(r_hip);
    leg.hip_acc_bias = kin.base_alpha_bias.cross(r_hip) +
                       kin.base_omega.cross(kin.base_omega.cross(r_hip));

    auto propagate = [](const Vec3& origin_pos, const Vec3& origin_vel,
                        const Vec3& origin_acc, const Vec3& w, const Vec3& al,
                        const Vec3& offset, Vec3& pos, Vec3& vel, Vec3& acc) {
      pos = origin_pos + offset;
      vel = origin_vel + w.cross(offset);
      acc = origin_acc + al.cross(offset) + w.cross(w.cross(offset));
    };

    const Vec3 down_upper = leg.r2 * Vec3(0, 0, -l1);
    propagate(leg.hip_origin, leg.hip_vel, leg.hip_acc_bias, leg.omega2,
              leg.alpha2_bias, down_upper, leg.knee_origin, leg.knee_vel,
              leg.knee_acc_bias);
    propagate(leg.hip_origin, leg.hip_vel, leg.hip_acc_bias, leg.omega2,
              leg.alpha2_bias, 0.5 * down_upper, leg.upper_com, leg.upper_com_vel,
              leg.upper_com_acc_bias);

    const Vec3 down_lower = leg.r3 * Vec3(0, 0, -l2);
    propagate(leg.knee_origin, leg.knee_vel, leg.knee_acc_bias, leg.omega3,
              leg.alpha3_bias, down_lower, leg.foot, leg.foot_vel,
              leg.foot_acc_bias);
    propagate(leg.knee_origin, leg.knee_vel, leg.knee_acc_bias, leg.omega3,
              leg.alpha3_bias, 0.5 * down_lower, leg.lower_com, leg.lower_com_vel,
              leg.lower_com_acc_bias);
  }
  return kin;
}

namespace {

// Translational and angular Jacobian of a point attached to the given leg
// after `depth` joints (0 = base body, 2 = upper link, 3 = lower link).
void point_jacobians(const KinematicsCache& kin, int leg_index, int depth,
                     const Vec3& p, Mat3x18& jv, Mat3x18* jw) {
  jv.setZero();
  if (jw) jw->setZero();
  jv.block<3, 3>(0, 0).setIdentity();
  jv.block<3, 3>(0, 3) = -skew(p - kin.base_pos) * kin.euler_map;
  if (jw) jw->block<3, 3>(0, 3) = kin.euler_map;
  if (depth == 0) return;

  const auto& leg = kin.leg[leg_index];
  const int j = 6 + kJointsPerLeg * leg_index;
  const Vec3 origins[3] = {leg.hip_origin, leg.hip_origin, leg.knee_origin};
  for (int k = 0; k < depth; ++k) {
    jv.col(j + k) = leg.axis[k].cross(p - origins[k]);
    if (jw) jw->col(j + k) = leg.axis[k];
  }
}

Mat3 box_inertia(double m, const Vec3& dims) {
  const double lx = dims.x() * dims.x();
  const double ly = dims.y() * dims.y();
  const double lz = dims.z() * dims.z();
  return (m / 12.0) * Vec3(ly + lz, lx + lz, lx + ly).asDiagonal();
}

Mat3 link_inertia(const RobotParams& params, double m, double length) {
  if (params.link_inertia == LinkInertiaModel::kPointMassAtMidLink) {
    return Mat3::Zero();
  }
  // Slender uniform rod along the local z axis.
  const double i = m * length * length / 12.0;
  return Vec3(i, i, 0.0).asDiagonal();
}

struct BodyRef {
  double mass;
  Mat3 inertia_local;
  Mat3 rot;
  Vec3 com, com_acc_bias, omega, alpha_bias;
  int leg_index;  // -1 for the base
  int depth;
};

template <typename Fn>
void for_each_body(const RobotParams& params, const KinematicsCache& kin, Fn&& fn) {
  BodyRef base;
  base.mass = params.body_mass();
  base.inertia_local = box_inertia(
      base.mass,
      Vec3(params.body_dims.x(), params.body_dims.y(), params.torso_thickness));
  base.rot = kin.base_rot;
  base.com = kin.base_pos;
  base.com_acc_bias = Vec3::Zero();
  base.omega = kin.base_omega;
  base.alpha_bias = kin.base_alpha_bias;
  base.leg_index = -1;
  base.depth = 0;
  fn(base);

  const double mu = params.upper_mass();
  const double ml = params.lower_mass();
  for (int l = 0; l < kNumLegs; ++l) {
    const auto& leg = kin.leg[l];
    BodyRef upper;
    upper.mass = mu;
    upper.inertia_local = link_inertia(params, mu, params.upper_leg_length);
    upper.rot = leg.r2;
    upper.com = leg.upper_com;
    upper.com_acc_bias = leg.upper_com_acc_bias;
    upper.omega = leg.omega2;
    upper.alpha_bias = leg.alpha2_bias;
    upper.leg_index = l;
    upper.depth = 2;
    fn(upper);

    BodyRef lower;
    lower.mass = ml;
    lower.inertia_local = link_inertia(params, ml, params.lower_leg_length);
    lower.rot = leg.r3;
    lower.com = leg.lower_com;
    lower.com_acc_bias = leg.lower_com_acc_bias;
    lower.omega = leg.omega3;
    lower.alpha_bias = leg.alpha3_bias;
    lower.leg_index = l;
    lower.depth = 3;
    fn(lower);
  }
}

}  // namespace

DynamicsTerms dynamics_terms(const RobotParams& params, const RobotState& state,
                             const KinematicsCache& kin) {
  (void)state;  // the cache already carries everything state-derived
  DynamicsTerms out;
  const Vec3 g_vec(0.0, 0.0, -params.gravity);
  Mat3x18 jv, jw;
  for_each_body(params, kin, [&](const BodyRef& b) {
    point_jacobians(kin, b.leg_index, b.depth, b.com, jv, &jw);
    const Mat3 iw = b.rot * b.inertia_local * b.rot.transpose();
    out.mass_matrix.noalias() += b.mass * jv.transpose() * jv;
    out.mass_matrix.noalias() += jw.transpose() * iw * jw;
    // Newton-Euler force and moment at the body expressed through the
    // Jacobians; accelerations here are the zero-qdd bias terms.
    const Vec3 f = b.mass * (b.com_acc_bias - g_vec);
    const Vec3 tau = iw * b.alpha_bias + b.omega.cross(iw * b.omega);
    out.bias.noalias() += jv.transpose() * f;
    out.bias.noalias() += jw.transpose() * tau;
  });
  return out;
}

DynamicsTerms dynamics_terms(const RobotParams& params, const RobotState& state) {
  return dynamics_terms(params, state, compute_kinematics(params, state));
}

Mat18x12 input_matrix() {
  Mat18x12 b = Mat18x12::Zero();
  b.block<kNumJoints, kNumJoints>(6, 0).setIdentity();
  return b;
}

Vec3 foot_position(const RobotParams& params, const RobotState& state, FootId foot) {
  return compute_kinematics(params, state).leg[static_cast<int>(foot)].foot;
}

Vec3 hip_position(const RobotParams& params, const RobotState& state, FootId foot) {
  return compute_kinematics(params, state).leg[static_cast<int>(foot)].hip_origin;
}

void foot_jacobian(const RobotParams& params, const RobotState& state,
                   const KinematicsCache& kin, FootId foot, Mat3x18& jac,
                   Vec3& jdot_qd) {
  (void)params;
  (void)state;
  const int l = static_cast<int>(foot);
  point_jacobians(kin, l, 3, kin.leg[l].foot, jac, nullptr);
  jdot_qd = kin.leg[l].foot_acc_bias;
}

void contact_jacobian(const RobotParams& params, const RobotState& state,
                      const KinematicsCache& kin, const ContactSet& contacts,
                      Mat9x18& jac, Vec9& jdot_qd) {
  Mat3x18 jf;
  Vec3 bias;
  for (int i = 0; i < 3; ++i) {
    foot_jacobian(params, state, kin, contacts.stance[i], jf, bias);
    jac.block<3, kNumQ>(3 * i, 0) = jf;
    jdot_qd.segment<3>(3 * i) = bias;
  }
}

void output_jacobian(const RobotParams& params, const RobotState& state,
                     const KinematicsCache& kin, FootId swing, Mat9x18& jac,
                     Vec9& jdot_qd) {
  jac.setZero();
  jdot_qd.setZero();
  jac.block<6, 6>(0, 0).setIdentity();
  Mat3x18 jf;
  Vec3 bias;
  foot_jacobian(params, state, kin, swing, jf, bias);
  jac.block<3, kNumQ>(6, 0) = jf;
  jdot_qd.segment<3>(6) = bias;
}

void com_state(const RobotParams& params, const RobotState& state,
               const KinematicsCache& kin, Vec3& com, Vec3& com_vel) {
  (void)state;
  com.setZero();
  com_vel.setZero();
  double mass = 0.0;
  for_each_body(params, kin, [&](const BodyRef& b) {
    com += b.mass * b.com;
    mass += b.mass;
  });
  com /= mass;
  // Velocities reuse the same weighting with the cached body point speeds.
  com_vel = params.body_mass() * kin.base_vel;
  for (int l = 0; l < kNumLegs; ++l) {
    com_vel += params.upper_mass() * kin.leg[l].upper_com_vel;
    com_vel += params.lower_mass() * kin.leg[l].lower_com_vel;
  }
  com_vel /= mass;
}

double total_energy(const RobotParams& params, const RobotState& state) {
  const KinematicsCache kin = compute_kinematics(params, state);
  double e = 0.0;
  auto body_energy = [&](double m, const Mat3& i_local, const Mat3& rot,
                         const Vec3& v, const Vec3& w, const Vec3& com) {
    const Mat3 iw = rot * i_local * rot.transpose();
    return 0.5 * m * v.squaredNorm() + 0.5 * w.dot(iw * w) +
           m * params.gravity * com.z();
  };
  e += body_energy(params.body_mass(),
                   box_inertia(params.body_mass(),
                               Vec3(params.body_dims.x(), params.body_dims.y(),
                                    params.torso_thickness)),
                   kin.base_rot, kin.base_vel, kin.base_omega, kin.base_pos);
  const double mu = params.upper_mass();
  const double ml = params.lower_mass();
  for (int l = 0; l < kNumLegs; ++l) {
    const auto& leg = kin.leg[l];
    e += body_energy(mu, link_inertia(params, mu, params.upper_leg_length), leg.r2,
                     leg.upper_com_vel, leg.omega2, leg.upper_com);
    e += body_energy(ml, link_inertia(params, ml, params.lower_leg_length), leg.r3,
                     leg.lower_com_vel, leg.omega3, leg.lower_com);
  }
  return e;
}

}  // namespace drs
