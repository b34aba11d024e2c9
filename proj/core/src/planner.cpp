#include "drs/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "drs/geometry.hpp"

namespace drs {

namespace {

// Quintic with value/velocity/acceleration boundary conditions on both ends,
// expressed about s = 0; the end conditions sit at s = d.
std::array<double, 6> fit_quintic(double p0, double v0, double a0, double p1,
                                  double v1, double a1, double d) {
  std::array<double, 6> c{};
  c[0] = p0;
  c[1] = v0;
  c[2] = 0.5 * a0;
  const double d2 = d * d;
  const double d3 = d2 * d;
  const double big_a = p1 - (c[0] + c[1] * d + c[2] * d2);
  const double big_b = v1 - (c[1] + 2.0 * c[2] * d);
  const double big_c = a1 - 2.0 * c[2];
  c[3] = (10.0 * big_a - 4.0 * big_b * d + 0.5 * big_c * d2) / d3;
  c[4] = (-15.0 * big_a + 7.0 * big_b * d - big_c * d2) / (d3 * d);
  c[5] = (6.0 * big_a - 3.0 * big_b * d + 0.5 * big_c * d2) / (d3 * d2);
  return c;
}

void eval_quintic(const std::array<double, 6>& c, double s, double& p,
                  double& v, double& a) {
  p = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
  v = c[1] + s * (2.0 * c[2] +
                  s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
  a = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
}

// Smoothstep quintic (zero velocity and acceleration at both ends).
void smoothstep(double u, double& s, double& s1, double& s2) {
  u = std::clamp(u, 0.0, 1.0);
  const double u2 = u * u;
  const double u3 = u2 * u;
  s = u3 * (10.0 - 15.0 * u + 6.0 * u2);
  s1 = 30.0 * u2 * (1.0 - 2.0 * u + u2);
  s2 = 60.0 * u * (1.0 - 3.0 * u + 2.0 * u2);
}

// Two-segment vertical arch z_lift -> z_peak -> z_end as a function of the
// normalized phase, with zero slope and curvature at all three knots.
void arch(double u, double z_lift, double z_peak, double z_end, double& z,
          double& dz_du, double& ddz_du) {
  double s, s1, s2;
  if (u <= 0.5) {
    smoothstep(u / 0.5, s, s1, s2);
    const double span = z_peak - z_lift;
    z = z_lift + span * s;
    dz_du = span * s1 / 0.5;
    ddz_du = span * s2 / 0.25;
  } else {
    smoothstep((u - 0.5) / 0.5, s, s1, s2);
    const double span = z_end - z_peak;
    z = z_peak + span * s;
    dz_du = span * s1 / 0.5;
    ddz_du = span * s2 / 0.25;
  }
}

void material_to_world(const SurfacePose& pose, const Vec3& m, const Vec3& md,
                       const Vec3& mdd, Vec3& p, Vec3& v, Vec3& a) {
  const Vec3 r = pose.rotation * (m + pose.material_drift - pose.pivot);
  const Vec3 rel = pose.rotation * (pose.belt + md);
  p = r + pose.pivot + pose.translation;
  v = pose.omega.cross(r) + rel + pose.translation_dot;
  a = pose.alpha.cross(r) + pose.omega.cross(pose.omega.cross(r)) +
      2.0 * pose.omega.cross(rel) + pose.rotation * mdd +
      pose.translation_ddot;
}

Vec3 material_velocity(const SurfacePose& pose, const Vec3& m,
                       const Vec3& v_world) {
  const Vec3 r = pose.rotation * (m + pose.material_drift - pose.pivot);
  return pose.rotation.transpose() *
             (v_world - pose.omega.cross(r) - pose.translation_dot) -
         pose.belt;
}

double side_sign(FootId f) { return is_right_side(f) ? -1.0 : 1.0; }

}  // namespace

void GaitParams::validate() const {
  if (cycle_time <= 0.0) throw std::invalid_argument("gait cycle must be positive");
  if (swing_height <= 0.0)
    throw std::invalid_argument("swing height must be positive");
  if (k_step <= 0.0) throw std::invalid_argument("step gain must be positive");
  if (base_height <= 0.0)
    throw std::invalid_argument("base height must be positive");
}

void PlannerConfig::validate() const {
  if (sway_amplitude < 0.0 || blend_pos < 0.0 || blend_pos > 1.0 ||
      blend_vel < 0.0 || blend_vel > 1.0 || probe_speed < 0.0 ||
      probe_ramp <= 0.0 || commit_fraction <= 0.0 || commit_fraction > 1.0 ||
      min_g_eff <= 0.0) {
    throw std::invalid_argument("planner config out of range");
  }
}

StepOffset step_offset(const LipmState& lipm, const GaitParams& gait) {
  StepOffset out;
  const double g_eff = lipm.g_eff();
  if (g_eff <= 0.0) return out;
  const double tc = std::sqrt(lipm.z0 / g_eff);
  out.offset = gait.k_step * tc * (lipm.rd_sc.head<2>() - gait.v_d);
  out.ok = true;
  return out;
}

FootstepTarget footstep_target(const LipmState& lipm, const GaitParams& gait,
                               const Vec2& hip, double reach_radius) {
  FootstepTarget out;
  out.hip_ref = hip;
  const StepOffset off = step_offset(lipm, gait);
  out.capture_ok = off.ok;
  out.position = hip + 0.5 * gait.cycle_time * gait.v_d + off.offset;
  if (reach_radius > 0.0) {
    const Vec2 rel = out.position - hip;
    const double r = rel.norm();
    if (r > reach_radius) {
      out.position = hip + rel * (reach_radius / r);
      out.reachable = false;
    }
  }
  return out;
}

double horizontal_reach(const RobotParams& params, double depth) {
  const double full = 0.95 * (params.upper_leg_length + params.lower_leg_length);
  const double r2 = full * full - depth * depth;
  return r2 > 0.0 ? std::sqrt(r2) : 0.0;
}

SwingRef swing_trajectory(const Vec3& liftoff_pos, double t_liftoff,
                          const FootstepTarget& target, const GaitParams& gait,
                          const SurfaceMotion& surface, double t_phase) {
  SwingRef out;
  const double t_sw = gait.swing_duration();
  double tau = t_phase;
  if (tau < 0.0 || tau > t_sw) {
    out.clamped = true;
    tau = std::clamp(tau, 0.0, t_sw);
  }

  const Vec3 m0 = material_coords(surface, liftoff_pos, t_liftoff);
  const double t_td = t_liftoff + t_sw;
  const PlaneField pf =
      plane_field(surface, target.position.x(), target.position.y(), t_td);
  const Vec3 target_world(target.position.x(), target.position.y(),
                          pf.z + target.z);
  const Vec3 m1 = material_coords(surface, target_world, t_td);

  const double u = tau / t_sw;
  double s, s1, s2;
  smoothstep(u, s, s1, s2);
  Vec3 m, md, mdd;
  m.head<2>() = m0.head<2>() + (m1.head<2>() - m0.head<2>()) * s;
  md.head<2>() = (m1.head<2>() - m0.head<2>()) * (s1 / t_sw);
  mdd.head<2>() = (m1.head<2>() - m0.head<2>()) * (s2 / (t_sw * t_sw));

  const double z_peak =
      std::max(m0.z(), surface.pivot.z()) + gait.swing_height;
  double z, dz_du, ddz_du;
  arch(u, m0.z(), z_peak, m1.z(), z, dz_du, ddz_du);
  m.z() = z;
  md.z() = dz_du / t_sw;
  mdd.z() = ddz_du / (t_sw * t_sw);

  const SurfacePose pose = surface_pose(surface, t_liftoff + tau);
  material_to_world(pose, m, md, mdd, out.pos, out.vel, out.acc);
  return out;
}

WholeBodyRef whole_body_reference(const RobotParams& params,
                                  const Vec3& base_pos, const Vec3& base_rpy,
                                  const std::array<Vec3, kNumLegs>& feet) {
  WholeBodyRef out;
  const Mat3 rot = euler_zyx_to_rot(base_rpy);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 rel = world_to_hip(params, base_pos, rot,
                                  static_cast<FootId>(leg), feet[leg]);
    const LegIkResult ik = leg_ik(params, static_cast<FootId>(leg), rel);
    out.joint_angles.segment<3>(3 * leg) = ik.q;
    out.all_reachable = out.all_reachable && ik.reachable;
  }
  return out;
}

Planner::Planner(const RobotParams& robot, const GaitParams& gait,
                 const PlannerConfig& config, const SurfaceMotion& surface)
    : robot_(robot), gait_(gait), config_(config), surface_(surface) {
  gait_.validate();
  config_.validate();
}

double Planner::lateral_rate() const {
  return std::sqrt(robot_.gravity / gait_.base_height);
}

double Planner::arc_entry_speed() const {
  const double lam = lateral_rate();
  const double lt = lam * 0.5 * gait_.cycle_time;  // arc spans two phases
  return config_.sway_amplitude * lam * (std::cosh(lt) - 1.0) / std::sinh(lt);
}

double Planner::apex_fraction() const {
  const double lam = lateral_rate();
  return 1.0 - 1.0 / std::cosh(lam * 0.25 * gait_.cycle_time);
}

double Planner::zmp_lateral(const ContactSet& contacts,
                            const std::array<Vec3, kNumLegs>& feet) const {
  double mean_y = 0.0;
  for (FootId f : contacts.stance) mean_y += feet[static_cast<int>(f)].y();
  mean_y /= 3.0;
  const double half_width = std::abs(robot_.hip_offsets[0].y());
  const double side = side_sign(contacts.swing);
  // Removing one foot of a symmetric stance shifts the centroid by a third of
  // the track half width; adding it back recovers the body center line, and
  // the sway term leans away from the swing side.
  return mean_y + side * (half_width / 3.0) - side * config_.sway_amplitude;
}

double Planner::zmp_longitudinal(const ContactSet& contacts,
                                 const std::array<Vec3, kNumLegs>& feet) const {
  // The three stance feet alone swing their centroid a decimetre fore and
  // aft as the crawl alternates two-front with two-rear support, which is
  // far too rough for a pendulum pivot. The four-foot mean stays on the
  // body line because the swing foot crosses its own hip during the arc.
  (void)contacts;
  double mean_x = 0.0;
  for (const Vec3& f : feet) mean_x += f.x();
  return mean_x / static_cast<double>(kNumLegs);
}

void Planner::refit_horizontal(const Vec3& m, const Vec3& md, const Vec3& mdd,
                               const Vec2& target_m, double tau, double t_end) {
  const double d = t_end - tau;
  if (d < 0.02) return;
  coef_x_ = fit_quintic(m.x(), md.x(), mdd.x(), target_m.x(), 0.0, 0.0, d);
  coef_y_ = fit_quintic(m.y(), md.y(), mdd.y(), target_m.y(), 0.0, 0.0, d);
  fit_start_ = tau;
  fit_end_ = t_end;
}

void Planner::reset(const RobotState& state, const KinematicsCache& kin,
                    const ContactSet& contacts, double t) {
  x_ref_ = state.base_pos().x();
  xd_ref_ = state.base_vel().x();
  y_ref_ = state.base_pos().y();
  yd_ref_ = state.base_vel().y();
  on_transition(state, kin, contacts, t);
}

void Planner::on_transition(const RobotState& state, const KinematicsCache& kin,
                            const ContactSet& contacts, double t) {
  (void)state;
  // Phases live on a fixed grid so an early touchdown shortens the previous
  // phase instead of shifting every later one against the surface cycle. The
  // freed foot holds its liftoff point until its scheduled slot begins.
  const double t_sw = gait_.swing_duration();
  phase_start_ = std::round(t / t_sw) * t_sw;
  const SurfacePose pose = surface_pose(surface_, t);
  const auto& leg = kin.leg[static_cast<int>(contacts.swing)];
  const Vec3 m0 = pose.rotation.transpose() *
                      (leg.foot - pose.pivot - pose.translation) +
                  pose.pivot - pose.material_drift;
  const Vec3 md0 = material_velocity(pose, m0, leg.foot_vel);
  z_lift_ = m0.z();
  coef_x_ = fit_quintic(m0.x(), md0.x(), 0.0, m0.x(), 0.0, 0.0, 1.0);
  coef_y_ = fit_quintic(m0.y(), md0.y(), 0.0, m0.y(), 0.0, 0.0, 1.0);
  fit_start_ = 0.0;
  fit_end_ = 0.0;  // forces a refit on the next plan call
  committed_ = false;
  target_material_ = m0.head<2>();
  target_ = FootstepTarget{};
  target_.position = leg.foot.head<2>();
  target_.hip_ref = leg.hip_origin.head<2>();
}

ReferenceSnapshot Planner::plan(const RobotState& state,
                                const KinematicsCache& kin,
                                const ContactSet& contacts, double t,
                                double dt) {
  ReferenceSnapshot out;
  const SurfacePose pose = surface_pose(surface_, t);
  const double t_sw = gait_.swing_duration();
  const double tau = std::max(0.0, t - phase_start_);

  std::array<Vec3, kNumLegs> feet;
  for (int f = 0; f < kNumLegs; ++f) feet[f] = kin.leg[f].foot;

  // Lateral reference: exact pendulum flow about the per-phase ZMP target,
  // then a small blend toward the measurement so the reference cannot run
  // away from the robot.
  const double lam = lateral_rate();
  const double zmp_y = zmp_lateral(contacts, feet);
  double y_new = y_ref_;
  double yd_new = yd_ref_;
  if (dt > 0.0) {
    const double ch = std::cosh(lam * dt);
    const double sh = std::sinh(lam * dt);
    const double e = y_ref_ - zmp_y;
    y_new = zmp_y + e * ch + yd_ref_ / lam * sh;
    yd_new = e * lam * sh + yd_ref_ * ch;
  }
  const double hdd_y = lam * lam * (y_new - zmp_y);
  y_ref_ = y_new + config_.blend_pos * (state.base_pos().y() - y_new);
  yd_ref_ = yd_new + config_.blend_vel * (state.base_vel().y() - yd_new);

  // Longitudinal reference: the same pendulum flow about the stance centroid.
  // Keeping the commanded pressure point on the centroid means deck tilt is
  // absorbed by the body accelerating fore-aft instead of by pressure
  // excursions toward a support edge; the footstep law recenters the feet
  // under the resulting drift.
  const double zmp_x = zmp_longitudinal(contacts, feet);
  double x_new = x_ref_;
  double xd_new = xd_ref_;
  if (dt > 0.0) {
    const double ch = std::cosh(lam * dt);
    const double sh = std::sinh(lam * dt);
    const double e = x_ref_ - zmp_x;
    x_new = zmp_x + e * ch + xd_ref_ / lam * sh;
    xd_new = e * lam * sh + xd_ref_ * ch;
  }
  const double hdd_x = lam * lam * (x_new - zmp_x);
  x_ref_ = x_new + config_.blend_pos * (state.base_pos().x() - x_new);
  xd_ref_ = xd_new + config_.blend_vel * (state.base_vel().x() - xd_new);
  const double x_d = x_ref_;

  // Height over the contact plane beneath the base reference point.
  const PlaneField pf = plane_field(surface_, x_d, y_ref_, t);
  const double z_d = pf.z + gait_.base_height;
  const double zd_d = pf.zt + pf.zx * xd_ref_ + pf.zy * yd_ref_;
  const double zdd_d = pf.ztt + 2.0 * pf.ztx * xd_ref_ +
                       2.0 * pf.zty * yd_ref_ +
                       pf.zxx * xd_ref_ * xd_ref_ +
                       2.0 * pf.zxy * xd_ref_ * yd_ref_ +
                       pf.zyy * yd_ref_ * yd_ref_ +
                       pf.zx * hdd_x + pf.zy * hdd_y;

  // Pendulum state about the stance centroid material point.
  Vec3 centroid = Vec3::Zero();
  for (FootId f : contacts.stance) centroid += feet[static_cast<int>(f)];
  centroid /= 3.0;
  const Vec3 m_support = material_coords(surface_, centroid, t);
  const LipmInputs li = lipm_inputs(surface_, m_support, t, robot_.gravity);
  out.accel_ratio = li.accel_ratio;

  Vec3 com, com_vel;
  com_state(robot_, state, kin, com, com_vel);
  LipmState lipm;
  lipm.r_sc = com - li.point.pos;
  lipm.rd_sc = com_vel - li.point.vel;
  lipm.z0 = gait_.base_height;
  lipm.support_vel = li.point.vel;
  lipm.support_acc = li.point.acc;
  lipm.mass = robot_.total_mass;
  lipm.gravity = robot_.gravity;
  out.capture = capture_point(lipm);

  // Footstep target: Raibert term plus capture feedback on the velocity
  // error. The lateral desired velocity is the sway reference rate so the
  // placement corrects deviations from the plan instead of the plan itself.
  const auto& swing_leg = kin.leg[static_cast<int>(contacts.swing)];
  if (!committed_) {
    const double g_eff = std::max(lipm.g_eff(), config_.min_g_eff);
    const double tc = std::sqrt(gait_.base_height / g_eff);
    const Vec2 hip = swing_leg.hip_origin.head<2>();
    const Vec2 v_d_eff(xd_ref_ - li.point.vel.x(),
                       yd_ref_ - li.point.vel.y());
    FootstepTarget tgt;
    tgt.hip_ref = hip;
    tgt.capture_ok = out.capture.exists;
    if (out.capture.exists) {
      const Vec2 offset =
          gait_.k_step * tc * (lipm.rd_sc.head<2>() - v_d_eff);
      tgt.position = hip + 0.5 * gait_.cycle_time * gait_.v_d + offset;
      const double reach = horizontal_reach(robot_, gait_.base_height);
      const Vec2 rel = tgt.position - hip;
      if (rel.norm() > reach) {
        tgt.position = hip + rel * (reach / rel.norm());
        tgt.reachable = false;
      }
      target_ = tgt;
      const double t_td = phase_start_ + t_sw;
      const PlaneField pf_td = plane_field(surface_, target_.position.x(),
                                           target_.position.y(), t_td);
      const Vec3 tgt_world(target_.position.x(), target_.position.y(),
                           pf_td.z);
      target_material_ =
          material_coords(surface_, tgt_world, t_td).head<2>();
    } else {
      target_.capture_ok = false;
    }

    double px, vx, ax, py, vy, ay;
    if (tau >= fit_end_) {
      eval_quintic(coef_x_, std::max(0.0, fit_end_ - fit_start_), px, vx, ax);
      eval_quintic(coef_y_, std::max(0.0, fit_end_ - fit_start_), py, vy, ay);
      vx = ax = vy = ay = 0.0;
    } else {
      eval_quintic(coef_x_, tau - fit_start_, px, vx, ax);
      eval_quintic(coef_y_, tau - fit_start_, py, vy, ay);
    }
    refit_horizontal(Vec3(px, py, 0.0), Vec3(vx, vy, 0.0), Vec3(ax, ay, 0.0),
                     target_material_, tau, t_sw);
    if (tau >= config_.commit_fraction * t_sw) committed_ = true;
  }

  // Evaluate the committed or freshly fitted swing polynomial.
  Vec3 m, md, mdd;
  {
    double p, v, a;
    const double s = std::clamp(tau, fit_start_, fit_end_) - fit_start_;
    eval_quintic(coef_x_, s, p, v, a);
    if (tau >= fit_end_) v = a = 0.0;
    m.x() = p;
    md.x() = v;
    mdd.x() = a;
    eval_quintic(coef_y_, s, p, v, a);
    if (tau >= fit_end_) v = a = 0.0;
    m.y() = p;
    md.y() = v;
    mdd.y() = a;
  }
  const double z_end = surface_.pivot.z() - config_.aim_below;
  if (tau <= t_sw) {
    const double z_peak =
        std::max(z_lift_, surface_.pivot.z()) + gait_.swing_height;
    double z, dz_du, ddz_du;
    arch(tau / t_sw, z_lift_, z_peak, z_end, z, dz_du, ddz_du);
    m.z() = z;
    md.z() = dz_du / t_sw;
    mdd.z() = ddz_du / (t_sw * t_sw);
  } else {
    // Descending probe until the touchdown event fires.
    const double over = tau - t_sw;
    if (over < config_.probe_ramp) {
      m.z() = z_end -
              config_.probe_speed * over * over / (2.0 * config_.probe_ramp);
      md.z() = -config_.probe_speed * over / config_.probe_ramp;
      mdd.z() = -config_.probe_speed / config_.probe_ramp;
    } else {
      m.z() = z_end - config_.probe_speed * (over - 0.5 * config_.probe_ramp);
      md.z() = -config_.probe_speed;
      mdd.z() = 0.0;
    }
  }

  Vec3 swing_pos, swing_vel, swing_acc;
  material_to_world(pose, m, md, mdd, swing_pos, swing_vel, swing_acc);

  out.h.segment<3>(0) = Vec3(x_d, y_ref_, z_d);
  out.h.segment<3>(3).setZero();
  out.h.segment<3>(6) = swing_pos;
  out.hd.segment<3>(0) = Vec3(xd_ref_, yd_ref_, zd_d);
  out.hd.segment<3>(3).setZero();
  out.hd.segment<3>(6) = swing_vel;
  out.hdd.segment<3>(0) = Vec3(hdd_x, hdd_y, zdd_d);
  out.hdd.segment<3>(3).setZero();
  out.hdd.segment<3>(6) = swing_acc;
  out.target = target_;

  std::array<Vec3, kNumLegs> ik_feet = feet;
  ik_feet[static_cast<int>(contacts.swing)] = swing_pos;
  const WholeBodyRef wb = whole_body_reference(
      robot_, out.h.segment<3>(0), out.h.segment<3>(3), ik_feet);
  out.joint_angles = wb.joint_angles;
  out.ik_ok = wb.all_reachable;
  return out;
}

}  // namespace drs
