#include "drs/sim.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "drs/geometry.hpp"

namespace drs {

void SimConfig::validate() const {
  if (dt <= 0.0 || control_divisor < 1 || duration <= 0.0 ||
      bisection_iters < 1 || event_tolerance <= 0.0 || failure_ticks < 1 ||
      pin_alpha < 0.0 || pin_beta < 0.0 || arm_clearance <= 0.0 ||
      arm_fraction <= 0.0 || cone_tolerance < 0.0) {
    throw std::invalid_argument("simulation config out of range");
  }
}

Vec3 Perturbation::force(double t) const {
  if (amplitude == 0.0 || t < t_start || t > t_end) return Vec3::Zero();
  return amplitude * std::sin(2.0 * std::numbers::pi * frequency * t) * axis;
}

const char* outcome_name(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::kCompleted:
      return "completed";
    case RunOutcome::kControllerFailure:
      return "controller_failure";
    case RunOutcome::kAborted:
      return "aborted";
  }
  return "unknown";
}

void constrained_dynamics(const RobotParams& robot, const RobotState& state,
                          const KinematicsCache& kin, const ContactSet& contacts,
                          const SurfaceMotion& surface, const PinAnchors& anchors,
                          const Vec12& u, const Vec3& ext_force, double alpha,
                          double beta, double t, VecQ& qdd, Vec9& lambda) {
  const DynamicsTerms dyn = dynamics_terms(robot, state, kin);
  Mat9x18 jac;
  Vec9 jdot_qd;
  contact_jacobian(robot, state, kin, contacts, jac, jdot_qd);

  // Anchor acceleration with proportional corrections that pull velocity and
  // position mismatch back to the pinned surface points.
  Vec9 c;
  for (int i = 0; i < 3; ++i) {
    const auto& leg = kin.leg[static_cast<int>(contacts.stance[i])];
    const SurfacePointState ps = point_state(surface, anchors[i], t);
    c.segment<3>(3 * i) = ps.acc - 2.0 * alpha * (leg.foot_vel - ps.vel) -
                          beta * (leg.foot - ps.pos);
  }
  c -= jdot_qd;

  VecQ tau_free = input_matrix() * u - dyn.bias;
  tau_free.segment<3>(0) += ext_force;

  const Eigen::LLT<MatQ> llt(dyn.mass_matrix);
  const VecQ qdd_free = llt.solve(tau_free);
  const Eigen::Matrix<double, kNumQ, kNumContactRows> minv_jt =
      llt.solve(jac.transpose());
  const Eigen::Matrix<double, kNumContactRows, kNumContactRows> schur =
      jac * minv_jt;
  lambda = schur.ldlt().solve(c - jac * qdd_free);
  qdd = qdd_free + minv_jt * lambda;
}

Simulation::Simulation(const RobotParams& robot, const GaitParams& gait,
                       const PlannerConfig& planner_config,
                       const ControllerGains& gains,
                       const SurfaceMotion& surface, const SimConfig& config,
                       ControlMode mode)
    : robot_(robot),
      gait_(gait),
      planner_config_(planner_config),
      gains_(gains),
      surface_(surface),
      config_(config),
      mode_(mode) {
  robot_.validate();
  gait_.validate();
  planner_config_.validate();
  gains_.validate();
  config_.validate();
}

Vec3 Simulation::external_force(double t) const {
  Vec3 f = Vec3::Zero();
  for (const Perturbation& p : perturbations_) f += p.force(t);
  return f;
}

RobotState Simulation::initial_state() const {
  // The first swing foot leads with its lateral arc already at the apex, so
  // the body starts on the limit cycle instead of kicking into it.
  const double lam = std::sqrt(robot_.gravity / gait_.base_height);
  const double apex = 1.0 - 1.0 / std::cosh(lam * 0.25 * gait_.cycle_time);
  const double y0 = -planner_config_.sway_amplitude * apex;

  // Feet start on the steady walking pattern rather than square under the
  // hips: each stance foot sits where it would be had it landed one Raibert
  // step ahead of the hip and ridden the belt since. A square stance would
  // put the support diagonal through the body centre at the first phase end.
  std::array<Vec3, kNumLegs> feet;
  for (int f = 0; f < kNumLegs; ++f) {
    const Vec3& hip = robot_.hip_offsets[static_cast<size_t>(f)];
    int order_index = 0;
    for (int k = 0; k < kNumLegs; ++k) {
      if (kGaitOrder[static_cast<size_t>(k)] == static_cast<FootId>(f))
        order_index = k;
    }
    const double age =
        gait_.cycle_time - (order_index + 1) * gait_.swing_duration();
    const Vec2 offset = 0.5 * gait_.cycle_time * gait_.v_d +
                        age * surface_.belt_velocity.head<2>();
    const PlaneField pf =
        plane_field(surface_, hip.x() + offset.x(), hip.y() + offset.y(), 0.0);
    feet[f] = Vec3(hip.x() + offset.x(), hip.y() + offset.y(), pf.z);
  }
  const PlaneField pf0 = plane_field(surface_, 0.0, y0, 0.0);
  const Vec3 base_pos(0.0, y0, pf0.z + gait_.base_height);

  RobotState state;
  state.q.setZero();
  state.qd.setZero();
  state.q.segment<3>(0) = base_pos;
  const WholeBodyRef wb =
      whole_body_reference(robot_, base_pos, Vec3::Zero(), feet);
  state.q.segment<kNumJoints>(6) = wb.joint_angles;

  // Joint rates that carry each foot with its surface point while the base
  // starts at rest.
  const KinematicsCache kin = compute_kinematics(robot_, state);
  for (int f = 0; f < kNumLegs; ++f) {
    Mat3x18 jac;
    Vec3 jdot_qd;
    foot_jacobian(robot_, state, kin, static_cast<FootId>(f), jac, jdot_qd);
    const Vec3 m = material_coords(surface_, kin.leg[f].foot, 0.0);
    const Vec3 v = point_state(surface_, m, 0.0).vel;
    const Mat3 leg_jac = jac.block<3, 3>(0, 6 + 3 * f);
    state.qd.segment<3>(6 + 3 * f) = leg_jac.partialPivLu().solve(v);
  }
  return state;
}

void Simulation::derivative(const RobotState& state, const ContactSet& contacts,
                            const PinAnchors& anchors, const Vec12& u, double t,
                            VecQ& qdd, Vec9& lambda) const {
  const KinematicsCache kin = compute_kinematics(robot_, state);
  constrained_dynamics(robot_, state, kin, contacts, surface_, anchors, u,
                       external_force(t), config_.pin_alpha, config_.pin_beta,
                       t, qdd, lambda);
}

RobotState Simulation::rk4_step(const RobotState& state,
                                const ContactSet& contacts,
                                const PinAnchors& anchors, const Vec12& u,
                                double t, double h) const {
  Vec9 lambda;
  VecQ a1, a2, a3, a4;
  RobotState s2, s3, s4;

  derivative(state, contacts, anchors, u, t, a1, lambda);
  s2.q = state.q + 0.5 * h * state.qd;
  s2.qd = state.qd + 0.5 * h * a1;

  derivative(s2, contacts, anchors, u, t + 0.5 * h, a2, lambda);
  s3.q = state.q + 0.5 * h * s2.qd;
  s3.qd = state.qd + 0.5 * h * a2;

  derivative(s3, contacts, anchors, u, t + 0.5 * h, a3, lambda);
  s4.q = state.q + h * s3.qd;
  s4.qd = state.qd + h * a3;

  derivative(s4, contacts, anchors, u, t + h, a4, lambda);

  RobotState out;
  out.q = state.q + h / 6.0 * (state.qd + 2.0 * s2.qd + 2.0 * s3.qd + s4.qd);
  out.qd = state.qd + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  return out;
}

double Simulation::swing_clearance(const RobotState& state, FootId foot,
                                   double t) const {
  return plane_clearance(surface_, foot_position(robot_, state, foot), t);
}

double Simulation::swing_clearance_rate(const RobotState& state, FootId foot,
                                        double t) const {
  const KinematicsCache kin = compute_kinematics(robot_, state);
  const auto& leg = kin.leg[static_cast<int>(foot)];
  return plane_clearance_rate(surface_, leg.foot, leg.foot_vel, t);
}

RunResult Simulation::run() {
  const auto wall_start = std::chrono::steady_clock::now();

  RunResult result;
  RobotState state = initial_state();
  ContactSet contacts = ContactSet::with_swing(FootId::FL);

  std::array<Vec3, kNumLegs> anchor_by_foot;
  for (int f = 0; f < kNumLegs; ++f) {
    anchor_by_foot[f] = material_coords(
        surface_, foot_position(robot_, state, static_cast<FootId>(f)), 0.0);
  }
  auto slot_anchors = [&](const ContactSet& c) {
    PinAnchors a;
    for (int i = 0; i < 3; ++i)
      a[i] = anchor_by_foot[static_cast<int>(c.stance[i])];
    return a;
  };

  Planner planner(robot_, gait_, planner_config_, surface_);
  Controller controller(robot_, gains_, surface_, mode_);
  {
    const KinematicsCache kin0 = compute_kinematics(robot_, state);
    planner.reset(state, kin0, contacts, 0.0);
  }
  controller.reset();

  const long n_steps = std::lround(config_.duration / config_.dt);
  const double t_sw = gait_.swing_duration();
  double phase_start_t = 0.0;
  bool armed = false;
  int pending_events = 0;
  int consec_fail = 0;
  int consec_pull = 0;
  long cum_fallback = 0;
  double last_plan_t = 0.0;
  bool first_plan = true;
  Vec12 u = Vec12::Zero();
  bool stop = false;

  // One control tick: plan, decide, log. Returns false when the run ends.
  auto tick = [&](double t) -> bool {
    if (!state.q.allFinite() || !state.qd.allFinite()) {
      result.outcome = RunOutcome::kAborted;
      result.reason = "non_finite_state";
      return false;
    }
    if (plane_clearance(surface_, state.base_pos(), t) < 0.0) {
      result.outcome = RunOutcome::kAborted;
      result.reason = "base_below_surface";
      return false;
    }
    if (t - phase_start_t > t_sw + 0.5) {
      result.outcome = RunOutcome::kAborted;
      result.reason = "missed_touchdown";
      return false;
    }

    const KinematicsCache kin = compute_kinematics(robot_, state);
    const double dt_plan = first_plan ? 0.0 : t - last_plan_t;
    first_plan = false;
    last_plan_t = t;
    const ReferenceSnapshot ref = planner.plan(state, kin, contacts, t, dt_plan);
    const ControlDecision dec = controller.decide(state, kin, contacts, ref, t);
    u = dec.u;

    const PinAnchors a = slot_anchors(contacts);
    VecQ qdd;
    Vec9 lambda;
    constrained_dynamics(robot_, state, kin, contacts, surface_, a, u,
                         external_force(t), config_.pin_alpha, config_.pin_beta,
                         t, qdd, lambda);

    TraceRow row;
    row.t = t;
    row.q = state.q;
    row.qd = state.qd;
    row.u = u;
    row.ff = dec.F_surface;
    row.lambda = lambda;
    row.y = dec.y;
    const Mat3 rs = surface_pose(surface_, t).rotation;
    row.surface_pitch = std::atan2(rs(0, 2), rs(2, 2));
    row.phi = plane_clearance(
        surface_, kin.leg[static_cast<int>(contacts.swing)].foot, t);
    row.event = pending_events;
    pending_events = 0;
    row.qp_status = static_cast<int>(dec.status);
    row.solve_ms = dec.solve_time * 1e3;
    row.v = dec.v;
    row.margin_friction = dec.margin_friction;
    row.margin_normal = dec.margin_normal;
    row.margin_torque = dec.margin_torque;
    cum_fallback += dec.fallback_level;
    row.fallbacks = static_cast<int>(cum_fallback);
    double pin_err = 0.0;
    double min_normal = std::numeric_limits<double>::infinity();
    int slot = 0;
    for (FootId f : contacts.stance) {
      const auto& leg = kin.leg[static_cast<int>(f)];
      const Vec3 rp = point_state(surface_, a[slot], t).pos;
      pin_err = std::max(pin_err, (leg.foot - rp).norm());
      const Vec3 lam_s = rs.transpose() * lambda.segment<3>(3 * slot);
      min_normal = std::min(min_normal, lam_s.z());
      if (std::hypot(lam_s.x(), lam_s.y()) >
          gains_.mu * lam_s.z() + config_.cone_tolerance) {
        ++result.cone_violations[static_cast<size_t>(f)];
      }
      ++slot;
    }
    row.pin_err = pin_err;
    row.accel_ratio = ref.accel_ratio;
    row.swing = static_cast<int>(contacts.swing);
    row.target_x = ref.target.position.x();
    row.target_y = ref.target.position.y();
    row.cap_x = ref.capture.x_cap;
    row.cap_y = ref.capture.y_cap;
    row.cap_exists = ref.capture.exists ? 1 : 0;
    result.trace.push_back(row);

    if (dec.fallback_level > 0) {
      result.events.push_back(
          {t, EventKind::kFallback, contacts.swing, row.phi});
    }
    consec_fail = dec.failed ? consec_fail + 1 : 0;
    if (consec_fail >= config_.failure_ticks) {
      result.outcome = RunOutcome::kControllerFailure;
      result.reason = "allocation_infeasible";
      result.events.push_back(
          {t, EventKind::kControllerFailure, contacts.swing, row.phi});
      return false;
    }
    consec_pull = min_normal < config_.lambda_floor ? consec_pull + 1 : 0;
    if (consec_pull >= config_.failure_ticks) {
      result.outcome = RunOutcome::kAborted;
      result.reason = "contact_pull";
      return false;
    }
    return true;
  };

  for (long step = 0; step < n_steps; ++step) {
    const double t = static_cast<double>(step) * config_.dt;
    if (step % config_.control_divisor == 0 && !tick(t)) {
      result.t_end = t;
      stop = true;
      break;
    }

    double t_cur = t;
    double remaining = config_.dt;
    for (int guard = 0; guard < 4 && remaining > 1e-15; ++guard) {
      if (!armed) {
        const double phi0 = swing_clearance(state, contacts.swing, t_cur);
        if (phi0 > config_.arm_clearance ||
            t_cur - phase_start_t > config_.arm_fraction * t_sw) {
          armed = true;
        }
      }
      const PinAnchors a = slot_anchors(contacts);
      const RobotState full = rk4_step(state, contacts, a, u, t_cur, remaining);
      const double phi1 =
          swing_clearance(full, contacts.swing, t_cur + remaining);
      if (!(armed && phi1 < 0.0)) {
        state = full;
        break;
      }

      // Bisect the step length to land on the crossing from above.
      double lo = 0.0;
      double hi = remaining;
      RobotState s_hi = full;
      for (int it = 0; it < config_.bisection_iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        const RobotState sm = rk4_step(state, contacts, a, u, t_cur, mid);
        if (swing_clearance(sm, contacts.swing, t_cur + mid) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
          s_hi = sm;
        }
      }
      const double t_event = t_cur + hi;
      const FootId touched = contacts.swing;
      if (swing_clearance_rate(s_hi, touched, t_event) >= 0.0) {
        // Grazing: the foot reaches the surface without descending through
        // it, which does not trigger the transition.
        state = full;
        break;
      }
      state = s_hi;
      result.events.push_back({t_event, EventKind::kTouchdown, touched,
                               swing_clearance(state, touched, t_event)});
      pending_events |= 1;

      anchor_by_foot[static_cast<int>(touched)] = material_coords(
          surface_, foot_position(robot_, state, touched), t_event);
      int order_idx = 0;
      for (int i = 0; i < kNumLegs; ++i) {
        if (kGaitOrder[static_cast<size_t>(i)] == touched) order_idx = i;
      }
      const FootId next = kGaitOrder[static_cast<size_t>((order_idx + 1) % 4)];
      contacts = ContactSet::with_swing(next);
      const KinematicsCache kin_event = compute_kinematics(robot_, state);
      planner.on_transition(state, kin_event, contacts, t_event);
      result.events.push_back({t_event, EventKind::kLiftoff, next,
                               swing_clearance(state, next, t_event)});
      pending_events |= 2;
      phase_start_t = std::round(t_event / t_sw) * t_sw;
      armed = false;
      remaining = t + config_.dt - t_event;
      t_cur = t_event;
    }
    if (stop) break;
  }

  if (!stop) {
    const double t_final = static_cast<double>(n_steps) * config_.dt;
    tick(t_final);
    result.t_end = t_final;
  }

  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    wall_start)
          .count();
  return result;
}

}  // namespace drs
