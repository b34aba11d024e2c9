#pragma once

#include "drs/leg_ik.hpp"
#include "drs/lipm.hpp"
#include "drs/robot.hpp"
#include "drs/surface.hpp"
#include "drs/types.hpp"

#include <array>

namespace drs {

struct GaitParams {
  double cycle_time = 2.0;    // s, full gait cycle (four single-swing phases)
  double swing_height = 0.15; // m, peak swing foot height above the plane
  Vec2 v_d = Vec2(0.08, 0.0); // m/s, desired base velocity relative to the belt
  double k_step = 1.0;        // capture feedback gain
  double base_height = 0.4;   // m, desired base height above the contact plane

  double swing_duration() const { return cycle_time / 4.0; }
  void validate() const;  // throws std::invalid_argument
};

// Crawl order; the index advances cyclically at each touchdown.
inline constexpr std::array<FootId, 4> kGaitOrder = {FootId::FL, FootId::RR,
                                                     FootId::FR, FootId::RL};

struct FootstepTarget {
  Vec2 position = Vec2::Zero();  // world x, y at the expected touchdown time
  double z = 0.0;                // height relative to the contact plane
  Vec2 hip_ref = Vec2::Zero();   // hip coordinates the heuristic started from
  bool reachable = true;         // false when clamped to the reach disk
  bool capture_ok = true;        // false when the capture point did not exist
};

struct StepOffset {
  Vec2 offset = Vec2::Zero();
  bool ok = false;  // false when the capture point does not exist
};

// Velocity-error footstep offset K * sqrt(z0 / (zdd_ws + g)) * (rd_sc - v_d).
StepOffset step_offset(const LipmState& lipm, const GaitParams& gait);

// Raibert target: hip + (T/2) v_d + capture offset, clamped to a disk of the
// given radius around the hip when requested (radius <= 0 disables the check).
FootstepTarget footstep_target(const LipmState& lipm, const GaitParams& gait,
                               const Vec2& hip, double reach_radius = 0.0);

// Largest horizontal foot offset from the hip with the base at the given
// height, with a 5% margin off full singular extension.
double horizontal_reach(const RobotParams& params, double depth);

struct SwingRef {
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  Vec3 acc = Vec3::Zero();
  bool clamped = false;  // t_phase was outside [0, swing_duration]
};

// Stand-alone swing reference: a quintic in the deck material frame from the
// lift-off point to the target (evaluated at lift-off + swing_duration), with
// a smooth vertical arch peaking at swing_height, mapped back to the world
// with full surface velocity and acceleration terms.
SwingRef swing_trajectory(const Vec3& liftoff_pos, double t_liftoff,
                          const FootstepTarget& target, const GaitParams& gait,
                          const SurfaceMotion& surface, double t_phase);

struct WholeBodyRef {
  Vec12 joint_angles = Vec12::Zero();
  bool all_reachable = true;
};

// Inverse kinematics of all four legs for a commanded base pose and world
// foot positions (diagnostic joint references).
WholeBodyRef whole_body_reference(const RobotParams& params,
                                  const Vec3& base_pos, const Vec3& base_rpy,
                                  const std::array<Vec3, kNumLegs>& feet);

// Everything the controller consumes for one control step.
struct ReferenceSnapshot {
  Vec9 h = Vec9::Zero();    // desired [base position; base rpy; swing foot]
  Vec9 hd = Vec9::Zero();
  Vec9 hdd = Vec9::Zero();
  FootstepTarget target;    // latest footstep decision (diagnostic)
  CaptureResult capture;    // capture point at planning time (diagnostic)
  Vec12 joint_angles = Vec12::Zero();  // IK (diagnostic)
  bool ik_ok = true;
  double accel_ratio = 0.0; // support-point horizontal acceleration over g
};

struct PlannerConfig {
  double sway_amplitude = 0.09;  // m, lateral ZMP offset during each phase
  double blend_pos = 0.05;       // lateral governor measurement blend per step
  double blend_vel = 0.05;
  double aim_below = 0.002;      // m, swing target depth below the plane
  double probe_speed = 0.02;     // m/s descent past the nominal touchdown
  double probe_ramp = 0.02;      // s to reach full probe speed
  double commit_fraction = 0.7;  // stop retargeting after this swing fraction
  double min_g_eff = 1.0;        // m/s^2 floor when forming sqrt(z0 / g_eff)

  void validate() const;
};

// Online reference generator: footstep targets from the capture point and
// Raibert heuristic, swing trajectories re-fitted toward the moving target,
// and a base pose reference that keeps height over the pitching plane while
// shifting weight laterally between stance triangles.
class Planner {
 public:
  Planner(const RobotParams& robot, const GaitParams& gait,
          const PlannerConfig& config, const SurfaceMotion& surface);

  // Anchors the clocks and lateral reference; contacts.swing begins its swing
  // phase at time t from its current foot position.
  void reset(const RobotState& state, const KinematicsCache& kin,
             const ContactSet& contacts, double t);

  // One control step worth of references; dt is the control period.
  ReferenceSnapshot plan(const RobotState& state, const KinematicsCache& kin,
                         const ContactSet& contacts, double t, double dt);

  // Called after a touchdown rotated the contact set.
  void on_transition(const RobotState& state, const KinematicsCache& kin,
                     const ContactSet& new_contacts, double t);

  double phase_elapsed(double t) const { return t - phase_start_; }
  const FootstepTarget& current_target() const { return target_; }

  // Lateral limit-cycle constants for the configured gait: the pendulum rate
  // lambda, the arc entry speed, and the apex offset fraction of the sway
  // amplitude (used to seed consistent initial states).
  double lateral_rate() const;
  double arc_entry_speed() const;
  double apex_fraction() const;
  // Per-phase lateral ZMP target given the stance foot world positions.
  double zmp_lateral(const ContactSet& contacts,
                     const std::array<Vec3, kNumLegs>& feet) const;
  // Longitudinal ZMP target: the stance centroid, so the commanded center of
  // pressure stays deep inside the triangle while the body surfs whatever
  // acceleration the deck motion asks for.
  double zmp_longitudinal(const ContactSet& contacts,
                          const std::array<Vec3, kNumLegs>& feet) const;

 private:
  void refit_horizontal(const Vec3& m, const Vec3& md, const Vec3& mdd,
                        const Vec2& target_m, double tau, double t_end);

  RobotParams robot_;
  GaitParams gait_;
  PlannerConfig config_;
  SurfaceMotion surface_;

  double phase_start_ = 0.0;
  double x_ref_ = 0.0;       // longitudinal governor state
  double xd_ref_ = 0.0;
  double y_ref_ = 0.0;       // lateral governor state
  double yd_ref_ = 0.0;

  // Swing bookkeeping, all in deck material coordinates.
  std::array<double, 6> coef_x_{};  // quintic coefficients about tau = fit time
  std::array<double, 6> coef_y_{};
  double fit_start_ = 0.0;   // tau the current quintic was fitted at
  double fit_end_ = 0.0;     // tau the quintic reaches the target
  double z_lift_ = 0.0;      // material z at lift-off
  bool committed_ = false;
  Vec2 target_material_ = Vec2::Zero();
  FootstepTarget target_;
};

}  // namespace drs
