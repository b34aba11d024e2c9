#pragma once

#include <array>
#include <string>
#include <vector>

#include "drs/controller.hpp"
#include "drs/planner.hpp"
#include "drs/robot.hpp"
#include "drs/surface.hpp"
#include "drs/trace.hpp"
#include "drs/types.hpp"

namespace drs {

struct SimConfig {
  double dt = 2.5e-4;        // integrator step
  int control_divisor = 8;   // control period = dt * divisor
  double duration = 10.0;
  double pin_alpha = 20.0;   // velocity-level anchor correction rate
  double pin_beta = 100.0;   // position-level anchor correction rate
  double arm_clearance = 1e-3;  // swing climbs this high before touchdown arms
  double arm_fraction = 0.1;    // or this fraction of the swing time passes
  int bisection_iters = 20;
  double event_tolerance = 1e-6;  // m, touchdown localization bound
  int failure_ticks = 25;       // consecutive bad control ticks before abort
  double lambda_floor = -5.0;   // N, sustained normal pull before abort
  double cone_tolerance = 0.25;  // N, slack before logging a cone violation
  int seed = 0;  // recorded for provenance; the dynamics are deterministic
  void validate() const;
};

// Sinusoidal external force applied at the base within a time window.
struct Perturbation {
  double amplitude = 0.0;  // N
  double frequency = 1.0;  // Hz
  Vec3 axis = Vec3::UnitY();
  double t_start = 0.0;
  double t_end = 0.0;
  Vec3 force(double t) const;
};

enum class RunOutcome {
  kCompleted,
  kControllerFailure,
  kAborted,
};

const char* outcome_name(RunOutcome outcome);

struct RunResult {
  RunOutcome outcome = RunOutcome::kCompleted;
  std::string reason;
  double t_end = 0.0;
  std::vector<TraceRow> trace;
  std::vector<EventRecord> events;
  std::array<int, kNumLegs> cone_violations{};
  double wall_time = 0.0;  // seconds spent inside run()
};

// Material labels of the three pinned feet, in stance order.
using PinAnchors = std::array<Vec3, 3>;

// Joint-space acceleration and contact force of the pinned-foot dynamics,
// with proportional anchor corrections so integration error cannot let the
// stance feet wander off their surface points.
void constrained_dynamics(const RobotParams& robot, const RobotState& state,
                          const KinematicsCache& kin, const ContactSet& contacts,
                          const SurfaceMotion& surface, const PinAnchors& anchors,
                          const Vec12& u, const Vec3& ext_force, double alpha,
                          double beta, double t, VecQ& qdd, Vec9& lambda);

class Simulation {
 public:
  Simulation(const RobotParams& robot, const GaitParams& gait,
             const PlannerConfig& planner_config, const ControllerGains& gains,
             const SurfaceMotion& surface, const SimConfig& config,
             ControlMode mode = ControlMode::kFullQp);

  void add_perturbation(const Perturbation& p) { perturbations_.push_back(p); }

  // Standing start: feet on the surface under the hips, base centered at the
  // gait height, joint rates chosen so the stance feet move with the surface.
  RobotState initial_state() const;

  RunResult run();

  const RobotParams& robot() const { return robot_; }
  const GaitParams& gait() const { return gait_; }
  const SimConfig& config() const { return config_; }

 private:
  Vec3 external_force(double t) const;
  void derivative(const RobotState& state, const ContactSet& contacts,
                  const PinAnchors& anchors, const Vec12& u, double t,
                  VecQ& qdd, Vec9& lambda) const;
  RobotState rk4_step(const RobotState& state, const ContactSet& contacts,
                      const PinAnchors& anchors, const Vec12& u, double t,
                      double h) const;
  double swing_clearance(const RobotState& state, FootId foot, double t) const;
  double swing_clearance_rate(const RobotState& state, FootId foot,
                              double t) const;

  RobotParams robot_;
  GaitParams gait_;
  PlannerConfig planner_config_;
  ControllerGains gains_;
  SurfaceMotion surface_;
  SimConfig config_;
  ControlMode mode_;
  std::vector<Perturbation> perturbations_;
};

}  // namespace drs
