#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "drs/planner.hpp"
#include "drs/sim.hpp"

using namespace drs;

namespace {

SurfaceMotion rocking_surface() {
  SurfaceMotion m;
  m.profile = SurfaceProfile::kRockAndTranslate;
  m.pitch_amplitude = 5.0 * std::numbers::pi / 180.0;
  m.pitch_frequency = 0.5;
  m.belt_velocity = Vec3(-0.08, 0.0, 0.0);
  return m;
}

FootstepTarget fixed_target(const Vec2& pos, double z) {
  FootstepTarget t;
  t.position = pos;
  t.z = z;
  return t;
}

std::array<Vec3, kNumLegs> grid_feet(const RobotParams& params) {
  std::array<Vec3, kNumLegs> feet;
  for (int i = 0; i < kNumLegs; ++i) {
    feet[i] = params.hip_offsets[i];
    feet[i].z() = 0.0;
  }
  return feet;
}

}  // namespace

TEST_CASE("step offset vanishes when walking at the desired velocity") {
  GaitParams gait;
  LipmState lipm;
  lipm.rd_sc = Vec3(gait.v_d.x(), gait.v_d.y(), 0.0);
  const StepOffset off = step_offset(lipm, gait);
  REQUIRE(off.ok);
  CHECK(off.offset.norm() < 1e-15);
}

TEST_CASE("step offset frozen value at rest") {
  GaitParams gait;
  LipmState lipm;  // zero velocity, desired 0.08: offset pulls back
  const StepOffset off = step_offset(lipm, gait);
  REQUIRE(off.ok);
  CHECK(off.offset.x() ==
        doctest::Approx(-0.016154200875076873).epsilon(1e-13));
  CHECK(off.offset.y() == 0.0);
}

TEST_CASE("step offset reports failure on a free-falling support") {
  GaitParams gait;
  LipmState lipm;
  lipm.support_acc.z() = -9.82;
  CHECK_FALSE(step_offset(lipm, gait).ok);
}

TEST_CASE("footstep target is raibert plus capture offset") {
  GaitParams gait;
  LipmState lipm;
  lipm.rd_sc = Vec3(0.16, 0.0, 0.0);
  const Vec2 hip(0.1, -0.175);
  const FootstepTarget target = footstep_target(lipm, gait, hip);
  REQUIRE(target.capture_ok);
  REQUIRE(target.reachable);
  // hip + (T/2) v_d + sqrt(z0/g) (rd - v_d)
  CHECK(target.position.x() ==
        doctest::Approx(0.1961542008750769).epsilon(1e-13));
  CHECK(target.position.y() == doctest::Approx(-0.175).epsilon(1e-13));
  CHECK((target.hip_ref - hip).norm() == 0.0);
}

TEST_CASE("footstep target clamps to the reach disk") {
  GaitParams gait;
  LipmState lipm;
  lipm.rd_sc = Vec3(3.0, 0.0, 0.0);  // sprinting: raw target far ahead
  const Vec2 hip(0.0, 0.175);
  const FootstepTarget target = footstep_target(lipm, gait, hip, 0.2);
  CHECK_FALSE(target.reachable);
  CHECK((target.position - hip).norm() == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("horizontal reach frozen value at nominal height") {
  RobotParams params;
  CHECK(horizontal_reach(params, 0.4) ==
        doctest::Approx(0.25617376914898987).epsilon(1e-13));
  // Deeper stance leaves less horizontal margin.
  CHECK(horizontal_reach(params, 0.45) < horizontal_reach(params, 0.4));
}

TEST_CASE("swing trajectory starts at liftoff and lands on the target") {
  GaitParams gait;
  const SurfaceMotion surface = rocking_surface();
  const double t0 = 0.35;
  const Vec3 liftoff = point_state(surface, Vec3(0.25, 0.17, 0.0), t0).pos;
  const double t_land = t0 + gait.swing_duration();
  const FootstepTarget target = fixed_target(Vec2(0.31, 0.18), 0.0);

  const SwingRef start = swing_trajectory(liftoff, t0, target, gait, surface, 0.0);
  CHECK_FALSE(start.clamped);
  CHECK((start.pos - liftoff).norm() < 1e-10);

  const SwingRef end =
      swing_trajectory(liftoff, t0, target, gait, surface, gait.swing_duration());
  // The target position is interpreted at the landing time.
  CHECK(end.pos.x() == doctest::Approx(target.position.x()).epsilon(1e-9));
  CHECK(end.pos.y() == doctest::Approx(target.position.y()).epsilon(1e-9));
  // Lands with the surface material velocity: zero relative approach speed
  // in the plane, so the world velocity equals the carried point's.
  const Vec3 mat = material_coords(surface, end.pos, t_land);
  const SurfacePointState carried = point_state(surface, mat, t_land);
  CHECK((end.vel - carried.vel).norm() < 1e-6);
}

TEST_CASE("swing trajectory arches to the configured height") {
  GaitParams gait;
  SurfaceMotion flat;  // static surface: material frame equals world frame
  const Vec3 liftoff(0.1, 0.2, 0.0);
  const FootstepTarget target = fixed_target(Vec2(0.25, 0.2), 0.0);
  double z_max = -1.0;
  for (double s = 0.0; s <= 1.0; s += 0.01) {
    const SwingRef ref = swing_trajectory(liftoff, 0.0, target, gait, flat,
                                          s * gait.swing_duration());
    z_max = std::max(z_max, ref.pos.z());
  }
  CHECK(z_max == doctest::Approx(gait.swing_height).epsilon(1e-3));
  const SwingRef mid = swing_trajectory(liftoff, 0.0, target, gait, flat,
                                        0.5 * gait.swing_duration());
  CHECK(mid.pos.z() == doctest::Approx(gait.swing_height).epsilon(1e-9));
}

TEST_CASE("swing trajectory clamps its phase argument") {
  GaitParams gait;
  SurfaceMotion flat;
  const FootstepTarget target = fixed_target(Vec2(0.2, 0.0), 0.0);
  const SwingRef before = swing_trajectory(Vec3(0.1, 0.0, 0.0), 0.0, target,
                                           gait, flat, -0.1);
  CHECK(before.clamped);
  const SwingRef after = swing_trajectory(Vec3(0.1, 0.0, 0.0), 0.0, target,
                                          gait, flat, gait.swing_duration() + 0.1);
  CHECK(after.clamped);
}

TEST_CASE("whole body reference reproduces the standing fold") {
  RobotParams params;
  GaitParams gait;
  std::array<Vec3, kNumLegs> feet = grid_feet(params);
  const WholeBodyRef ref = whole_body_reference(
      params, Vec3(0.0, 0.0, gait.base_height), Vec3::Zero(), feet);
  REQUIRE(ref.all_reachable);
  const VecX stand = standing_joint_angles(params, gait.base_height);
  CHECK((ref.joint_angles - stand).norm() < 1e-12);
}

TEST_CASE("lateral zmp alternates with the swing side") {
  RobotParams params;
  GaitParams gait;
  PlannerConfig config;
  const SurfaceMotion surface = rocking_surface();
  Planner planner(params, gait, config, surface);
  const auto feet = grid_feet(params);

  // Left-side swings push the zmp to the right stance edge and vice versa.
  CHECK(planner.zmp_lateral(ContactSet::with_swing(FootId::FL), feet) ==
        doctest::Approx(-config.sway_amplitude).epsilon(1e-12));
  CHECK(planner.zmp_lateral(ContactSet::with_swing(FootId::RL), feet) ==
        doctest::Approx(-config.sway_amplitude).epsilon(1e-12));
  CHECK(planner.zmp_lateral(ContactSet::with_swing(FootId::FR), feet) ==
        doctest::Approx(config.sway_amplitude).epsilon(1e-12));
  CHECK(planner.zmp_lateral(ContactSet::with_swing(FootId::RR), feet) ==
        doctest::Approx(config.sway_amplitude).epsilon(1e-12));
}

TEST_CASE("lateral limit cycle constants") {
  RobotParams params;
  GaitParams gait;
  PlannerConfig config;
  Planner planner(params, gait, config, rocking_surface());
  CHECK(planner.lateral_rate() ==
        doctest::Approx(std::sqrt(9.81 / 0.4)).epsilon(1e-14));
  CHECK(planner.apex_fraction() ==
        doctest::Approx(0.8330450724682167).epsilon(1e-12));
  CHECK(planner.arc_entry_speed() ==
        doctest::Approx(config.sway_amplitude * 4.882764732151173)
            .epsilon(1e-12));
}

TEST_CASE("planner emits continuous references over a swing phase") {
  RobotParams params;
  GaitParams gait;
  PlannerConfig config;
  const SurfaceMotion surface = rocking_surface();

  SimConfig sim_config;
  Simulation sim(params, gait, config, ControllerGains{}, surface, sim_config);
  RobotState state = sim.initial_state();

  Planner planner(params, gait, config, surface);
  const ContactSet contacts = ContactSet::with_swing(kGaitOrder[0]);
  KinematicsCache kin = compute_kinematics(params, state);
  planner.reset(state, kin, contacts, 0.0);

  const double dt = 0.002;
  ReferenceSnapshot prev = planner.plan(state, kin, contacts, 0.0, dt);
  CHECK(prev.ik_ok);
  for (int k = 1; k < 200; ++k) {
    const double t = k * dt;
    const ReferenceSnapshot ref = planner.plan(state, kin, contacts, t, dt);
    // Position rows advance no faster than their stated velocity allows.
    for (int i = 0; i < 9; ++i) {
      const double step = std::abs(ref.h[i] - prev.h[i]);
      const double budget =
          dt * (std::abs(ref.hd[i]) + std::abs(prev.hd[i])) + 5e-4;
      CHECK(step <= budget);
    }
    CHECK(ref.ik_ok);
    prev = ref;
  }

  // The swing row ends the phase on the committed target. The reference
  // aims slightly below the contact plane so the touchdown guard always
  // fires, so compare in material coordinates where the target lives.
  const double t_td = gait.swing_duration();
  const ReferenceSnapshot last = planner.plan(state, kin, contacts, t_td, dt);
  const PlaneField pf = plane_field(surface, last.target.position.x(),
                                    last.target.position.y(), t_td);
  const Vec3 tgt_world(last.target.position.x(), last.target.position.y(),
                       pf.z);
  const Vec2 want = material_coords(surface, tgt_world, t_td).head<2>();
  const Vec3 got =
      material_coords(surface, Vec3(last.h[6], last.h[7], last.h[8]), t_td);
  CHECK((got.head<2>() - want).norm() < 1e-9);
  CHECK(std::abs(got.z() + config.aim_below) < 1e-9);
}
