#pragma once

#include "drs/types.hpp"

namespace drs {

// Point mass on a massless telescoping rod whose far end rides the moving
// support point S. The height of the mass above S is held at z0, so the
// vertical support motion changes the apparent gravity seen by the pendulum.
// All quantities are expressed along gravity-aligned world axes.
struct LipmState {
  Vec3 r_sc = Vec3::Zero();        // CoM relative to S [m], z component = z0
  Vec3 rd_sc = Vec3::Zero();       // relative CoM velocity [m/s]
  double z0 = 0.4;                 // constant CoM height above S [m]
  Vec3 support_vel = Vec3::Zero(); // world velocity of S [m/s]
  Vec3 support_acc = Vec3::Zero(); // world acceleration of S [m/s^2]
  double mass = 25.0;              // kg
  double gravity = 9.81;           // m/s^2

  // Effective vertical acceleration stiffening or softening the pendulum.
  double g_eff() const { return support_acc.z() + gravity; }
  // Leg angle from vertical and projected leg length.
  double projected_radius() const { return r_sc.head<2>().norm(); }
  double leg_angle() const { return std::atan2(projected_radius(), z0); }
};

struct CaptureResult {
  double x_cap = 0.0;  // m, offsets of the new support point from the CoM
  double y_cap = 0.0;  // ground projection, world axes
  double z_cap = 0.0;  // stays on the support plane
  bool exists = false; // false when (zdd_ws + g) <= 0
  double k_a = 0.0;    // apparent spring stiffness -(zdd_ws + g)/z0 [1/s^2]
};

// Norm of the force along the rod. Throws std::domain_error on contact loss
// ((zdd_ws + g) < 0 cannot be produced by a unilateral rod).
double axial_force(const LipmState& state);

// Relative horizontal CoM acceleration. The homogeneous flag drops the
// support forcing terms, which is the approximation the capture point and
// orbital energy analysis are built on.
Vec2 lipm_accel(const LipmState& state, bool homogeneous = false);

// Per axis orbital energies E = (xd^2 + k_a x^2) / 2 of the homogeneous system.
Vec2 orbital_energy(const LipmState& state);

CaptureResult capture_point(const LipmState& state);

}  // namespace drs
