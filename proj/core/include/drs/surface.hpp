#pragma once

#include "drs/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace drs {

// Time-indexed pose samples (t, x, y, z, roll, pitch, yaw) interpolated with
// natural cubic splines so velocity and acceleration are defined everywhere.
class TabulatedMotion {
 public:
  // rows: each row is {t, x, y, z, roll, pitch, yaw}, strictly increasing t,
  // angles in radians. Needs at least 3 rows.
  explicit TabulatedMotion(const std::vector<std::array<double, 7>>& rows);

  static TabulatedMotion from_csv(const std::string& path);

  void eval(double t, Vec3& pos, Vec3& pos_dot, Vec3& pos_ddot,
            Vec3& rpy, Vec3& rpy_dot, Vec3& rpy_ddot) const;

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }

 private:
  std::vector<double> t_;
  // Per channel spline knot values and second derivatives.
  std::array<std::vector<double>, 6> val_;
  std::array<std::vector<double>, 6> m_;
};

enum class SurfaceProfile {
  kStatic,
  kRockAndTranslate,
  kVerticalSinusoid,
  kCustomTabulated,
};

// Rigid surface motion. The surface is a plane of material points; a material
// point m maps to the world as
//   p(m, t) = R(t) * (m + belt_velocity * t - pivot) + pivot + d(t).
// For the periodic profiles R is a pitch rotation theta(t) = A sin(2 pi f t + phase)
// about the y axis through the pivot and d(t) is an optional vertical
// sinusoid. belt_velocity is the conveyor speed expressed in deck (material)
// coordinates: the belt slides within the pitching plane, so the rocking axis
// stays fixed in the world and the contact plane shape does not drift. The
// undisplaced contact plane is m_z = pivot_z.
struct SurfaceMotion {
  SurfaceProfile profile = SurfaceProfile::kStatic;
  double pitch_amplitude = 0.0;  // rad
  double pitch_frequency = 0.0;  // Hz
  double phase = 0.0;            // rad, shared by the periodic terms
  Vec3 pivot = Vec3::Zero();     // m, lies on the contact plane
  Vec3 belt_velocity = Vec3::Zero();  // m/s in deck coordinates, z unused
  double z_amplitude = 0.0;      // m, vertical translation term
  double z_frequency = 0.0;      // Hz
  std::shared_ptr<const TabulatedMotion> table;  // kCustomTabulated only
};

// Full rigid body state of the surface at one instant.
struct SurfacePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 omega = Vec3::Zero();   // rad/s, world frame
  Vec3 alpha = Vec3::Zero();   // rad/s^2, world frame
  Vec3 translation = Vec3::Zero();        // d(t) above
  Vec3 translation_dot = Vec3::Zero();
  Vec3 translation_ddot = Vec3::Zero();
  Vec3 pivot = Vec3::Zero();
  Vec3 belt = Vec3::Zero();            // deck-frame conveyor velocity
  Vec3 material_drift = Vec3::Zero();  // belt * t at this instant
};

struct SurfacePointState {
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  Vec3 acc = Vec3::Zero();
};

// Height field of the contact plane over world (x, y) at time t, with the
// partial derivatives needed to differentiate a height target twice.
struct PlaneField {
  double z = 0.0;
  double zt = 0.0, zx = 0.0, zy = 0.0;
  double ztt = 0.0, ztx = 0.0, zty = 0.0;
  double zxx = 0.0, zxy = 0.0, zyy = 0.0;
};

struct LipmInputs {
  SurfacePointState point;
  double accel_ratio = 0.0;   // max horizontal acceleration over g
  bool assumption_ok = true;  // false when the ratio exceeds 0.05
};

SurfacePose surface_pose(const SurfaceMotion& motion, double t);

// World position/velocity/acceleration of the material point m.
SurfacePointState point_state(const SurfaceMotion& motion, const Vec3& m, double t);
SurfacePointState point_state(const SurfacePose& pose, const Vec3& m);

// Material coordinates of a world point at time t (inverse of point_state pos).
Vec3 material_coords(const SurfaceMotion& motion, const Vec3& p_world, double t);

Vec3 surface_normal(const SurfaceMotion& motion, double t);

PlaneField plane_field(const SurfaceMotion& motion, double x, double y, double t);

// Signed height of a world point above the contact plane, and its rate along
// a trajectory with the given world velocity.
double plane_clearance(const SurfaceMotion& motion, const Vec3& p, double t);
double plane_clearance_rate(const SurfaceMotion& motion, const Vec3& p,
                            const Vec3& v, double t);

// Support point kinematics feeding the pendulum model. The horizontal
// acceleration assumption monitor compares against 0.05 g.
LipmInputs lipm_inputs(const SurfaceMotion& motion, const Vec3& m, double t,
                       double gravity = 9.81);

}  // namespace drs
