#include "drs/lipm.hpp"

#include <cmath>
#include <stdexcept>

namespace drs {

double axial_force(const LipmState& state) {
  const double g_eff = state.g_eff();
  if (g_eff < 0.0) {
    throw std::domain_error(
        "support falls faster than gravity: rod cannot push, contact lost");
  }
  return state.mass * g_eff / std::cos(state.leg_angle());
}

Vec2 lipm_accel(const LipmState& state, bool homogeneous) {
  // From the world frame equations: rdd_wc = g_eff/z0 * r_sc and
  // rdd_wc = rdd_ws + rdd_sc, so the relative motion sees the support
  // acceleration as a negative forcing term.
  Vec2 acc = (state.g_eff() / state.z0) * state.r_sc.head<2>();
  if (!homogeneous) {
    acc -= state.support_acc.head<2>();
  }
  return acc;
}

Vec2 orbital_energy(const LipmState& state) {
  const double k_a = -state.g_eff() / state.z0;
  const Vec2 x = state.r_sc.head<2>();
  const Vec2 xd = state.rd_sc.head<2>();
  return 0.5 * (xd.cwiseProduct(xd) + k_a * x.cwiseProduct(x));
}

CaptureResult capture_point(const LipmState& state) {
  CaptureResult r;
  const double g_eff = state.g_eff();
  r.k_a = -g_eff / state.z0;
  if (g_eff <= 0.0) {
    r.exists = false;
    return r;
  }
  const double tc = std::sqrt(state.z0 / g_eff);
  r.exists = true;
  r.x_cap = tc * state.rd_sc.x();
  r.y_cap = tc * state.rd_sc.y();
  r.z_cap = 0.0;
  return r;
}

}  // namespace drs
