#include "drs/surface.hpp"

#include "drs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace drs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Natural cubic spline second derivatives from knot values (Thomas solve on
// the interior tridiagonal system; the end second derivatives are zero).
std::vector<double> spline_second_derivs(const std::vector<double>& t,
                                         const std::vector<double>& y) {
  const int n = static_cast<int>(t.size());
  std::vector<double> m(n, 0.0);
  const int k = n - 2;  // interior unknowns m[1..n-2]
  if (k < 1) return m;
  std::vector<double> diag(k), upper(k), lower(k), rhs(k);
  for (int i = 0; i < k; ++i) {
    const double h0 = t[i + 1] - t[i];
    const double h1 = t[i + 2] - t[i + 1];
    lower[i] = h0;
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
  }
  for (int i = 1; i < k; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m[k] = rhs[k - 1] / diag[k - 1];
  for (int i = k - 2; i >= 0; --i) {
    m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
  }
  return m;
}

void spline_eval(const std::vector<double>& t, const std::vector<double>& y,
                 const std::vector<double>& m, double x, double& v, double& d1,
                 double& d2) {
  const int n = static_cast<int>(t.size());
  // Constant extension outside the table.
  if (x <= t.front()) {
    v = y.front();
    d1 = d2 = 0.0;
    return;
  }
  if (x >= t.back()) {
    v = y.back();
    d1 = d2 = 0.0;
    return;
  }
  int lo = static_cast<int>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
  lo = std::clamp(lo, 0, n - 2);
  const double h = t[lo + 1] - t[lo];
  const double a = (t[lo + 1] - x) / h;
  const double b = (x - t[lo]) / h;
  v = a * y[lo] + b * y[lo + 1] +
      ((a * a * a - a) * m[lo] + (b * b * b - b) * m[lo + 1]) * h * h / 6.0;
  d1 = (y[lo + 1] - y[lo]) / h +
       (-(3.0 * a * a - 1.0) * m[lo] + (3.0 * b * b - 1.0) * m[lo + 1]) * h / 6.0;
  d2 = a * m[lo] + b * m[lo + 1];
}

}  // namespace

TabulatedMotion::TabulatedMotion(const std::vector<std::array<double, 7>>& rows) {
  if (rows.size() < 3) {
    throw std::invalid_argument("tabulated surface motion needs at least 3 rows");
  }
  t_.reserve(rows.size());
  for (auto& ch : val_) ch.reserve(rows.size());
  for (const auto& r : rows) {
    if (!t_.empty() && r[0] <= t_.back()) {
      throw std::invalid_argument("tabulated surface motion times must increase");
    }
    t_.push_back(r[0]);
    for (int c = 0; c < 6; ++c) val_[c].push_back(r[c + 1]);
  }
  for (int c = 0; c < 6; ++c) m_[c] = spline_second_derivs(t_, val_[c]);
}

TabulatedMotion TabulatedMotion::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open surface table: " + path);
  std::vector<std::array<double, 7>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // Skip a header line if present.
    if (line.find_first_not_of("0123456789+-.eE, \t\r") != std::string::npos) continue;
    std::array<double, 7> row{};
    std::stringstream ss(line);
    std::string cell;
    int i = 0;
    while (std::getline(ss, cell, ',') && i < 7) row[i++] = std::stod(cell);
    if (i != 7) throw std::runtime_error("surface table row needs 7 columns");
    rows.push_back(row);
  }
  return TabulatedMotion(rows);
}

void TabulatedMotion::eval(double t, Vec3& pos, Vec3& pos_dot, Vec3& pos_ddot,
                           Vec3& rpy, Vec3& rpy_dot, Vec3& rpy_ddot) const {
  double v, d1, d2;
  for (int c = 0; c < 3; ++c) {
    spline_eval(t_, val_[c], m_[c], t, v, d1, d2);
    pos[c] = v;
    pos_dot[c] = d1;
    pos_ddot[c] = d2;
  }
  for (int c = 0; c < 3; ++c) {
    spline_eval(t_, val_[c + 3], m_[c + 3], t, v, d1, d2);
    rpy[c] = v;
    rpy_dot[c] = d1;
    rpy_ddot[c] = d2;
  }
}

SurfacePose surface_pose(const SurfaceMotion& motion, double t) {
  SurfacePose pose;
  pose.pivot = motion.pivot;
  switch (motion.profile) {
    case SurfaceProfile::kStatic:
      break;
    case SurfaceProfile::kRockAndTranslate:
    case SurfaceProfile::kVerticalSinusoid: {
      if (motion.profile == SurfaceProfile::kRockAndTranslate &&
          motion.pitch_amplitude != 0.0) {
        const double w = kTwoPi * motion.pitch_frequency;
        const double th = motion.pitch_amplitude * std::sin(w * t + motion.phase);
        const double thd = motion.pitch_amplitude * w * std::cos(w * t + motion.phase);
        const double thdd =
            -motion.pitch_amplitude * w * w * std::sin(w * t + motion.phase);
        pose.rotation = rot_y(th);
        pose.omega = thd * Vec3::UnitY();
        pose.alpha = thdd * Vec3::UnitY();
      }
      pose.belt = Vec3(motion.belt_velocity.x(), motion.belt_velocity.y(), 0.0);
      pose.material_drift = pose.belt * t;
      if (motion.z_amplitude != 0.0) {
        const double wz = kTwoPi * motion.z_frequency;
        pose.translation.z() += motion.z_amplitude * std::sin(wz * t + motion.phase);
        pose.translation_dot.z() +=
            motion.z_amplitude * wz * std::cos(wz * t + motion.phase);
        pose.translation_ddot.z() =
            -motion.z_amplitude * wz * wz * std::sin(wz * t + motion.phase);
      }
      break;
    }
    case SurfaceProfile::kCustomTabulated: {
      if (!motion.table) throw std::invalid_argument("tabulated profile has no table");
      Vec3 pos, pos_dot, pos_ddot, rpy, rpy_dot, rpy_ddot;
      motion.table->eval(t, pos, pos_dot, pos_ddot, rpy, rpy_dot, rpy_ddot);
      pose.rotation = euler_zyx_to_rot(rpy);
      pose.omega = euler_zyx_omega(rpy, rpy_dot);
      pose.alpha = euler_zyx_alpha(rpy, rpy_dot, rpy_ddot);
      pose.translation = pos;
      pose.translation_dot = pos_dot;
      pose.translation_ddot = pos_ddot;
      break;
    }
  }
  return pose;
}

SurfacePointState point_state(const SurfacePose& pose, const Vec3& m) {
  SurfacePointState s;
  const Vec3 r = pose.rotation * (m + pose.material_drift - pose.pivot);
  const Vec3 belt_world = pose.rotation * pose.belt;
  s.pos = r + pose.pivot + pose.translation;
  s.vel = pose.omega.cross(r) + belt_world + pose.translation_dot;
  s.acc = pose.alpha.cross(r) + pose.omega.cross(pose.omega.cross(r)) +
          2.0 * pose.omega.cross(belt_world) + pose.translation_ddot;
  return s;
}

SurfacePointState point_state(const SurfaceMotion& motion, const Vec3& m, double t) {
  return point_state(surface_pose(motion, t), m);
}

Vec3 material_coords(const SurfaceMotion& motion, const Vec3& p_world, double t) {
  const SurfacePose pose = surface_pose(motion, t);
  return pose.rotation.transpose() * (p_world - pose.pivot - pose.translation) +
         pose.pivot - pose.material_drift;
}

Vec3 surface_normal(const SurfaceMotion& motion, double t) {
  return surface_pose(motion, t).rotation * Vec3::UnitZ();
}

PlaneField plane_field(const SurfaceMotion& motion, double x, double y, double t) {
  PlaneField f;
  switch (motion.profile) {
    case SurfaceProfile::kStatic:
      f.z = motion.pivot.z();
      break;
    case SurfaceProfile::kRockAndTranslate:
    case SurfaceProfile::kVerticalSinusoid: {
      double th = 0.0, thd = 0.0, thdd = 0.0;
      if (motion.profile == SurfaceProfile::kRockAndTranslate &&
          motion.pitch_amplitude != 0.0) {
        const double w = kTwoPi * motion.pitch_frequency;
        th = motion.pitch_amplitude * std::sin(w * t + motion.phase);
        thd = motion.pitch_amplitude * w * std::cos(w * t + motion.phase);
        thdd = -motion.pitch_amplitude * w * w * std::sin(w * t + motion.phase);
      }
      double dz = 0.0;
      double dzd = 0.0;
      double dzdd = 0.0;
      if (motion.z_amplitude != 0.0) {
        const double wz = kTwoPi * motion.z_frequency;
        dz = motion.z_amplitude * std::sin(wz * t + motion.phase);
        dzd = motion.z_amplitude * wz * std::cos(wz * t + motion.phase);
        dzdd = -motion.z_amplitude * wz * wz * std::sin(wz * t + motion.phase);
      }
      // The belt slides within the plane, so it never shows up in the plane
      // shape: z depends on the world offset from the fixed pivot only.
      const double sec2 = 1.0 / (std::cos(th) * std::cos(th));
      const double u = std::tan(th);
      const double ud = thd * sec2;
      const double udd = thdd * sec2 + 2.0 * thd * thd * sec2 * u;
      const double w = x - motion.pivot.x();
      f.z = motion.pivot.z() + dz - u * w;
      f.zx = -u;
      f.zt = dzd - ud * w;
      f.ztx = -ud;
      f.ztt = dzdd - udd * w;
      break;
    }
    case SurfaceProfile::kCustomTabulated: {
      // Central differences over the pose; the spline pose is smooth enough.
      auto height = [&](double xx, double yy, double tt) {
        const SurfacePose pose = surface_pose(motion, tt);
        // Solve for the material point on the plane m_z = pivot_z whose world
        // x, y match, then report its world z.
        const Eigen::Matrix2d a = pose.rotation.topLeftCorner<2, 2>();
        const Vec2 b(xx - pose.pivot.x() - pose.translation.x(),
                     yy - pose.pivot.y() - pose.translation.y());
        const Vec2 mxy = a.partialPivLu().solve(b);
        return pose.rotation(2, 0) * mxy.x() + pose.rotation(2, 1) * mxy.y() +
               pose.pivot.z() + pose.translation.z();
      };
      const double ht = 1e-4, hx = 1e-4;
      f.z = height(x, y, t);
      f.zt = (height(x, y, t + ht) - height(x, y, t - ht)) / (2 * ht);
      f.zx = (height(x + hx, y, t) - height(x - hx, y, t)) / (2 * hx);
      f.zy = (height(x, y + hx, t) - height(x, y - hx, t)) / (2 * hx);
      f.ztt = (height(x, y, t + ht) - 2 * f.z + height(x, y, t - ht)) / (ht * ht);
      f.zxx = (height(x + hx, y, t) - 2 * f.z + height(x - hx, y, t)) / (hx * hx);
      f.zyy = (height(x, y + hx, t) - 2 * f.z + height(x, y - hx, t)) / (hx * hx);
      f.ztx = (height(x + hx, y, t + ht) - height(x - hx, y, t + ht) -
               height(x + hx, y, t - ht) + height(x - hx, y, t - ht)) /
              (4 * ht * hx);
      f.zty = (height(x, y + hx, t + ht) - height(x, y - hx, t + ht) -
               height(x, y + hx, t - ht) + height(x, y - hx, t - ht)) /
              (4 * ht * hx);
      f.zxy = (height(x + hx, y + hx, t) - height(x - hx, y + hx, t) -
               height(x + hx, y - hx, t) + height(x - hx, y - hx, t)) /
              (4 * hx * hx);
      break;
    }
  }
  return f;
}

double plane_clearance(const SurfaceMotion& motion, const Vec3& p, double t) {
  return p.z() - plane_field(motion, p.x(), p.y(), t).z;
}

double plane_clearance_rate(const SurfaceMotion& motion, const Vec3& p,
                            const Vec3& v, double t) {
  const PlaneField f = plane_field(motion, p.x(), p.y(), t);
  return v.z() - (f.zt + f.zx * v.x() + f.zy * v.y());
}

LipmInputs lipm_inputs(const SurfaceMotion& motion, const Vec3& m, double t,
                       double gravity) {
  LipmInputs out;
  out.point = point_state(motion, m, t);
  out.accel_ratio =
      std::max(std::abs(out.point.acc.x()), std::abs(out.point.acc.y())) / gravity;
  out.assumption_ok = out.accel_ratio <= 0.05;
  return out;
}

}  // namespace drs
