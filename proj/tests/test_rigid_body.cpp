#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "drs/robot.hpp"

using namespace drs;

namespace {

std::mt19937 rng(71);

double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

RobotState random_state(double rate_scale = 1.0) {
  RobotState s;
  s.q.segment<3>(0) = Vec3(uniform(-0.5, 0.5), uniform(-0.5, 0.5),
                           uniform(0.3, 0.8));
  s.q.segment<3>(3) = Vec3(uniform(-0.4, 0.4), uniform(-0.4, 0.4),
                           uniform(-0.6, 0.6));
  for (int leg = 0; leg < kNumLegs; ++leg) {
    s.q[6 + 3 * leg + 0] = uniform(-0.5, 0.5);
    s.q[6 + 3 * leg + 1] = uniform(-1.0, 1.0);
    s.q[6 + 3 * leg + 2] = uniform(-2.0, -0.3);
  }
  for (int i = 0; i < kNumQ; ++i) s.qd[i] = rate_scale * uniform(-1.0, 1.0);
  return s;
}

// Kinetic energy from the energy function, isolated from the potential.
double kinetic(const RobotParams& params, const RobotState& state) {
  RobotState still = state;
  still.qd.setZero();
  return total_energy(params, state) - total_energy(params, still);
}

VecQ passive_acc(const RobotParams& params, const RobotState& state) {
  const DynamicsTerms dyn = dynamics_terms(params, state);
  return dyn.mass_matrix.ldlt().solve(-dyn.bias);
}

RobotState rk4_passive(const RobotParams& params, const RobotState& s,
                       double h) {
  auto f = [&](const RobotState& x) { return passive_acc(params, x); };
  const VecQ a1 = f(s);
  RobotState s2 = s;
  s2.q += 0.5 * h * s.qd;
  s2.qd += 0.5 * h * a1;
  const VecQ a2 = f(s2);
  RobotState s3 = s;
  s3.q += 0.5 * h * s2.qd;
  s3.qd += 0.5 * h * a2;
  const VecQ a3 = f(s3);
  RobotState s4 = s;
  s4.q += h * s3.qd;
  s4.qd += h * a3;
  const VecQ a4 = f(s4);
  RobotState out = s;
  out.q += h / 6.0 * (s.qd + 2.0 * s2.qd + 2.0 * s3.qd + s4.qd);
  out.qd += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  return out;
}

}  // namespace

TEST_CASE("mass matrix is symmetric positive definite") {
  RobotParams params;
  for (int i = 0; i < 10; ++i) {
    const RobotState s = random_state();
    const DynamicsTerms dyn = dynamics_terms(params, s);
    CHECK((dyn.mass_matrix - dyn.mass_matrix.transpose()).norm() < 1e-10);
    Eigen::SelfAdjointEigenSolver<MatQ> eig(dyn.mass_matrix);
    CHECK(eig.eigenvalues().minCoeff() > 1e-6);
  }
}

TEST_CASE("mass matrix equals the quadratic form of the kinetic energy") {
  // T(qd) is exactly quadratic, so polarization recovers M entry by entry
  // without finite difference error.
  RobotParams params;
  for (int trial = 0; trial < 4; ++trial) {
    RobotState s = random_state();
    const DynamicsTerms dyn = dynamics_terms(params, s);
    auto t_of = [&](const VecQ& qd) {
      RobotState probe = s;
      probe.qd = qd;
      return kinetic(params, probe);
    };
    for (int i = 0; i < kNumQ; ++i) {
      for (int j = i; j < kNumQ; ++j) {
        VecQ ei = VecQ::Zero(), ej = VecQ::Zero();
        ei[i] = 1.0;
        ej[j] = 1.0;
        const double mij =
            i == j ? 2.0 * t_of(ei)
                   : t_of(ei + ej) - t_of(ei) - t_of(ej);
        CHECK(std::abs(dyn.mass_matrix(i, j) - mij) < 1e-8);
      }
    }
  }
}

TEST_CASE("bias at zero velocity is the gradient of the potential") {
  RobotParams params;
  const double h = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    RobotState s = random_state();
    s.qd.setZero();
    const DynamicsTerms dyn = dynamics_terms(params, s);
    for (int i = 0; i < kNumQ; ++i) {
      RobotState lo = s, hi = s;
      lo.q[i] -= h;
      hi.q[i] += h;
      const double grad =
          (total_energy(params, hi) - total_energy(params, lo)) / (2.0 * h);
      CHECK(std::abs(dyn.bias[i] - grad) < 1e-5);
    }
  }
}

TEST_CASE("velocity terms scale quadratically with the rates") {
  RobotParams params;
  for (int trial = 0; trial < 5; ++trial) {
    RobotState s = random_state();
    RobotState still = s, twice = s;
    still.qd.setZero();
    twice.qd *= 2.0;
    const VecQ grav = dynamics_terms(params, still).bias;
    const VecQ c1 = dynamics_terms(params, s).bias - grav;
    const VecQ c2 = dynamics_terms(params, twice).bias - grav;
    CHECK((c2 - 4.0 * c1).norm() < 1e-8 * std::max(1.0, c2.norm()));
  }
}

TEST_CASE("passive flight conserves energy and obeys newton on the com") {
  RobotParams params;
  RobotState s = random_state(0.5);
  const double e0 = total_energy(params, s);
  const double h = 2.5e-4;

  KinematicsCache kin = compute_kinematics(params, s);
  Vec3 com_prev, vcom_prev;
  com_state(params, s, kin, com_prev, vcom_prev);

  for (int step = 0; step < 4000; ++step) {
    s = rk4_passive(params, s, h);
    if (step % 400 == 399) {
      kin = compute_kinematics(params, s);
      Vec3 com, vcom;
      com_state(params, s, kin, com, vcom);
      // The only external force is gravity: the com must free-fall.
      const Vec3 acc_fd = (vcom - vcom_prev) / (400.0 * h);
      CHECK((acc_fd - Vec3(0.0, 0.0, -params.gravity)).norm() < 2e-3);
      vcom_prev = vcom;
    }
  }
  const double e1 = total_energy(params, s);
  CHECK(std::abs(e1 - e0) / std::abs(e0) < 1e-4);
  CHECK(std::abs(e1 - e0) / std::abs(e0) < 1e-8);  // rk4 should do far better
}

TEST_CASE("com velocity is the derivative of the com position") {
  RobotParams params;
  const double h = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    const RobotState s = random_state();
    RobotState lo = s, hi = s;
    lo.q -= h * s.qd;
    hi.q += h * s.qd;
    Vec3 com_lo, com_hi, com, v_lo, v_hi, vcom;
    com_state(params, lo, compute_kinematics(params, lo), com_lo, v_lo);
    com_state(params, hi, compute_kinematics(params, hi), com_hi, v_hi);
    com_state(params, s, compute_kinematics(params, s), com, vcom);
    CHECK((vcom - (com_hi - com_lo) / (2.0 * h)).norm() < 1e-6);
  }
}

TEST_CASE("standing potential energy is weight times com height") {
  RobotParams params;
  RobotState s = random_state();
  s.qd.setZero();
  Vec3 com, vcom;
  com_state(params, s, compute_kinematics(params, s), com, vcom);
  CHECK(total_energy(params, s) ==
        doctest::Approx(params.total_mass * params.gravity * com.z())
            .epsilon(1e-12));
}

TEST_CASE("foot jacobians match finite differences of the foot positions") {
  RobotParams params;
  const double h = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    const RobotState s = random_state();
    const KinematicsCache kin = compute_kinematics(params, s);
    for (FootId foot : kAllFeet) {
      Mat3x18 jac;
      Vec3 jdot_qd;
      foot_jacobian(params, s, kin, foot, jac, jdot_qd);
      for (int i = 0; i < kNumQ; ++i) {
        RobotState lo = s, hi = s;
        lo.q[i] -= h;
        hi.q[i] += h;
        const Vec3 col = (foot_position(params, hi, foot) -
                          foot_position(params, lo, foot)) /
                         (2.0 * h);
        CHECK((jac.col(i) - col).norm() < 1e-5);
      }
      // Bias acceleration: d(J qd)/dt along the constant-rate path.
      RobotState lo = s, hi = s;
      lo.q -= h * s.qd;
      hi.q += h * s.qd;
      Mat3x18 jac_lo, jac_hi;
      Vec3 scratch;
      foot_jacobian(params, lo, compute_kinematics(params, lo), foot, jac_lo,
                    scratch);
      foot_jacobian(params, hi, compute_kinematics(params, hi), foot, jac_hi,
                    scratch);
      const Vec3 fd = (jac_hi * s.qd - jac_lo * s.qd) / (2.0 * h);
      CHECK((jdot_qd - fd).norm() < 1e-5);
      // The jacobian times the rates is the cached foot velocity.
      CHECK((jac * s.qd - kin.leg[static_cast<int>(foot)].foot_vel).norm() <
            1e-10);
    }
  }
}

TEST_CASE("contact jacobian stacks the stance feet in ascending order") {
  RobotParams params;
  const RobotState s = random_state();
  const KinematicsCache kin = compute_kinematics(params, s);
  for (FootId swing : kAllFeet) {
    const ContactSet contacts = ContactSet::with_swing(swing);
    Mat9x18 jac;
    Vec9 jdot_qd;
    contact_jacobian(params, s, kin, contacts, jac, jdot_qd);
    for (int slot = 0; slot < 3; ++slot) {
      Mat3x18 one;
      Vec3 one_dot;
      foot_jacobian(params, s, kin, contacts.stance[slot], one, one_dot);
      CHECK((jac.middleRows<3>(3 * slot) - one).norm() == 0.0);
      CHECK((jdot_qd.segment<3>(3 * slot) - one_dot).norm() == 0.0);
    }
  }
}

TEST_CASE("output map is base pose rows over the swing foot rows") {
  RobotParams params;
  const RobotState s = random_state();
  const KinematicsCache kin = compute_kinematics(params, s);
  Mat9x18 jac;
  Vec9 jdot_qd;
  output_jacobian(params, s, kin, FootId::RL, jac, jdot_qd);
  CHECK((jac.topLeftCorner<6, 6>() - Eigen::Matrix<double, 6, 6>::Identity())
            .norm() == 0.0);
  CHECK(jac.topRightCorner<6, 12>().norm() == 0.0);
  CHECK(jdot_qd.head<6>().norm() == 0.0);
  Mat3x18 swing_jac;
  Vec3 swing_dot;
  foot_jacobian(params, s, kin, FootId::RL, swing_jac, swing_dot);
  CHECK((jac.bottomRows<3>() - swing_jac).norm() == 0.0);
  CHECK((jdot_qd.tail<3>() - swing_dot).norm() == 0.0);
}

TEST_CASE("input matrix routes torques to the joint block") {
  const Mat18x12 b = input_matrix();
  CHECK(b.topRows<6>().norm() == 0.0);
  CHECK((b.bottomRows<12>() - Eigen::Matrix<double, 12, 12>::Identity())
            .norm() == 0.0);
}

TEST_CASE("contact set bookkeeping") {
  for (FootId swing : kAllFeet) {
    const ContactSet c = ContactSet::with_swing(swing);
    CHECK(c.swing == swing);
    CHECK_FALSE(c.is_stance(swing));
    CHECK(c.stance_index(swing) == -1);
    int found = 0;
    for (FootId f : kAllFeet) {
      if (f == swing) continue;
      CHECK(c.is_stance(f));
      const int idx = c.stance_index(f);
      CHECK(c.stance[idx] == f);
      ++found;
    }
    CHECK(found == 3);
    CHECK(static_cast<int>(c.stance[0]) < static_cast<int>(c.stance[1]));
    CHECK(static_cast<int>(c.stance[1]) < static_cast<int>(c.stance[2]));
  }
}

TEST_CASE("torque limit vector tiles the per-joint-type limits") {
  RobotParams params;
  const Vec12 lim = params.torque_limit_vector();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    CHECK(lim[3 * leg + 0] == 20.0);
    CHECK(lim[3 * leg + 1] == 55.0);
    CHECK(lim[3 * leg + 2] == 55.0);
  }
}

TEST_CASE("parameter validation rejects nonsense") {
  RobotParams params;
  params.total_mass = -1.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = RobotParams{};
  params.upper_leg_length = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  CHECK_NOTHROW(RobotParams{}.validate());
}
