#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "drs/qp.hpp"

using namespace drs;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::mt19937 rng(97);

double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

MatX random_matrix(int rows, int cols, double scale) {
  MatX m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = uniform(-scale, scale);
  return m;
}

double objective(const QpProblem& p, const VecX& x) {
  return 0.5 * x.dot(p.H * x) + p.f.dot(x);
}

// Feasible strictly convex problem built around a known interior/boundary
// point so the oracle always has something to find.
QpProblem random_problem(int n, int p_eq, int q_in, int n_bounds) {
  QpProblem prob;
  const MatX a = random_matrix(n, n, 1.0);
  prob.H = a.transpose() * a + uniform(0.2, 1.5) * MatX::Identity(n, n);
  prob.f = random_matrix(n, 1, 2.0);
  const VecX x_feas = random_matrix(n, 1, 1.0);
  prob.A_eq = random_matrix(p_eq, n, 1.0);
  prob.b_eq = prob.A_eq * x_feas;
  prob.A_in = random_matrix(q_in, n, 1.0);
  prob.b_in.resize(q_in);
  for (int i = 0; i < q_in; ++i) {
    // Some rows active at the feasible point, some slack.
    prob.b_in[i] = prob.A_in.row(i).dot(x_feas) +
                   (uniform(0.0, 1.0) < 0.3 ? 0.0 : uniform(0.1, 1.0));
  }
  prob.lb = VecX::Constant(n, -kInf);
  prob.ub = VecX::Constant(n, kInf);
  for (int k = 0; k < n_bounds; ++k) {
    const int i = static_cast<int>(uniform(0.0, n - 1e-9));
    prob.lb[i] = x_feas[i] - uniform(0.05, 1.5);
    prob.ub[i] = x_feas[i] + uniform(0.05, 1.5);
  }
  return prob;
}

// Global minimum by enumerating every active set of the inequality system
// (general rows plus finite bounds). Exponential, so only for small problems.
bool enumerate_optimum(const QpProblem& p, VecX& x_best, double& obj_best) {
  struct Row {
    VecX a;
    double b;
  };
  std::vector<Row> ineqs;
  for (int i = 0; i < p.q(); ++i)
    ineqs.push_back({p.A_in.row(i).transpose(), p.b_in[i]});
  for (int i = 0; i < p.n(); ++i) {
    if (p.lb.size() && std::isfinite(p.lb[i])) {
      VecX a = VecX::Zero(p.n());
      a[i] = -1.0;
      ineqs.push_back({a, -p.lb[i]});
    }
    if (p.ub.size() && std::isfinite(p.ub[i])) {
      VecX a = VecX::Zero(p.n());
      a[i] = 1.0;
      ineqs.push_back({a, p.ub[i]});
    }
  }
  const int m = static_cast<int>(ineqs.size());
  REQUIRE(m <= 16);

  bool found = false;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) active.push_back(i);
    const int na = static_cast<int>(active.size());
    const int dim = p.n() + p.p() + na;
    MatX kkt = MatX::Zero(dim, dim);
    VecX rhs = VecX::Zero(dim);
    kkt.topLeftCorner(p.n(), p.n()) = p.H;
    rhs.head(p.n()) = -p.f;
    if (p.p()) {
      kkt.block(0, p.n(), p.n(), p.p()) = p.A_eq.transpose();
      kkt.block(p.n(), 0, p.p(), p.n()) = p.A_eq;
      rhs.segment(p.n(), p.p()) = p.b_eq;
    }
    for (int k = 0; k < na; ++k) {
      kkt.block(0, p.n() + p.p() + k, p.n(), 1) = ineqs[active[k]].a;
      kkt.block(p.n() + p.p() + k, 0, 1, p.n()) =
          ineqs[active[k]].a.transpose();
      rhs[p.n() + p.p() + k] = ineqs[active[k]].b;
    }
    Eigen::FullPivLU<MatX> lu(kkt);
    if (!lu.isInvertible()) continue;
    const VecX sol = lu.solve(rhs);
    const VecX x = sol.head(p.n());
    bool ok = true;
    // Multipliers of active inequalities must be nonnegative.
    for (int k = 0; k < na && ok; ++k) {
      if (sol[p.n() + p.p() + k] < -1e-9) ok = false;
    }
    // Inactive inequalities must hold.
    for (int i = 0; i < m && ok; ++i) {
      if (!(mask & (1 << i)) && ineqs[i].a.dot(x) > ineqs[i].b + 1e-9)
        ok = false;
    }
    if (!ok) continue;
    const double obj = objective(p, x);
    if (!found || obj < obj_best) {
      obj_best = obj;
      x_best = x;
      found = true;
    }
  }
  return found;
}

}  // namespace

TEST_CASE("unconstrained minimum is the newton step") {
  QpProblem p;
  p.H = MatX::Identity(2, 2);
  p.f = VecX(2);
  p.f << -1.0, -2.0;
  QpSolver solver;
  const QpSolution sol = solver.solve(p);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK((sol.x - Vec2(1.0, 2.0)).norm() < 1e-12);
  CHECK(sol.objective == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("single equality projects onto the constraint") {
  QpProblem p;
  p.H = MatX::Identity(2, 2);
  p.f = VecX::Zero(2);
  p.A_eq = MatX::Ones(1, 2);
  p.b_eq = VecX::Ones(1);
  QpSolver solver;
  const QpSolution sol = solver.solve(p);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK((sol.x - Vec2(0.5, 0.5)).norm() < 1e-12);
  CHECK(sol.kkt.max() < 1e-10);
}

TEST_CASE("upper bound clamps the unconstrained minimizer") {
  QpProblem p;
  p.H = MatX::Identity(1, 1);
  p.f = VecX::Constant(1, -1.0);  // min 1/2 x^2 - x, wants x = 1
  p.lb = VecX::Constant(1, -kInf);
  p.ub = VecX::Constant(1, 0.5);
  QpSolver solver;
  const QpSolution sol = solver.solve(p);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol.multipliers.upper[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("inactive constraints leave the minimizer alone") {
  QpProblem p;
  p.H = 2.0 * MatX::Identity(2, 2);
  p.f = VecX::Zero(2);
  p.A_in = MatX::Ones(1, 2);
  p.b_in = VecX::Constant(1, 10.0);
  QpSolver solver;
  const QpSolution sol = solver.solve(p);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(sol.x.norm() < 1e-12);
  CHECK(sol.multipliers.in[0] == 0.0);
}

TEST_CASE("contradictory equalities are reported infeasible") {
  QpProblem p;
  p.H = MatX::Identity(2, 2);
  p.f = VecX::Zero(2);
  p.A_eq = MatX::Ones(2, 2);
  p.b_eq = VecX(2);
  p.b_eq << 1.0, 2.0;
  QpSolver solver;
  CHECK(solver.solve(p).status == QpStatus::kInfeasible);
}

TEST_CASE("duplicate consistent equalities are tolerated") {
  QpProblem p;
  p.H = MatX::Identity(2, 2);
  p.f = VecX::Zero(2);
  p.A_eq = MatX::Ones(2, 2);
  p.b_eq = VecX::Ones(2);
  QpSolver solver;
  const QpSolution sol = solver.solve(p);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK((sol.x - Vec2(0.5, 0.5)).norm() < 1e-10);
}

TEST_CASE("disjoint inequalities are reported infeasible") {
  QpProblem p;
  p.H = MatX::Identity(1, 1);
  p.f = VecX::Zero(1);
  p.A_in = MatX(2, 1);
  p.A_in << 1.0, -1.0;  // x <= -1 and -x <= -2  =>  x <= -1, x >= 2
  p.b_in = VecX(2);
  p.b_in << -1.0, -2.0;
  QpSolver solver;
  CHECK(solver.solve(p).status == QpStatus::kInfeasible);
}

TEST_CASE("random problems match the enumeration oracle") {
  QpSolver solver;
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(uniform(0.0, 6.0));
    const int p_eq = static_cast<int>(uniform(0.0, std::min(3, n - 1) + 0.999));
    const int q_in = static_cast<int>(uniform(0.0, 5.999));
    const int n_bounds = static_cast<int>(uniform(0.0, 2.999));
    const QpProblem prob = random_problem(n, p_eq, q_in, n_bounds);

    VecX x_oracle;
    double obj_oracle = 0.0;
    if (!enumerate_optimum(prob, x_oracle, obj_oracle)) continue;

    const QpSolution sol = solver.solve(prob);
    REQUIRE(sol.status == QpStatus::kOptimal);
    CHECK(std::abs(sol.objective - obj_oracle) <
          1e-6 * std::max(1.0, std::abs(obj_oracle)));
    CHECK(sol.kkt.max() < 1e-8);
    CHECK(std::abs(objective(prob, sol.x) - sol.objective) < 1e-9);
    ++solved;
  }
  CHECK(solved >= 55);  // nearly every generated problem must reach the oracle
}

TEST_CASE("warm start hint does not change the answer") {
  const QpProblem prob = random_problem(6, 2, 4, 2);
  QpSolver solver;
  const QpSolution cold = solver.solve(prob);
  const QpSolution warm = solver.solve(prob, VecX::Ones(6).eval());
  REQUIRE(cold.status == QpStatus::kOptimal);
  REQUIRE(warm.status == QpStatus::kOptimal);
  CHECK((cold.x - warm.x).norm() == 0.0);
}

TEST_CASE("iteration budget exhaustion is reported") {
  const QpProblem prob = random_problem(8, 0, 6, 2);
  QpSolver solver;
  const QpSolution sol = solver.solve(prob, std::nullopt, 1e-8, 1);
  CHECK((sol.status == QpStatus::kMaxIterations ||
         sol.status == QpStatus::kOptimal));
}

TEST_CASE("problem text round trip") {
  const QpProblem prob = random_problem(4, 1, 3, 1);
  std::stringstream ss;
  write_problem(ss, prob);
  const QpProblem back = read_problem(ss);
  CHECK((back.H - prob.H).norm() == 0.0);
  CHECK((back.f - prob.f).norm() == 0.0);
  CHECK((back.A_eq - prob.A_eq).norm() == 0.0);
  CHECK((back.b_in - prob.b_in).norm() == 0.0);
  // Bounds hold +-inf for free entries, so compare per element.
  REQUIRE(back.lb.size() == prob.lb.size());
  REQUIRE(back.ub.size() == prob.ub.size());
  for (int i = 0; i < prob.n(); ++i) {
    CHECK(back.lb[i] == prob.lb[i]);
    CHECK(back.ub[i] == prob.ub[i]);
  }
}
