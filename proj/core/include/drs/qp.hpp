#pragma once

#include "drs/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace drs {

// min 1/2 x^T H x + f^T x
// s.t. A_eq x = b_eq, A_in x <= b_in, lb <= x <= ub.
// Bounds may be +-infinity; H must be symmetric positive semidefinite.
struct QpProblem {
  MatX H;
  VecX f;
  MatX A_eq;  // p x n, p may be 0
  VecX b_eq;
  MatX A_in;  // q x n, q may be 0
  VecX b_in;
  VecX lb;  // empty means unbounded below
  VecX ub;  // empty means unbounded above

  int n() const { return static_cast<int>(H.rows()); }
  int p() const { return static_cast<int>(A_eq.rows()); }
  int q() const { return static_cast<int>(A_in.rows()); }
  void validate() const;  // throws std::invalid_argument on shape mismatch
};

enum class QpStatus { kOptimal, kInfeasible, kMaxIterations };

const char* qp_status_name(QpStatus s);

struct KktResiduals {
  double stationarity = 0.0;
  double primal_eq = 0.0;
  double primal_in = 0.0;
  double complementarity = 0.0;
  double max() const;
};

struct QpMultipliers {
  VecX eq;     // free sign
  VecX in;     // >= 0
  VecX lower;  // >= 0
  VecX upper;  // >= 0
};

struct QpSolution {
  VecX x;
  QpStatus status = QpStatus::kInfeasible;
  QpMultipliers multipliers;
  KktResiduals kkt;
  int iterations = 0;
  double solve_time = 0.0;  // seconds
  double objective = 0.0;
};

// Dense dual active-set solver. An instance owns scratch storage; run one
// solve at a time per instance.
class QpSolver {
 public:
  // The warm start is accepted as a hint from callers that resolve similar
  // problems repeatedly; the dense solve is cheap enough that it is not used
  // to seed the active set, and results are identical with or without it.
  QpSolution solve(const QpProblem& p,
                   const std::optional<VecX>& warm_start = std::nullopt,
                   double tol = 1e-8, int max_iter = 200);

 private:
  MatX j_, r_;
  VecX x_, d_, z_, rvec_, u_, normal_;
};

KktResiduals kkt_check(const QpProblem& p, const VecX& x,
                       const QpMultipliers& mult);

// Plain text round trip of a problem: first line "n p q", then H, f, A_eq,
// b_eq, A_in, b_in, lb, ub as row-major blocks (bounds written even when the
// problem left them empty, using inf sentinels).
void write_problem(std::ostream& os, const QpProblem& p);
QpProblem read_problem(std::istream& is);
void dump_problem(const QpProblem& p, const std::string& path);

}  // namespace drs
