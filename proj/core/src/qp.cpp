#include "drs/qp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace drs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rotates d(k) into d(k-1) and applies the same Givens rotation to the
// columns of J, keeping J * J^T = H^{-1} while the leading columns stay
// aligned with the active-constraint normals.
void add_column(MatX& r, MatX& j, VecX& d, int& iq, double& r_norm) {
  const int n = static_cast<int>(j.rows());
  for (int k = n - 1; k >= iq + 1; --k) {
    double cc = d(k - 1);
    double ss = d(k);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    d(k) = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d(k - 1) = -h;
    } else {
      d(k - 1) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int i = 0; i < n; ++i) {
      const double t1 = j(i, k - 1);
      const double t2 = j(i, k);
      j(i, k - 1) = t1 * cc + t2 * ss;
      j(i, k) = xny * (t1 + j(i, k - 1)) - t2;
    }
  }
  ++iq;
  r.col(iq - 1).head(iq) = d.head(iq);
  r_norm = std::max(r_norm, std::abs(d(iq - 1)));
}

bool column_independent(const MatX& r, int iq, double r_norm) {
  return std::abs(r(iq - 1, iq - 1)) >
         std::numeric_limits<double>::epsilon() * r_norm;
}

// Removes the active constraint at position pos, shifting the trailing
// columns of R left and re-triangularizing with Givens rotations mirrored
// into J.
void delete_column(MatX& r, MatX& j, std::vector<int>& ids,
                   std::vector<double>& u, int& iq, int pos) {
  const int n = static_cast<int>(j.rows());
  for (int i = pos; i < iq - 1; ++i) {
    ids[static_cast<size_t>(i)] = ids[static_cast<size_t>(i + 1)];
    u[static_cast<size_t>(i)] = u[static_cast<size_t>(i + 1)];
    r.col(i).head(iq) = r.col(i + 1).head(iq);
  }
  ids.pop_back();
  u.pop_back();
  --iq;
  for (int k = pos; k < iq; ++k) {
    double cc = r(k, k);
    double ss = r(k + 1, k);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    r(k + 1, k) = 0.0;
    if (cc < 0.0) {
      r(k, k) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      r(k, k) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int c = k + 1; c < iq; ++c) {
      const double t1 = r(k, c);
      const double t2 = r(k + 1, c);
      r(k, c) = t1 * cc + t2 * ss;
      r(k + 1, c) = xny * (t1 + r(k, c)) - t2;
    }
    for (int row = 0; row < n; ++row) {
      const double t1 = j(row, k);
      const double t2 = j(row, k + 1);
      j(row, k) = t1 * cc + t2 * ss;
      j(row, k + 1) = xny * (j(row, k) + t1) - t2;
    }
  }
}

double parse_double_token(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error("qp problem stream truncated");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw std::runtime_error("bad numeric token in qp problem: " + tok);
  return v;
}

void write_double(std::ostream& os, double v) {
  if (v == kInf) {
    os << "inf";
    return;
  }
  if (v == -kInf) {
    os << "-inf";
    return;
  }
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

void write_matrix(std::ostream& os, const MatX& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      write_double(os, m(i, c));
    }
    os << '\n';
  }
}

void write_vector(std::ostream& os, const VecX& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    write_double(os, v(i));
  }
  os << '\n';
}

}  // namespace

void QpProblem::validate() const {
  const int nn = n();
  if (nn <= 0) throw std::invalid_argument("qp: empty Hessian");
  if (H.cols() != nn) throw std::invalid_argument("qp: H must be square");
  if (f.size() != nn) throw std::invalid_argument("qp: f size mismatch");
  if (A_eq.rows() != b_eq.size())
    throw std::invalid_argument("qp: equality row count mismatch");
  if (A_eq.rows() > 0 && A_eq.cols() != nn)
    throw std::invalid_argument("qp: A_eq column count mismatch");
  if (A_in.rows() != b_in.size())
    throw std::invalid_argument("qp: inequality row count mismatch");
  if (A_in.rows() > 0 && A_in.cols() != nn)
    throw std::invalid_argument("qp: A_in column count mismatch");
  if (lb.size() != 0 && lb.size() != nn)
    throw std::invalid_argument("qp: lb size mismatch");
  if (ub.size() != 0 && ub.size() != nn)
    throw std::invalid_argument("qp: ub size mismatch");
}

const char* qp_status_name(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal:
      return "optimal";
    case QpStatus::kInfeasible:
      return "infeasible";
    case QpStatus::kMaxIterations:
      return "max_iterations";
  }
  return "unknown";
}

double KktResiduals::max() const {
  return std::max(std::max(stationarity, primal_eq),
                  std::max(primal_in, complementarity));
}

QpSolution QpSolver::solve(const QpProblem& prob,
                           const std::optional<VecX>& warm_start, double tol,
                           int max_iter) {
  (void)warm_start;
  const auto t_start = std::chrono::steady_clock::now();
  prob.validate();

  const int n = prob.n();
  const int p = prob.p();
  const int q = prob.q();

  // Inequalities are held internally as normal^T x >= rhs rows: the A_in
  // rows flipped, then finite lower bounds, then finite upper bounds.
  struct IneqRow {
    int kind;   // 0 = A_in row, 1 = lower bound, 2 = upper bound
    int index;  // row or variable index
    double rhs;
  };
  std::vector<IneqRow> rows;
  rows.reserve(static_cast<size_t>(q) + 2 * static_cast<size_t>(n));
  for (int k = 0; k < q; ++k) rows.push_back({0, k, -prob.b_in(k)});
  if (prob.lb.size() == n)
    for (int k = 0; k < n; ++k)
      if (prob.lb(k) > -kInf) rows.push_back({1, k, prob.lb(k)});
  if (prob.ub.size() == n)
    for (int k = 0; k < n; ++k)
      if (prob.ub(k) < kInf) rows.push_back({2, k, -prob.ub(k)});
  const int m = static_cast<int>(rows.size());

  auto fill_normal = [&](int id, VecX& out) {
    const IneqRow& row = rows[static_cast<size_t>(id)];
    out.setZero(n);
    switch (row.kind) {
      case 0:
        out = -prob.A_in.row(row.index).transpose();
        break;
      case 1:
        out(row.index) = 1.0;
        break;
      default:
        out(row.index) = -1.0;
        break;
    }
  };

  QpSolution sol;
  sol.multipliers.eq = VecX::Zero(p);
  sol.multipliers.in = VecX::Zero(q);
  sol.multipliers.lower = VecX::Zero(n);
  sol.multipliers.upper = VecX::Zero(n);

  MatX g = prob.H;
  Eigen::LLT<MatX> llt(g);
  if (llt.info() != Eigen::Success) {
    g.diagonal().array() += 1e-10;
    llt.compute(g);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("qp: Hessian is not positive semidefinite");
  }

  j_ = llt.matrixU().solve(MatX::Identity(n, n));  // J = L^{-T}
  r_.setZero(n, n);
  double r_norm = 1.0;
  int iq = 0;
  std::vector<int> ids;  // 0..p-1 equalities, p + k inequality row k
  std::vector<double> u;

  x_ = -llt.solve(prob.f);
  d_.resize(n);
  normal_.resize(n);

  auto finish = [&](QpStatus status, int iters) {
    sol.x = x_;
    sol.status = status;
    sol.iterations = iters;
    for (int a = 0; a < iq; ++a) {
      const int id = ids[static_cast<size_t>(a)];
      const double mult = u[static_cast<size_t>(a)];
      if (id < p) {
        sol.multipliers.eq(id) = -mult;
      } else {
        const IneqRow& row = rows[static_cast<size_t>(id - p)];
        if (row.kind == 0)
          sol.multipliers.in(row.index) = mult;
        else if (row.kind == 1)
          sol.multipliers.lower(row.index) = mult;
        else
          sol.multipliers.upper(row.index) = mult;
      }
    }
    sol.kkt = kkt_check(prob, sol.x, sol.multipliers);
    sol.objective = 0.5 * sol.x.dot(prob.H * sol.x) + prob.f.dot(sol.x);
    sol.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    return sol;
  };

  int iters = 0;

  // Equality constraints enter the active set first and are never dropped;
  // their multipliers may take either sign.
  for (int i = 0; i < p; ++i) {
    normal_ = prob.A_eq.row(i).transpose();
    d_.noalias() = j_.transpose() * normal_;
    z_.setZero(n);
    if (iq < n) z_.noalias() = j_.rightCols(n - iq) * d_.tail(n - iq);
    if (iq > 0)
      rvec_ = r_.topLeftCorner(iq, iq)
                  .triangularView<Eigen::Upper>()
                  .solve(d_.head(iq));
    double slack = normal_.dot(x_) - prob.b_eq(i);
    const double z_dot_n = z_.dot(normal_);
    if (z_dot_n > 1e-14 * (1.0 + normal_.squaredNorm())) {
      const double t2 = -slack / z_dot_n;
      x_ += t2 * z_;
      for (int a = 0; a < iq; ++a) u[static_cast<size_t>(a)] -= t2 * rvec_(a);
      add_column(r_, j_, d_, iq, r_norm);
      if (!column_independent(r_, iq, r_norm)) {
        --iq;
        slack = normal_.dot(x_) - prob.b_eq(i);
        if (std::abs(slack) > tol * (1.0 + std::abs(prob.b_eq(i))))
          return finish(QpStatus::kInfeasible, iters);
      } else {
        ids.push_back(i);
        u.push_back(t2);
      }
    } else {
      // The normal lies in the span of constraints already active: keep it
      // out of the factorization, but only if it is consistent there.
      if (std::abs(slack) > tol * (1.0 + std::abs(prob.b_eq(i))))
        return finish(QpStatus::kInfeasible, iters);
    }
    ++iters;
  }

  std::vector<char> active(static_cast<size_t>(m), 0);

  while (true) {
    if (iters >= max_iter) return finish(QpStatus::kMaxIterations, iters);

    // Most violated inactive inequality, lowest index on ties.
    int ip = -1;
    double worst = -tol;
    for (int k = 0; k < m; ++k) {
      if (active[static_cast<size_t>(k)]) continue;
      const IneqRow& row = rows[static_cast<size_t>(k)];
      double val;
      if (row.kind == 0)
        val = -prob.A_in.row(row.index).dot(x_);
      else if (row.kind == 1)
        val = x_(row.index);
      else
        val = -x_(row.index);
      const double slack = val - row.rhs;
      if (slack < worst) {
        worst = slack;
        ip = k;
      }
    }
    if (ip < 0) return finish(QpStatus::kOptimal, iters);

    fill_normal(ip, normal_);
    double slack = worst;
    double u_plus = 0.0;

    while (true) {
      if (iters >= max_iter) return finish(QpStatus::kMaxIterations, iters);
      ++iters;

      d_.noalias() = j_.transpose() * normal_;
      z_.setZero(n);
      if (iq < n) z_.noalias() = j_.rightCols(n - iq) * d_.tail(n - iq);
      if (iq > 0)
        rvec_ = r_.topLeftCorner(iq, iq)
                    .triangularView<Eigen::Upper>()
                    .solve(d_.head(iq));

      double t1 = kInf;
      int drop_pos = -1;
      for (int a = 0; a < iq; ++a) {
        if (ids[static_cast<size_t>(a)] < p) continue;
        if (rvec_(a) > 0.0) {
          const double ratio = u[static_cast<size_t>(a)] / rvec_(a);
          if (ratio < t1) {
            t1 = ratio;
            drop_pos = a;
          }
        }
      }

      const double z_dot_n = z_.dot(normal_);
      const bool z_nonzero = z_dot_n > 1e-14 * (1.0 + normal_.squaredNorm());
      const double t2 = z_nonzero ? -slack / z_dot_n : kInf;
      const double t = std::min(t1, t2);

      if (t == kInf) return finish(QpStatus::kInfeasible, iters);

      if (!z_nonzero) {
        // Dual step only: transfer multiplier mass and drop the blocker.
        for (int a = 0; a < iq; ++a)
          u[static_cast<size_t>(a)] -= t * rvec_(a);
        u_plus += t;
        active[static_cast<size_t>(ids[static_cast<size_t>(drop_pos)] - p)] =
            0;
        delete_column(r_, j_, ids, u, iq, drop_pos);
        continue;
      }

      x_ += t * z_;
      for (int a = 0; a < iq; ++a) u[static_cast<size_t>(a)] -= t * rvec_(a);
      u_plus += t;
      slack = normal_.dot(x_) - rows[static_cast<size_t>(ip)].rhs;

      if (t == t2) {
        add_column(r_, j_, d_, iq, r_norm);
        if (!column_independent(r_, iq, r_norm)) {
          --iq;  // numerically dependent; slack is ~0 so leave it inactive
        } else {
          ids.push_back(p + ip);
          u.push_back(u_plus);
          active[static_cast<size_t>(ip)] = 1;
        }
        break;
      }

      active[static_cast<size_t>(ids[static_cast<size_t>(drop_pos)] - p)] = 0;
      delete_column(r_, j_, ids, u, iq, drop_pos);
    }
  }
}

KktResiduals kkt_check(const QpProblem& p, const VecX& x,
                       const QpMultipliers& mult) {
  KktResiduals res;
  const int n = p.n();

  VecX grad = p.H * x + p.f;
  if (p.p() > 0) grad.noalias() += p.A_eq.transpose() * mult.eq;
  if (p.q() > 0) grad.noalias() += p.A_in.transpose() * mult.in;
  if (mult.upper.size() == n) grad += mult.upper;
  if (mult.lower.size() == n) grad -= mult.lower;
  res.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;

  if (p.p() > 0)
    res.primal_eq = (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff();

  double viol = 0.0;
  double comp = 0.0;
  if (p.q() > 0) {
    const VecX s = p.A_in * x - p.b_in;
    viol = std::max(viol, s.maxCoeff());
    for (int k = 0; k < p.q(); ++k) {
      comp = std::max(comp, std::abs(mult.in(k) * s(k)));
      comp = std::max(comp, -mult.in(k));
    }
  }
  if (p.lb.size() == n) {
    for (int k = 0; k < n; ++k) {
      if (p.lb(k) == -kInf) continue;
      const double s = p.lb(k) - x(k);
      viol = std::max(viol, s);
      if (mult.lower.size() == n) {
        comp = std::max(comp, std::abs(mult.lower(k) * s));
        comp = std::max(comp, -mult.lower(k));
      }
    }
  }
  if (p.ub.size() == n) {
    for (int k = 0; k < n; ++k) {
      if (p.ub(k) == kInf) continue;
      const double s = x(k) - p.ub(k);
      viol = std::max(viol, s);
      if (mult.upper.size() == n) {
        comp = std::max(comp, std::abs(mult.upper(k) * s));
        comp = std::max(comp, -mult.upper(k));
      }
    }
  }
  res.primal_in = std::max(0.0, viol);
  res.complementarity = comp;
  return res;
}

void write_problem(std::ostream& os, const QpProblem& p) {
  os << p.n() << ' ' << p.p() << ' ' << p.q() << '\n';
  write_matrix(os, p.H);
  write_vector(os, p.f);
  if (p.p() > 0) {
    write_matrix(os, p.A_eq);
    write_vector(os, p.b_eq);
  }
  if (p.q() > 0) {
    write_matrix(os, p.A_in);
    write_vector(os, p.b_in);
  }
  const int n = p.n();
  write_vector(os, p.lb.size() == n ? p.lb : VecX::Constant(n, -kInf));
  write_vector(os, p.ub.size() == n ? p.ub : VecX::Constant(n, kInf));
}

QpProblem read_problem(std::istream& is) {
  int n = 0, p = 0, q = 0;
  if (!(is >> n >> p >> q))
    throw std::runtime_error("qp problem stream: bad header");
  if (n <= 0 || p < 0 || q < 0)
    throw std::runtime_error("qp problem stream: bad sizes");
  QpProblem prob;
  auto read_mat = [&](int rows, int cols) {
    MatX m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int c = 0; c < cols; ++c) m(i, c) = parse_double_token(is);
    return m;
  };
  auto read_vec = [&](int size) {
    VecX v(size);
    for (int i = 0; i < size; ++i) v(i) = parse_double_token(is);
    return v;
  };
  prob.H = read_mat(n, n);
  prob.f = read_vec(n);
  prob.A_eq = read_mat(p, n);
  prob.b_eq = read_vec(p);
  prob.A_in = read_mat(q, n);
  prob.b_in = read_vec(q);
  prob.lb = read_vec(n);
  prob.ub = read_vec(n);
  return prob;
}

void dump_problem(const QpProblem& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open qp dump file: " + path);
  write_problem(os, p);
}

}  // namespace drs
