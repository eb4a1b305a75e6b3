#include "fgmpc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fgmpc/error.hpp"

namespace fgmpc {

const char* to_string(SolveCode code) {
  switch (code) {
    case SolveCode::kOptimal:
      return "optimal";
    case SolveCode::kInfeasible:
      return "infeasible";
    case SolveCode::kUnbounded:
      return "unbounded";
    case SolveCode::kIterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense tableau for min b'y s.t. S A'y + a = S c, y >= 0, a >= 0 where S flips
// rows so the right-hand side starts non-negative. Columns are laid out as
// [y (m) | artificials (n) | rhs]; the last row holds reduced costs and the
// negated objective.
class DualTableau {
 public:
  DualTableau(const LpProblem& p, const LpOptions& o)
      : m_(static_cast<int>(p.A.rows())),
        n_(static_cast<int>(p.A.cols())),
        opt_(o),
        T_(RowMatrix::Zero(n_ + 1, m_ + n_ + 1)),
        sign_(n_),
        basis_(n_) {
    rhs_col_ = m_ + n_;
    pivot_cap_ = o.max_pivots > 0 ? o.max_pivots : 50 * (m_ + n_) + 50;
    for (int j = 0; j < n_; ++j) {
      sign_[j] = p.c[j] >= 0.0 ? 1.0 : -1.0;
      T_.row(j).head(m_) = sign_[j] * p.A.col(j).transpose();
      T_(j, m_ + j) = 1.0;
      T_(j, rhs_col_) = sign_[j] * p.c[j];
      basis_[j] = m_ + j;
    }
    // Phase-1 objective: sum of artificials.
    for (int j = 0; j < n_; ++j) {
      T_.row(n_).head(m_) -= T_.row(j).head(m_);
      T_(n_, rhs_col_) -= T_(j, rhs_col_);
    }
  }

  enum class PhaseResult { kOptimal, kUnbounded, kLimit };

  PhaseResult iterate() {
    int degenerate = 0;
    for (;;) {
      const bool bland = opt_.bland_only || degenerate >= opt_.degenerate_streak;
      const int col = entering(bland);
      if (col < 0) return PhaseResult::kOptimal;
      const int row = leaving(col, bland);
      if (row < 0) return PhaseResult::kUnbounded;
      if (pivots_ >= pivot_cap_) return PhaseResult::kLimit;
      const double step = T_(row, rhs_col_) / T_(row, col);
      degenerate = step <= opt_.pivot_tol ? degenerate + 1 : 0;
      pivot(row, col);
    }
  }

  double phase_one_residual() const { return -T_(n_, rhs_col_); }

  // Pivots basic artificials out where possible. Rows that stay artificial are
  // linearly dependent and remain harmlessly basic at level zero.
  void drive_out_artificials() {
    for (int i = 0; i < n_; ++i) {
      if (basis_[i] < m_) continue;
      int best = -1;
      double best_mag = opt_.pivot_tol;
      for (int j = 0; j < m_; ++j) {
        const double mag = std::abs(T_(i, j));
        if (mag > best_mag && !is_basic(j)) {
          best_mag = mag;
          best = j;
        }
      }
      if (best >= 0) {
        T_(i, rhs_col_) = 0.0;
        pivot(i, best);
      }
    }
  }

  void set_phase_two_costs(const Eigen::VectorXd& b) {
    T_.row(n_).setZero();
    T_.row(n_).head(m_) = b.transpose();
    for (int i = 0; i < n_; ++i) {
      const double cb = basis_[i] < m_ ? b[basis_[i]] : 0.0;
      if (cb != 0.0) T_.row(n_) -= cb * T_.row(i);
    }
  }

  void clamp_rhs() {
    for (int i = 0; i < n_; ++i) {
      if (T_(i, rhs_col_) < 0.0) T_(i, rhs_col_) = 0.0;
    }
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x(n_);
    for (int j = 0; j < n_; ++j) x[j] = -sign_[j] * T_(n_, m_ + j);
    return x;
  }

  Eigen::VectorXd dual() const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
    for (int i = 0; i < n_; ++i) {
      if (basis_[i] < m_) y[basis_[i]] = std::max(0.0, T_(i, rhs_col_));
    }
    return y;
  }

  std::vector<int> basic_rows() const {
    std::vector<int> rows;
    for (int i = 0; i < n_; ++i) {
      if (basis_[i] < m_) rows.push_back(basis_[i]);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
  }

  int pivots() const { return pivots_; }

 private:
  bool is_basic(int col) const {
    return std::find(basis_.begin(), basis_.end(), col) != basis_.end();
  }

  // Artificial columns never re-enter the basis.
  int entering(bool bland) const {
    int best = -1;
    double best_d = -opt_.optimality_tol;
    for (int j = 0; j < m_; ++j) {
      const double d = T_(n_, j);
      if (d < best_d) {
        best = j;
        if (bland) break;
        best_d = d;
      }
    }
    return best;
  }

  int leaving(int col, bool bland) const {
    int best = -1;
    double best_ratio = kInf;
    for (int i = 0; i < n_; ++i) {
      const double a = T_(i, col);
      if (a <= opt_.pivot_tol) continue;
      const double ratio = std::max(0.0, T_(i, rhs_col_)) / a;
      if (best < 0 || ratio < best_ratio - 1e-12) {
        best = i;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + 1e-12) {
        const bool better = bland ? basis_[i] < basis_[best]
                                  : a > T_(best, col);
        if (better) {
          best = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    return best;
  }

  void pivot(int row, int col) {
    const double piv = T_(row, col);
    T_.row(row) /= piv;
    for (int i = 0; i <= n_; ++i) {
      if (i == row) continue;
      const double factor = T_(i, col);
      if (factor != 0.0) T_.row(i) -= factor * T_.row(row);
    }
    T_.col(col).setZero();
    T_(row, col) = 1.0;
    basis_[row] = col;
    ++pivots_;
  }

  int m_;
  int n_;
  LpOptions opt_;
  RowMatrix T_;
  Eigen::VectorXd sign_;
  std::vector<int> basis_;
  int rhs_col_ = 0;
  int pivots_ = 0;
  int pivot_cap_ = 0;
};

void check_lp_dims(const LpProblem& p) {
  if (p.A.rows() != p.b.size() || p.A.cols() != p.c.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "LP data dimensions are inconsistent");
  }
  if (!p.A.allFinite() || !p.b.allFinite() || !p.c.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "LP data contains non-finite entries");
  }
}

}  // namespace

namespace {

// `classify` resolves a failed dual phase one into Unbounded or Infeasible
// with a separate feasibility solve.
SolveStatus solve_lp_impl(const LpProblem& problem, const LpOptions& options, bool classify) {
  check_lp_dims(problem);
  SolveStatus status;
  DualTableau tab(problem, options);

  using Phase = DualTableau::PhaseResult;
  Phase phase = tab.iterate();
  if (phase == Phase::kLimit) {
    status.code = SolveCode::kIterationLimit;
    status.iterations = tab.pivots();
    return status;
  }
  const double scale = std::max(1.0, problem.c.lpNorm<Eigen::Infinity>());
  if (tab.phase_one_residual() > options.infeasibility_tol * scale) {
    // The dual has no feasible point: the primal is unbounded or infeasible.
    status.code = SolveCode::kUnbounded;
    status.iterations = tab.pivots();
    if (classify) {
      const SolveStatus feas = find_feasible_point(problem.A, problem.b, options);
      status.code = feas.optimal() ? SolveCode::kUnbounded : feas.code;
      status.iterations += feas.iterations;
    }
    return status;
  }

  tab.clamp_rhs();
  tab.drive_out_artificials();
  tab.set_phase_two_costs(problem.b);
  phase = tab.iterate();
  status.iterations = tab.pivots();
  if (phase == Phase::kLimit) {
    status.code = SolveCode::kIterationLimit;
    return status;
  }
  if (phase == Phase::kUnbounded) {
    status.code = SolveCode::kInfeasible;
    return status;
  }
  status.code = SolveCode::kOptimal;
  Eigen::VectorXd x = tab.primal();
  status.value = problem.c.dot(x);
  status.minimizer = std::move(x);
  status.multipliers = tab.dual();
  status.active_set = tab.basic_rows();
  return status;
}

}  // namespace

SolveStatus solve_lp(const LpProblem& problem, const LpOptions& options) {
  return solve_lp_impl(problem, options, true);
}

// Minimizes the largest violation t of the row-normalized system A x - t <= b
// with t >= -1. The dual of this problem is a bounded polytope, which keeps the
// simplex away from the all-degenerate cone that a zero objective produces.
SolveStatus find_feasible_point(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                const LpOptions& options) {
  check_lp_dims({Eigen::VectorXd::Zero(A.cols()), A, b});
  const Eigen::Index m = A.rows(), n = A.cols();
  SolveStatus status;
  std::vector<Eigen::Index> rows;
  Eigen::VectorXd norms(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    norms[i] = n > 0 ? A.row(i).lpNorm<Eigen::Infinity>() : 0.0;
    if (norms[i] > 1e-12) {
      rows.push_back(i);
    } else if (b[i] < -options.infeasibility_tol) {
      status.code = SolveCode::kInfeasible;
      return status;
    }
  }
  if (rows.empty()) {
    status.code = SolveCode::kOptimal;
    status.minimizer = Eigen::VectorXd::Zero(n);
    status.multipliers = Eigen::VectorXd::Zero(m);
    return status;
  }

  const Eigen::Index k = static_cast<Eigen::Index>(rows.size());
  LpProblem lp;
  lp.c = Eigen::VectorXd::Zero(n + 1);
  lp.c[n] = -1.0;
  lp.A = Eigen::MatrixXd::Zero(k + 1, n + 1);
  lp.b.resize(k + 1);
  for (Eigen::Index r = 0; r < k; ++r) {
    lp.A.row(r).head(n) = A.row(rows[r]) / norms[rows[r]];
    lp.A(r, n) = -1.0;
    lp.b[r] = b[rows[r]] / norms[rows[r]];
  }
  lp.A(k, n) = -1.0;
  lp.b[k] = 1.0;
  const SolveStatus st = solve_lp_impl(lp, options, false);
  status.iterations = st.iterations;
  if (st.code == SolveCode::kIterationLimit) {
    status.code = SolveCode::kIterationLimit;
    return status;
  }
  if (!st.optimal()) {
    throw Error(ErrorCode::kSolverFailure, "feasibility LP failed to find its optimum");
  }
  if (-st.value > options.infeasibility_tol) {
    status.code = SolveCode::kInfeasible;
    return status;
  }
  status.code = SolveCode::kOptimal;
  status.minimizer = st.minimizer->head(n);
  status.multipliers = Eigen::VectorXd::Zero(m);
  std::vector<int> active;
  for (int r : st.active_set) {
    if (r < k) active.push_back(static_cast<int>(rows[r]));
  }
  status.active_set = std::move(active);
  return status;
}

// ---------------------------------------------------------------------------
// Dual active-set QP

HessianFactor::HessianFactor(const Eigen::MatrixXd& H) : H_(H) {
  if (H.rows() != H.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "Hessian must be square");
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorCode::kInvalidArgument, "Hessian is not symmetric");
  }
  llt_.compute(H);
  if (llt_.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument, "Hessian is not positive definite");
  }
  const Eigen::MatrixXd L = llt_.matrixL();
  if (L.diagonal().minCoeff() <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "Hessian is not positive definite");
  }
  // J0 = L^{-T}, so that J0 J0' = H^{-1}.
  J0_ = L.transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(H.rows(), H.cols()));
}

namespace {

class DualActiveSet {
 public:
  DualActiveSet(const HessianFactor& factor, const Eigen::MatrixXd& A,
                const Eigen::VectorXd& b)
      : n_(factor.dim()),
        A_(A),
        b_(b),
        J_(factor.initial_basis()),
        R_(Eigen::MatrixXd::Zero(n_, n_)) {}

  // Appends the constraint whose transformed normal is d = J'np.
  bool add(Eigen::VectorXd d, int row, double multiplier) {
    for (int j = n_ - 1; j > iq_; --j) {
      double cc = d[j - 1];
      double ss = d[j];
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d[j] = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d[j - 1] = -h;
      } else {
        d[j - 1] = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = 0; k < n_; ++k) {
        const double t1 = J_(k, j - 1);
        const double t2 = J_(k, j);
        J_(k, j - 1) = t1 * cc + t2 * ss;
        J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
      }
    }
    R_.col(iq_).head(iq_ + 1) = d.head(iq_ + 1);
    ++iq_;
    active_.push_back(row);
    u_.push_back(multiplier);
    const double diag = std::abs(d[iq_ - 1]);
    r_norm_ = std::max(r_norm_, diag);
    return diag > std::numeric_limits<double>::epsilon() * r_norm_;
  }

  void remove(int pos) {
    for (int i = pos; i < iq_ - 1; ++i) {
      active_[i] = active_[i + 1];
      u_[i] = u_[i + 1];
      R_.col(i) = R_.col(i + 1);
    }
    active_.pop_back();
    u_.pop_back();
    R_.col(iq_ - 1).setZero();
    --iq_;
    for (int j = pos; j < iq_; ++j) {
      double cc = R_(j, j);
      double ss = R_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R_(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < iq_; ++k) {
        const double t1 = R_(j, k);
        const double t2 = R_(j + 1, k);
        R_(j, k) = t1 * cc + t2 * ss;
        R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
      }
      for (int k = 0; k < n_; ++k) {
        const double t1 = J_(k, j);
        const double t2 = J_(k, j + 1);
        J_(k, j) = t1 * cc + t2 * ss;
        J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
      }
    }
  }

  int n_;
  const Eigen::MatrixXd& A_;
  const Eigen::VectorXd& b_;
  Eigen::MatrixXd J_;
  Eigen::MatrixXd R_;
  int iq_ = 0;
  double r_norm_ = 1.0;
  std::vector<int> active_;
  std::vector<double> u_;
};

}  // namespace

SolveStatus solve_qp(const HessianFactor& factor, const Eigen::VectorXd& f,
                     const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const QpOptions& options, std::span<const int> warm_start) {
  const int n = factor.dim();
  const int m = static_cast<int>(A.rows());
  if (f.size() != n || A.cols() != n || b.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "QP data dimensions are inconsistent");
  }
  const int cap = options.max_iterations > 0 ? options.max_iterations : 10 * (m + n) + 100;

  Eigen::VectorXd row_scale(m);
  for (int i = 0; i < m; ++i) {
    row_scale[i] = std::max(1.0, A.row(i).lpNorm<Eigen::Infinity>());
  }

  DualActiveSet ws(factor, A, b);
  std::vector<char> in_active(m, 0);
  Eigen::VectorXd x = -factor.solve(f);
  SolveStatus status;
  int iterations = 0;

  auto finish = [&](SolveCode code) {
    status.code = code;
    status.iterations = iterations;
    if (code != SolveCode::kOptimal) return status;
    status.value = 0.5 * x.dot(factor.hessian() * x) + f.dot(x);
    status.multipliers = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < ws.iq_; ++j) status.multipliers[ws.active_[j]] = ws.u_[j];
    status.active_set = ws.active_;
    std::sort(status.active_set.begin(), status.active_set.end());
    status.minimizer = x;
    return status;
  };

  Eigen::VectorXd slack(m);
  for (;;) {
    slack.noalias() = b - A * x;
    auto most_violated = [&](auto&& candidates) {
      int p = -1;
      double worst = 0.0;
      for (int i : candidates) {
        if (in_active[i]) continue;
        const double s = slack[i] / row_scale[i];
        if (s < -options.feasibility_tol && s < worst) {
          worst = s;
          p = i;
        }
      }
      return p;
    };
    int p = -1;
    if (!warm_start.empty()) {
      std::vector<int> valid;
      for (int i : warm_start) {
        if (i >= 0 && i < m) valid.push_back(i);
      }
      p = most_violated(valid);
    }
    if (p < 0) {
      std::vector<int> all(m);
      for (int i = 0; i < m; ++i) all[i] = i;
      p = most_violated(all);
    }
    if (p < 0) return finish(SolveCode::kOptimal);

    const Eigen::VectorXd np = -A.row(p).transpose();
    double sp = slack[p];
    double up = 0.0;
    for (;;) {
      if (++iterations > cap) return finish(SolveCode::kIterationLimit);
      const int iq = ws.iq_;
      const Eigen::VectorXd d = ws.J_.transpose() * np;
      const Eigen::VectorXd z = ws.J_.rightCols(n - iq) * d.tail(n - iq);
      Eigen::VectorXd r(iq);
      if (iq > 0) {
        r = ws.R_.topLeftCorner(iq, iq).triangularView<Eigen::Upper>().solve(d.head(iq));
      }
      double t1 = kInf;
      int drop = -1;
      for (int j = 0; j < iq; ++j) {
        if (r[j] > 0.0) {
          const double ratio = ws.u_[j] / r[j];
          if (ratio < t1) {
            t1 = ratio;
            drop = j;
          }
        }
      }
      const double zz = z.squaredNorm();
      const double t2 = zz > std::numeric_limits<double>::epsilon() ? -sp / z.dot(np) : kInf;
      if (t1 == kInf && t2 == kInf) return finish(SolveCode::kInfeasible);
      if (t2 == kInf) {
        for (int j = 0; j < iq; ++j) ws.u_[j] -= t1 * r[j];
        up += t1;
        in_active[ws.active_[drop]] = 0;
        ws.remove(drop);
        continue;
      }
      const double t = std::min(t1, t2);
      x += t * z;
      for (int j = 0; j < iq; ++j) ws.u_[j] -= t * r[j];
      up += t;
      if (t2 <= t1) {
        if (!ws.add(d, p, up)) return finish(SolveCode::kIterationLimit);
        in_active[p] = 1;
        break;
      }
      in_active[ws.active_[drop]] = 0;
      ws.remove(drop);
      sp = b[p] - A.row(p).dot(x);
    }
  }
}

SolveStatus solve_qp(const QpProblem& problem, const QpOptions& options,
                     std::span<const int> warm_start) {
  const HessianFactor factor(problem.H);
  return solve_qp(factor, problem.f, problem.A, problem.b, options, warm_start);
}

}  // namespace fgmpc
