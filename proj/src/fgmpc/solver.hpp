#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

namespace fgmpc {

enum class SolveCode { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(SolveCode code);

/// Outcome of an LP or QP solve. `minimizer` is engaged iff code is kOptimal.
struct SolveStatus {
  SolveCode code = SolveCode::kIterationLimit;
  std::optional<Eigen::VectorXd> minimizer;
  double value = 0.0;
  // One multiplier per constraint row (zero for inactive rows).
  Eigen::VectorXd multipliers;
  // Rows tight at the returned point, in ascending order.
  std::vector<int> active_set;
  int iterations = 0;

  bool optimal() const { return code == SolveCode::kOptimal; }
};

/// maximize c'x subject to A x <= b, x free.
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

struct LpOptions {
  double pivot_tol = 1e-10;
  double optimality_tol = 1e-9;
  // Phase-1 residual above this (scaled by max(1, |c|_inf)) means infeasible.
  double infeasibility_tol = 1e-8;
  // 0 selects the default cap of 50 * (m + n) pivots.
  int max_pivots = 0;
  // Consecutive degenerate pivots tolerated before switching to Bland's rule.
  int degenerate_streak = 32;
  bool bland_only = false;
};

/// Two-phase primal simplex. The tableau is built on the standard-form dual
/// (min b'y s.t. A'y = c, y >= 0), which has one row per primal variable, so
/// problems with many more constraints than variables stay small. The primal
/// point is read off the simplex multipliers.
SolveStatus solve_lp(const LpProblem& problem, const LpOptions& options = {});

/// Feasibility of {x : A x <= b}. The returned status carries a witness point
/// when feasible (code kOptimal), otherwise kInfeasible.
SolveStatus find_feasible_point(const Eigen::MatrixXd& A,
                                const Eigen::VectorXd& b,
                                const LpOptions& options = {});

/// minimize 1/2 x'Hx + f'x subject to A x <= b, H symmetric positive definite.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

struct QpOptions {
  // A row counts as violated when its slack is below -feasibility_tol.
  double feasibility_tol = 1e-9;
  // 0 selects 10 * (m + n) + 100 active-set changes.
  int max_iterations = 0;
};

/// Cholesky factor of the Hessian together with the initial dual active-set
/// basis J = L^{-T}. Reusable across solves that share H.
class HessianFactor {
 public:
  explicit HessianFactor(const Eigen::MatrixXd& H);

  int dim() const { return static_cast<int>(H_.rows()); }
  const Eigen::MatrixXd& hessian() const { return H_; }
  const Eigen::MatrixXd& initial_basis() const { return J0_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

 private:
  Eigen::MatrixXd H_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd J0_;
};

/// Goldfarb-Idnani dual active-set method. `warm_start` lists rows that were
/// active in a previous related solve; violated rows among them are added
/// first. The result's active_set is suitable as the next warm start.
SolveStatus solve_qp(const HessianFactor& factor, const Eigen::VectorXd& f,
                     const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const QpOptions& options = {},
                     std::span<const int> warm_start = {});

SolveStatus solve_qp(const QpProblem& problem, const QpOptions& options = {},
                     std::span<const int> warm_start = {});

}  // namespace fgmpc
