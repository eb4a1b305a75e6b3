#include "fgmpc/governor.hpp"

#include <numeric>
#include <string>

#include "fgmpc/error.hpp"

namespace fgmpc {

GovernorProblem::GovernorProblem(HPolyhedron admissible, HPolyhedron reference_set, int nx,
                                 const PolytopeOptions& options)
    : nx_(nx),
      nv_(admissible.dim() - nx),
      admissible_(std::move(admissible)),
      reference_set_(std::move(reference_set)) {
  if (nx_ < 1 || nv_ < 1 || reference_set_.dim() != nv_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "governor: admissible set and reference set dimensions are inconsistent");
  }
  Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(reference_set_.rows(), nx_ + nv_);
  lifted.rightCols(nv_) = reference_set_.A();
  const HPolyhedron joint = intersect(admissible_, HPolyhedron(lifted, reference_set_.b()));
  if (is_empty(joint)) {
    throw Error(ErrorCode::kEmptySet, "governor: the governed set is empty");
  }
  joint_ = remove_redundancy(joint, options);
  x_part_ = joint_.A().leftCols(nx_);
  v_part_ = joint_.A().rightCols(nv_);
  identity_ = std::make_shared<const HessianFactor>(Eigen::MatrixXd::Identity(nv_, nv_));
}

Eigen::VectorXd governor_step(const GovernorProblem& gp, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& r, GovernorState* state) {
  if (x.size() != gp.nx() || r.size() != gp.nv()) {
    throw Error(ErrorCode::kDimensionMismatch, "governor: state or reference dimension mismatch");
  }
  const Eigen::VectorXd rhs = gp.joint().b() - gp.x_part() * x;
  std::span<const int> warm;
  if (state) warm = state->active_set;
  const SolveStatus st = solve_qp(gp.identity_factor(), -r, gp.v_part(), rhs, {}, warm);
  if (st.code == SolveCode::kInfeasible) {
    throw Error(ErrorCode::kOutsideRoa, "state outside governed ROA");
  }
  if (!st.optimal()) {
    throw Error(ErrorCode::kSolverFailure, "governor: QP iteration limit reached");
  }
  if (state) {
    state->v = *st.minimizer;
    state->active_set = st.active_set;
    state->iterations = st.iterations;
  }
  return *st.minimizer;
}

HPolyhedron roa(const GovernorProblem& gp, const PolytopeOptions& options) {
  std::vector<int> keep(gp.nx());
  std::iota(keep.begin(), keep.end(), 0);
  return project(gp.joint(), keep, options);
}

}  // namespace fgmpc
