#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "fgmpc/polytope.hpp"
#include "fgmpc/solver.hpp"

namespace fgmpc {

/// Reference governor data over theta = (x, v): an admissible set of (x, v)
/// pairs (the feasible set for the feasibility governor, the terminal set for
/// the command governor), the reference set, and their intersection.
class GovernorProblem {
 public:
  GovernorProblem(HPolyhedron admissible, HPolyhedron reference_set, int nx,
                  const PolytopeOptions& options = {});

  int nx() const { return nx_; }
  int nv() const { return nv_; }
  const HPolyhedron& admissible() const { return admissible_; }
  const HPolyhedron& reference_set() const { return reference_set_; }
  /// admissible ∩ (R^nx x reference_set), redundancy removed.
  const HPolyhedron& joint() const { return joint_; }
  const Eigen::MatrixXd& x_part() const { return x_part_; }
  const Eigen::MatrixXd& v_part() const { return v_part_; }
  const HessianFactor& identity_factor() const { return *identity_; }

 private:
  int nx_;
  int nv_;
  HPolyhedron admissible_;
  HPolyhedron reference_set_;
  HPolyhedron joint_;
  Eigen::MatrixXd x_part_;
  Eigen::MatrixXd v_part_;
  std::shared_ptr<const HessianFactor> identity_;
};

/// Per-loop governor memory: the last reference and the active set used to
/// warm start the next solve.
struct GovernorState {
  Eigen::VectorXd v;
  std::vector<int> active_set;
  int iterations = 0;
};

/// argmin ||v - r||^2 over the slice {v : (x, v) in joint}. Throws kOutsideRoa
/// when the slice is empty. Updates `state` when given.
Eigen::VectorXd governor_step(const GovernorProblem& gp, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& r, GovernorState* state = nullptr);

/// Feasibility governor step over the feasible set.
inline Eigen::VectorXd fg_step(const GovernorProblem& gp, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& r, GovernorState* state = nullptr) {
  return governor_step(gp, x, r, state);
}

/// Command governor step; `gp` must be built over the terminal set.
inline Eigen::VectorXd cg_step(const GovernorProblem& gp, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& r, GovernorState* state = nullptr) {
  return governor_step(gp, x, r, state);
}

/// States from which the governed loop is defined: the projection of the
/// joint set onto x.
HPolyhedron roa(const GovernorProblem& gp, const PolytopeOptions& options = {});

}  // namespace fgmpc
