#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "fgmpc/plant.hpp"
#include "fgmpc/polytope.hpp"
#include "fgmpc/solver.hpp"
#include "fgmpc/synthesis.hpp"

namespace fgmpc {

/// Tracking OCP data: horizon, weights, LQR terminal ingredients and the
/// output constraint set. N = 0 is accepted for set construction only.
struct OcpDesign {
  int N = 1;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  HPolyhedron Y;
  RiccatiSolution lqr;
  TerminalSet terminal;
};

/// Solves the DARE, builds the terminal set with tightening terminal_eps and
/// packages everything.
OcpDesign make_design(const LtiPlant& plant, const EquilibriumMap& em, const HPolyhedron& Y,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, int N,
                      double terminal_eps, const TerminalOptions& options = {});

/// Constraint rows M mu + L theta <= b over mu = (mu_0, ..., mu_{N-1}) and
/// theta = (x, v). Output rows for stages 0..N-1 come first (stage-major, in
/// the row order of Y), then the terminal rows.
struct OcpConstraints {
  Eigen::MatrixXd M;
  Eigen::MatrixXd L;
  Eigen::VectorXd b;
};

OcpConstraints ocp_constraints(const LtiPlant& plant, const OcpDesign& design, int horizon);

/// min 0.5 mu'H mu + mu'W theta  s.t.  M mu + L theta <= b.
///
/// The objective is one half of the OCP cost minus a mu-independent term.
struct CondensedQp {
  int N = 0;
  int nx = 0;
  int nu = 0;
  int nv = 0;
  Eigen::MatrixXd H;
  Eigen::MatrixXd W;
  Eigen::MatrixXd M;
  Eigen::MatrixXd L;
  Eigen::VectorXd b;
  // Cholesky data of H shared by every online solve; null when N = 0.
  std::shared_ptr<const HessianFactor> factor;
};

CondensedQp condense(const LtiPlant& plant, const EquilibriumMap& em, const OcpDesign& design);

/// Full OCP cost at (mu, x, v) evaluated by explicit rollout. Used to check
/// the condensed objective.
double ocp_cost(const LtiPlant& plant, const EquilibriumMap& em, const OcpDesign& design,
                const Eigen::VectorXd& mu, const Eigen::VectorXd& x, const Eigen::VectorXd& v);

struct FeedbackResult {
  Eigen::VectorXd u;
  Eigen::VectorXd mu;
  std::vector<int> active_set;
  int iterations = 0;
};

/// First input of the OCP minimizer. Throws kInfeasible when the OCP has no
/// solution at (x, v). `warm` seeds the active set.
FeedbackResult mpc_feedback(const CondensedQp& qp, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& v, std::span<const int> warm = {});

/// Projection of the constraint polyhedron onto theta = (x, v).
HPolyhedron feasible_set(const CondensedQp& qp, const PolytopeOptions& options = {});

/// Whether the horizon-`horizon` OCP admits a solution at (x, v), by a
/// feasibility LP.
bool ocp_feasible(const LtiPlant& plant, const OcpDesign& design, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& v, int horizon);

struct NStarResult {
  int n_star = -1;
  // Feasibility verdicts for horizons 0..n_star.
  std::vector<bool> scan;
};

/// Smallest horizon in [0, cap] for which the OCP is feasible at (x0, r).
/// Throws kNoFeasibleHorizon when none is.
NStarResult n_star(const LtiPlant& plant, const OcpDesign& design, const Eigen::VectorXd& x0,
                   const Eigen::VectorXd& r, int cap);

}  // namespace fgmpc
