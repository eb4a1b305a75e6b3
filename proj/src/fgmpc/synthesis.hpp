#pragma once

#include <Eigen/Dense>

#include "fgmpc/plant.hpp"
#include "fgmpc/polytope.hpp"

namespace fgmpc {

struct RiccatiSolution {
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;
  // Frobenius norm of the DARE residual at P.
  double residual = 0.0;
  int iterations = 0;
};

struct DareOptions {
  int max_iterations = 10000;
  double tol = 1e-8;
};

/// Stabilizing solution of P = Q + A'PA - A'PB (R + B'PB)^-1 B'PA and the gain
/// K = (R + B'PB)^-1 B'PA. Requires Q >= 0 with (A, Q) detectable and R > 0.
RiccatiSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           const DareOptions& options = {});

double spectral_radius(const Eigen::MatrixXd& M);

/// Invariant, output-admissible set of (x, v) under u = -K x + (Gu + K Gx) v,
/// stored as one polyhedron over the stacked (x, v).
struct TerminalSet {
  HPolyhedron set;
  int nx = 0;
  int nv = 0;
  // Number of look-ahead layers after which the iteration stopped adding rows.
  int determination_index = 0;

  Eigen::MatrixXd Tx() const { return set.A().leftCols(nx); }
  Eigen::MatrixXd Tv() const { return set.A().rightCols(nv); }
  const Eigen::VectorXd& c() const { return set.b(); }
};

struct TerminalOptions {
  int max_iterations = 500;
  PolytopeOptions polytope;
};

/// Closed-loop dynamics on w = (x, v) used by the terminal set.
struct AugmentedLoop {
  Eigen::MatrixXd Aw;  // (nx + nv) square
  Eigen::MatrixXd Cw;  // ny x (nx + nv), output under the feedback law
};

AugmentedLoop augmented_loop(const LtiPlant& plant, const EquilibriumMap& em,
                             const Eigen::MatrixXd& K);

/// Output constraints are imposed at every future step; only the steady-state
/// rows use the (1 - eps) tightening. Throws kNotFinitelyDetermined when
/// options.max_iterations layers do not suffice.
TerminalSet terminal_set(const LtiPlant& plant, const EquilibriumMap& em,
                         const RiccatiSolution& lqr, const HPolyhedron& Y, double eps,
                         const TerminalOptions& options = {});

}  // namespace fgmpc
