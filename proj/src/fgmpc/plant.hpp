#pragma once

#include <Eigen/Dense>

#include "fgmpc/polytope.hpp"

namespace fgmpc {

/// Discrete-time LTI plant
///   x+ = A x + B u,  y = C x + D u (constrained),  z = E x + F u (tracked).
///
/// The constructor checks dimensions and that (A, B) is stabilizable.
class LtiPlant {
 public:
  LtiPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C, Eigen::MatrixXd D,
           Eigen::MatrixXd E, Eigen::MatrixXd F, double sample_time = 0.0);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& C() const { return C_; }
  const Eigen::MatrixXd& D() const { return D_; }
  const Eigen::MatrixXd& E() const { return E_; }
  const Eigen::MatrixXd& F() const { return F_; }
  double sample_time() const { return sample_time_; }

  int nx() const { return static_cast<int>(A_.rows()); }
  int nu() const { return static_cast<int>(B_.cols()); }
  int ny() const { return static_cast<int>(C_.rows()); }
  int nz() const { return static_cast<int>(E_.rows()); }

 private:
  Eigen::MatrixXd A_, B_, C_, D_, E_, F_;
  double sample_time_;
};

/// Equilibrium parameterization x = Gx v, u = Gu v, z = Gz v with Gz = I.
struct EquilibriumMap {
  Eigen::MatrixXd Gx;
  Eigen::MatrixXd Gu;
  Eigen::MatrixXd Gz;

  int nv() const { return static_cast<int>(Gx.cols()); }
  Eigen::VectorXd state(const Eigen::VectorXd& v) const { return Gx * v; }
  Eigen::VectorXd input(const Eigen::VectorXd& v) const { return Gu * v; }
};

/// Kernel basis of [[A - I, B, 0], [E, F, -I]] normalized so that Gz = I.
/// Throws kAssumptionViolated when the kernel dimension differs from nz or
/// Gz is singular.
EquilibriumMap equilibrium_basis(const LtiPlant& plant);

/// Steady-state output map C Gx + D Gu.
Eigen::MatrixXd steady_state_output(const LtiPlant& plant, const EquilibriumMap& em);

/// References whose steady-state output lies in (1 - eps) Y, redundancy
/// removed. Requires 0 in the interior of Y and 0 < eps < 1.
HPolyhedron steady_state_ref_set(const LtiPlant& plant, const EquilibriumMap& em,
                                 const HPolyhedron& Y, double eps);

/// Closest point of R to r in the Euclidean norm.
Eigen::VectorXd project_reference(const HPolyhedron& R, const Eigen::VectorXd& r);

struct StepResult {
  Eigen::VectorXd x_next;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
};

StepResult step(const LtiPlant& plant, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

/// PBH test: every eigenvalue of A with modulus >= 1 is controllable.
bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol = 1e-8);

/// PBH test on the dual pair: every eigenvalue of A with modulus >= 1 is
/// observable through C.
bool is_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double tol = 1e-8);

}  // namespace fgmpc
