#include "fgmpc/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <string>
#include <vector>

#include "fgmpc/error.hpp"
#include "fgmpc/solver.hpp"

namespace fgmpc {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

Eigen::MatrixXd dare_rhs(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                         const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd BtPA = B.transpose() * P * A;
  const Eigen::MatrixXd S = R + B.transpose() * P * B;
  return symmetrize(Q + A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA));
}

void check_weights(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                   const Eigen::MatrixXd& R) {
  const Eigen::Index n = A.rows(), m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
      R.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "dare: inconsistent matrix dimensions");
  }
  const double qscale = std::max(1.0, Q.norm());
  if ((Q - Q.transpose()).norm() > 1e-10 * qscale) {
    throw Error(ErrorCode::kAssumptionViolated, "dare: Q is not symmetric");
  }
  if ((R - R.transpose()).norm() > 1e-10 * std::max(1.0, R.norm())) {
    throw Error(ErrorCode::kAssumptionViolated, "dare: R is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(symmetrize(Q));
  if (qe.eigenvalues().minCoeff() < -1e-10 * qscale) {
    throw Error(ErrorCode::kAssumptionViolated, "dare: Q is not positive semidefinite");
  }
  if (symmetrize(R).llt().info() != Eigen::Success) {
    throw Error(ErrorCode::kAssumptionViolated, "dare: R is not positive definite");
  }
  const Eigen::MatrixXd Qhalf = qe.eigenvectors() *
                                qe.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                qe.eigenvectors().transpose();
  if (!is_detectable(A, Qhalf)) {
    throw Error(ErrorCode::kAssumptionViolated, "dare: (A, Q) is not detectable");
  }
  if (!is_stabilizable(A, B)) {
    throw Error(ErrorCode::kAssumptionViolated, "dare: (A, B) is not stabilizable");
  }
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::EigenSolver<Eigen::MatrixXd>(M, false).eigenvalues().cwiseAbs().maxCoeff();
}

RiccatiSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           const DareOptions& options) {
  check_weights(A, B, Q, R);
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  // Structure-preserving doubling: H_k converges quadratically to P.
  Eigen::MatrixXd Ak = A;
  Eigen::MatrixXd G = symmetrize(B * R.llt().solve(B.transpose()));
  Eigen::MatrixXd H = symmetrize(Q);
  int iterations = 0;
  for (; iterations < options.max_iterations; ++iterations) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> W(I + G * H);
    const Eigen::MatrixXd WA = W.solve(Ak);
    const Eigen::MatrixXd WG = W.solve(G);
    const Eigen::MatrixXd H_next = symmetrize(H + Ak.transpose() * H * WA);
    G = symmetrize(G + Ak * WG * Ak.transpose());
    Ak = Ak * WA;
    const double change = (H_next - H).norm();
    H = H_next;
    if (!H.allFinite()) break;
    if (change <= 1e-14 * std::max(1.0, H.norm())) break;
  }

  // Fixed-point sweeps remove the last rounding error of the doubling.
  Eigen::MatrixXd P = H;
  double residual = (dare_rhs(A, B, Q, R, P) - P).norm();
  for (int sweep = 0; sweep < 50 && residual > 0.1 * options.tol && P.allFinite(); ++sweep) {
    const Eigen::MatrixXd next = dare_rhs(A, B, Q, R, P);
    const double next_residual = (dare_rhs(A, B, Q, R, next) - next).norm();
    if (next_residual >= residual) break;
    P = next;
    residual = next_residual;
  }
  if (!P.allFinite() || residual > options.tol || iterations >= options.max_iterations) {
    throw Error(ErrorCode::kNonConvergence,
                "dare: no convergence (residual " + std::to_string(residual) + " after " +
                    std::to_string(iterations) + " iterations)");
  }

  RiccatiSolution out;
  out.P = P;
  out.K = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
  out.residual = residual;
  out.iterations = iterations;
  if (spectral_radius(A - B * out.K) >= 1.0) {
    throw Error(ErrorCode::kNonConvergence, "dare: closed loop A - BK is not Schur stable");
  }
  return out;
}

AugmentedLoop augmented_loop(const LtiPlant& plant, const EquilibriumMap& em,
                             const Eigen::MatrixXd& K) {
  const int nx = plant.nx(), nv = em.nv();
  const Eigen::MatrixXd L = em.Gu + K * em.Gx;
  AugmentedLoop loop;
  loop.Aw = Eigen::MatrixXd::Zero(nx + nv, nx + nv);
  loop.Aw.topLeftCorner(nx, nx) = plant.A() - plant.B() * K;
  loop.Aw.topRightCorner(nx, nv) = plant.B() * L;
  loop.Aw.bottomRightCorner(nv, nv).setIdentity();
  loop.Cw.resize(plant.ny(), nx + nv);
  loop.Cw << plant.C() - plant.D() * K, plant.D() * L;
  return loop;
}

TerminalSet terminal_set(const LtiPlant& plant, const EquilibriumMap& em,
                         const RiccatiSolution& lqr, const HPolyhedron& Y, double eps,
                         const TerminalOptions& options) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "terminal set: epsilon must lie in (0, 1), got " + std::to_string(eps));
  }
  if (Y.dim() != plant.ny()) {
    throw Error(ErrorCode::kDimensionMismatch, "terminal set: Y dimension mismatch");
  }
  const int nx = plant.nx(), nv = em.nv();
  const AugmentedLoop loop = augmented_loop(plant, em, lqr.K);
  const double tol = options.polytope.tol;

  // Steady-state rows, tightened.
  Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(Y.rows(), nx + nv);
  ss.rightCols(nv) = Y.A() * steady_state_output(plant, em);
  Eigen::MatrixXd rows(2 * Y.rows(), nx + nv);
  rows << ss, Y.A() * loop.Cw;
  Eigen::VectorXd rhs(2 * Y.rows());
  rhs << (1.0 - eps) * Y.b(), Y.b();
  HPolyhedron current = remove_redundancy(HPolyhedron(rows, rhs), options.polytope);

  Eigen::MatrixXd Ct = loop.Cw;
  for (int t = 1; t <= options.max_iterations; ++t) {
    Ct = Ct * loop.Aw;
    const HPolyhedron layer(Y.A() * Ct, Y.b());
    std::vector<int> fresh;
    for (int i = 0; i < layer.rows(); ++i) {
      const SolveStatus st = solve_lp({layer.A().row(i).transpose(), current.A(), current.b()});
      if (st.code == SolveCode::kIterationLimit) {
        throw Error(ErrorCode::kSolverFailure, "terminal set: LP hit the pivot cap");
      }
      if (st.code == SolveCode::kInfeasible) {
        throw Error(ErrorCode::kEmptySet, "terminal set: constraint set became empty");
      }
      if (st.code == SolveCode::kUnbounded || st.value > layer.b()[i] + tol) fresh.push_back(i);
    }
    if (fresh.empty()) {
      TerminalSet out;
      out.set = current;
      out.nx = nx;
      out.nv = nv;
      out.determination_index = t - 1;
      return out;
    }
    Eigen::MatrixXd A(current.rows() + static_cast<Eigen::Index>(fresh.size()), nx + nv);
    Eigen::VectorXd b(A.rows());
    A.topRows(current.rows()) = current.A();
    b.head(current.rows()) = current.b();
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      A.row(current.rows() + k) = layer.A().row(fresh[k]);
      b[current.rows() + k] = layer.b()[fresh[k]];
    }
    current = remove_redundancy(HPolyhedron(A, b), options.polytope);
  }
  throw Error(ErrorCode::kNotFinitelyDetermined,
              "terminal set not finitely determined within " +
                  std::to_string(options.max_iterations) + " iterations");
}

}  // namespace fgmpc
