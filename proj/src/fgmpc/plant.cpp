#include "fgmpc/plant.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <complex>
#include <string>

#include "fgmpc/error.hpp"
#include "fgmpc/solver.hpp"

namespace fgmpc {

namespace {

void require_shape(const Eigen::MatrixXd& M, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string("plant: ") + name + " is " + std::to_string(M.rows()) + "x" +
                    std::to_string(M.cols()) + ", expected " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
  if (!M.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("plant: ") + name + " has non-finite entries");
  }
}

// Smallest singular value of [A - lambda I, B] over the unstable eigenvalues
// of A, relative to the scale of the pencil.
bool pbh_full_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol) {
  const Eigen::Index n = A.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  const double scale = std::max(1.0, std::max(A.norm(), B.norm()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()[i];
    if (std::abs(lambda) < 1.0 - tol) continue;
    Eigen::MatrixXcd pencil(n, n + B.cols());
    pencil.leftCols(n) = A.cast<std::complex<double>>();
    pencil.leftCols(n).diagonal().array() -= lambda;
    pencil.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    if (svd.singularValues()[n - 1] < tol * scale) return false;
  }
  return true;
}

}  // namespace

LtiPlant::LtiPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C, Eigen::MatrixXd D,
                   Eigen::MatrixXd E, Eigen::MatrixXd F, double sample_time)
    : A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)),
      D_(std::move(D)),
      E_(std::move(E)),
      F_(std::move(F)),
      sample_time_(sample_time) {
  const Eigen::Index n = A_.rows();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "plant: empty state");
  require_shape(A_, n, n, "A");
  require_shape(B_, n, B_.cols(), "B");
  if (B_.cols() == 0) throw Error(ErrorCode::kInvalidArgument, "plant: no inputs");
  require_shape(C_, C_.rows(), n, "C");
  require_shape(D_, C_.rows(), B_.cols(), "D");
  require_shape(E_, E_.rows(), n, "E");
  require_shape(F_, E_.rows(), B_.cols(), "F");
  if (E_.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "plant: no tracking outputs");
  if (!(sample_time_ >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "plant: negative sample time");
  if (!is_stabilizable(A_, B_)) {
    throw Error(ErrorCode::kAssumptionViolated, "plant: (A, B) is not stabilizable");
  }
}

bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol) {
  return pbh_full_rank(A, B, tol);
}

bool is_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double tol) {
  return pbh_full_rank(A.transpose(), C.transpose(), tol);
}

EquilibriumMap equilibrium_basis(const LtiPlant& plant) {
  const int nx = plant.nx(), nu = plant.nu(), nz = plant.nz();
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(nx + nz, nx + nu + nz);
  Z.block(0, 0, nx, nx) = plant.A() - Eigen::MatrixXd::Identity(nx, nx);
  Z.block(0, nx, nx, nu) = plant.B();
  Z.block(nx, 0, nz, nx) = plant.E();
  Z.block(nx, nx, nz, nu) = plant.F();
  Z.block(nx, nx + nu, nz, nz) = -Eigen::MatrixXd::Identity(nz, nz);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv.maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv[i] > cutoff;
  const int kernel_dim = static_cast<int>(Z.cols()) - rank;
  if (kernel_dim == 0) {
    throw Error(ErrorCode::kAssumptionViolated, "equilibrium: the equilibrium kernel is trivial");
  }
  if (kernel_dim != nz) {
    throw Error(ErrorCode::kAssumptionViolated,
                "equilibrium: kernel dimension " + std::to_string(kernel_dim) +
                    " differs from the number of tracked outputs " + std::to_string(nz) +
                    " (assumption: Gz invertible)");
  }
  const Eigen::MatrixXd kernel = svd.matrixV().rightCols(kernel_dim);
  const Eigen::MatrixXd Gz_raw = kernel.bottomRows(nz);
  Eigen::JacobiSVD<Eigen::MatrixXd> gz_svd(Gz_raw);
  if (gz_svd.singularValues()[nz - 1] < 1e-10) {
    throw Error(ErrorCode::kAssumptionViolated,
                "equilibrium: Gz is singular (assumption: Gz invertible)");
  }

  // With Gz = I the remaining blocks solve [[A - I, B], [E, F]] [Gx; Gu] = [0; I]
  // uniquely; solving directly avoids round-off from the SVD basis.
  const Eigen::MatrixXd S = Z.leftCols(nx + nu);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nx + nz, nz);
  rhs.bottomRows(nz) = Eigen::MatrixXd::Identity(nz, nz);
  Eigen::MatrixXd G = S.colPivHouseholderQr().solve(rhs);
  G = G.unaryExpr([](double g) { return std::abs(g) < 1e-15 ? 0.0 : g; });

  EquilibriumMap em;
  em.Gx = G.topRows(nx);
  em.Gu = G.bottomRows(nu);
  em.Gz = Eigen::MatrixXd::Identity(nz, nz);
  Eigen::MatrixXd full(nx + nu + nz, nz);
  full << em.Gx, em.Gu, em.Gz;
  const double residual = (Z * full).lpNorm<Eigen::Infinity>();
  if (residual > 1e-10 * std::max(1.0, Z.lpNorm<Eigen::Infinity>())) {
    throw Error(ErrorCode::kNonConvergence,
                "equilibrium: basis residual " + std::to_string(residual) + " too large");
  }
  return em;
}

Eigen::MatrixXd steady_state_output(const LtiPlant& plant, const EquilibriumMap& em) {
  return plant.C() * em.Gx + plant.D() * em.Gu;
}

HPolyhedron steady_state_ref_set(const LtiPlant& plant, const EquilibriumMap& em,
                                 const HPolyhedron& Y, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "steady-state reference set: epsilon must lie in (0, 1), got " + std::to_string(eps));
  }
  if (Y.dim() != plant.ny()) {
    throw Error(ErrorCode::kDimensionMismatch, "steady-state reference set: Y dimension mismatch");
  }
  if (Y.rows() > 0 && Y.b().minCoeff() <= 0.0) {
    throw Error(ErrorCode::kAssumptionViolated,
                "steady-state reference set: the origin must lie in the interior of Y");
  }
  const HPolyhedron shrunk = scale(Y, 1.0 - eps);
  const HPolyhedron R(shrunk.A() * steady_state_output(plant, em), shrunk.b());
  if (R.rows() == 0) return R;
  return remove_redundancy(R);
}

Eigen::VectorXd project_reference(const HPolyhedron& R, const Eigen::VectorXd& r) {
  if (r.size() != R.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "reference projection: dimension mismatch");
  }
  if (R.contains_point(r, 0.0)) return r;
  const int n = R.dim();
  const SolveStatus st = solve_qp({Eigen::MatrixXd::Identity(n, n), -r, R.A(), R.b()});
  if (!st.optimal()) {
    throw Error(ErrorCode::kEmptySet, "reference projection: the reference set is empty");
  }
  return *st.minimizer;
}

StepResult step(const LtiPlant& plant, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  if (x.size() != plant.nx() || u.size() != plant.nu()) {
    throw Error(ErrorCode::kDimensionMismatch, "step: state or input dimension mismatch");
  }
  return {plant.A() * x + plant.B() * u, plant.C() * x + plant.D() * u,
          plant.E() * x + plant.F() * u};
}

}  // namespace fgmpc
