#include "fgmpc/mpc.hpp"

#include <numeric>
#include <string>

#include "fgmpc/error.hpp"

namespace fgmpc {

namespace {

Eigen::VectorXd stack(const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
  Eigen::VectorXd theta(x.size() + v.size());
  theta << x, v;
  return theta;
}

void check_theta(const OcpDesign& design, const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                 const char* where) {
  if (x.size() != design.terminal.nx || v.size() != design.terminal.nv) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(where) + ": state or reference dimension mismatch");
  }
}

}  // namespace

OcpDesign make_design(const LtiPlant& plant, const EquilibriumMap& em, const HPolyhedron& Y,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, int N,
                      double terminal_eps, const TerminalOptions& options) {
  if (N < 0) throw Error(ErrorCode::kInvalidArgument, "design: negative horizon");
  OcpDesign design;
  design.N = N;
  design.Q = Q;
  design.R = R;
  design.Y = Y;
  design.lqr = solve_dare(plant.A(), plant.B(), Q, R);
  design.terminal = terminal_set(plant, em, design.lqr, Y, terminal_eps, options);
  return design;
}

OcpConstraints ocp_constraints(const LtiPlant& plant, const OcpDesign& design, int horizon) {
  if (horizon < 0) throw Error(ErrorCode::kInvalidArgument, "ocp constraints: negative horizon");
  const int nx = plant.nx(), nu = plant.nu();
  const int nv = design.terminal.nv;
  const HPolyhedron& Y = design.Y;
  const HPolyhedron& T = design.terminal.set;
  const int mY = Y.rows(), mT = T.rows();
  const int cols = horizon * nu;

  OcpConstraints out;
  out.M = Eigen::MatrixXd::Zero(horizon * mY + mT, cols);
  out.L = Eigen::MatrixXd::Zero(horizon * mY + mT, nx + nv);
  out.b.resize(horizon * mY + mT);

  const Eigen::MatrixXd YC = Y.A() * plant.C();
  const Eigen::MatrixXd YD = Y.A() * plant.D();
  // xi_i = Xi_x x + Xi_mu mu.
  Eigen::MatrixXd Xi_x = Eigen::MatrixXd::Identity(nx, nx);
  Eigen::MatrixXd Xi_mu = Eigen::MatrixXd::Zero(nx, cols);
  for (int i = 0; i < horizon; ++i) {
    const int r0 = i * mY;
    out.M.block(r0, 0, mY, i * nu) = YC * Xi_mu.leftCols(i * nu);
    out.M.block(r0, i * nu, mY, nu) = YD;
    out.L.block(r0, 0, mY, nx) = YC * Xi_x;
    out.b.segment(r0, mY) = Y.b();
    Xi_x = plant.A() * Xi_x;
    Xi_mu.leftCols(i * nu) = plant.A() * Xi_mu.leftCols(i * nu);
    Xi_mu.middleCols(i * nu, nu) = plant.B();
  }
  const int r0 = horizon * mY;
  const Eigen::MatrixXd Tx = T.A().leftCols(nx);
  out.M.bottomRows(mT) = Tx * Xi_mu;
  out.L.block(r0, 0, mT, nx) = Tx * Xi_x;
  out.L.block(r0, nx, mT, nv) = T.A().rightCols(nv);
  out.b.tail(mT) = T.b();
  return out;
}

CondensedQp condense(const LtiPlant& plant, const EquilibriumMap& em, const OcpDesign& design) {
  const int N = design.N;
  const int nx = plant.nx(), nu = plant.nu(), nv = em.nv();
  if (design.Q.rows() != nx || design.Q.cols() != nx || design.R.rows() != nu ||
      design.R.cols() != nu || design.terminal.nx != nx || design.terminal.nv != nv) {
    throw Error(ErrorCode::kDimensionMismatch, "condense: design dimensions do not match the plant");
  }
  CondensedQp qp;
  qp.N = N;
  qp.nx = nx;
  qp.nu = nu;
  qp.nv = nv;
  const OcpConstraints cons = ocp_constraints(plant, design, N);
  qp.M = cons.M;
  qp.L = cons.L;
  qp.b = cons.b;
  qp.H.resize(N * nu, N * nu);
  qp.W.resize(N * nu, nx + nv);
  if (N == 0) return qp;

  // Stacked predictions (xi_1, ..., xi_N) = Phi x + Psi mu.
  Eigen::MatrixXd Phi(N * nx, nx);
  Eigen::MatrixXd Psi = Eigen::MatrixXd::Zero(N * nx, N * nu);
  Eigen::MatrixXd Apow = plant.A();
  for (int i = 0; i < N; ++i) {
    Phi.middleRows(i * nx, nx) = Apow;
    Apow = plant.A() * Apow;
    for (int j = 0; j <= i; ++j) {
      Psi.block(i * nx, j * nu, nx, nu) =
          i == j ? plant.B() : Eigen::MatrixXd(plant.A() * Psi.block((i - 1) * nx, j * nu, nx, nu));
    }
  }
  // Qbar Psi with Qbar = blkdiag(Q, ..., Q, P).
  Eigen::MatrixXd QPsi(N * nx, N * nu);
  Eigen::MatrixXd QPhi(N * nx, nx);
  Eigen::MatrixXd QGx(N * nx, nv);
  for (int i = 0; i < N; ++i) {
    const Eigen::MatrixXd& Wi = i + 1 == N ? design.lqr.P : design.Q;
    QPsi.middleRows(i * nx, nx) = Wi * Psi.middleRows(i * nx, nx);
    QPhi.middleRows(i * nx, nx) = Wi * Phi.middleRows(i * nx, nx);
    QGx.middleRows(i * nx, nx) = Wi * em.Gx;
  }
  qp.H = Psi.transpose() * QPsi;
  Eigen::MatrixXd RGu(N * nu, nv);
  for (int i = 0; i < N; ++i) {
    qp.H.block(i * nu, i * nu, nu, nu) += design.R;
    RGu.middleRows(i * nu, nu) = design.R * em.Gu;
  }
  qp.H = 0.5 * (qp.H + qp.H.transpose());
  qp.W.leftCols(nx) = Psi.transpose() * QPhi;
  qp.W.rightCols(nv) = -Psi.transpose() * QGx - RGu;
  qp.factor = std::make_shared<const HessianFactor>(qp.H);
  return qp;
}

double ocp_cost(const LtiPlant& plant, const EquilibriumMap& em, const OcpDesign& design,
                const Eigen::VectorXd& mu, const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
  const int N = design.N, nu = plant.nu();
  if (mu.size() != N * nu) throw Error(ErrorCode::kDimensionMismatch, "ocp cost: input sequence length");
  const Eigen::VectorXd xs = em.state(v);
  const Eigen::VectorXd us = em.input(v);
  Eigen::VectorXd xi = x;
  double cost = 0.0;
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd ui = mu.segment(i * nu, nu);
    cost += (xi - xs).dot(design.Q * (xi - xs)) + (ui - us).dot(design.R * (ui - us));
    xi = plant.A() * xi + plant.B() * ui;
  }
  return cost + (xi - xs).dot(design.lqr.P * (xi - xs));
}

FeedbackResult mpc_feedback(const CondensedQp& qp, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& v, std::span<const int> warm) {
  if (qp.N < 1 || !qp.factor) {
    throw Error(ErrorCode::kInvalidArgument, "mpc feedback: the horizon must be at least 1");
  }
  if (x.size() != qp.nx || v.size() != qp.nv) {
    throw Error(ErrorCode::kDimensionMismatch, "mpc feedback: state or reference dimension mismatch");
  }
  const Eigen::VectorXd theta = stack(x, v);
  const SolveStatus st = solve_qp(*qp.factor, qp.W * theta, qp.M, qp.b - qp.L * theta, {}, warm);
  if (st.code == SolveCode::kInfeasible) {
    throw Error(ErrorCode::kInfeasible, "OCP infeasible at (x, v)");
  }
  if (!st.optimal()) {
    throw Error(ErrorCode::kSolverFailure, "mpc feedback: QP iteration limit reached");
  }
  FeedbackResult out;
  out.mu = *st.minimizer;
  out.u = out.mu.head(qp.nu);
  out.active_set = st.active_set;
  out.iterations = st.iterations;
  return out;
}

HPolyhedron feasible_set(const CondensedQp& qp, const PolytopeOptions& options) {
  const int cols = qp.N * qp.nu;
  Eigen::MatrixXd A(qp.M.rows(), cols + qp.nx + qp.nv);
  A << qp.M, qp.L;
  std::vector<int> keep(qp.nx + qp.nv);
  std::iota(keep.begin(), keep.end(), cols);
  return project(HPolyhedron(A, qp.b, options.zero_row_tol), keep, options);
}

bool ocp_feasible(const LtiPlant& plant, const OcpDesign& design, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& v, int horizon) {
  check_theta(design, x, v, "ocp feasibility");
  const Eigen::VectorXd theta = stack(x, v);
  if (horizon == 0) return design.terminal.set.contains_point(theta, 1e-8);
  const OcpConstraints cons = ocp_constraints(plant, design, horizon);
  const Eigen::VectorXd rhs = cons.b - cons.L * theta;
  // Rows without input dependence decide feasibility on their own.
  for (Eigen::Index i = 0; i < rhs.size(); ++i) {
    if (rhs[i] < -1e-8 && cons.M.row(i).lpNorm<Eigen::Infinity>() < 1e-12) return false;
  }
  const SolveStatus st = find_feasible_point(cons.M, rhs);
  if (st.code == SolveCode::kIterationLimit) {
    throw Error(ErrorCode::kSolverFailure, "ocp feasibility: LP hit the pivot cap");
  }
  return st.optimal();
}

NStarResult n_star(const LtiPlant& plant, const OcpDesign& design, const Eigen::VectorXd& x0,
                   const Eigen::VectorXd& r, int cap) {
  if (cap < 0) throw Error(ErrorCode::kInvalidArgument, "n_star: negative cap");
  NStarResult out;
  for (int i = 0; i <= cap; ++i) {
    const bool ok = ocp_feasible(plant, design, x0, r, i);
    out.scan.push_back(ok);
    if (ok) {
      out.n_star = i;
      return out;
    }
  }
  throw Error(ErrorCode::kNoFeasibleHorizon,
              "no feasible horizon <= " + std::to_string(cap));
}

}  // namespace fgmpc
