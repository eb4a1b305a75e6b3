#include "fgmpc/mpc.hpp"

#include <gtest/gtest.h>

#include <random>

#include "fgmpc/error.hpp"
#include "support/systems.hpp"

namespace fgmpc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing::mat;
using testing::vec;

struct Case {
  LtiPlant plant;
  EquilibriumMap em;
  OcpDesign design;
  CondensedQp qp;
};

Case make(LtiPlant plant, const HPolyhedron& Y, const MatrixXd& Q, int N, double eps) {
  EquilibriumMap em = equilibrium_basis(plant);
  OcpDesign design = make_design(plant, em, Y, Q, MatrixXd::Identity(plant.nu(), plant.nu()), N, eps);
  CondensedQp qp = condense(plant, em, design);
  return {std::move(plant), std::move(em), std::move(design), std::move(qp)};
}

Case scalar(int N) {
  return make(testing::scalar_integrator(), testing::scalar_box(), mat(1, 1, {1}), N, 0.05);
}

Case di_default(int N) {
  return make(testing::double_integrator(), testing::di_default_box(), MatrixXd::Identity(2, 2), N, 0.01);
}

VectorXd theta_of(const VectorXd& x, const VectorXd& v) {
  VectorXd t(x.size() + v.size());
  t << x, v;
  return t;
}

TEST(Condense, OneStepHessianByHand) {
  const Case s = scalar(1);
  const MatrixXd B = s.plant.B();
  const MatrixXd expected = s.design.R + B.transpose() * s.design.lqr.P * B;
  EXPECT_NEAR(s.qp.H(0, 0), expected(0, 0), 1e-12);
}

TEST(Condense, ObjectiveIsHalfTheOcpCostUpToConstant) {
  const Case s = di_default(6);
  std::mt19937 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd x = vec({normal(rng), normal(rng)});
    const VectorXd v = vec({normal(rng)});
    const VectorXd theta = theta_of(x, v);
    double offset = 0.0;
    for (int k = 0; k < 5; ++k) {
      VectorXd mu(6);
      for (int i = 0; i < 6; ++i) mu[i] = normal(rng);
      const double condensed = 0.5 * mu.dot(s.qp.H * mu) + mu.dot(s.qp.W * theta);
      const double full = ocp_cost(s.plant, s.em, s.design, mu, x, v);
      if (k == 0) offset = 0.5 * full - condensed;
      EXPECT_NEAR(0.5 * full - condensed, offset, 1e-9 * (1 + std::abs(full)));
    }
  }
}

TEST(Condense, EquilibriumHasZeroCost) {
  const Case s = di_default(10);
  const VectorXd v = vec({0.4});
  const VectorXd mu = VectorXd::Constant(10, s.em.input(v)[0]);
  EXPECT_NEAR(ocp_cost(s.plant, s.em, s.design, mu, s.em.state(v), v), 0.0, 1e-14);
}

TEST(Condense, ConstraintRowsMatchRollout) {
  const Case s = di_default(5);
  const HPolyhedron& Y = s.design.Y;
  const HPolyhedron& T = s.design.terminal.set;
  std::mt19937 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const VectorXd x = vec({normal(rng), normal(rng)});
    const VectorXd v = vec({normal(rng)});
    VectorXd mu(5);
    for (int i = 0; i < 5; ++i) mu[i] = normal(rng);
    const VectorXd condensed = s.qp.M * mu + s.qp.L * theta_of(x, v) - s.qp.b;
    VectorXd direct(condensed.size());
    VectorXd xi = x;
    for (int i = 0; i < 5; ++i) {
      const VectorXd u = mu.segment(i, 1);
      direct.segment(i * Y.rows(), Y.rows()) = Y.A() * (s.plant.C() * xi + s.plant.D() * u) - Y.b();
      xi = s.plant.A() * xi + s.plant.B() * u;
    }
    direct.tail(T.rows()) = T.A() * theta_of(xi, v) - T.b();
    EXPECT_LE((condensed - direct).lpNorm<Eigen::Infinity>(), 1e-10);
  }
}

TEST(Feedback, EquilibriumReturnsSteadyInput) {
  const Case s = di_default(10);
  const VectorXd v = vec({0.5});
  const FeedbackResult fb = mpc_feedback(s.qp, s.em.state(v), v);
  EXPECT_NEAR(fb.u[0], s.em.input(v)[0], 1e-8);
}

TEST(Feedback, InfeasibleFromFarStart) {
  const Case s = di_default(10);
  try {
    mpc_feedback(s.qp, vec({-1, 0}), vec({0.75}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
    EXPECT_NE(std::string(e.what()).find("OCP infeasible"), std::string::npos);
  }
}

TEST(Feedback, MatchesLqrLawWhenNothingIsActive) {
  const Case s = di_default(10);
  const VectorXd v = vec({0.1});
  const VectorXd x = s.em.state(v) + vec({0.02, -0.01});
  const FeedbackResult fb = mpc_feedback(s.qp, x, v);
  EXPECT_TRUE(fb.active_set.empty());
  const MatrixXd& K = s.design.lqr.K;
  const VectorXd lqr = -K * x + s.em.input(v) + K * s.em.state(v);
  EXPECT_NEAR(fb.u[0], lqr[0], 1e-8);
}

TEST(Feedback, RejectsZeroHorizon) {
  const Case s = scalar(0);
  EXPECT_THROW(mpc_feedback(s.qp, vec({0}), vec({0})), Error);
}

TEST(FeasibleSet, ZeroHorizonIsTheTerminalSet) {
  const Case s = di_default(0);
  EXPECT_TRUE(set_equal(feasible_set(s.qp), s.design.terminal.set));
}

TEST(FeasibleSet, ScalarIntegratorAgreesWithFeasibilityLp) {
  const Case s = scalar(2);
  const HPolyhedron G = feasible_set(s.qp);
  EXPECT_EQ(G.dim(), 2);
  int checked = 0;
  for (int i = 0; i <= 60; ++i) {
    for (int j = 0; j <= 60; ++j) {
      const VectorXd x = vec({-1.2 + 2.4 * i / 60.0});
      const VectorXd v = vec({-1.2 + 2.4 * j / 60.0});
      const VectorXd theta = theta_of(x, v);
      if (std::abs(G.max_violation(theta)) < 1e-6) continue;
      EXPECT_EQ(G.contains_point(theta, 0.0), ocp_feasible(s.plant, s.design, x, v, 2))
          << theta.transpose();
      ++checked;
    }
  }
  EXPECT_GT(checked, 3500);
}

TEST(FeasibleSet, DoubleIntegratorAgreesOnSamples) {
  const Case s = di_default(10);
  const HPolyhedron G = feasible_set(s.qp);
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> pos(-1.2, 1.2), vel(-0.35, 0.35), ref(-1.1, 1.1);
  int checked = 0, inside = 0;
  while (checked < 2000) {
    const VectorXd x = vec({pos(rng), vel(rng)});
    const VectorXd v = vec({ref(rng)});
    const VectorXd theta = theta_of(x, v);
    if (std::abs(G.max_violation(theta)) < 1e-6) continue;
    const bool in = G.contains_point(theta, 0.0);
    EXPECT_EQ(in, ocp_feasible(s.plant, s.design, x, v, 10)) << theta.transpose();
    inside += in;
    ++checked;
  }
  EXPECT_GT(inside, 200);
  EXPECT_FALSE(G.contains_point(vec({-1, 0, 0.75})));
  EXPECT_TRUE(contains_set(G, s.design.terminal.set, 1e-7));
}

TEST(FeasibleSet, GrowsWithHorizon) {
  for (auto builder : {+[](int N) { return scalar(N); }, +[](int N) {
         return make(testing::double_integrator(), testing::di_tight_input_box(),
                     MatrixXd::Identity(2, 2), N, 0.01);
       }}) {
    HPolyhedron prev = feasible_set(builder(0).qp);
    for (int N = 1; N <= 4; ++N) {
      const HPolyhedron next = feasible_set(builder(N).qp);
      EXPECT_TRUE(contains_set(next, prev, 1e-7)) << N;
      prev = next;
    }
  }
}

TEST(Feasibility, EquilibriumAndStateBounds) {
  const Case s = di_default(10);
  const VectorXd v = vec({-0.3});
  for (int h : {0, 1, 5, 20}) {
    EXPECT_TRUE(ocp_feasible(s.plant, s.design, s.em.state(v), v, h));
    EXPECT_FALSE(ocp_feasible(s.plant, s.design, vec({1.5, 0}), v, h));
  }
}

TEST(NStar, ZeroAtEquilibriumAndSmallNearTheTerminalSet) {
  const Case s = di_default(10);
  const VectorXd r = vec({0.2});
  EXPECT_EQ(n_star(s.plant, s.design, s.em.state(r), r, 50).n_star, 0);

  // Walk away from the equilibrium along B until the terminal slice is left.
  VectorXd x = s.em.state(r);
  VectorXd theta = theta_of(x, r);
  while (s.design.terminal.set.contains_point(theta, 0.0)) {
    x += 0.01 * s.plant.B().col(0) / s.plant.B().norm();
    theta = theta_of(x, r);
  }
  const NStarResult res = n_star(s.plant, s.design, x, r, 50);
  EXPECT_GE(res.n_star, 1);
  EXPECT_LE(res.n_star, 3);
  EXPECT_EQ(static_cast<int>(res.scan.size()), res.n_star + 1);
}

TEST(NStar, ReportsCap) {
  const Case s = di_default(10);
  try {
    n_star(s.plant, s.design, vec({-1, 0}), vec({0.75}), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoFeasibleHorizon);
  }
}

TEST(ClosedLoop, FixedReferenceStaysFeasibleAndConverges) {
  const Case s = di_default(10);
  const HPolyhedron G = feasible_set(s.qp);
  const VectorXd v = vec({0.5});
  std::mt19937 rng(14);
  const HPolyhedron slice_at_v = slice(G, std::vector<int>{2}, v);
  for (const VectorXd& x0 : testing::sample_polytope(slice_at_v, 5, rng)) {
    VectorXd x = x0;
    std::vector<int> warm;
    for (int k = 0; k < 300; ++k) {
      ASSERT_TRUE(G.contains_point(theta_of(x, v), 1e-7)) << k;
      const FeedbackResult fb = mpc_feedback(s.qp, x, v, warm);
      warm = fb.active_set;
      const StepResult st = step(s.plant, x, fb.u);
      EXPECT_TRUE(s.design.Y.contains_point(st.y, 1e-8));
      x = st.x_next;
    }
    EXPECT_LE((x - s.em.state(v)).norm(), 1e-4);
  }
}

}  // namespace
}  // namespace fgmpc
