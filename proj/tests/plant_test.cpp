#include "fgmpc/plant.hpp"

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

MatrixXd kernel_matrix(const LtiPlant& p) {
  const int nx = p.nx(), nu = p.nu(), nz = p.nz();
  MatrixXd Z = MatrixXd::Zero(nx + nz, nx + nu + nz);
  Z.block(0, 0, nx, nx) = p.A() - MatrixXd::Identity(nx, nx);
  Z.block(0, nx, nx, nu) = p.B();
  Z.block(nx, 0, nz, nx) = p.E();
  Z.block(nx, nx, nz, nu) = p.F();
  Z.block(nx, nx + nu, nz, nz) = -MatrixXd::Identity(nz, nz);
  return Z;
}

double kernel_residual(const LtiPlant& p, const EquilibriumMap& em) {
  MatrixXd G(p.nx() + p.nu() + p.nz(), em.nv());
  G << em.Gx, em.Gu, em.Gz;
  return (kernel_matrix(p) * G).lpNorm<Eigen::Infinity>();
}

TEST(Equilibrium, DoubleIntegratorHoldsPositionWithZeroInput) {
  const LtiPlant p = testing::double_integrator();
  const EquilibriumMap em = equilibrium_basis(p);
  EXPECT_TRUE(em.Gx.isApprox(mat(2, 1, {1, 0})));
  EXPECT_EQ(em.Gu(0, 0), 0.0);
  EXPECT_EQ(em.Gz(0, 0), 1.0);
  EXPECT_LE(kernel_residual(p, em), 1e-10);
}

TEST(Equilibrium, ScalarIntegrator) {
  const EquilibriumMap em = equilibrium_basis(testing::scalar_integrator());
  EXPECT_DOUBLE_EQ(em.Gx(0, 0), 1.0);
  EXPECT_EQ(em.Gu(0, 0), 0.0);
}

TEST(Equilibrium, TrackedInputOnStablePlant) {
  const MatrixXd A = mat(2, 2, {0.5, 0.1, 0, 0.3});
  const MatrixXd B = mat(2, 1, {1, 2});
  const LtiPlant p(A, B, MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 1), MatrixXd::Zero(1, 2),
                   mat(1, 1, {1}));
  const EquilibriumMap em = equilibrium_basis(p);
  EXPECT_NEAR(em.Gu(0, 0), 1.0, 1e-14);
  const MatrixXd oracle = (MatrixXd::Identity(2, 2) - A).inverse() * B;
  EXPECT_LE((em.Gx - oracle).norm(), 1e-12);
}

TEST(Equilibrium, RandomPlantsSatisfyKernelEquations) {
  std::mt19937 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  int built = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int nx = 2 + trial % 3, nu = 1 + trial % 2, nz = nu;
    auto rnd = [&](int r, int c) {
      MatrixXd M(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = normal(rng);
      return M;
    };
    try {
      const LtiPlant p(0.4 * rnd(nx, nx), rnd(nx, nu), rnd(2, nx), rnd(2, nu), rnd(nz, nx),
                       rnd(nz, nu));
      const EquilibriumMap em = equilibrium_basis(p);
      ++built;
      EXPECT_LE(kernel_residual(p, em), 1e-10);
      EXPECT_TRUE(em.Gz.isIdentity());
      for (int s = 0; s < 5; ++s) {
        const VectorXd v = rnd(nz, 1);
        const StepResult r = step(p, em.state(v), em.input(v));
        EXPECT_LE((r.x_next - em.state(v)).norm(), 1e-10 * (1 + v.norm()));
        EXPECT_LE((r.z - v).norm(), 1e-10 * (1 + v.norm()));
      }
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kAssumptionViolated);
    }
  }
  EXPECT_GT(built, 35);
}

TEST(Equilibrium, NamesTheAssumptionWhenGzIsSingular) {
  const LtiPlant p(mat(1, 1, {0.5}), mat(1, 1, {1}), mat(1, 1, {1}), mat(1, 1, {0}),
                   mat(1, 1, {0}), mat(1, 1, {0}));
  try {
    equilibrium_basis(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAssumptionViolated);
    EXPECT_NE(std::string(e.what()).find("Gz invertible"), std::string::npos);
  }
  // Two tracked outputs but a single input: kernel too small.
  const LtiPlant q(mat(1, 1, {0.5}), mat(1, 1, {1}), mat(1, 1, {1}), mat(1, 1, {0}),
                   mat(2, 1, {1, 0}), mat(2, 1, {0, 1}));
  EXPECT_THROW(equilibrium_basis(q), Error);
}

TEST(Plant, RejectsUnstabilizablePairsAndBadShapes) {
  EXPECT_THROW(LtiPlant(mat(2, 2, {2, 0, 0, 1}), mat(2, 1, {0, 1}), MatrixXd::Identity(2, 2),
                        MatrixXd::Zero(2, 1), mat(1, 2, {1, 0}), mat(1, 1, {0})),
               Error);
  EXPECT_NO_THROW(LtiPlant(mat(2, 2, {0.5, 0, 0, 1}), mat(2, 1, {0, 1}), MatrixXd::Identity(2, 2),
                           MatrixXd::Zero(2, 1), mat(1, 2, {1, 0}), mat(1, 1, {0})));
  EXPECT_THROW(LtiPlant(mat(1, 1, {1}), mat(2, 1, {0, 1}), mat(1, 1, {1}), mat(1, 1, {0}),
                        mat(1, 1, {1}), mat(1, 1, {0})),
               Error);
}

TEST(Plant, DetectabilityTest) {
  EXPECT_TRUE(is_detectable(mat(2, 2, {1, 0.1, 0, 1}), mat(1, 2, {1, 0})));
  EXPECT_FALSE(is_detectable(mat(2, 2, {1, 0.1, 0, 1}), mat(1, 2, {0, 1})));
  EXPECT_TRUE(is_detectable(mat(1, 1, {0.5}), mat(1, 1, {0})));
}

TEST(Step, EvaluatesTheAffineMaps) {
  const LtiPlant p = testing::double_integrator();
  const StepResult zero = step(p, vec({0, 0}), vec({0}));
  EXPECT_TRUE(zero.x_next.isZero(0.0) && zero.y.isZero(0.0) && zero.z.isZero(0.0));
  const StepResult push = step(p, vec({0, 0}), vec({1}));
  EXPECT_TRUE(push.x_next.isApprox(vec({0, 0.1})));
  EXPECT_TRUE(push.y.isApprox(vec({0, 0, 1})));
  EXPECT_EQ(push.z[0], 0.0);
  const EquilibriumMap em = equilibrium_basis(p);
  const StepResult eq = step(p, em.state(vec({0.3})), em.input(vec({0.3})));
  EXPECT_EQ(eq.x_next, em.state(vec({0.3})));
  EXPECT_EQ(eq.z[0], 0.3);
  EXPECT_THROW(step(p, vec({0}), vec({0})), Error);
}

TEST(ReferenceSet, DefaultBoxShrinksPositionOnly) {
  const LtiPlant p = testing::double_integrator();
  const HPolyhedron R = steady_state_ref_set(p, equilibrium_basis(p), testing::di_default_box(), 0.01);
  EXPECT_EQ(R.rows(), 2);
  EXPECT_TRUE(set_equal(R, HPolyhedron::from_box(vec({-0.99}), vec({0.99})), 1e-12));
  EXPECT_TRUE(R.contains_point(vec({0.75}), 0.0));
}

TEST(ReferenceSet, ScalarIntegratorAtTwentyPercent) {
  const LtiPlant p = testing::scalar_integrator();
  const HPolyhedron R = steady_state_ref_set(p, equilibrium_basis(p), testing::scalar_box(), 0.2);
  ASSERT_EQ(R.rows(), 2);
  const auto box = bounding_box(R);
  ASSERT_TRUE(box.has_value());
  EXPECT_DOUBLE_EQ(box->first[0], -0.8);
  EXPECT_DOUBLE_EQ(box->second[0], 0.8);
}

TEST(ReferenceSet, ShrinksTowardOriginAndNests) {
  const LtiPlant p = testing::double_integrator();
  const EquilibriumMap em = equilibrium_basis(p);
  const HPolyhedron Y = testing::di_default_box();
  const HPolyhedron tiny = steady_state_ref_set(p, em, Y, 0.999);
  EXPECT_TRUE(set_equal(tiny, HPolyhedron::from_box(vec({-0.001}), vec({0.001})), 1e-12));
  const double eps[] = {0.01, 0.1, 0.3, 0.6};
  for (int i = 0; i + 1 < 4; ++i) {
    EXPECT_TRUE(contains_set(steady_state_ref_set(p, em, Y, eps[i]),
                             steady_state_ref_set(p, em, Y, eps[i + 1])));
    EXPECT_FALSE(contains_set(steady_state_ref_set(p, em, Y, eps[i + 1]),
                              steady_state_ref_set(p, em, Y, eps[i])));
  }
  EXPECT_THROW(steady_state_ref_set(p, em, Y, 0.0), Error);
  EXPECT_THROW(steady_state_ref_set(p, em, Y, 1.0), Error);
}

TEST(ReferenceSet, SteadyStateOutputKeepsMargin) {
  const LtiPlant p = testing::double_integrator();
  const EquilibriumMap em = equilibrium_basis(p);
  const HPolyhedron Y = testing::di_long_range_box();
  const double eps = 0.05;
  const HPolyhedron R = steady_state_ref_set(p, em, Y, eps);
  const MatrixXd S = steady_state_output(p, em);
  std::mt19937 rng(8);
  for (const VectorXd& v : testing::sample_polytope(R, 200, rng)) {
    const VectorXd slack = Y.b() - Y.A() * (S * v);
    EXPECT_GE(slack.minCoeff(), eps * Y.b().minCoeff() - 1e-12);
  }
}

TEST(ReferenceSet, RejectsOriginOnBoundary) {
  const LtiPlant p = testing::scalar_integrator();
  const HPolyhedron Y = HPolyhedron::from_box(vec({0, -0.25}), vec({1, 0.25}));
  EXPECT_THROW(steady_state_ref_set(p, equilibrium_basis(p), Y, 0.1), Error);
}

TEST(ReferenceSet, ProjectionOntoTheSet) {
  const HPolyhedron R = HPolyhedron::from_box(vec({-0.8}), vec({0.8}));
  EXPECT_DOUBLE_EQ(project_reference(R, vec({2.0}))[0], 0.8);
  EXPECT_DOUBLE_EQ(project_reference(R, vec({0.1}))[0], 0.1);
}

}  // namespace
}  // namespace fgmpc
