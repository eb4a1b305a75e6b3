#include "fgmpc/polytope.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "fgmpc/error.hpp"
#include "fgmpc/solver.hpp"
#include "support/oracles.hpp"

namespace fgmpc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

HPolyhedron interval(double lo, double hi) { return HPolyhedron::from_box(vec({lo}), vec({hi})); }

HPolyhedron unit_square() { return HPolyhedron::from_box(vec({-1, -1}), vec({1, 1})); }

TEST(Box, BuildsTwoRowsPerCoordinate) {
  const HPolyhedron Y = HPolyhedron::from_box(vec({-1, -0.25, -0.25}), vec({1, 0.25, 0.25}));
  EXPECT_EQ(Y.rows(), 6);
  EXPECT_EQ(Y.dim(), 3);
  EXPECT_TRUE(Y.contains_point(vec({1, 0.25, -0.25}), 0.0));
  EXPECT_FALSE(Y.contains_point(vec({0, 0.26, 0}), 1e-9));

  const HPolyhedron I = interval(-1, 1);
  MatrixXd A(2, 1);
  A << 1, -1;
  EXPECT_TRUE(I.A().isApprox(A));
  EXPECT_TRUE(I.b().isApprox(vec({1, 1})));

  const HPolyhedron long_range = HPolyhedron::from_box(vec({-20, -1, -0.25}), vec({20, 1, 0.25}));
  EXPECT_EQ(long_range.rows(), 6);
  EXPECT_TRUE(long_range.contains_point(vec({-20, 1, 0.25}), 0.0));
}

TEST(Box, RejectsInvertedBounds) {
  EXPECT_THROW(HPolyhedron::from_box(vec({1}), vec({-1})), Error);
  EXPECT_THROW(HPolyhedron::from_box(vec({0, 0}), vec({1, 0})), Error);
}

TEST(Box, RowsAreNormalized) {
  MatrixXd A(1, 2);
  A << 4, -2;
  const HPolyhedron P(A, vec({8}));
  EXPECT_DOUBLE_EQ(P.A()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(P.A()(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(P.b()[0], 2.0);
}

TEST(Scale, DilatesAboutTheOrigin) {
  EXPECT_TRUE(set_equal(scale(unit_square(), 1.0), unit_square()));
  const HPolyhedron nominal = HPolyhedron::from_box(vec({-1, -0.25, -0.25}), vec({1, 0.25, 0.25}));
  EXPECT_TRUE(set_equal(scale(nominal, 0.99),
                        HPolyhedron::from_box(vec({-0.99, -0.2475, -0.2475}),
                                              vec({0.99, 0.2475, 0.2475}))));
  EXPECT_TRUE(set_equal(scale(interval(-1, 1), 0.8), interval(-0.8, 0.8)));
  EXPECT_THROW(scale(unit_square(), 0.0), Error);
}

TEST(Intersect, IntervalsAndIdempotence) {
  const HPolyhedron P = unit_square();
  EXPECT_TRUE(set_equal(intersect(P, P), P));
  EXPECT_TRUE(set_equal(intersect(interval(-1, 1), interval(0, 2)), interval(0, 1)));
  EXPECT_THROW(intersect(interval(0, 1), P), Error);
}

TEST(Intersect, CommutesAtSetLevel) {
  std::mt19937 rng(1);
  for (int t = 0; t < 20; ++t) {
    const HPolyhedron P = testing::random_polytope(rng, 3, 6);
    const HPolyhedron Q = testing::random_polytope(rng, 3, 6);
    EXPECT_TRUE(set_equal(intersect(P, Q), intersect(Q, P)));
    EXPECT_TRUE(set_equal(intersect(intersect(P, Q), Q), intersect(P, Q)));
  }
}

TEST(Slice, FixesCoordinates) {
  const std::vector<int> first{0};
  EXPECT_TRUE(set_equal(slice(unit_square(), first, vec({0})), interval(-1, 1)));
  EXPECT_THROW(slice(unit_square(), std::vector<int>{2}, vec({0})), Error);
  EXPECT_THROW(slice(unit_square(), std::vector<int>{0, 0}, vec({0, 0})), Error);
}

TEST(Slice, OutsideTheShadowIsEmpty) {
  const HPolyhedron S = slice(unit_square(), std::vector<int>{1}, vec({1.5}));
  EXPECT_TRUE(is_empty(S));
  EXPECT_FALSE(is_empty(slice(unit_square(), std::vector<int>{1}, vec({1.0}))));
}

TEST(Project, SquareAndSimplexShadows) {
  const std::vector<int> keep{0};
  EXPECT_TRUE(set_equal(project(unit_square(), keep), interval(-1, 1)));
  MatrixXd A(3, 2);
  A << 1, 1, -1, 0, 0, -1;
  const HPolyhedron simplex(A, vec({1, 0, 0}));
  const HPolyhedron shadow = project(simplex, keep);
  EXPECT_TRUE(set_equal(shadow, interval(0, 1)));
  EXPECT_EQ(shadow.rows(), 2);
}

TEST(Project, KeepsRequestedCoordinateOrder) {
  const HPolyhedron box = HPolyhedron::from_box(vec({0, 10, 20}), vec({1, 11, 21}));
  const HPolyhedron swapped = project(box, std::vector<int>{2, 0});
  EXPECT_TRUE(set_equal(swapped, HPolyhedron::from_box(vec({20, 0}), vec({21, 1}))));
}

TEST(Project, RejectsEmptyInputAndBlowUp) {
  MatrixXd A(2, 2);
  A << 1, 0, -1, 0;
  const HPolyhedron empty(A, vec({-1, 0}));
  EXPECT_THROW(project(empty, std::vector<int>{1}), Error);

  std::mt19937 rng(4);
  const HPolyhedron P = testing::random_polytope(rng, 4, 30);
  PolytopeOptions tight;
  tight.row_cap = 5;
  try {
    project(P, std::vector<int>{0}, tight);
    FAIL() << "expected the row cap to trip";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProjectionIntractable);
    EXPECT_NE(std::string(e.what()).find("rows"), std::string::npos);
  }
}

TEST(Project, AgreesWithVertexHullOracle) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 3 + trial % 2;
    const HPolyhedron P = testing::random_polytope(rng, dim, 5 + trial % 6);
    const HPolyhedron shadow = project(P, std::vector<int>{0, 1});
    std::vector<Eigen::Vector2d> pts;
    for (const auto& v : testing::enumerate_vertices(P.A(), P.b())) pts.emplace_back(v[0], v[1]);
    const HPolyhedron hull = testing::hull_2d(pts);
    EXPECT_TRUE(set_equal(shadow, hull, 1e-7)) << "trial " << trial;
  }
}

TEST(Project, SampledMembershipMatchesLiftingLp) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> unif(-2.5, 2.5);
  const HPolyhedron P = testing::random_polytope(rng, 4, 10);
  const HPolyhedron shadow = project(P, std::vector<int>{0, 2});
  int inside = 0;
  for (int s = 0; s < 400; ++s) {
    const VectorXd x = vec({unif(rng), unif(rng)});
    const double viol = shadow.max_violation(x);
    if (std::abs(viol) < 1e-6) continue;
    // Lift: exists (x1, x3) with (x0, x1, x2, x3) in P.
    MatrixXd A(P.rows(), 2);
    A << P.A().col(1), P.A().col(3);
    const VectorXd b = P.b() - P.A().col(0) * x[0] - P.A().col(2) * x[1];
    const bool liftable = find_feasible_point(A, b).optimal();
    EXPECT_EQ(liftable, viol < 0.0);
    inside += liftable;
  }
  EXPECT_GT(inside, 10);
}

TEST(RemoveRedundancy, DropsImpliedRows) {
  MatrixXd A(2, 1);
  A << 1, 1;
  const HPolyhedron P(A, vec({1, 2}));
  const HPolyhedron R = remove_redundancy(P);
  ASSERT_EQ(R.rows(), 1);
  EXPECT_DOUBLE_EQ(R.b()[0], 1.0);

  MatrixXd B(5, 2);
  B << 1, 0, 0, 1, -1, 0, 0, -1, 1, 0;
  const HPolyhedron dup(B, vec({1, 1, 1, 1, 1}));
  const HPolyhedron clean = remove_redundancy(dup);
  EXPECT_EQ(clean.rows(), 4);
  EXPECT_TRUE(set_equal(clean, unit_square()));
}

TEST(RemoveRedundancy, PreservesTheSetAndLeavesOnlyFacets) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const HPolyhedron P = testing::random_polytope(rng, 3, 15);
    const HPolyhedron R = remove_redundancy(P);
    EXPECT_TRUE(set_equal(P, R));
    // Every surviving row supports the set: dropping it enlarges it.
    for (int i = 0; i < R.rows(); ++i) {
      MatrixXd A(R.rows() - 1, 3);
      VectorXd b(R.rows() - 1);
      for (int k = 0, r = 0; k < R.rows(); ++k) {
        if (k == i) continue;
        A.row(r) = R.A().row(k);
        b[r++] = R.b()[k];
      }
      const SolveStatus st = solve_lp({R.A().row(i).transpose(), A, b});
      EXPECT_TRUE(st.code == SolveCode::kUnbounded ||
                  (st.optimal() && st.value > R.b()[i] + 1e-8));
    }
  }
}

TEST(RemoveRedundancy, RejectsEmptySet) {
  MatrixXd A(2, 1);
  A << 1, -1;
  EXPECT_THROW(remove_redundancy(HPolyhedron(A, vec({0, -1}))), Error);
}

TEST(Membership, PointsAgainstTheUnitBox) {
  const double tol = 1e-8;
  EXPECT_TRUE(unit_square().contains_point(vec({0, 0}), tol));
  EXPECT_FALSE(unit_square().contains_point(vec({1 + 2 * tol, 0}), tol));
  EXPECT_TRUE(unit_square().contains_point(vec({1 + 0.5 * tol, 0}), tol));
  EXPECT_THROW(unit_square().contains_point(vec({0}), tol), Error);
}

TEST(Membership, SetContainment) {
  EXPECT_TRUE(contains_set(unit_square(), unit_square()));
  EXPECT_TRUE(contains_set(interval(-1, 2), interval(0, 1)));
  EXPECT_FALSE(contains_set(interval(0, 1), interval(-1, 2)));
  MatrixXd A(1, 1);
  A << -1;
  const HPolyhedron ray(A, vec({0}));
  EXPECT_FALSE(contains_set(interval(-1, 1), ray));
  EXPECT_TRUE(contains_set(HPolyhedron(1), ray));
}

TEST(Chebyshev, BallsInBoxesAndDegenerateSets) {
  const ChebyshevBall ball = chebyshev_center(unit_square());
  EXPECT_NEAR(ball.radius, 1.0, 1e-12);
  EXPECT_LE(ball.center.norm(), 1e-12);

  MatrixXd A(2, 1);
  A << 1, -1;
  EXPECT_NEAR(chebyshev_center(HPolyhedron(A, vec({0, 0}))).radius, 0.0, 1e-12);
  EXPECT_LT(chebyshev_center(HPolyhedron(A, vec({0, -1}))).radius, 0.0);
}

TEST(Emptiness, DetectsContradictions) {
  MatrixXd A(1, 2);
  A << 0, 0;
  const HPolyhedron contradiction(A, vec({-1}));
  EXPECT_TRUE(contradiction.has_contradiction());
  EXPECT_TRUE(is_empty(contradiction));
  EXPECT_EQ(HPolyhedron(A, vec({1})).rows(), 0);
}

}  // namespace
}  // namespace fgmpc
