#include "dirbit/lp.hpp"

#include <gtest/gtest.h>

using namespace dirbit;

TEST(Lp, SmallProblemWithKnownOptimum) {
  // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6  ->  x = 4, y = 0, value 12.
  Mat a(2, 4);
  a << 1, 1, 1, 0,
       1, 3, 0, 1;
  Vec b(2);
  b << 4, 6;
  Vec c(4);
  c << -3, -2, 0, 0;
  const LpResult r = solve_lp(c, a, b);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, -12.0, 1e-12);
  EXPECT_NEAR(r.x(0), 4.0, 1e-12);
}

TEST(Lp, NegativeRightHandSide) {
  // x - y = -2, x + y = 4  ->  x = 1, y = 3.
  Mat a(2, 2);
  a << 1, -1,
       1, 1;
  Vec b(2);
  b << -2, 4;
  const LpResult r = find_feasible(a, b);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), 3.0, 1e-12);
}

TEST(Lp, DetectsInfeasibility) {
  Mat a(2, 1);
  a << 1, 1;
  Vec b(2);
  b << 1, 2;
  EXPECT_EQ(find_feasible(a, b).status, LpStatus::infeasible);
}

TEST(Lp, DetectsUnboundedness) {
  Mat a(1, 2);
  a << 1, -1;
  Vec b(1);
  b << 0;
  Vec c(2);
  c << -1, 0;
  EXPECT_EQ(solve_lp(c, a, b).status, LpStatus::unbounded);
}

TEST(Lp, BealeCyclingExampleTerminates) {
  // Classic example on which Dantzig's rule cycles without an anti-cycling rule.
  Mat a(3, 7);
  a << 0.25, -8, -1, 9, 1, 0, 0,
       0.5, -12, -0.5, 3, 0, 1, 0,
       0, 0, 1, 0, 0, 0, 1;
  Vec b(3);
  b << 0, 0, 1;
  Vec c(7);
  c << -0.75, 20, -0.5, 6, 0, 0, 0;
  const LpResult r = solve_lp(c, a, b);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, -1.25, 1e-12);
}

TEST(Lp, RedundantEqualityRows) {
  Mat a(3, 3);
  a << 1, 1, 1,
       2, 2, 2,
       1, 0, 0;
  Vec b(3);
  b << 1, 2, 0.25;
  Vec c(3);
  c << 0, 1, 0;
  const LpResult r = solve_lp(c, a, b);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 0.0, 1e-12);
  EXPECT_NEAR(r.x(2), 0.75, 1e-12);
}
