// Copyright 2026 The privgraph Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "privgraph/game_lp.hpp"
#include "privgraph/rng.hpp"
#include "privgraph/simplex.hpp"
#include "test_util.hpp"

namespace privgraph {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

JointDistribution joint_from(std::size_t ns, std::size_t nx, std::vector<double> values) {
  JointDistribution j{DenseMatrix(ns, nx)};
  j.prob.data = std::move(values);
  return j;
}

JointDistribution random_joint(Rng& rng, std::size_t ns, std::size_t nx) {
  JointDistribution j{DenseMatrix(ns, nx)};
  double total = 0.0;
  for (double& v : j.prob.data) {
    v = rng.uniform();
    total += v;
  }
  for (double& v : j.prob.data) v /= total;
  return j;
}

// Product of two random marginals.
JointDistribution independent_joint(Rng& rng, std::size_t ns, std::size_t nx) {
  std::vector<double> ps(ns), px(nx);
  double ts = 0.0, tx = 0.0;
  for (double& v : ps) ts += (v = 0.1 + rng.uniform());
  for (double& v : px) tx += (v = 0.1 + rng.uniform());
  JointDistribution j{DenseMatrix(ns, nx)};
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t x = 0; x < nx; ++x) j.prob(s, x) = ps[s] / ts * px[x] / tx;
  }
  return j;
}

LpDefense solve(const JointDistribution& j, double beta) {
  return solve_game_lp(build_game_lp(j, identity_indicator(j.attribute_count()),
                                     mismatch_indicator(j.value_count()), beta));
}

// Best privacy loss over deterministic mappings that fit the budget.
// Depth-first over the image of each x, cutting a branch once its
// distortion passes the budget; every feasible mapping is visited.
double best_deterministic(const JointDistribution& j, double beta) {
  const std::size_t nx = j.value_count(), ns = j.attribute_count();
  const std::vector<double> px = j.value_marginal();
  // mass[xn * ns + s] = sum of Pr(s, x) over x mapped to xn.
  std::vector<double> mass(nx * ns, 0.0);
  double best = std::numeric_limits<double>::infinity();
  auto visit = [&](auto&& self, std::size_t x, double distortion) -> void {
    if (distortion > beta + 1e-12) return;
    if (x == nx) {
      double loss = 0.0;
      for (std::size_t xn = 0; xn < nx; ++xn) {
        loss += *std::max_element(mass.begin() + xn * ns, mass.begin() + (xn + 1) * ns);
      }
      best = std::min(best, loss);
      return;
    }
    for (std::size_t xn = 0; xn < nx; ++xn) {
      for (std::size_t s = 0; s < ns; ++s) mass[xn * ns + s] += j.prob(s, x);
      self(self, x + 1, distortion + (xn == x ? 0.0 : px[x]));
      for (std::size_t s = 0; s < ns; ++s) mass[xn * ns + s] -= j.prob(s, x);
    }
  };
  visit(visit, 0, 0.0);
  return best;
}

TEST(SimplexTest, TwoVariableInequalities) {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6, optimum at (1.6, 1.2).
  LinearProgram lp;
  lp.num_vars = 2;
  lp.objective = {-1.0, -1.0};
  lp.add_row({1.0, 2.0}, RowType::kLessEqual, 4.0);
  lp.add_row({3.0, 1.0}, RowType::kLessEqual, 6.0);
  const LpSolution s = solve_linear_program(lp);
  EXPECT_THAT(s.x, ElementsAre(DoubleNear(1.6, 1e-12), DoubleNear(1.2, 1e-12)));
  EXPECT_NEAR(s.objective, -2.8, 1e-12);
  // Strong duality: b^T y equals the optimum.
  EXPECT_NEAR(4.0 * s.duals[0] + 6.0 * s.duals[1], s.objective, 1e-12);
  EXPECT_LE(s.complementary_slackness, 1e-12);
}

TEST(SimplexTest, EqualityAndGreaterRows) {
  // min 2a + 3b + c s.t. a + b + c = 1, a + c >= 0.5, b >= 0.2.
  LinearProgram lp;
  lp.num_vars = 3;
  lp.objective = {2.0, 3.0, 1.0};
  lp.add_row({1.0, 1.0, 1.0}, RowType::kEqual, 1.0);
  lp.add_row({1.0, 0.0, 1.0}, RowType::kGreaterEqual, 0.5);
  lp.add_row({0.0, 1.0, 0.0}, RowType::kGreaterEqual, 0.2);
  const LpSolution s = solve_linear_program(lp);
  EXPECT_THAT(s.x, ElementsAre(DoubleNear(0.0, 1e-12), DoubleNear(0.2, 1e-12),
                               DoubleNear(0.8, 1e-12)));
  EXPECT_NEAR(s.objective, 1.4, 1e-12);
  EXPECT_NEAR(1.0 * s.duals[0] + 0.5 * s.duals[1] + 0.2 * s.duals[2], s.objective, 1e-12);
  EXPECT_LE(s.primal_residual, 1e-12);
}

TEST(SimplexTest, InfeasibleAndUnbounded) {
  LinearProgram infeasible;
  infeasible.num_vars = 1;
  infeasible.objective = {1.0};
  infeasible.add_row({1.0}, RowType::kLessEqual, 1.0);
  infeasible.add_row({1.0}, RowType::kGreaterEqual, 2.0);
  EXPECT_THROW(solve_linear_program(infeasible), NumericalError);

  LinearProgram unbounded;
  unbounded.num_vars = 2;
  unbounded.objective = {-1.0, 0.0};
  unbounded.add_row({1.0, -1.0}, RowType::kLessEqual, 1.0);
  EXPECT_THROW(solve_linear_program(unbounded), NumericalError);
}

TEST(SimplexTest, RowWidthIsChecked) {
  LinearProgram lp;
  lp.num_vars = 2;
  EXPECT_THROW(lp.add_row({1.0}, RowType::kEqual, 1.0), ValidationError);
}

TEST(BuildGameLpTest, CountsForTwoByTwo) {
  const JointDistribution j = joint_from(2, 2, {0.25, 0.25, 0.25, 0.25});
  const GameLp g = build_game_lp(j, identity_indicator(2), mismatch_indicator(2), 0.3);
  EXPECT_EQ(g.lp.num_vars, 6u);
  ASSERT_EQ(g.lp.rows.size(), 7u);
  EXPECT_EQ(g.lp.rows[0].type, RowType::kLessEqual);
  EXPECT_EQ(g.lp.rows[0].rhs, 0.3);
  for (std::size_t r = 1; r <= 4; ++r) EXPECT_EQ(g.lp.rows[r].type, RowType::kLessEqual);
  EXPECT_EQ(g.lp.rows[5].type, RowType::kEqual);
  EXPECT_EQ(g.lp.rows[6].type, RowType::kEqual);
  EXPECT_THAT(g.lp.objective, ElementsAre(0, 0, 0, 0, 1, 1));
}

TEST(BuildGameLpTest, ZeroOneLossDominanceRows) {
  // With 0-1 privacy loss the row for (x', s^) has coefficient Pr(s^, x)
  // on f(x'|x) and -1 on y_{x'}.
  Rng rng(3);
  const JointDistribution j = random_joint(rng, 3, 2);
  const GameLp g = build_game_lp(j, identity_indicator(3), mismatch_indicator(2), 0.5);
  for (std::size_t xn = 0; xn < 2; ++xn) {
    for (std::size_t guess = 0; guess < 3; ++guess) {
      const auto& row = g.lp.rows[g.dominance_row(xn, guess)];
      for (std::size_t x = 0; x < 2; ++x) {
        EXPECT_EQ(row.coeffs[g.mapping_var(x, xn)], j.prob(guess, x));
        EXPECT_EQ(row.coeffs[g.mapping_var(x, 1 - xn)], 0.0);
      }
      EXPECT_EQ(row.coeffs[g.y_var(xn)], -1.0);
      EXPECT_EQ(row.coeffs[g.y_var(1 - xn)], 0.0);
      EXPECT_EQ(row.rhs, 0.0);
    }
  }
}

TEST(BuildGameLpTest, RejectsBadInput) {
  const JointDistribution j = joint_from(2, 2, {0.25, 0.25, 0.25, 0.25});
  EXPECT_THROW(build_game_lp(j, identity_indicator(2), mismatch_indicator(2), -0.1),
               ValidationError);
  EXPECT_THROW(build_game_lp(j, identity_indicator(3), mismatch_indicator(2), 0.1),
               ValidationError);
  EXPECT_THROW(build_game_lp(j, identity_indicator(2), mismatch_indicator(3), 0.1),
               ValidationError);
  Rng rng(1);
  try {
    build_game_lp(random_joint(rng, 2, 9), identity_indicator(2), mismatch_indicator(9), 0.1);
    FAIL() << "expected refusal";
  } catch (const ValidationError& e) {
    EXPECT_THAT(e.what(), HasSubstr("too large"));
  }
  EXPECT_THROW(build_game_lp(random_joint(rng, 5, 2), identity_indicator(5),
                             mismatch_indicator(2), 0.1),
               ValidationError);
  EXPECT_THROW(build_game_lp(joint_from(2, 2, {0.5, 0.5, 0.5, 0.5}), identity_indicator(2),
                             mismatch_indicator(2), 0.1),
               ValidationError);
  EXPECT_THROW(build_game_lp(joint_from(2, 2, {1.5, -0.5, 0.0, 0.0}), identity_indicator(2),
                             mismatch_indicator(2), 0.1),
               ValidationError);
}

TEST(SolveGameLpTest, UniformJointGivesPriorMaximum) {
  const JointDistribution j = joint_from(2, 2, {0.25, 0.25, 0.25, 0.25});
  for (double beta : {0.0, 0.3, 1.0}) {
    EXPECT_NEAR(solve(j, beta).objective, 0.5, 1e-9);
  }
}

TEST(SolveGameLpTest, IndependentJointGivesPriorMaximum) {
  Rng rng(7);
  for (int k = 0; k < 30; ++k) {
    const std::size_t ns = 2 + rng.below(3), nx = 2 + rng.below(3);
    const JointDistribution j = independent_joint(rng, ns, nx);
    const auto ps = j.attribute_marginal();
    const double expected = *std::max_element(ps.begin(), ps.end());
    EXPECT_NEAR(solve(j, rng.uniform()).objective, expected, 1e-9);
  }
}

TEST(SolveGameLpTest, CorrelatedZeroBudgetKeepsIdentity) {
  const JointDistribution j = joint_from(2, 2, {0.5, 0.0, 0.0, 0.5});
  const LpDefense d = solve(j, 0.0);
  EXPECT_NEAR(d.objective, 1.0, 1e-9);
  EXPECT_NEAR(d.mapping(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(d.mapping(1, 1), 1.0, 1e-9);
}

TEST(SolveGameLpTest, CorrelatedPartialBudget) {
  const JointDistribution j = joint_from(2, 2, {0.5, 0.0, 0.0, 0.5});
  // Moving mass b/Pr(x) of one value onto the other leaves the attacker
  // 1 - b; at b = 0.5 both values collapse and the attacker is at chance.
  const LpDefense quarter = solve(j, 0.25);
  EXPECT_NEAR(quarter.objective, 0.75, 1e-9);
  EXPECT_GT(quarter.objective, 0.5);
  EXPECT_LT(quarter.objective, 1.0);
  EXPECT_LE(quarter.objective, best_deterministic(j, 0.25) + 1e-9);
  const LpDefense half = solve(j, 0.5);
  EXPECT_NEAR(half.objective, 0.5, 1e-9);
  EXPECT_LE(half.objective, best_deterministic(j, 0.5) + 1e-9);
}

TEST(SolveGameLpTest, NoWorseThanDeterministicMappings) {
  Rng rng(21);
  for (int k = 0; k < 60; ++k) {
    const std::size_t ns = 2 + rng.below(2), nx = 2 + rng.below(3);
    const JointDistribution j = random_joint(rng, ns, nx);
    const double beta = rng.uniform();
    const LpDefense d = solve(j, beta);
    EXPECT_LE(d.objective, best_deterministic(j, beta) + 1e-9);
  }
}

TEST(SolveGameLpTest, CertificatesHold) {
  Rng rng(5);
  for (int k = 0; k < 60; ++k) {
    const std::size_t ns = 2 + rng.below(3), nx = 2 + rng.below(7);
    const JointDistribution j = random_joint(rng, ns, nx);
    const LpDefense d = solve(j, rng.uniform());
    EXPECT_LE(d.max_violation(), 1e-9);
    EXPECT_LE(d.complementary_slackness, 1e-9);
    // The objective is the attacker's gain under the returned mapping.
    EXPECT_NEAR(d.objective,
                mapping_privacy_loss(j, identity_indicator(ns), d.mapping), 1e-9);
  }
}

TEST(SolveGameLpTest, SparseJointsStayFeasible) {
  // Zero cells make many pivots degenerate.
  Rng rng(77);
  for (int k = 0; k < 300; ++k) {
    const std::size_t ns = 2 + rng.below(3), nx = 2 + rng.below(7);
    JointDistribution j{DenseMatrix(ns, nx)};
    double total = 0.0;
    for (double& v : j.prob.data) total += (v = rng.bernoulli(0.3) ? 0.0 : rng.uniform());
    if (total == 0.0) continue;
    for (double& v : j.prob.data) v /= total;
    const double beta = rng.bernoulli(0.2) ? 0.0 : rng.uniform();
    const LpDefense d = solve(j, beta);
    EXPECT_LE(d.max_violation(), 1e-9) << "instance " << k;
    EXPECT_LE(d.objective, best_deterministic(j, beta) + 1e-9) << "instance " << k;
  }
}

TEST(SolveGameLpTest, ObjectiveNonIncreasingInBudget) {
  Rng rng(13);
  for (int k = 0; k < 20; ++k) {
    const JointDistribution j = random_joint(rng, 2 + rng.below(2), 2 + rng.below(3));
    double prev = std::numeric_limits<double>::infinity();
    for (double beta = 0.0; beta <= 1.0; beta += 0.05) {
      const double obj = solve(j, beta).objective;
      EXPECT_LE(obj, prev + 1e-9);
      prev = obj;
    }
  }
}

TEST(JointFileTest, ParsesAndValidates) {
  testing::TempDir dir;
  const std::string good = dir.file("joint.tsv");
  text::write_file(good, "# s by x\n0.5 0.0\n0.0 0.5\n");
  const JointDistribution j = load_joint(good);
  EXPECT_EQ(j.attribute_count(), 2u);
  EXPECT_EQ(j.value_count(), 2u);
  EXPECT_THAT(j.value_marginal(), ElementsAre(0.5, 0.5));

  const std::string ragged = dir.file("ragged.tsv");
  text::write_file(ragged, "0.5 0.0\n0.5\n");
  EXPECT_THROW(load_joint(ragged), ValidationError);
  const std::string bad = dir.file("bad.tsv");
  text::write_file(bad, "0.5 x\n0.0 0.5\n");
  EXPECT_THROW(load_joint(bad), ValidationError);
}

}  // namespace
}  // namespace privgraph
