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
#include <numeric>
#include <vector>

#include "privgraph/classifier.hpp"
#include "privgraph/labels.hpp"
#include "privgraph/noise_mechanism.hpp"
#include "privgraph/rng.hpp"

namespace privgraph {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;

struct GridOptimum {
  std::vector<double> m;
  double kl = std::numeric_limits<double>::infinity();
};

double plain_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * std::log(p[i] / q[i]);
  return acc;
}

void consider(GridOptimum& best, const std::vector<double>& p, const std::vector<double>& q) {
  const double kl = plain_kl(p, q);
  if (kl < best.kl) {
    best.kl = kl;
    best.m = q;
  }
}

// Exhaustive search over two grids with spacing 1/steps: interior simplex
// points whose expected cost fits the budget, and points on the face where
// the cost equals the budget. Face points fix every coordinate except the
// cheapest and dearest on the grid, then solve the two linear equalities
// for those two.
GridOptimum grid_minimizer(const std::vector<double>& p, const std::vector<double>& norms,
                           double beta, int steps) {
  GridOptimum best;
  const std::size_t m = p.size();
  std::vector<int> counts(m, 1);
  std::vector<double> q(m);
  auto simplex = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == m) {
      if (left < 1) return;
      counts[i] = left;
      double cost = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        q[k] = static_cast<double>(counts[k]) / steps;
        cost += q[k] * norms[k];
      }
      if (cost <= beta + 1e-12) consider(best, p, q);
      return;
    }
    for (int c = 1; c <= left - static_cast<int>(m - i - 1); ++c) {
      counts[i] = c;
      self(self, i + 1, left - c);
    }
  };
  simplex(simplex, 0, steps);

  std::size_t lo = 0, hi = 0;
  for (std::size_t k = 1; k < m; ++k) {
    if (norms[k] < norms[lo]) lo = k;
    if (norms[k] > norms[hi]) hi = k;
  }
  if (norms[lo] == norms[hi]) return best;
  std::vector<std::size_t> free;
  for (std::size_t k = 0; k < m; ++k) {
    if (k != lo && k != hi) free.push_back(k);
  }
  auto face = [&](auto&& self, std::size_t i, double mass, double cost) -> void {
    if (i == free.size()) {
      // q_lo + q_hi = 1 - mass, q_lo n_lo + q_hi n_hi = beta - cost.
      const double rest = 1.0 - mass;
      const double q_hi = (beta - cost - rest * norms[lo]) / (norms[hi] - norms[lo]);
      const double q_lo = rest - q_hi;
      if (q_hi <= 0.0 || q_lo <= 0.0) return;
      q[lo] = q_lo;
      q[hi] = q_hi;
      consider(best, p, q);
      return;
    }
    for (int c = 1; mass + static_cast<double>(c) / steps < 1.0; ++c) {
      const double v = static_cast<double>(c) / steps;
      q[free[i]] = v;
      self(self, i + 1, mass + v, cost + v * norms[free[i]]);
    }
  };
  face(face, 0, 0.0, 0.0);
  return best;
}

struct Instance {
  std::vector<double> p, norms;
  double beta;
};

Instance random_instance(Rng& rng, std::size_t m) {
  Instance in;
  for (std::size_t i = 0; i < m; ++i) in.p.push_back(0.05 + rng.uniform());
  const double total = std::accumulate(in.p.begin(), in.p.end(), 0.0);
  for (double& v : in.p) v /= total;
  in.norms.push_back(0.0);
  for (std::size_t i = 1; i < m; ++i) in.norms.push_back(static_cast<double>(1 + rng.below(8)));
  double cost = 0.0;
  for (std::size_t i = 0; i < m; ++i) cost += in.p[i] * in.norms[i];
  in.beta = cost * (0.1 + 0.85 * rng.uniform());
  return in;
}

TEST(KlDivergenceTest, PointMassAgainstUniform) {
  const std::vector<double> p = {1.0, 0.0}, q = {0.5, 0.5};
  EXPECT_NEAR(kl_divergence(p, q), std::log(2.0), 1e-15);
}

TEST(KlDivergenceTest, ZeroAgainstItself) {
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> p = {rng.uniform(), rng.uniform(), rng.uniform()};
    const double s = p[0] + p[1] + p[2];
    for (double& v : p) v /= s;
    EXPECT_EQ(kl_divergence(p, p), 0.0);
  }
}

TEST(KlDivergenceTest, NonnegativeOnRandomPairs) {
  Rng rng(11);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t m = 2 + rng.below(5);
    std::vector<double> p(m), q(m);
    for (std::size_t i = 0; i < m; ++i) {
      p[i] = rng.uniform();
      q[i] = 1e-3 + rng.uniform();
    }
    const double sp = std::accumulate(p.begin(), p.end(), 0.0);
    const double sq = std::accumulate(q.begin(), q.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    EXPECT_GE(kl_divergence(p, q), 0.0);
  }
}

TEST(KlDivergenceTest, UnsupportedMassIsInfinite) {
  const std::vector<double> p = {0.5, 0.5}, q = {1.0, 0.0};
  EXPECT_TRUE(std::isinf(kl_divergence(p, q)));
  const std::vector<double> r = {1.0, 0.0};
  EXPECT_NEAR(kl_divergence(r, q), 0.0, 0.0);
}

TEST(KlDivergenceTest, LengthMismatchIsRejected) {
  const std::vector<double> p = {1.0}, q = {0.5, 0.5};
  EXPECT_THROW(kl_divergence(p, q), ValidationError);
}

TEST(SolveMechanismTest, SlackBudgetReturnsTarget) {
  const std::vector<double> p = {0.5, 0.5}, n = {0.0, 0.0};
  const MechanismSolution s = solve_mechanism(p, n, 1.0);
  EXPECT_FALSE(s.binding);
  EXPECT_EQ(s.distribution, p);
  EXPECT_EQ(s.lambda, 1.0);
  EXPECT_EQ(s.mu0, 0.0);
}

TEST(SolveMechanismTest, TwoClassBindingIsPinnedByBudget) {
  const std::vector<double> p = {0.5, 0.5}, n = {0.0, 4.0};
  const MechanismSolution s = solve_mechanism(p, n, 1.0);
  EXPECT_TRUE(s.binding);
  EXPECT_THAT(s.distribution, ElementsAre(DoubleNear(0.75, 1e-10), DoubleNear(0.25, 1e-10)));
  EXPECT_NEAR(s.expected_cost, 1.0, 1e-10);
}

TEST(SolveMechanismTest, ThreeClassMatchesFineGrid) {
  const std::vector<double> p = {0.2, 0.3, 0.5}, n = {0.0, 2.0, 5.0};
  const MechanismSolution s = solve_mechanism(p, n, 1.5);
  const GridOptimum g = grid_minimizer(p, n, 1.5, 500);
  ASSERT_EQ(g.m.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s.distribution[i], g.m[i], 0.005);
  EXPECT_LE(kkt_residuals(s, p, 1.5).max(), 1e-8);
  EXPECT_LE(kl_divergence(p, s.distribution), g.kl + 1e-9);
}

TEST(SolveMechanismTest, RandomInstancesMatchGridOracle) {
  Rng rng(2026);
  for (int k = 0; k < 30; ++k) {
    const std::size_t m = 2 + static_cast<std::size_t>(k % 2);
    const Instance in = random_instance(rng, m);
    const MechanismSolution s = solve_mechanism(in.p, in.norms, in.beta);
    const GridOptimum g = grid_minimizer(in.p, in.norms, in.beta, 500);
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_NEAR(s.distribution[i], g.m[i], 0.005) << "instance " << k;
    }
    EXPECT_LE(kl_divergence(in.p, s.distribution), g.kl + 1e-6);
  }
}

TEST(SolveMechanismTest, FourClassBeatsEveryCoarseGridPoint) {
  Rng rng(4);
  for (int k = 0; k < 10; ++k) {
    const Instance in = random_instance(rng, 4);
    const MechanismSolution s = solve_mechanism(in.p, in.norms, in.beta);
    const GridOptimum g = grid_minimizer(in.p, in.norms, in.beta, 50);
    EXPECT_LE(kl_divergence(in.p, s.distribution), g.kl + 1e-6);
  }
}

TEST(SolveMechanismTest, KktCertificateAndBindingCost) {
  Rng rng(8);
  for (int k = 0; k < 200; ++k) {
    const Instance in = random_instance(rng, 2 + rng.below(5));
    const MechanismSolution s = solve_mechanism(in.p, in.norms, in.beta);
    ASSERT_TRUE(s.binding);
    EXPECT_LE(kkt_residuals(s, in.p, in.beta).max(), 1e-8);
    EXPECT_NEAR(s.expected_cost, in.beta, 1e-6);
    EXPECT_NEAR(s.mu0, (1.0 - s.lambda) / in.beta, 1e-14 * std::max(1.0, s.mu0));
    double total = 0.0;
    for (double v : s.distribution) {
      EXPECT_GT(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(SolveMechanismTest, KlNonIncreasingInBudget) {
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    const Instance in = random_instance(rng, 4);
    double prev = std::numeric_limits<double>::infinity();
    for (double beta = 0.05; beta <= 8.0; beta += 0.05) {
      const MechanismSolution s = solve_mechanism(in.p, in.norms, beta);
      const double kl = kl_divergence(in.p, s.distribution);
      EXPECT_LE(kl, prev + 1e-12);
      EXPECT_LE(s.expected_cost, beta + 1e-9);
      if (!s.binding) {
        EXPECT_EQ(s.distribution, in.p);
      }
      prev = kl;
    }
  }
}

TEST(SolveMechanismTest, ZeroBudgetIsDegenerate) {
  const std::vector<double> p = {0.2, 0.3, 0.5}, n = {3.0, 0.0, 1.0};
  const MechanismSolution s = solve_mechanism(p, n, 0.0);
  EXPECT_TRUE(s.degenerate);
  EXPECT_THAT(s.distribution, ElementsAre(0.0, 1.0, 0.0));
  EXPECT_EQ(s.expected_cost, 0.0);
}

TEST(SolveMechanismTest, RejectsBadInputs) {
  const std::vector<double> p = {0.5, 0.5}, n = {0.0, 1.0};
  EXPECT_THROW(solve_mechanism(p, n, -1.0), ValidationError);
  const std::vector<double> zero = {1.0, 0.0};
  EXPECT_THROW(solve_mechanism(zero, n, 1.0), ValidationError);
  const std::vector<double> unnormalised = {0.5, 0.6};
  EXPECT_THROW(solve_mechanism(unnormalised, n, 1.0), ValidationError);
  const std::vector<double> short_norms = {0.0};
  EXPECT_THROW(solve_mechanism(p, short_norms, 1.0), ValidationError);
  const std::vector<double> costly = {2.0, 3.0};
  EXPECT_THROW(solve_mechanism(p, costly, 1.0), ValidationError);
}

TEST(SampleNoiseTest, FrequenciesFollowDistribution) {
  MechanismSolution s;
  s.distribution = {0.75, 0.25};
  Rng rng(99);
  int first = 0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) first += sample_noise(s, rng) == 0;
  EXPECT_NEAR(static_cast<double>(first) / draws, 0.75, 0.01);
}

TEST(SampleNoiseTest, NearDegenerateDistribution) {
  const double eps = 1e-4;
  MechanismSolution s;
  s.distribution = {1.0 - 3 * eps, eps, eps, eps};
  Rng rng(5);
  int first = 0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) first += sample_noise(s, rng) == 0;
  EXPECT_GE(static_cast<double>(first) / draws, 1.0 - 4 * eps);
}

TEST(SampleNoiseTest, SameSeedSameSequence) {
  MechanismSolution s;
  s.distribution = {0.2, 0.3, 0.5};
  Rng a(42), b(42);
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(sample_noise(s, a), sample_noise(s, b));
}

TEST(TargetDistributionTest, Uniform) {
  const TargetDistribution t = TargetDistribution::uniform(4);
  EXPECT_THAT(t.p, ElementsAre(0.25, 0.25, 0.25, 0.25));
  EXPECT_EQ(t.provenance, TargetKind::kUniform);
  EXPECT_THROW(TargetDistribution::uniform(1), ValidationError);
}

TEST(TargetDistributionTest, TrainingFractions) {
  const LabelSet train = LabelSet::multiclass(3, {{0, 1}, {1, 2}, {2, 2}, {3, 3}});
  const TargetDistribution t = TargetDistribution::from_training(train);
  EXPECT_THAT(t.p, ElementsAre(0.25, 0.5, 0.25));
  EXPECT_EQ(t.provenance, TargetKind::kTraining);
  const LabelSet missing = LabelSet::multiclass(3, {{0, 1}, {1, 2}});
  EXPECT_THROW(TargetDistribution::from_training(missing), ValidationError);
}

// Class c scores x[c-1]; class 1 also gets a small bias so it wins ties.
Classifier diagonal_classifier(int m) {
  Classifier c(ClassifierKind::kLinearOva, m, static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) c.w(k, static_cast<std::size_t>(k - 1)) = 1.0;
  return c;
}

TEST(DefendUserTest, HugeBudgetSamplesFromTarget) {
  const Classifier clf = diagonal_classifier(3);
  const std::vector<double> x = {0.6, 0.0, 0.0};
  DefenseConfig cfg;
  cfg.beta = 1e9;
  const TargetDistribution t{{0.2, 0.3, 0.5}, TargetKind::kUniform};
  const DefenseOutcome out = defend_user(clf, x, t, cfg, 7, 0);
  EXPECT_EQ(out.predicted, 1);
  EXPECT_EQ(out.distribution, t.p);
  EXPECT_FALSE(out.solution.binding);
  EXPECT_EQ(out.norms[0], 0.0);
  EXPECT_GT(out.norms[1], 0.0);
  EXPECT_EQ(clf.predict(out.noisy), out.chosen);
}

TEST(DefendUserTest, ZeroBudgetKeepsInput) {
  const Classifier clf = diagonal_classifier(3);
  const std::vector<double> x = {0.0, 1.0, 0.0};
  DefenseConfig cfg;
  cfg.beta = 0.0;
  const DefenseOutcome out =
      defend_user(clf, x, TargetDistribution::uniform(3), cfg, 7, 3);
  EXPECT_TRUE(out.degenerate);
  EXPECT_EQ(out.chosen, 2);
  EXPECT_THAT(out.distribution, ElementsAre(0.0, 1.0, 0.0));
  EXPECT_EQ(out.noisy, x);
}

TEST(DefendUserTest, UnreachableClassLeavesSupport) {
  Classifier clf = diagonal_classifier(3);
  clf.w(3, 2) = 0.0;
  clf.b(3) = -100.0;
  const std::vector<double> x = {1.0, 0.0, 0.0};
  DefenseConfig cfg;
  cfg.beta = 1e9;
  const DefenseOutcome out =
      defend_user(clf, x, TargetDistribution::uniform(3), cfg, 1, 0);
  EXPECT_TRUE(out.any_unreachable);
  EXPECT_EQ(out.norms[2], kUnreachableNorm);
  EXPECT_THAT(out.distribution, ElementsAre(0.5, 0.5, 0.0));
  EXPECT_NE(out.chosen, 3);
}

TEST(DefendUserTest, ExpectedCostWithinBudget) {
  const Classifier clf = diagonal_classifier(4);
  Rng rng(6);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> x(4);
    for (double& v : x) v = static_cast<double>(rng.below(6)) / 5.0;
    DefenseConfig cfg;
    cfg.beta = 0.25 + rng.uniform();
    const DefenseOutcome out =
        defend_user(clf, x, TargetDistribution::uniform(4), cfg, 9, static_cast<std::uint64_t>(k));
    double cost = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      if (out.distribution[i] > 0.0) cost += out.distribution[i] * out.norms[i];
    }
    EXPECT_LE(cost, cfg.beta + 1e-9);
  }
}

TEST(DefendUserTest, DeterministicPerSeedAndUser) {
  const Classifier clf = diagonal_classifier(3);
  const std::vector<double> x = {1.0, 0.2, 0.0};
  DefenseConfig cfg;
  cfg.beta = 1.0;
  const auto t = TargetDistribution::uniform(3);
  const DefenseOutcome a = defend_user(clf, x, t, cfg, 5, 17);
  const DefenseOutcome b = defend_user(clf, x, t, cfg, 5, 17);
  EXPECT_EQ(a.chosen, b.chosen);
  EXPECT_EQ(a.noisy, b.noisy);
}

TEST(DefendUserTest, TargetSizeMismatchIsRejected) {
  const Classifier clf = diagonal_classifier(3);
  const std::vector<double> x = {1.0, 0.0, 0.0};
  EXPECT_THROW(defend_user(clf, x, TargetDistribution::uniform(2), {}, 1, 0),
               ValidationError);
}

}  // namespace
}  // namespace privgraph
