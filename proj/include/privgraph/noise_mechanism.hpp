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
#ifndef PRIVGRAPH_NOISE_MECHANISM_HPP_
#define PRIVGRAPH_NOISE_MECHANISM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "privgraph/classifier.hpp"
#include "privgraph/error.hpp"
#include "privgraph/evasion_noise.hpp"
#include "privgraph/labels.hpp"
#include "privgraph/rng.hpp"
#include "privgraph/text_io.hpp"

namespace privgraph {

enum class TargetKind { kUniform, kTraining };

// Distribution the defender wants the classifier's output to follow.
struct TargetDistribution {
  std::vector<double> p;
  TargetKind provenance = TargetKind::kUniform;

  static TargetDistribution uniform(int num_classes) {
    if (num_classes < 2) throw ValidationError("need at least 2 classes");
    return {std::vector<double>(static_cast<std::size_t>(num_classes),
                                1.0 / num_classes),
            TargetKind::kUniform};
  }

  // Fraction of training users holding each attribute value.
  static TargetDistribution from_training(const LabelSet& training) {
    if (training.mode() != LabelMode::kMulticlass || training.empty()) {
      throw ValidationError("training target needs non-empty multiclass labels");
    }
    std::vector<double> counts(static_cast<std::size_t>(training.num_classes()), 0.0);
    for (const LabelEntry& e : training.entries()) {
      counts[static_cast<std::size_t>(e.label - 1)] += 1.0;
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == 0.0) {
        throw ValidationError("class " + std::to_string(i + 1) +
                              " has no training users; target would not be "
                              "strictly positive");
      }
      counts[i] /= static_cast<double>(training.size());
    }
    return {std::move(counts), TargetKind::kTraining};
  }

  void validate() const {
    if (p.size() < 2) throw ValidationError("target needs at least 2 classes");
    double total = 0.0;
    for (double v : p) {
      if (!(v > 0.0)) throw ValidationError("target probabilities must be positive");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw ValidationError("target probabilities must sum to 1");
    }
  }
};

// KL(p || q) = sum_i p_i ln(p_i / q_i), with 0 ln(0 / .) = 0. Returns
// +infinity when some q_i = 0 has p_i > 0.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("KL: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(acc, 0.0);
}

struct MechanismSolution {
  // M*_i, the probability of adding representative noise r_i.
  std::vector<double> distribution;
  double lambda = 1.0;
  double mu0 = 0.0;
  // Budget constraint active (expected cost == beta).
  bool binding = false;
  // beta == 0: all mass on the zero-cost noises; multipliers undefined.
  bool degenerate = false;
  double expected_cost = 0.0;
  std::vector<double> norms;
  int newton_steps = 0;
  int bisection_steps = 0;
};

struct KktResiduals {
  double stationarity = 0.0;  // max_i |-p_i / M_i + mu0 n_i + lambda|
  double simplex = 0.0;       // |sum M - 1|
  double budget = 0.0;        // max(0, cost - beta), or |cost - beta| if binding
  double complementary = 0.0; // |mu0 (cost - beta)|
  double max() const {
    return std::max({stationarity, simplex, budget, complementary});
  }
};

inline KktResiduals kkt_residuals(const MechanismSolution& s,
                                  std::span<const double> p, double beta) {
  KktResiduals r;
  double total = 0.0, cost = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total += s.distribution[i];
    cost += s.distribution[i] * s.norms[i];
    if (!s.degenerate) {
      r.stationarity = std::max(
          r.stationarity,
          std::abs(-p[i] / s.distribution[i] + s.mu0 * s.norms[i] + s.lambda));
    }
  }
  r.simplex = std::abs(total - 1.0);
  r.budget = s.binding ? std::abs(cost - beta) : std::max(0.0, cost - beta);
  if (!s.degenerate) r.complementary = std::abs(s.mu0 * (cost - beta));
  return r;
}

namespace detail {

inline void finish_solution(MechanismSolution& s) {
  s.expected_cost = 0.0;
  for (std::size_t i = 0; i < s.norms.size(); ++i) {
    s.expected_cost += s.distribution[i] * s.norms[i];
  }
}

}  // namespace detail

// Minimises KL(p || M) over distributions M with M_i > 0 and expected L0
// cost sum_i M_i n_i <= beta.
//
// When p itself fits the budget, M* = p (lambda = 1, mu0 = 0). Otherwise
// the budget binds and stationarity gives M_i = p_i / (mu0 n_i + lambda)
// with mu0 = (1 - lambda) / beta. Substituting leaves one scalar equation
// in lambda, solved by Newton's method inside a sign bracket, falling back
// to bisection when a Newton step leaves the bracket.
inline MechanismSolution solve_mechanism(std::span<const double> p,
                                         std::span<const double> norms,
                                         double beta,
                                         double newton_tol = 1e-10) {
  const std::size_t m = p.size();
  if (m == 0 || norms.size() != m) {
    throw ValidationError("mechanism: p and norms must have the same nonzero length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(p[i] > 0.0)) throw ValidationError("mechanism: p must be strictly positive");
    if (!(norms[i] >= 0.0) || !std::isfinite(norms[i])) {
      throw ValidationError("mechanism: norms must be finite and nonnegative");
    }
    total += p[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("mechanism: p must sum to 1");
  if (!(beta >= 0.0)) throw ValidationError("mechanism: budget must be nonnegative");

  MechanismSolution s;
  s.norms.assign(norms.begin(), norms.end());
  double cost_p = 0.0, n_min = norms[0];
  for (std::size_t i = 0; i < m; ++i) {
    cost_p += p[i] * norms[i];
    n_min = std::min(n_min, norms[i]);
  }

  if (cost_p <= beta) {
    s.distribution.assign(p.begin(), p.end());
    s.lambda = 1.0;
    s.mu0 = 0.0;
    s.binding = false;
    detail::finish_solution(s);
    return s;
  }

  if (beta == 0.0) {
    double zero_mass = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (norms[i] == 0.0) zero_mass += p[i];
    }
    if (zero_mass == 0.0) {
      throw ValidationError("mechanism: budget 0 but no zero-cost noise exists");
    }
    s.distribution.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (norms[i] == 0.0) s.distribution[i] = p[i] / zero_mass;
    }
    s.binding = true;
    s.degenerate = true;
    s.lambda = std::numeric_limits<double>::quiet_NaN();
    s.mu0 = std::numeric_limits<double>::quiet_NaN();
    detail::finish_solution(s);
    return s;
  }

  if (n_min >= beta) {
    throw ValidationError("mechanism: infeasible budget, every noise costs at least " +
                          text::format_double(n_min));
  }

  // With t = 1 - lambda = mu0 beta and c_i = n_i / beta, M_i = p_i /
  // (1 - t (1 - c_i)) and the budget reads G(t) = sum_i M_i (1 - c_i) = 0.
  // G is strictly increasing on (0, t_max), negative at 0 and +inf at t_max.
  const double t_max = beta / (beta - n_min);
  auto eval = [&](double t, double* slope) {
    double g = 0.0, dg = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = 1.0 - norms[i] / beta;
      const double d = 1.0 - t * a;
      g += p[i] * a / d;
      dg += p[i] * a * a / (d * d);
    }
    if (slope) *slope = dg;
    return g;
  };

  double lo = 0.0, hi = t_max;
  double x = 0.0;
  double slope = 0.0;
  double f = eval(x, &slope);
  for (int iter = 0; iter < 400 && f != 0.0; ++iter) {
    double next = x - f / slope;
    if (!(slope > 0.0) || !(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
      ++s.bisection_steps;
    } else {
      ++s.newton_steps;
    }
    if (next == x) break;
    x = next;
    f = eval(x, &slope);
    if (f < 0.0) {
      lo = x;
    } else if (f > 0.0) {
      hi = x;
    }
    if (std::abs(f) <= 1e-15) break;
  }

  s.lambda = 1.0 - x;
  s.mu0 = x / beta;
  s.binding = true;
  s.distribution.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    s.distribution[i] = p[i] / (s.mu0 * norms[i] + s.lambda);
    if (!(s.distribution[i] > 0.0) || !std::isfinite(s.distribution[i])) {
      throw NumericalError("mechanism: non-positive probability for noise " +
                           std::to_string(i));
    }
  }
  detail::finish_solution(s);
  const double residual = std::abs(s.expected_cost - beta);
  if (residual > newton_tol) {
    throw NumericalError("mechanism: Newton did not converge, budget residual " +
                         text::format_double(residual));
  }
  return s;
}

// Draws an index with probability distribution[i] by inverse CDF.
inline std::size_t sample_noise(const MechanismSolution& s, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < s.distribution.size(); ++i) {
    if (s.distribution[i] <= 0.0) continue;
    acc += s.distribution[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

// Cost assigned to a class whose representative noise could not be found.
inline constexpr double kUnreachableNorm = std::numeric_limits<double>::max();

struct DefenseConfig {
  NoisePolicy policy = NoisePolicy::kModifyAdd;
  NoiseSearchConfig search;
  double beta = 4.0;
  double newton_tol = 1e-10;
};

struct DefenseOutcome {
  std::vector<double> noisy;
  int predicted = 1;
  // Representative noise per class (index i - 1 for class i).
  std::vector<NoiseResult> noises;
  // L0 norm per class; kUnreachableNorm for unreachable classes.
  std::vector<double> norms;
  // Sampling distribution over all classes; unreachable classes get 0.
  std::vector<double> distribution;
  MechanismSolution solution;  // over the reachable classes only
  int chosen = 1;
  bool any_unreachable = false;
  bool degenerate = false;
};

// Two-phase defense for one user: representative noise for every class
// (zero for the class the defender already predicts), optional grid
// quantisation, the KL-optimal mechanism over their L0 norms, then one
// sampled noise. A class whose noise cannot be found (or stops working
// after quantisation) is dropped from the support and p is renormalised
// over the remaining classes.
inline DefenseOutcome defend_user(const Classifier& defender,
                                  std::span<const double> x,
                                  const TargetDistribution& target,
                                  const DefenseConfig& cfg,
                                  std::uint64_t seed, std::uint64_t user_id) {
  target.validate();
  const int m = defender.num_classes();
  if (static_cast<int>(target.p.size()) != m) {
    throw ValidationError("target distribution size != classifier classes");
  }
  DefenseOutcome out;
  out.predicted = defender.predict(x);
  out.norms.assign(static_cast<std::size_t>(m), kUnreachableNorm);
  out.distribution.assign(static_cast<std::size_t>(m), 0.0);

  std::vector<std::size_t> reachable;
  for (int i = 1; i <= m; ++i) {
    NoiseResult r = find_noise(defender, x, i, cfg.policy, cfg.search);
    if (cfg.search.grid && r.success) {
      r = quantize_noise(defender, x, r, *cfg.search.grid);
    }
    if (r.success) {
      out.norms[static_cast<std::size_t>(i - 1)] = static_cast<double>(r.l0);
      reachable.push_back(static_cast<std::size_t>(i - 1));
    } else {
      out.any_unreachable = true;
    }
    out.noises.push_back(std::move(r));
  }

  std::vector<double> p_sub, n_sub;
  double mass = 0.0;
  for (std::size_t k : reachable) mass += target.p[k];
  for (std::size_t k : reachable) {
    p_sub.push_back(target.p[k] / mass);
    n_sub.push_back(out.norms[k]);
  }
  out.solution = solve_mechanism(p_sub, n_sub, cfg.beta, cfg.newton_tol);
  out.degenerate = out.solution.degenerate;
  for (std::size_t j = 0; j < reachable.size(); ++j) {
    out.distribution[reachable[j]] = out.solution.distribution[j];
  }

  Rng rng(mix_seed(seed, user_id));
  const std::size_t pick = reachable[sample_noise(out.solution, rng)];
  out.chosen = static_cast<int>(pick) + 1;
  out.noisy.assign(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out.noisy[j] = std::clamp(x[j] + out.noises[pick].noise[j], 0.0, 1.0);
  }
  return out;
}

}  // namespace privgraph

#endif  // PRIVGRAPH_NOISE_MECHANISM_HPP_
