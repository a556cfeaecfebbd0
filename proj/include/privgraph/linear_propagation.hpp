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
#ifndef PRIVGRAPH_LINEAR_PROPAGATION_HPP_
#define PRIVGRAPH_LINEAR_PROPAGATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "privgraph/error.hpp"
#include "privgraph/graph.hpp"
#include "privgraph/rng.hpp"
#include "privgraph/text_io.hpp"

namespace privgraph {

// Probabilities shifted by -0.5. Values are not clamped while iterating;
// to_probabilities() clamps to [0, 1] for reporting.
struct ResidualVector {
  std::vector<double> values;

  static ResidualVector from_probabilities(std::span<const double> probs) {
    ResidualVector r;
    r.values.reserve(probs.size());
    for (double p : probs) r.values.push_back(p - 0.5);
    return r;
  }

  std::vector<double> to_probabilities() const {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(std::clamp(v + 0.5, 0.0, 1.0));
    return out;
  }

  std::size_t size() const { return values.size(); }
};

// Message from v once the receiver's own message is no longer excluded:
// only v's current posterior matters.
inline double simplified_message(double p_v, double w) {
  return p_v * w + (1.0 - p_v) * (1.0 - w);
}

inline double l1_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}

// Largest |eigenvalue| of the adjacency matrix by power iteration.
//
// Iterates on M + I: the shift separates +rho from -rho on bipartite
// graphs without changing the eigenvectors. The estimate is the Rayleigh
// quotient x^T M x of the unit iterate, and iteration stops when
// |M x - theta x| <= tol. Graphs without edges return 0.
inline double spectral_radius(const SocialGraph& g, int max_iters = 1000,
                              double tol = 1e-10) {
  const std::size_t n = g.node_count();
  if (g.edge_count() == 0) return 0.0;
  std::vector<double> x(n), mx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double jitter =
        static_cast<double>(mix_seed(0x5eed, i) >> 11) * 0x1.0p-53;
    x[i] = 1.0 + 0.01 * jitter;
  }
  auto normalise = [](std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    s = std::sqrt(s);
    for (double& e : v) e /= s;
  };
  normalise(x);
  double theta = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    g.multiply(x, mx);
    theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) theta += x[i] * mx[i];
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = mx[i] - theta * x[i];
      residual += r * r;
    }
    if (std::sqrt(residual) <= tol) break;
    for (std::size_t i = 0; i < n; ++i) x[i] += mx[i];
    normalise(x);
  }
  return theta;
}

enum class ConvergenceVerdict {
  kGuaranteed,  // w_hat below 1 / (2 max degree)
  kExpected,    // below 1 / (2 rho) only
  kDivergent,   // at or above 1 / (2 rho)
};

inline const char* to_string(ConvergenceVerdict v) {
  switch (v) {
    case ConvergenceVerdict::kGuaranteed: return "guaranteed";
    case ConvergenceVerdict::kExpected: return "expected";
    case ConvergenceVerdict::kDivergent: return "divergent";
  }
  return "unknown";
}

struct ConvergenceReport {
  double spectral_radius = 0.0;
  // Induced l1 norm of M, i.e. the maximum degree.
  std::size_t l1_norm = 0;
  double average_degree = 0.0;
  double necessary_bound = 0.0;   // 1 / (2 rho)
  double sufficient_bound = 0.0;  // 1 / (2 max degree)
  double heuristic_bound = 0.0;   // 1 / (2 average degree), advisory
  double w_hat = 0.0;
  ConvergenceVerdict verdict = ConvergenceVerdict::kGuaranteed;
};

inline double half_inverse(double x) {
  return x > 0.0 ? 1.0 / (2.0 * x) : std::numeric_limits<double>::infinity();
}

inline ConvergenceReport convergence_report(const SocialGraph& g, double w_hat) {
  ConvergenceReport r;
  r.spectral_radius = spectral_radius(g);
  r.l1_norm = g.max_degree();
  r.average_degree = g.average_degree();
  r.necessary_bound = half_inverse(r.spectral_radius);
  r.sufficient_bound = half_inverse(static_cast<double>(r.l1_norm));
  r.heuristic_bound = half_inverse(r.average_degree);
  // rho <= max degree; on regular graphs the two agree and the Rayleigh
  // estimate may land one rounding step above the degree.
  if (r.sufficient_bound > r.necessary_bound &&
      r.sufficient_bound - r.necessary_bound <= 1e-12 * r.necessary_bound) {
    r.sufficient_bound = r.necessary_bound;
  }
  r.w_hat = w_hat;
  if (w_hat < r.sufficient_bound) {
    r.verdict = ConvergenceVerdict::kGuaranteed;
  } else if (w_hat < r.necessary_bound) {
    r.verdict = ConvergenceVerdict::kExpected;
  } else {
    r.verdict = ConvergenceVerdict::kDivergent;
  }
  return r;
}

struct LinearOptions {
  int max_iters = 1000;
  // Halt when |p_t - p_{t-1}|_1 / |p_{t-1}|_1 < rel_tol.
  double rel_tol = 1e-3;
  double divergence_threshold = 1e12;
};

struct LinearResult {
  ResidualVector posterior;
  int iterations = 0;
  bool converged = false;
  double last_relative_change = 0.0;
};

inline std::string divergence_message(double w_hat, double rho) {
  return "linear propagation diverges: w_hat=" + text::format_double(w_hat) +
         " violates the necessary convergence bound w_hat < 1/(2*rho(M)) = " +
         text::format_double(half_inverse(rho)) + " (rho=" +
         text::format_double(rho) + ")";
}

// Residual iteration p_t = q + 2 w_hat M p_{t-1}, starting from p_0 = q.
//
// Each sweep costs one sparse product, O(|V| + |E|). Throws
// DivergenceError when the iterate's l1 norm passes the divergence
// threshold, or when the sweep limit is reached with 2 w_hat rho >= 1.
inline LinearResult linear_iterate(const SocialGraph& g,
                                   const ResidualVector& prior, double w_hat,
                                   const LinearOptions& opts = {}) {
  if (!(w_hat > 0.0)) throw ValidationError("w_hat must be positive");
  if (prior.size() != g.node_count()) {
    throw ValidationError("prior residual length != node count");
  }
  const std::size_t n = g.node_count();
  const double scale = 2.0 * w_hat;
  std::vector<double> current = prior.values;
  std::vector<double> next(n);

  LinearResult result;
  for (int t = 1; t <= opts.max_iters; ++t) {
    g.multiply(current, next);
    double diff = 0.0, norm = 0.0, prev_norm = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      next[u] = prior.values[u] + scale * next[u];
      diff += std::abs(next[u] - current[u]);
      norm += std::abs(next[u]);
      prev_norm += std::abs(current[u]);
    }
    if (!(norm <= opts.divergence_threshold)) {
      throw DivergenceError(divergence_message(w_hat, spectral_radius(g)));
    }
    current.swap(next);
    result.iterations = t;
    result.last_relative_change =
        diff == 0.0 ? 0.0
                    : (prev_norm > 0.0 ? diff / prev_norm
                                       : std::numeric_limits<double>::infinity());
    if (result.last_relative_change < opts.rel_tol) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged) {
    const double rho = spectral_radius(g);
    if (scale * rho >= 1.0) throw DivergenceError(divergence_message(w_hat, rho));
  }
  result.posterior.values = std::move(current);
  return result;
}

struct ResidualPrediction {
  int label;  // +1 or -1
  bool tie;   // residual was exactly zero
};

inline ResidualPrediction predict_from_residual(double residual) {
  if (residual > 0.0) return {1, false};
  return {-1, residual == 0.0};
}

}  // namespace privgraph

#endif  // PRIVGRAPH_LINEAR_PROPAGATION_HPP_
