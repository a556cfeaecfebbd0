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
#ifndef PRIVGRAPH_BELIEF_PROPAGATION_HPP_
#define PRIVGRAPH_BELIEF_PROPAGATION_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "privgraph/error.hpp"
#include "privgraph/graph.hpp"
#include "privgraph/prior.hpp"

namespace privgraph {

// Pairwise Markov random field over binary node states x_u in {+1, -1}.
// Node potential phi_u(+1) = q_u, phi_u(-1) = 1 - q_u; every edge has
// psi(x_u, x_v) = w when x_u == x_v and 1 - w otherwise.
class Pmrf {
 public:
  Pmrf(const SocialGraph& graph, std::vector<double> priors, double w)
      : graph_(&graph), priors_(std::move(priors)), w_(w) {
    if (!(w_ > 0.5 && w_ < 1.0)) {
      throw ValidationError("homophily strength w must lie in (0.5, 1)");
    }
    if (priors_.size() != graph.node_count()) {
      throw ValidationError("prior vector length " +
                            std::to_string(priors_.size()) + " != node count " +
                            std::to_string(graph.node_count()));
    }
    for (double q : priors_) {
      if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("prior outside [0, 1]");
    }
  }

  const SocialGraph& graph() const { return *graph_; }
  const std::vector<double>& priors() const { return priors_; }
  double w() const { return w_; }

  // Homophily coupling J with w = 1 / (1 + exp(-J)).
  double coupling() const { return std::log(w_ / (1.0 - w_)); }

 private:
  const SocialGraph* graph_;
  std::vector<double> priors_;
  double w_;
};

struct LbpOptions {
  int max_iters = 100;
  // Halt once the total l1 change of all messages drops below tol.
  double tol = 1e-3;
};

struct LbpResult {
  std::vector<double> posteriors;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
  // m_{v->u}(x_u = +1) stored at v's CSR slot for u.
  std::vector<double> messages;
};

namespace detail {

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// Log-odds of node u's belief: prior log-odds plus the log-odds of every
// incoming message.
inline double node_log_odds(const Pmrf& mrf, NodeId u,
                            std::span<const double> messages,
                            std::span<const std::size_t> reverse) {
  const SocialGraph& g = mrf.graph();
  double q = mrf.priors()[u];
  double acc = std::log(q) - std::log1p(-q);
  for (std::size_t s = g.row_offsets()[u]; s < g.row_offsets()[u + 1]; ++s) {
    acc += logit(messages[reverse[s]]);
  }
  return acc;
}

// reverse[s] is the slot holding the opposite direction of slot s.
inline std::vector<std::size_t> reverse_slots(const SocialGraph& g) {
  std::vector<std::size_t> reverse(g.columns().size());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    for (std::size_t s = g.row_offsets()[v]; s < g.row_offsets()[v + 1]; ++s) {
      reverse[s] = g.find_slot(g.columns()[s], v);
    }
  }
  return reverse;
}

}  // namespace detail

// Loopy belief propagation with a synchronous schedule.
//
// All messages start at 0.5. In each sweep the message v -> u is
//   m_vu ~ sum_{x_v} phi_v(x_v) psi(x_v, x_u) prod_{k in N(v)\u} m_kv(x_v)
// normalised so m_vu(+1) + m_vu(-1) = 1. The product is carried in the
// log-odds domain: with a = Pr(x_v = +1 | everything but u),
// m_vu(+1) = a w + (1 - a)(1 - w). Posteriors are reported even when the
// sweep limit is hit without convergence.
inline LbpResult lbp_run(const Pmrf& mrf, const LbpOptions& opts = {}) {
  const SocialGraph& g = mrf.graph();
  const double w = mrf.w();
  const auto reverse = detail::reverse_slots(g);
  std::vector<double> current(g.columns().size(), 0.5);
  std::vector<double> next(current.size());

  LbpResult result;
  for (int t = 1; t <= opts.max_iters; ++t) {
    double change = 0.0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      const double total = detail::node_log_odds(mrf, v, current, reverse);
      for (std::size_t s = g.row_offsets()[v]; s < g.row_offsets()[v + 1]; ++s) {
        // Exclude the receiver's own message u -> v.
        const double a = sigmoid(total - detail::logit(current[reverse[s]]));
        const double m = a * w + (1.0 - a) * (1.0 - w);
        if (!std::isfinite(m)) {
          throw NumericalError("non-finite message on edge " +
                               std::to_string(v) + " -> " +
                               std::to_string(g.columns()[s]));
        }
        next[s] = m;
        change += std::abs(m - current[s]);
      }
    }
    current.swap(next);
    result.iterations = t;
    result.last_change = change;
    if (change < opts.tol) {
      result.converged = true;
      break;
    }
  }

  result.posteriors.resize(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    result.posteriors[u] = sigmoid(detail::node_log_odds(mrf, u, current, reverse));
  }
  result.messages = std::move(current);
  return result;
}

inline constexpr std::size_t kMaxEnumerationNodes = 20;

// Exact marginals Pr(x_u = +1) by summing the unnormalised joint over all
// 2^|V| states and dividing by the partition function.
inline std::vector<double> exact_marginals(const Pmrf& mrf) {
  const SocialGraph& g = mrf.graph();
  const std::size_t n = g.node_count();
  if (n > kMaxEnumerationNodes) {
    throw ValidationError("exact enumeration refused: " + std::to_string(n) +
                          " nodes exceeds the limit of " +
                          std::to_string(kMaxEnumerationNodes));
  }
  const double w = mrf.w();
  const auto& q = mrf.priors();
  std::vector<double> mass(n, 0.0);
  double z = 0.0;
  for (std::uint64_t state = 0; state < (std::uint64_t{1} << n); ++state) {
    // Bit u set means x_u = +1.
    double weight = 1.0;
    for (std::size_t u = 0; u < n; ++u) {
      weight *= (state >> u & 1) ? q[u] : 1.0 - q[u];
    }
    for (const Edge& e : g.edges()) {
      const bool same = ((state >> e.u) & 1) == ((state >> e.v) & 1);
      weight *= same ? w : 1.0 - w;
    }
    z += weight;
    for (std::size_t u = 0; u < n; ++u) {
      if (state >> u & 1) mass[u] += weight;
    }
  }
  if (!(z > 0.0)) throw NumericalError("partition function is zero");
  for (double& m : mass) m /= z;
  return mass;
}

}  // namespace privgraph

#endif  // PRIVGRAPH_BELIEF_PROPAGATION_HPP_
