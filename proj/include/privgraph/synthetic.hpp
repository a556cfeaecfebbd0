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
#ifndef PRIVGRAPH_SYNTHETIC_HPP_
#define PRIVGRAPH_SYNTHETIC_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "privgraph/behavior.hpp"
#include "privgraph/error.hpp"
#include "privgraph/graph.hpp"
#include "privgraph/labels.hpp"
#include "privgraph/rng.hpp"

namespace privgraph {

// Planted-partition world: users get a class, edges are drawn with
// intra_prob inside a class and inter_prob across classes, and each class
// owns a block of objects that its members rate more often.
struct SynthConfig {
  std::size_t node_count = 400;
  double intra_prob = 0.05;
  double inter_prob = 0.005;
  std::vector<double> class_proportions = {0.5, 0.5};
  std::size_t objects_per_class = 10;
  // Probability that a user rates an object of its own class block, and
  // an object of any other block.
  double in_class_rate = 0.3;
  double out_class_rate = 0.1;
  // Fraction of users whose behavior row is left empty.
  double behaviorless_fraction = 0.0;
  std::uint64_t seed = 1;

  void validate() const {
    auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (node_count == 0) throw ValidationError("node_count must be positive");
    if (!is_prob(intra_prob) || !is_prob(inter_prob) ||
        !is_prob(in_class_rate) || !is_prob(out_class_rate) ||
        !is_prob(behaviorless_fraction)) {
      throw ValidationError("probabilities must lie in [0, 1]");
    }
    if (intra_prob < inter_prob) {
      throw ValidationError("intra_prob must be >= inter_prob (homophily)");
    }
    if (class_proportions.size() < 2) {
      throw ValidationError("need at least 2 classes");
    }
    double total = 0.0;
    for (double p : class_proportions) {
      if (!(p >= 0.0)) throw ValidationError("negative class proportion");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ValidationError("class proportions must sum to 1");
    }
    if (objects_per_class == 0) {
      throw ValidationError("objects_per_class must be positive");
    }
  }
};

struct SyntheticWorld {
  SocialGraph graph;
  BehaviorMatrix behaviors;
  // Every user's true class in 1..m.
  LabelSet labels;
  int num_classes = 0;
};

inline SyntheticWorld gen_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int m = static_cast<int>(cfg.class_proportions.size());
  const std::size_t n = cfg.node_count;

  std::vector<std::uint64_t> cumulative;
  double acc = 0.0;
  for (int c = 0; c + 1 < m; ++c) {
    acc += cfg.class_proportions[c];
    cumulative.push_back(Rng::threshold(acc));
  }
  std::vector<int> cls(n);
  for (std::size_t u = 0; u < n; ++u) {
    const std::uint64_t draw = rng.next_u64() >> 11;
    int c = 0;
    while (c + 1 < m && draw >= cumulative[c]) ++c;
    cls[u] = c + 1;
  }

  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.bernoulli(cls[u] == cls[v] ? cfg.intra_prob : cfg.inter_prob)) {
        edges.push_back({u, v});
      }
    }
  }

  const std::size_t objects = cfg.objects_per_class * static_cast<std::size_t>(m);
  std::vector<BehaviorEntry> entries;
  for (std::size_t u = 0; u < n; ++u) {
    if (rng.bernoulli(cfg.behaviorless_fraction)) continue;
    for (std::size_t j = 0; j < objects; ++j) {
      const int block = static_cast<int>(j / cfg.objects_per_class) + 1;
      const double rate = block == cls[u] ? cfg.in_class_rate : cfg.out_class_rate;
      if (rng.bernoulli(rate)) {
        const double rating = static_cast<double>(1 + rng.below(5)) / 5.0;
        entries.push_back({u, j, rating});
      }
    }
  }

  std::vector<LabelEntry> labels;
  labels.reserve(n);
  for (std::size_t u = 0; u < n; ++u) labels.push_back({u, cls[u]});

  return SyntheticWorld{SocialGraph(n, std::move(edges)),
                        BehaviorMatrix(n, objects, std::move(entries)),
                        LabelSet::multiclass(m, std::move(labels)), m};
}

// Fraction of edges whose endpoints share a class.
inline double edge_homophily(const SocialGraph& g, const LabelSet& labels) {
  if (g.edge_count() == 0) return 0.0;
  std::size_t same = 0;
  for (const Edge& e : g.edges()) {
    if (labels.get(e.u) == labels.get(e.v)) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(g.edge_count());
}

}  // namespace privgraph

#endif  // PRIVGRAPH_SYNTHETIC_HPP_
