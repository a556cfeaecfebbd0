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
#ifndef PRIVGRAPH_PIPELINE_HPP_
#define PRIVGRAPH_PIPELINE_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "privgraph/behavior.hpp"
#include "privgraph/belief_propagation.hpp"
#include "privgraph/classifier.hpp"
#include "privgraph/error.hpp"
#include "privgraph/evasion_noise.hpp"
#include "privgraph/graph.hpp"
#include "privgraph/labels.hpp"
#include "privgraph/linear_propagation.hpp"
#include "privgraph/metrics.hpp"
#include "privgraph/noise_mechanism.hpp"
#include "privgraph/prior.hpp"
#include "privgraph/rng.hpp"
#include "privgraph/synthetic.hpp"
#include "privgraph/text_io.hpp"

namespace privgraph {

struct UserSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle of 0..n-1; the first round(train_fraction * n) users
// train, the rest test. Both halves come back sorted.
inline UserSplit split_users(std::size_t n, double train_fraction,
                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  const auto cut = static_cast<std::size_t>(train_fraction * static_cast<double>(n) + 0.5);
  if (cut == 0 || cut >= n) throw ValidationError("split leaves an empty side");
  UserSplit s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(cut), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

// ---------------------------------------------------------------------------
// Graph-based inference.

enum class Engine { kLinear, kLbp };

inline const char* to_string(Engine e) {
  return e == Engine::kLinear ? "linear" : "lbp";
}

inline Engine parse_engine(std::string_view s) {
  if (s == "linear") return Engine::kLinear;
  if (s == "lbp") return Engine::kLbp;
  throw ValidationError("unknown engine '" + std::string(s) + "'");
}

struct GraphInferenceOptions {
  Engine engine = Engine::kLinear;
  // Residual homophily; unset means 0.9 times the necessary bound.
  std::optional<double> w_hat;
  LrOptions lr;
  LinearOptions linear;
  LbpOptions lbp;
};

struct GraphInferenceReport {
  Engine engine = Engine::kLinear;
  double w_hat = 0.0;
  ConvergenceReport convergence;
  std::vector<double> priors;      // every node
  std::vector<double> posteriors;  // every node
  std::vector<std::size_t> test_users;
  std::vector<int> predictions;        // per test user, +1 / -1
  std::vector<int> prior_predictions;  // per test user
  double accuracy = 0.0;
  double prior_accuracy = 0.0;
  double auc = 0.0;
  double prior_auc = 0.0;
  int iterations = 0;
  bool converged = false;
  int lr_epochs = 0;
};

inline int sign_of_probability(double p) { return p > 0.5 ? 1 : -1; }

// train_prior on the training labels, priors for every node (0.5 without
// behaviors), propagation, then evaluation on the test labels against the
// prior-only predictions.
inline GraphInferenceReport run_graph_inference(const SocialGraph& graph,
                                                const BehaviorMatrix& behaviors,
                                                const LabelSet& train,
                                                const LabelSet& test,
                                                const GraphInferenceOptions& opts = {}) {
  if (train.mode() != LabelMode::kBinary || test.mode() != LabelMode::kBinary) {
    throw ValidationError("graph inference needs binary labels");
  }
  train.check_users(graph.node_count());
  test.check_users(graph.node_count());
  if (test.empty()) throw ValidationError("empty test set");

  GraphInferenceReport rep;
  rep.engine = opts.engine;
  const LrTrainResult lr = train_prior(behaviors, train, opts.lr);
  rep.lr_epochs = lr.epochs;
  rep.priors = assemble_priors(lr.model, behaviors, graph.node_count());

  const double rho = spectral_radius(graph);
  rep.w_hat = opts.w_hat ? *opts.w_hat : 0.9 * half_inverse(rho);
  rep.convergence = convergence_report(graph, rep.w_hat);

  if (opts.engine == Engine::kLinear) {
    if (rep.convergence.verdict == ConvergenceVerdict::kDivergent) {
      throw DivergenceError(divergence_message(rep.w_hat, rep.convergence.spectral_radius));
    }
    const LinearResult res = linear_iterate(
        graph, ResidualVector::from_probabilities(rep.priors), rep.w_hat, opts.linear);
    rep.posteriors = res.posterior.to_probabilities();
    rep.iterations = res.iterations;
    rep.converged = res.converged;
  } else {
    const Pmrf mrf(graph, rep.priors, 0.5 + rep.w_hat);
    const LbpResult res = lbp_run(mrf, opts.lbp);
    rep.posteriors = res.posteriors;
    rep.iterations = res.iterations;
    rep.converged = res.converged;
  }

  std::vector<int> truth;
  std::vector<double> post_scores, prior_scores;
  for (const LabelEntry& e : test.entries()) {
    rep.test_users.push_back(e.user);
    truth.push_back(e.label);
    post_scores.push_back(rep.posteriors[e.user]);
    prior_scores.push_back(rep.priors[e.user]);
    rep.predictions.push_back(sign_of_probability(rep.posteriors[e.user]));
    rep.prior_predictions.push_back(sign_of_probability(rep.priors[e.user]));
  }
  rep.accuracy = inference_accuracy(rep.predictions, truth);
  rep.prior_accuracy = inference_accuracy(rep.prior_predictions, truth);
  const bool both = std::find(truth.begin(), truth.end(), 1) != truth.end() &&
                    std::find(truth.begin(), truth.end(), -1) != truth.end();
  if (both) {
    rep.auc = rank_auc(post_scores, truth);
    rep.prior_auc = rank_auc(prior_scores, truth);
  }
  return rep;
}

struct SyntheticInferenceConfig {
  SynthConfig world;
  double train_fraction = 0.5;
  // Class mapped to +1; all other classes are -1.
  int positive_class = 1;
  GraphInferenceOptions inference;

  SyntheticInferenceConfig() { world.node_count = 500; }
};

inline GraphInferenceReport run_synthetic_inference(const SyntheticInferenceConfig& cfg) {
  const SyntheticWorld world = gen_synthetic(cfg.world);
  const UserSplit split = split_users(world.graph.node_count(), cfg.train_fraction,
                                      mix_seed(cfg.world.seed, 1));
  const LabelSet binary = to_binary(world.labels, cfg.positive_class);
  return run_graph_inference(world.graph, world.behaviors, binary.subset(split.train),
                             binary.subset(split.test), cfg.inference);
}

// ---------------------------------------------------------------------------
// Defense sweep over the utility budget.

struct SweepConfig {
  SynthConfig world;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<double> betas = {0.0, 1.0, 2.0, 4.0, 8.0};
  double train_fraction = 0.5;
  NoisePolicy policy = NoisePolicy::kModifyAdd;
  NoiseSearchConfig search;
  TargetKind target = TargetKind::kUniform;
  ClassifierOptions defender;
  ClassifierOptions network_attacker;

  SweepConfig() {
    world.node_count = 500;
    world.class_proportions = {0.2, 0.2, 0.2, 0.2, 0.2};
    world.intra_prob = 0.0;
    world.inter_prob = 0.0;
    defender.kind = ClassifierKind::kLinearOva;
    network_attacker.kind = ClassifierKind::kOneHiddenRelu;
  }

  void validate() const {
    if (seeds.empty()) throw ValidationError("sweep needs at least one seed");
    if (betas.empty()) throw ValidationError("sweep needs at least one budget");
    for (double b : betas) {
      if (!(b >= 0.0)) throw ValidationError("budgets must be nonnegative");
    }
    if (defender.kind != ClassifierKind::kLinearOva) {
      throw ValidationError("the defender classifier must be linear");
    }
    search.validate();
  }
};

struct SweepRow {
  std::uint64_t seed = 0;
  double beta = 0.0;
  std::string attacker;  // "matched" or "network"
  double accuracy = 0.0;
  // Mean over test users of sum_i M*_i |r_i|_0 (never above beta).
  double expected_l0 = 0.0;
  // Mean over test users of the sampled noise's L0 norm.
  double mean_l0 = 0.0;
};

inline std::vector<SweepRow> run_defense_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<SweepRow> rows;
  for (std::uint64_t seed : cfg.seeds) {
    SynthConfig wc = cfg.world;
    wc.seed = seed;
    const SyntheticWorld world = gen_synthetic(wc);
    const UserSplit split = split_users(wc.node_count, cfg.train_fraction, mix_seed(seed, 1));
    const LabelSet train = world.labels.subset(split.train);
    const LabelSet test = world.labels.subset(split.test);
    const Dataset train_data = make_dataset(world.behaviors, train);

    ClassifierOptions dopt = cfg.defender;
    dopt.seed = mix_seed(seed, 2);
    const Classifier defender = train_classifier(train_data, dopt).classifier;
    // The matched attacker shares the defender's architecture, training
    // data and options, so the trained models coincide.
    const Classifier& matched = defender;
    ClassifierOptions aopt = cfg.network_attacker;
    aopt.seed = mix_seed(seed, 3);
    const Classifier network = train_classifier(train_data, aopt).classifier;

    const TargetDistribution target = cfg.target == TargetKind::kUniform
                                          ? TargetDistribution::uniform(world.num_classes)
                                          : TargetDistribution::from_training(train);
    DefenseConfig dc;
    dc.policy = cfg.policy;
    dc.search = cfg.search;

    // Every budget reuses the same per-user sampling streams.
    for (double beta : cfg.betas) {
      dc.beta = beta;
      std::size_t hit_matched = 0, hit_network = 0;
      double expected = 0.0, realized = 0.0;
      for (const LabelEntry& e : test.entries()) {
        const auto x = world.behaviors.dense_row(e.user);
        const DefenseOutcome out =
            defend_user(defender, x, target, dc, mix_seed(seed, 4), e.user);
        expected += out.solution.expected_cost;
        realized += static_cast<double>(out.noises[static_cast<std::size_t>(out.chosen - 1)].l0);
        hit_matched += matched.predict(out.noisy) == e.label;
        hit_network += network.predict(out.noisy) == e.label;
      }
      const double nt = static_cast<double>(test.size());
      rows.push_back({seed, dc.beta, "matched", hit_matched / nt, expected / nt, realized / nt});
      rows.push_back({seed, dc.beta, "network", hit_network / nt, expected / nt, realized / nt});
    }
  }
  return rows;
}

inline std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "seed,beta,attacker,accuracy,expected_l0,mean_l0\n";
  for (const SweepRow& r : rows) {
    out += std::to_string(r.seed) + ',' + text::format_double(r.beta) + ',' + r.attacker +
           ',' + text::format_double(r.accuracy) + ',' + text::format_double(r.expected_l0) +
           ',' + text::format_double(r.mean_l0) + '\n';
  }
  return out;
}

// Mean accuracy over seeds for one (beta, attacker) cell.
inline double mean_accuracy(const std::vector<SweepRow>& rows, double beta,
                            const std::string& attacker) {
  double total = 0.0;
  std::size_t count = 0;
  for (const SweepRow& r : rows) {
    if (r.beta == beta && r.attacker == attacker) {
      total += r.accuracy;
      ++count;
    }
  }
  if (count == 0) throw ValidationError("no sweep rows for that cell");
  return total / static_cast<double>(count);
}

}  // namespace privgraph

#endif  // PRIVGRAPH_PIPELINE_HPP_
