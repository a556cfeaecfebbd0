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
#ifndef PRIVGRAPH_PRIOR_HPP_
#define PRIVGRAPH_PRIOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "privgraph/behavior.hpp"
#include "privgraph/error.hpp"
#include "privgraph/labels.hpp"
#include "privgraph/text_io.hpp"

namespace privgraph {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// Logistic-regression prior: q_u = sigmoid(b_u . weights + bias).
struct BinaryLrModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_strength = 1.0;

  double score(std::span<const RowEntry> row) const {
    double h = bias;
    for (const RowEntry& e : row) h += weights[e.object] * e.value;
    return h;
  }
};

struct LrOptions {
  double l2 = 1.0;
  int max_epochs = 2000;
  double tol = 1e-6;
};

struct LrTrainResult {
  BinaryLrModel model;
  int epochs = 0;
  // True when the gradient norm fell below tol; false when max_epochs ran
  // out (or the line search could make no further progress).
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> loss_history;
};

// Regularised negative log-likelihood, averaged over examples:
//   (1/n) [ sum_i log(1 + exp(-y_i h_i)) + (l2 / 2) |c|^2 ].
// The parameter vector is the weights followed by the bias; the bias is
// not regularised.
class LrObjective {
 public:
  LrObjective(const BehaviorMatrix& behaviors, const LabelSet& labels,
              double l2)
      : behaviors_(behaviors), l2_(l2) {
    for (const LabelEntry& e : labels.entries()) {
      behaviors.check_user(e.user);
      users_.push_back(e.user);
      targets_.push_back(e.label > 0 ? 1.0 : -1.0);
    }
  }

  std::size_t dimension() const { return behaviors_.object_count() + 1; }

  // Returns the loss; writes the gradient into `grad` when non-empty.
  double evaluate(std::span<const double> params, std::span<double> grad) const {
    const std::size_t d = behaviors_.object_count();
    const double n = static_cast<double>(users_.size());
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < users_.size(); ++i) {
      auto row = behaviors_.row(users_[i]);
      double h = params[d];
      for (const RowEntry& e : row) h += params[e.object] * e.value;
      const double margin = targets_[i] * h;
      loss += softplus(-margin);
      if (!grad.empty()) {
        // d/dh softplus(-y h) = -y sigmoid(-y h)
        const double g = -targets_[i] * sigmoid(-margin);
        for (const RowEntry& e : row) grad[e.object] += g * e.value;
        grad[d] += g;
      }
    }
    double reg = 0.0;
    for (std::size_t j = 0; j < d; ++j) reg += params[j] * params[j];
    loss += 0.5 * l2_ * reg;
    if (!grad.empty()) {
      for (std::size_t j = 0; j < d; ++j) grad[j] = (grad[j] + l2_ * params[j]) / n;
      grad[d] /= n;
    }
    return loss / n;
  }

 private:
  const BehaviorMatrix& behaviors_;
  double l2_;
  std::vector<std::size_t> users_;
  std::vector<double> targets_;
};

// Full-batch gradient descent with Armijo backtracking. Every accepted
// step strictly decreases the objective.
inline LrTrainResult train_prior(const BehaviorMatrix& behaviors,
                                 const LabelSet& labels,
                                 const LrOptions& opts = {}) {
  if (labels.mode() != LabelMode::kBinary) {
    throw ValidationError("train_prior needs binary labels");
  }
  if (opts.l2 < 0.0) throw ValidationError("l2 strength must be nonnegative");
  bool pos = false, neg = false;
  for (const LabelEntry& e : labels.entries()) (e.label > 0 ? pos : neg) = true;
  if (!pos || !neg) {
    throw ValidationError("training labels must contain both classes");
  }

  const LrObjective objective(behaviors, labels, opts.l2);
  const std::size_t dim = objective.dimension();
  std::vector<double> params(dim, 0.0), grad(dim), trial(dim);

  LrTrainResult result;
  double loss = objective.evaluate(params, grad);
  result.loss_history.push_back(loss);
  double step = 1.0;
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    double gnorm2 = 0.0;
    for (double g : grad) gnorm2 += g * g;
    result.gradient_norm = std::sqrt(gnorm2);
    if (result.gradient_norm <= opts.tol) {
      result.converged = true;
      break;
    }
    bool accepted = false;
    double trial_loss = loss;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t j = 0; j < dim; ++j) trial[j] = params[j] - step * grad[j];
      trial_loss = objective.evaluate(trial, {});
      if (!std::isfinite(trial_loss)) {
        throw NumericalError("non-finite logistic loss at epoch " +
                             std::to_string(epoch) + " (step " +
                             text::format_double(step) + ")");
      }
      if (trial_loss <= loss - 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    params.swap(trial);
    loss = objective.evaluate(params, grad);
    result.loss_history.push_back(loss);
    result.epochs = epoch + 1;
    step = std::min(step * 2.0, 1e6);
  }
  if (!result.converged) {
    double gnorm2 = 0.0;
    for (double g : grad) gnorm2 += g * g;
    result.gradient_norm = std::sqrt(gnorm2);
    result.converged = result.gradient_norm <= opts.tol;
  }

  result.model.weights.assign(params.begin(), params.end() - 1);
  result.model.bias = params.back();
  result.model.l2_strength = opts.l2;
  return result;
}

// Prior probability for one user; exactly 0.5 when the user has no
// behaviors at all.
inline double predict_prior(const BinaryLrModel& model, std::size_t user,
                            const BehaviorMatrix& behaviors) {
  if (model.weights.size() != behaviors.object_count()) {
    throw ValidationError("model has " + std::to_string(model.weights.size()) +
                          " weights but behaviors have " +
                          std::to_string(behaviors.object_count()) + " objects");
  }
  auto row = behaviors.row(user);
  if (row.empty()) return 0.5;
  return sigmoid(model.score(row));
}

// Priors for nodes 0..node_count-1. Nodes past the behavior matrix's last
// user have no behaviors and get 0.5.
inline std::vector<double> assemble_priors(const BinaryLrModel& model,
                                           const BehaviorMatrix& behaviors,
                                           std::size_t node_count) {
  std::vector<double> q(node_count, 0.5);
  for (std::size_t u = 0; u < node_count && u < behaviors.user_count(); ++u) {
    q[u] = predict_prior(model, u, behaviors);
  }
  return q;
}

inline std::string format_lr_model(const BinaryLrModel& m) {
  std::string out = "# binary logistic regression\n";
  out += "object_count " + std::to_string(m.weights.size()) + "\n";
  out += "l2 " + text::format_double(m.l2_strength) + "\n";
  out += "bias " + text::format_double(m.bias) + "\n";
  out += "weights";
  for (double w : m.weights) out += " " + text::format_double(w);
  out += "\n";
  return out;
}

inline BinaryLrModel parse_lr_model(std::string_view contents) {
  BinaryLrModel m;
  std::optional<std::size_t> count;
  bool have_weights = false;
  for (const text::Line& line : text::lines(contents)) {
    auto toks = text::split_ws(line.text);
    if (toks.empty() || toks.front().front() == '#') continue;
    auto number = [&](std::size_t i) {
      auto v = text::parse_double(toks.at(i));
      if (!v) throw ValidationError("bad number" + text::at_line(line.number));
      return *v;
    };
    if (toks[0] == "object_count" && toks.size() == 2) {
      count = text::parse_uint(toks[1]);
      if (!count) throw ValidationError("bad object_count" + text::at_line(line.number));
    } else if (toks[0] == "l2" && toks.size() == 2) {
      m.l2_strength = number(1);
    } else if (toks[0] == "bias" && toks.size() == 2) {
      m.bias = number(1);
    } else if (toks[0] == "weights") {
      for (std::size_t i = 1; i < toks.size(); ++i) m.weights.push_back(number(i));
      have_weights = true;
    } else {
      throw ValidationError("unknown model key" + text::at_line(line.number));
    }
  }
  if (!count || !have_weights || m.weights.size() != *count) {
    throw ValidationError("model file missing or inconsistent weights");
  }
  return m;
}

inline void save_lr_model(const BinaryLrModel& m, const std::string& path) {
  text::write_file(path, format_lr_model(m));
}

inline BinaryLrModel load_lr_model(const std::string& path) {
  return parse_lr_model(text::read_file(path));
}

// Priors file: "user prior" lines, one per node.
inline std::string format_probabilities(std::span<const double> values) {
  std::string out;
  for (std::size_t u = 0; u < values.size(); ++u) {
    out += std::to_string(u) + ' ' + text::format_double(values[u]) + '\n';
  }
  return out;
}

inline std::vector<double> parse_probabilities(std::string_view contents,
                                               std::size_t node_count) {
  std::vector<double> q(node_count, 0.5);
  std::vector<char> seen(node_count, 0);
  for (const text::Line& line : text::lines(contents)) {
    auto toks = text::split_ws(line.text);
    if (toks.empty() || toks.front().front() == '#') continue;
    if (toks.size() != 2) throw ValidationError("expected 'user prob'" + text::at_line(line.number));
    auto u = text::parse_uint(toks[0]);
    auto p = text::parse_double(toks[1]);
    if (!u || !p) throw ValidationError("bad prior line" + text::at_line(line.number));
    if (*u >= node_count) throw ValidationError("prior for unknown node" + text::at_line(line.number));
    if (!(*p >= 0.0 && *p <= 1.0)) throw ValidationError("value out of range" + text::at_line(line.number));
    if (seen[*u]) throw ValidationError("duplicate prior" + text::at_line(line.number));
    seen[*u] = 1;
    q[*u] = *p;
  }
  return q;
}

}  // namespace privgraph

#endif  // PRIVGRAPH_PRIOR_HPP_
