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
#ifndef PRIVGRAPH_CLASSIFIER_HPP_
#define PRIVGRAPH_CLASSIFIER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "privgraph/behavior.hpp"
#include "privgraph/error.hpp"
#include "privgraph/labels.hpp"
#include "privgraph/prior.hpp"
#include "privgraph/rng.hpp"
#include "privgraph/text_io.hpp"

namespace privgraph {

enum class ClassifierKind { kLinearOva, kOneHiddenRelu };

inline const char* to_string(ClassifierKind k) {
  return k == ClassifierKind::kLinearOva ? "linear" : "mlp";
}

// Multi-class classifier with decision values C_1..C_m and analytic input
// gradients. Classes are numbered 1..m in the public interface.
//
// linear-ova:       C_i(x) = w_i . x + b_i (raw one-vs-all score)
// one-hidden-relu:  C(x) = W2 relu(W1 x + b1) + b2
//
// All parameters live in one flat vector so training code can treat both
// kinds uniformly.
class Classifier {
 public:
  Classifier() = default;

  Classifier(ClassifierKind kind, int num_classes, std::size_t input_dim,
             std::size_t hidden = 0)
      : kind_(kind), classes_(num_classes), inputs_(input_dim), hidden_(hidden) {
    if (num_classes < 2) throw ValidationError("need at least 2 classes");
    if (kind == ClassifierKind::kOneHiddenRelu && hidden == 0) {
      throw ValidationError("hidden width must be at least 1");
    }
    if (kind == ClassifierKind::kLinearOva) hidden_ = 0;
    params_.assign(parameter_count(), 0.0);
  }

  ClassifierKind kind() const { return kind_; }
  int num_classes() const { return classes_; }
  std::size_t input_dim() const { return inputs_; }
  std::size_t hidden_width() const { return hidden_; }

  std::size_t parameter_count() const {
    const std::size_t m = static_cast<std::size_t>(classes_);
    if (kind_ == ClassifierKind::kLinearOva) return m * inputs_ + m;
    return hidden_ * inputs_ + hidden_ + m * hidden_ + m;
  }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  // Linear layout: W (m x n) then b (m).
  // Network layout: W1 (h x n), b1 (h), W2 (m x h), b2 (m).
  double& w(int cls, std::size_t j) { return params_[idx_w(cls, j)]; }
  double& b(int cls) { return params_[idx_b(cls)]; }
  double& w1(std::size_t k, std::size_t j) { return params_[k * inputs_ + j]; }
  double& b1(std::size_t k) { return params_[hidden_ * inputs_ + k]; }
  double& w2(int cls, std::size_t k) { return params_[w2_offset() + static_cast<std::size_t>(cls - 1) * hidden_ + k]; }
  double& b2(int cls) { return params_[w2_offset() + static_cast<std::size_t>(classes_) * hidden_ + static_cast<std::size_t>(cls - 1)]; }

  std::vector<double> decision_values(std::span<const double> x) const {
    check_input(x);
    std::vector<double> out(static_cast<std::size_t>(classes_));
    if (kind_ == ClassifierKind::kLinearOva) {
      for (int c = 1; c <= classes_; ++c) {
        double s = params_[idx_b(c)];
        const double* row = params_.data() + idx_w(c, 0);
        for (std::size_t j = 0; j < inputs_; ++j) s += row[j] * x[j];
        out[static_cast<std::size_t>(c - 1)] = s;
      }
      return out;
    }
    const auto act = hidden_activations(x);
    for (int c = 1; c <= classes_; ++c) {
      const double* row = params_.data() + w2_offset() + static_cast<std::size_t>(c - 1) * hidden_;
      double s = params_[w2_offset() + static_cast<std::size_t>(classes_) * hidden_ + static_cast<std::size_t>(c - 1)];
      for (std::size_t k = 0; k < hidden_; ++k) s += row[k] * std::max(act[k], 0.0);
      out[static_cast<std::size_t>(c - 1)] = s;
    }
    return out;
  }

  // argmax_i C_i(x); ties go to the lowest class index.
  int predict(std::span<const double> x) const {
    const auto v = decision_values(x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[best]) best = i;
    }
    return static_cast<int>(best) + 1;
  }

  // dC_cls / dx. ReLU derivative is taken as 0 at exactly 0.
  std::vector<double> input_gradient(std::span<const double> x, int cls) const {
    check_input(x);
    check_class(cls);
    std::vector<double> grad(inputs_, 0.0);
    if (kind_ == ClassifierKind::kLinearOva) {
      const double* row = params_.data() + idx_w(cls, 0);
      std::copy(row, row + inputs_, grad.begin());
      return grad;
    }
    const auto act = hidden_activations(x);
    const double* out_row = params_.data() + w2_offset() + static_cast<std::size_t>(cls - 1) * hidden_;
    for (std::size_t k = 0; k < hidden_; ++k) {
      if (!(act[k] > 0.0)) continue;
      const double coef = out_row[k];
      const double* in_row = params_.data() + k * inputs_;
      for (std::size_t j = 0; j < inputs_; ++j) grad[j] += coef * in_row[j];
    }
    return grad;
  }

  // Pre-activations W1 x + b1 of the hidden layer.
  std::vector<double> hidden_activations(std::span<const double> x) const {
    std::vector<double> z(hidden_);
    for (std::size_t k = 0; k < hidden_; ++k) {
      double s = params_[hidden_ * inputs_ + k];
      const double* row = params_.data() + k * inputs_;
      for (std::size_t j = 0; j < inputs_; ++j) s += row[j] * x[j];
      z[k] = s;
    }
    return z;
  }

  void check_class(int cls) const {
    if (cls < 1 || cls > classes_) {
      throw ValidationError("class " + std::to_string(cls) + " outside 1.." +
                            std::to_string(classes_));
    }
  }

 private:
  std::size_t idx_w(int cls, std::size_t j) const {
    return static_cast<std::size_t>(cls - 1) * inputs_ + j;
  }
  std::size_t idx_b(int cls) const {
    return static_cast<std::size_t>(classes_) * inputs_ + static_cast<std::size_t>(cls - 1);
  }
  std::size_t w2_offset() const { return hidden_ * inputs_ + hidden_; }

  void check_input(std::span<const double> x) const {
    if (x.size() != inputs_) {
      throw ValidationError("input has " + std::to_string(x.size()) +
                            " features, classifier expects " +
                            std::to_string(inputs_));
    }
  }

  ClassifierKind kind_ = ClassifierKind::kLinearOva;
  int classes_ = 2;
  std::size_t inputs_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> params_;
};

// Dense training set; labels are 1..m.
struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  int num_classes = 2;
  std::size_t input_dim() const { return features.empty() ? 0 : features[0].size(); }
};

inline Dataset make_dataset(const BehaviorMatrix& behaviors,
                            const LabelSet& labels) {
  if (labels.mode() != LabelMode::kMulticlass) {
    throw ValidationError("classifier training needs multiclass labels");
  }
  Dataset d;
  d.num_classes = labels.num_classes();
  for (const LabelEntry& e : labels.entries()) {
    d.features.push_back(behaviors.dense_row(e.user));
    d.labels.push_back(e.label);
  }
  return d;
}

struct ClassifierOptions {
  ClassifierKind kind = ClassifierKind::kLinearOva;
  std::size_t hidden = 16;
  int epochs = 300;
  std::size_t batch_size = 32;
  double learning_rate = 0.5;
  double l2 = 1e-3;
  std::uint64_t seed = 1;
};

struct ClassifierTrainResult {
  Classifier classifier;
  // Full-data loss after every accepted epoch; non-increasing.
  std::vector<double> loss_history;
  int rejected_epochs = 0;
};

namespace detail {

// Mean loss over `rows` plus the l2 penalty on weights (biases are not
// penalised). Linear: sum of per-class binary logistic losses. Network:
// softmax cross-entropy. Accumulates the parameter gradient when `grad`
// is non-empty.
inline double classifier_loss(const Classifier& clf, const Dataset& data,
                              std::span<const std::size_t> rows, double l2,
                              std::span<double> grad) {
  const std::size_t n = clf.input_dim();
  const std::size_t m = static_cast<std::size_t>(clf.num_classes());
  const std::size_t h = clf.hidden_width();
  const auto& p = clf.parameters();
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  const double inv = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  std::vector<double> dscore(m), dhidden(h);
  for (std::size_t r : rows) {
    const auto& x = data.features[r];
    const int y = data.labels[r];
    const auto scores = clf.decision_values(x);
    if (clf.kind() == ClassifierKind::kLinearOva) {
      for (std::size_t c = 0; c < m; ++c) {
        const double t = static_cast<int>(c) + 1 == y ? 1.0 : -1.0;
        loss += softplus(-t * scores[c]);
        dscore[c] = -t * sigmoid(-t * scores[c]);
      }
    } else {
      const double mx = *std::max_element(scores.begin(), scores.end());
      double z = 0.0;
      for (double s : scores) z += std::exp(s - mx);
      loss += mx + std::log(z) - scores[static_cast<std::size_t>(y - 1)];
      for (std::size_t c = 0; c < m; ++c) {
        dscore[c] = std::exp(scores[c] - mx) / z - (static_cast<int>(c) + 1 == y ? 1.0 : 0.0);
      }
    }
    if (grad.empty()) continue;
    if (clf.kind() == ClassifierKind::kLinearOva) {
      for (std::size_t c = 0; c < m; ++c) {
        double* row = grad.data() + c * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += inv * dscore[c] * x[j];
        grad[m * n + c] += inv * dscore[c];
      }
    } else {
      const auto z1 = clf.hidden_activations(x);
      const std::size_t w2 = h * n + h;
      for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t k = 0; k < h; ++k) {
          grad[w2 + c * h + k] += inv * dscore[c] * std::max(z1[k], 0.0);
        }
        grad[w2 + m * h + c] += inv * dscore[c];
      }
      for (std::size_t k = 0; k < h; ++k) {
        double s = 0.0;
        if (z1[k] > 0.0) {
          for (std::size_t c = 0; c < m; ++c) s += dscore[c] * p[w2 + c * h + k];
        }
        dhidden[k] = s;
      }
      for (std::size_t k = 0; k < h; ++k) {
        if (dhidden[k] == 0.0) continue;
        double* row = grad.data() + k * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += inv * dhidden[k] * x[j];
        grad[h * n + k] += inv * dhidden[k];
      }
    }
  }
  loss *= inv;
  // Weight blocks: linear W is [0, m n); network W1 is [0, h n) and W2 is
  // [h n + h, h n + h + m h).
  auto penalise = [&](std::size_t first, std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
      loss += 0.5 * l2 * p[i] * p[i];
      if (!grad.empty()) grad[i] += l2 * p[i];
    }
  };
  if (clf.kind() == ClassifierKind::kLinearOva) {
    penalise(0, m * n);
  } else {
    penalise(0, h * n);
    penalise(h * n + h, h * n + h + m * h);
  }
  return loss;
}

}  // namespace detail

// Mini-batch gradient descent with a fixed seed and epoch count. After each
// epoch the full-data loss is evaluated; an epoch that increases it is
// rolled back and the learning rate halved, so accepted epochs never
// increase the loss. Each accepted epoch lets the rate grow back by 10%,
// up to its initial value.
inline ClassifierTrainResult train_classifier(const Dataset& data,
                                              const ClassifierOptions& opts) {
  if (data.features.empty()) throw ValidationError("empty training set");
  const std::size_t n = data.input_dim();
  std::vector<int> counts(static_cast<std::size_t>(data.num_classes) + 1, 0);
  for (std::size_t r = 0; r < data.features.size(); ++r) {
    if (data.features[r].size() != n) throw ValidationError("ragged features");
    const int y = data.labels[r];
    if (y < 1 || y > data.num_classes) throw ValidationError("label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  for (int c = 1; c <= data.num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw ValidationError("class " + std::to_string(c) +
                            " has no training examples");
    }
  }

  ClassifierTrainResult result;
  Classifier clf(opts.kind, data.num_classes, n, opts.hidden);
  Rng rng(opts.seed);
  if (opts.kind == ClassifierKind::kOneHiddenRelu) {
    const std::size_t h = opts.hidden;
    const double in_scale = std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(n, 1)));
    const double out_scale = std::sqrt(1.0 / static_cast<double>(h));
    for (std::size_t k = 0; k < h; ++k) {
      for (std::size_t j = 0; j < n; ++j) clf.w1(k, j) = in_scale * rng.normal();
      clf.b1(k) = 0.01;
    }
    for (int c = 1; c <= data.num_classes; ++c) {
      for (std::size_t k = 0; k < h; ++k) clf.w2(c, k) = out_scale * rng.normal();
    }
  }

  std::vector<std::size_t> order(data.features.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(clf.parameter_count());
  double lr = opts.learning_rate;
  double loss = detail::classifier_loss(clf, data, order, opts.l2, {});
  result.loss_history.push_back(loss);
  const std::size_t batch = std::max<std::size_t>(1, std::min(opts.batch_size, order.size()));

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    const std::vector<double> snapshot = clf.parameters();
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      detail::classifier_loss(clf, data, std::span(order).subspan(start, len),
                              opts.l2, grad);
      auto& p = clf.parameters();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * grad[i];
    }
    const double next = detail::classifier_loss(clf, data, order, opts.l2, {});
    if (!std::isfinite(next)) {
      throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
    }
    if (next > loss) {
      clf.parameters() = snapshot;
      lr *= 0.5;
      ++result.rejected_epochs;
      continue;
    }
    loss = next;
    result.loss_history.push_back(loss);
    lr = std::min(lr * 1.1, opts.learning_rate);
  }
  result.classifier = std::move(clf);
  return result;
}

inline double classifier_accuracy(const Classifier& clf, const Dataset& data) {
  if (data.features.empty()) throw ValidationError("empty evaluation set");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < data.features.size(); ++r) {
    if (clf.predict(data.features[r]) == data.labels[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.features.size());
}

// Plain-text tensors:
//   kind linear|mlp / classes m / inputs n / hidden h
//   then one "tensor NAME ROWS COLS" header per block, followed by ROWS
//   lines of COLS numbers.
inline std::string format_classifier(const Classifier& clf) {
  std::string out = "# classifier\n";
  out += std::string("kind ") + to_string(clf.kind()) + "\n";
  out += "classes " + std::to_string(clf.num_classes()) + "\n";
  out += "inputs " + std::to_string(clf.input_dim()) + "\n";
  out += "hidden " + std::to_string(clf.hidden_width()) + "\n";
  const auto& p = clf.parameters();
  std::size_t offset = 0;
  auto tensor = [&](const char* name, std::size_t rows, std::size_t cols) {
    out += std::string("tensor ") + name + " " + std::to_string(rows) + " " +
           std::to_string(cols) + "\n";
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c) out += ' ';
        out += text::format_double(p[offset++]);
      }
      out += '\n';
    }
  };
  const std::size_t m = static_cast<std::size_t>(clf.num_classes());
  const std::size_t n = clf.input_dim();
  const std::size_t h = clf.hidden_width();
  if (clf.kind() == ClassifierKind::kLinearOva) {
    tensor("W", m, n);
    tensor("b", m, 1);
  } else {
    tensor("W1", h, n);
    tensor("b1", h, 1);
    tensor("W2", m, h);
    tensor("b2", m, 1);
  }
  return out;
}

inline Classifier parse_classifier(std::string_view contents) {
  auto all = text::lines(contents);
  std::size_t i = 0;
  std::string kind;
  std::optional<std::uint64_t> classes, inputs, hidden;
  std::vector<double> values;
  for (; i < all.size(); ++i) {
    auto toks = text::split_ws(all[i].text);
    if (toks.empty() || toks.front().front() == '#') continue;
    if (toks[0] == "tensor") {
      if (toks.size() != 4) throw ValidationError("bad tensor header" + text::at_line(all[i].number));
      auto rows = text::parse_uint(toks[2]);
      auto cols = text::parse_uint(toks[3]);
      if (!rows || !cols) throw ValidationError("bad tensor shape" + text::at_line(all[i].number));
      for (std::uint64_t r = 0; r < *rows; ++r) {
        ++i;
        if (i >= all.size()) throw ValidationError("truncated tensor");
        auto cells = text::split_ws(all[i].text);
        if (cells.size() != *cols) throw ValidationError("tensor row width mismatch" + text::at_line(all[i].number));
        for (auto cell : cells) {
          auto v = text::parse_double(cell);
          if (!v) throw ValidationError("bad tensor value" + text::at_line(all[i].number));
          values.push_back(*v);
        }
      }
      continue;
    }
    if (toks.size() != 2) throw ValidationError("bad classifier line" + text::at_line(all[i].number));
    if (toks[0] == "kind") {
      kind = std::string(toks[1]);
    } else if (toks[0] == "classes") {
      classes = text::parse_uint(toks[1]);
    } else if (toks[0] == "inputs") {
      inputs = text::parse_uint(toks[1]);
    } else if (toks[0] == "hidden") {
      hidden = text::parse_uint(toks[1]);
    } else {
      throw ValidationError("unknown classifier key" + text::at_line(all[i].number));
    }
  }
  if (!classes || !inputs || (kind != "linear" && kind != "mlp")) {
    throw ValidationError("classifier file missing kind/classes/inputs");
  }
  Classifier clf(kind == "linear" ? ClassifierKind::kLinearOva : ClassifierKind::kOneHiddenRelu,
                 static_cast<int>(*classes), *inputs, hidden ? *hidden : 0);
  if (values.size() != clf.parameter_count()) {
    throw ValidationError("classifier file has " + std::to_string(values.size()) +
                          " parameters, expected " + std::to_string(clf.parameter_count()));
  }
  clf.parameters() = std::move(values);
  return clf;
}

inline void save_classifier(const Classifier& clf, const std::string& path) {
  text::write_file(path, format_classifier(clf));
}

inline Classifier load_classifier(const std::string& path) {
  return parse_classifier(text::read_file(path));
}

}  // namespace privgraph

#endif  // PRIVGRAPH_CLASSIFIER_HPP_
