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
#ifndef PRIVGRAPH_GAME_LP_HPP_
#define PRIVGRAPH_GAME_LP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "privgraph/error.hpp"
#include "privgraph/simplex.hpp"
#include "privgraph/text_io.hpp"

namespace privgraph {

// Square or rectangular dense matrix stored row-major.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// d(a, b) = 1 if a == b else 0: the privacy loss of a correct guess.
inline DenseMatrix identity_indicator(std::size_t n) {
  DenseMatrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = 1.0;
  return d;
}

// d(a, b) = 1 if a != b else 0: unit utility cost of changing the value.
inline DenseMatrix mismatch_indicator(std::size_t n) {
  DenseMatrix d(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = 0.0;
  return d;
}

inline constexpr std::size_t kMaxAttributeValues = 4;
inline constexpr std::size_t kMaxPublicValues = 8;

// Pr(s, x) over attribute values s (rows) and public-data values x
// (columns). Domains are capped: the LP has |X|^2 + |X| variables.
struct JointDistribution {
  DenseMatrix prob;

  std::size_t attribute_count() const { return prob.rows; }
  std::size_t value_count() const { return prob.cols; }

  void validate() const {
    if (prob.rows == 0 || prob.cols == 0) throw ValidationError("empty joint distribution");
    if (prob.rows > kMaxAttributeValues || prob.cols > kMaxPublicValues) {
      throw ValidationError("joint distribution too large for the exact LP (max " +
                            std::to_string(kMaxAttributeValues) + " x " +
                            std::to_string(kMaxPublicValues) + ")");
    }
    double total = 0.0;
    for (double v : prob.data) {
      if (!(v >= 0.0)) throw ValidationError("joint probabilities must be nonnegative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("joint probabilities must sum to 1");
  }

  std::vector<double> value_marginal() const {
    std::vector<double> out(prob.cols, 0.0);
    for (std::size_t s = 0; s < prob.rows; ++s) {
      for (std::size_t x = 0; x < prob.cols; ++x) out[x] += prob(s, x);
    }
    return out;
  }
  std::vector<double> attribute_marginal() const {
    std::vector<double> out(prob.rows, 0.0);
    for (std::size_t s = 0; s < prob.rows; ++s) {
      for (std::size_t x = 0; x < prob.cols; ++x) out[s] += prob(s, x);
    }
    return out;
  }
};

// The defender's LP. Variables: f(x'|x) at x * |X| + x', then y_{x'} at
// |X|^2 + x'. Rows, in order:
//   1 utility budget        sum_{x,x'} Pr(x) f(x'|x) d_q(x, x') <= beta
//   |X| |S| dominance       sum_{s,x} Pr(s,x) f(x'|x) d_p(s, s^) - y_{x'} <= 0
//   |X| row-stochastic      sum_{x'} f(x'|x) = 1
// Nonnegativity of every variable is implicit.
struct GameLp {
  LinearProgram lp;
  JointDistribution joint;
  DenseMatrix privacy_loss;
  DenseMatrix utility_loss;
  double beta = 0.0;

  std::size_t value_count() const { return joint.value_count(); }
  std::size_t mapping_var(std::size_t x, std::size_t x_noisy) const {
    return x * value_count() + x_noisy;
  }
  std::size_t y_var(std::size_t x_noisy) const {
    return value_count() * value_count() + x_noisy;
  }
  std::size_t dominance_row(std::size_t x_noisy, std::size_t guess) const {
    return 1 + x_noisy * joint.attribute_count() + guess;
  }
};

inline GameLp build_game_lp(const JointDistribution& joint,
                            const DenseMatrix& privacy_loss,
                            const DenseMatrix& utility_loss, double beta) {
  joint.validate();
  const std::size_t ns = joint.attribute_count();
  const std::size_t nx = joint.value_count();
  if (privacy_loss.rows != ns || privacy_loss.cols != ns) {
    throw ValidationError("privacy loss must be |S| x |S|");
  }
  if (utility_loss.rows != nx || utility_loss.cols != nx) {
    throw ValidationError("utility loss must be |X| x |X|");
  }
  if (!(beta >= 0.0)) throw ValidationError("budget beta must be nonnegative");

  GameLp g{LinearProgram{}, joint, privacy_loss, utility_loss, beta};
  LinearProgram& lp = g.lp;
  lp.num_vars = nx * nx + nx;
  lp.objective.assign(lp.num_vars, 0.0);
  for (std::size_t xn = 0; xn < nx; ++xn) lp.objective[g.y_var(xn)] = 1.0;

  const auto px = joint.value_marginal();
  std::vector<double> row(lp.num_vars, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t xn = 0; xn < nx; ++xn) {
      row[g.mapping_var(x, xn)] = px[x] * utility_loss(x, xn);
    }
  }
  lp.add_row(row, RowType::kLessEqual, beta);

  for (std::size_t xn = 0; xn < nx; ++xn) {
    for (std::size_t guess = 0; guess < ns; ++guess) {
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t x = 0; x < nx; ++x) {
        double c = 0.0;
        for (std::size_t s = 0; s < ns; ++s) c += joint.prob(s, x) * privacy_loss(s, guess);
        row[g.mapping_var(x, xn)] = c;
      }
      row[g.y_var(xn)] = -1.0;
      lp.add_row(row, RowType::kLessEqual, 0.0);
    }
  }

  for (std::size_t x = 0; x < nx; ++x) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t xn = 0; xn < nx; ++xn) row[g.mapping_var(x, xn)] = 1.0;
    lp.add_row(row, RowType::kEqual, 1.0);
  }
  return g;
}

// Attacker's expected privacy gain under mapping f (|X| x |X|,
// row x holds f(.|x)): sum_{x'} max_{s^} sum_{s,x} Pr(s,x) f(x'|x) d_p(s,s^).
inline double mapping_privacy_loss(const JointDistribution& joint,
                                   const DenseMatrix& privacy_loss,
                                   const DenseMatrix& mapping) {
  const std::size_t ns = joint.attribute_count();
  const std::size_t nx = joint.value_count();
  double total = 0.0;
  for (std::size_t xn = 0; xn < nx; ++xn) {
    double best = 0.0;
    for (std::size_t guess = 0; guess < ns; ++guess) {
      double v = 0.0;
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t x = 0; x < nx; ++x) {
          v += joint.prob(s, x) * mapping(x, xn) * privacy_loss(s, guess);
        }
      }
      best = std::max(best, v);
    }
    total += best;
  }
  return total;
}

inline double mapping_utility_loss(const JointDistribution& joint,
                                   const DenseMatrix& utility_loss,
                                   const DenseMatrix& mapping) {
  const auto px = joint.value_marginal();
  double total = 0.0;
  for (std::size_t x = 0; x < joint.value_count(); ++x) {
    for (std::size_t xn = 0; xn < joint.value_count(); ++xn) {
      total += px[x] * mapping(x, xn) * utility_loss(x, xn);
    }
  }
  return total;
}

struct LpDefense {
  DenseMatrix mapping;     // f(x'|x), row x
  std::vector<double> y;   // y_{x'}
  double objective = 0.0;
  double expected_utility_loss = 0.0;
  double beta = 0.0;
  // Certificates at the returned point.
  double budget_violation = 0.0;
  double stochasticity_violation = 0.0;
  double dominance_violation = 0.0;
  double nonnegativity_violation = 0.0;
  double complementary_slackness = 0.0;
  int pivots = 0;

  double max_violation() const {
    return std::max({budget_violation, stochasticity_violation,
                     dominance_violation, nonnegativity_violation});
  }
};

inline LpDefense solve_game_lp(const GameLp& g) {
  const LpSolution sol = solve_linear_program(g.lp);
  const std::size_t nx = g.value_count();
  const std::size_t ns = g.joint.attribute_count();
  LpDefense d;
  d.beta = g.beta;
  d.pivots = sol.pivots;
  d.mapping = DenseMatrix(nx, nx);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t xn = 0; xn < nx; ++xn) {
      d.mapping(x, xn) = sol.x[g.mapping_var(x, xn)];
    }
  }
  d.y.resize(nx);
  for (std::size_t xn = 0; xn < nx; ++xn) d.y[xn] = sol.x[g.y_var(xn)];
  d.objective = sol.objective;
  d.complementary_slackness = sol.complementary_slackness;

  d.expected_utility_loss = mapping_utility_loss(g.joint, g.utility_loss, d.mapping);
  d.budget_violation = std::max(0.0, d.expected_utility_loss - g.beta);
  for (std::size_t x = 0; x < nx; ++x) {
    double row = 0.0;
    for (std::size_t xn = 0; xn < nx; ++xn) {
      row += d.mapping(x, xn);
      d.nonnegativity_violation = std::max(d.nonnegativity_violation, -d.mapping(x, xn));
    }
    d.stochasticity_violation = std::max(d.stochasticity_violation, std::abs(row - 1.0));
  }
  for (std::size_t xn = 0; xn < nx; ++xn) {
    d.nonnegativity_violation = std::max(d.nonnegativity_violation, -d.y[xn]);
    for (std::size_t guess = 0; guess < ns; ++guess) {
      double v = 0.0;
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t x = 0; x < nx; ++x) {
          v += g.joint.prob(s, x) * d.mapping(x, xn) * g.privacy_loss(s, guess);
        }
      }
      d.dominance_violation = std::max(d.dominance_violation, v - d.y[xn]);
    }
  }
  return d;
}

// Joint file: one line per attribute value s, whitespace-separated
// Pr(s, x) for each public value x; '#' starts a comment.
inline DenseMatrix parse_dense_matrix(std::string_view contents) {
  DenseMatrix m;
  for (const text::Line& line : text::lines(contents)) {
    auto toks = text::split_ws(line.text);
    if (toks.empty() || toks.front().front() == '#') continue;
    if (m.rows == 0) {
      m.cols = toks.size();
    } else if (toks.size() != m.cols) {
      throw ValidationError("ragged matrix row" + text::at_line(line.number));
    }
    for (auto t : toks) {
      auto v = text::parse_double(t);
      if (!v) throw ValidationError("bad matrix entry" + text::at_line(line.number));
      m.data.push_back(*v);
    }
    ++m.rows;
  }
  return m;
}

inline JointDistribution load_joint(const std::string& path) {
  JointDistribution j{parse_dense_matrix(text::read_file(path))};
  j.validate();
  return j;
}

}  // namespace privgraph

#endif  // PRIVGRAPH_GAME_LP_HPP_
