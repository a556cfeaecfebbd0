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
#ifndef PRIVGRAPH_SIMPLEX_HPP_
#define PRIVGRAPH_SIMPLEX_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "privgraph/error.hpp"

namespace privgraph {

enum class RowType { kLessEqual, kEqual, kGreaterEqual };

// minimise c^T x subject to the rows and x >= 0.
struct LinearProgram {
  struct Row {
    std::vector<double> coeffs;
    RowType type = RowType::kLessEqual;
    double rhs = 0.0;
  };
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<Row> rows;

  void add_row(std::vector<double> coeffs, RowType type, double rhs) {
    if (coeffs.size() != num_vars) throw ValidationError("LP row has wrong width");
    rows.push_back({std::move(coeffs), type, rhs});
  }
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  // One multiplier per row, sign convention of the original rows.
  std::vector<double> duals;
  // max over rows of the constraint violation, and over variables of -x_j.
  double primal_residual = 0.0;
  // max over rows |dual_i * slack_i| and over variables |x_j * reduced_j|.
  double complementary_slackness = 0.0;
  int pivots = 0;
};

namespace detail {

// Dense two-phase tableau simplex. Entering column by Bland's rule.
class Tableau {
 public:
  explicit Tableau(const LinearProgram& lp) : lp_(lp) {
    const std::size_t m = lp.rows.size();
    n_ = lp.num_vars;
    flipped_.assign(m, false);
    std::size_t extra = 0;
    for (const auto& row : lp.rows) {
      RowType t = row.type;
      if (row.rhs < 0.0) t = t == RowType::kLessEqual ? RowType::kGreaterEqual
                           : t == RowType::kGreaterEqual ? RowType::kLessEqual : t;
      extra += t == RowType::kGreaterEqual ? 2 : 1;
    }
    cols_ = n_ + extra;
    t_.assign(m, std::vector<double>(cols_ + 1, 0.0));
    basis_.assign(m, 0);
    unit_col_.assign(m, 0);
    artificial_.assign(cols_, false);
    std::size_t next = n_;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& row = lp.rows[i];
      const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
      flipped_[i] = row.rhs < 0.0;
      RowType t = row.type;
      if (flipped_[i]) t = t == RowType::kLessEqual ? RowType::kGreaterEqual
                         : t == RowType::kGreaterEqual ? RowType::kLessEqual : t;
      for (std::size_t j = 0; j < n_; ++j) t_[i][j] = sign * row.coeffs[j];
      t_[i][cols_] = sign * row.rhs;
      if (t == RowType::kLessEqual) {
        t_[i][next] = 1.0;
        basis_[i] = unit_col_[i] = next++;
      } else {
        if (t == RowType::kGreaterEqual) t_[i][next++] = -1.0;
        t_[i][next] = 1.0;
        artificial_[next] = true;
        basis_[i] = unit_col_[i] = next++;
      }
    }
    original_ = t_;
  }

  LpSolution solve() {
    // Phase 1: drive the artificial variables to zero.
    std::vector<double> cost(cols_, 0.0);
    bool any_artificial = false;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (artificial_[j]) {
        cost[j] = 1.0;
        any_artificial = true;
      }
    }
    if (any_artificial) {
      run(cost, /*allow_artificial=*/true);
      if (objective(cost) > 1e-9) throw NumericalError("LP is infeasible");
      evict_artificials();
    }
    // Phase 2.
    std::fill(cost.begin(), cost.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost[j] = lp_.objective[j];
    run(cost, /*allow_artificial=*/false);
    return extract(cost);
  }

 private:
  static constexpr double kEps = 1e-12;
  // Smallest entry accepted as a pivot.
  static constexpr double kPivotTol = 1e-9;

  double objective(const std::vector<double>& cost) const {
    double z = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i) z += cost[basis_[i]] * t_[i][cols_];
    return z;
  }

  void pivot(std::size_t r, std::size_t c) {
    const double pv = t_[r][c];
    for (double& v : t_[r]) v /= pv;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i == r) continue;
      const double f = t_[i][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) t_[i][j] -= f * t_[r][j];
      t_[i][c] = 0.0;
    }
    basis_[r] = c;
    ++pivots_;
    refactor();
  }

  // Recomputes B^-1 [A | b] from the original rows for the current basis
  // by Gaussian elimination with partial pivoting, so round-off does not
  // accumulate across pivots.
  void refactor() {
    const std::size_t m = t_.size();
    std::vector<std::vector<double>> a(m, std::vector<double>(m + cols_ + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) a[i][k] = original_[i][basis_[k]];
      for (std::size_t j = 0; j <= cols_; ++j) a[i][m + j] = original_[i][j];
    }
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < m; ++i) {
        if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
      }
      if (std::abs(a[p][k]) < 1e-30) throw NumericalError("LP basis became singular");
      std::swap(a[p], a[k]);
      const double pv = a[k][k];
      for (double& v : a[k]) v /= pv;
      for (std::size_t i = 0; i < m; ++i) {
        if (i == k || a[i][k] == 0.0) continue;
        const double f = a[i][k];
        for (std::size_t j = k; j < a[i].size(); ++j) a[i][j] -= f * a[k][j];
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      std::copy(a[i].begin() + static_cast<std::ptrdiff_t>(m), a[i].end(), t_[i].begin());
      t_[i][basis_[i]] = 1.0;
    }
  }

  void run(const std::vector<double>& cost, bool allow_artificial) {
    int degenerate_run = 0;
    for (int guard = 0; guard < 100000; ++guard) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!allow_artificial && artificial_[j]) continue;
        double reduced = cost[j];
        for (std::size_t i = 0; i < t_.size(); ++i) reduced -= cost[basis_[i]] * t_[i][j];
        if (reduced < -1e-11) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return;
      // Min-ratio test. Ties go to the largest pivot element; after a long
      // run of degenerate pivots they go to the lowest basic index, which
      // cannot cycle.
      const bool bland = degenerate_run > 50;
      std::size_t leave = t_.size();
      double best = 0.0;
      for (std::size_t i = 0; i < t_.size(); ++i) {
        const double a = t_[i][enter];
        if (!allow_artificial && artificial_[basis_[i]] && std::abs(a) > kPivotTol) {
          // Artificial still basic at zero: it leaves before it can move.
          leave = i;
          best = 0.0;
          break;
        }
        if (a <= kPivotTol) continue;
        const double ratio = t_[i][cols_] / a;
        bool take = leave == t_.size() || ratio < best - kEps;
        if (!take && ratio <= best + kEps) {
          take = bland ? basis_[i] < basis_[leave] : a > t_[leave][enter];
        }
        if (take) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == t_.size()) throw NumericalError("LP is unbounded");
      degenerate_run = best <= kEps ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
    throw NumericalError("LP simplex iteration limit reached");
  }

  void evict_artificials() {
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (!artificial_[basis_[i]]) continue;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!artificial_[j] && std::abs(t_[i][j]) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
      // A row with no usable column is redundant; its artificial stays
      // basic at zero and can never re-enter a ratio test.
    }
  }

  LpSolution extract(const std::vector<double>& cost) {
    LpSolution s;
    s.pivots = pivots_;
    s.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (basis_[i] < n_) s.x[basis_[i]] = std::max(0.0, t_[i][cols_]);
    }
    s.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s.objective += lp_.objective[j] * s.x[j];

    const std::size_t m = lp_.rows.size();
    s.duals.assign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      double y = 0.0;
      for (std::size_t i = 0; i < m; ++i) y += cost[basis_[i]] * t_[i][unit_col_[r]];
      s.duals[r] = flipped_[r] ? -y : y;
    }
    for (std::size_t r = 0; r < m; ++r) {
      const auto& row = lp_.rows[r];
      double ax = 0.0;
      for (std::size_t j = 0; j < n_; ++j) ax += row.coeffs[j] * s.x[j];
      const double slack = row.rhs - ax;
      double violation = 0.0;
      switch (row.type) {
        case RowType::kLessEqual: violation = std::max(0.0, -slack); break;
        case RowType::kGreaterEqual: violation = std::max(0.0, slack); break;
        case RowType::kEqual: violation = std::abs(slack); break;
      }
      s.primal_residual = std::max(s.primal_residual, violation);
      if (row.type != RowType::kEqual) {
        s.complementary_slackness =
            std::max(s.complementary_slackness, std::abs(s.duals[r] * slack));
      }
    }
    for (std::size_t j = 0; j < n_; ++j) {
      double reduced = lp_.objective[j];
      for (std::size_t r = 0; r < m; ++r) reduced -= s.duals[r] * lp_.rows[r].coeffs[j];
      s.complementary_slackness =
          std::max(s.complementary_slackness, std::abs(s.x[j] * reduced));
    }
    return s;
  }

  const LinearProgram& lp_;
  std::size_t n_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::vector<double>> t_;
  std::vector<std::vector<double>> original_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> unit_col_;
  std::vector<bool> artificial_;
  std::vector<bool> flipped_;
  int pivots_ = 0;
};

}  // namespace detail

inline LpSolution solve_linear_program(const LinearProgram& lp) {
  if (lp.objective.size() != lp.num_vars) {
    throw ValidationError("LP objective has wrong width");
  }
  return detail::Tableau(lp).solve();
}

}  // namespace privgraph

#endif  // PRIVGRAPH_SIMPLEX_HPP_
