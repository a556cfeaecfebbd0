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
#ifndef PRIVGRAPH_EVASION_NOISE_HPP_
#define PRIVGRAPH_EVASION_NOISE_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privgraph/classifier.hpp"
#include "privgraph/error.hpp"

namespace privgraph {

// Which coordinates of the public-data vector the defender may touch.
enum class NoisePolicy {
  kModifyExist,  // only entries that are nonzero in the original vector
  kAddNew,       // only entries that are zero in the original vector
  kModifyAdd,    // any entry
};

inline const char* to_string(NoisePolicy p) {
  switch (p) {
    case NoisePolicy::kModifyExist: return "modify-exist";
    case NoisePolicy::kAddNew: return "add-new";
    case NoisePolicy::kModifyAdd: return "modify-add";
  }
  return "unknown";
}

inline NoisePolicy parse_policy(std::string_view s) {
  if (s == "modify-exist") return NoisePolicy::kModifyExist;
  if (s == "add-new") return NoisePolicy::kAddNew;
  if (s == "modify-add") return NoisePolicy::kModifyAdd;
  throw ValidationError("unknown noise policy '" + std::string(s) + "'");
}

inline bool policy_allows(NoisePolicy p, double original) {
  switch (p) {
    case NoisePolicy::kModifyExist: return original != 0.0;
    case NoisePolicy::kAddNew: return original == 0.0;
    case NoisePolicy::kModifyAdd: return true;
  }
  return false;
}

struct NoiseSearchConfig {
  double tau = 1.0;
  int maxiter = 200;
  // Optional rating grid for quantize_noise; ascending, contains 0 and 1.
  std::optional<std::vector<double>> grid;

  void validate() const {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    if (maxiter < 1) throw ValidationError("maxiter must be positive");
    if (grid) {
      const auto& g = *grid;
      if (g.size() < 2 || g.front() != 0.0 || g.back() != 1.0 ||
          !std::is_sorted(g.begin(), g.end()) ||
          std::adjacent_find(g.begin(), g.end()) != g.end()) {
        throw ValidationError("grid must be strictly ascending and contain 0 and 1");
      }
    }
  }
};

struct NoiseResult {
  std::vector<double> noise;
  int target = 1;
  int iterations = 0;
  bool success = false;
  // The restricted policy failed and the search was rerun under ModifyAdd.
  bool fell_back = false;
  std::size_t l0 = 0;
};

inline std::size_t count_nonzero(std::span<const double> r) {
  return static_cast<std::size_t>(
      std::count_if(r.begin(), r.end(), [](double v) { return v != 0.0; }));
}

namespace detail {

enum class StepDirection { kEither, kIncreaseOnly, kDecreaseOnly };

inline double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

// One run of the saliency-guided search. Each iteration picks the
// coordinate whose increase, (1 - xbar_j) dC_i/dx_j, or decrease,
// -xbar_j dC_i/dx_j, looks most beneficial and moves it by tau with
// clipping to [0, 1]. Coordinates already at the bound in a direction are
// not candidates for that direction.
inline NoiseResult saliency_search(const Classifier& clf,
                                   std::span<const double> x, int target,
                                   NoisePolicy policy, const NoiseSearchConfig& cfg,
                                   StepDirection direction) {
  const std::size_t n = x.size();
  std::vector<double> xbar(x.begin(), x.end());
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  int t = 0;
  while (clf.predict(xbar) != target && t <= cfg.maxiter) {
    const auto grad = clf.input_gradient(xbar, target);
    std::size_t e_inc = n, e_dec = n;
    double best_inc = kNone, best_dec = kNone;
    if (direction != StepDirection::kDecreaseOnly) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!policy_allows(policy, x[j]) || xbar[j] >= 1.0) continue;
        const double s = policy == NoisePolicy::kAddNew
                             ? grad[j]
                             : (1.0 - xbar[j]) * grad[j];
        if (e_inc == n || s > best_inc) {
          best_inc = s;
          e_inc = j;
        }
      }
    }
    if (direction != StepDirection::kIncreaseOnly &&
        policy != NoisePolicy::kAddNew) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!policy_allows(policy, x[j]) || xbar[j] <= 0.0) continue;
        const double s = -xbar[j] * grad[j];
        if (e_dec == n || s > best_dec) {
          best_dec = s;
          e_dec = j;
        }
      }
    }
    if (e_inc == n && e_dec == n) break;
    const double v_inc = e_inc == n ? kNone : (1.0 - xbar[e_inc]) * grad[e_inc];
    const double v_dec = e_dec == n ? kNone : -xbar[e_dec] * grad[e_dec];
    const bool increase =
        e_dec == n ||
        (e_inc != n && (policy == NoisePolicy::kAddNew || v_inc >= v_dec));
    if (increase) {
      xbar[e_inc] = clip01(xbar[e_inc] + cfg.tau);
    } else {
      xbar[e_dec] = clip01(xbar[e_dec] - cfg.tau);
    }
    ++t;
  }
  NoiseResult r;
  r.target = target;
  r.iterations = t;
  r.noise.resize(n);
  for (std::size_t j = 0; j < n; ++j) r.noise[j] = xbar[j] - x[j];
  r.l0 = count_nonzero(r.noise);
  r.success = clf.predict(xbar) == target;
  return r;
}

inline void check_noise_inputs(const Classifier& clf, std::span<const double> x,
                               int target, const NoiseSearchConfig& cfg) {
  cfg.validate();
  clf.check_class(target);
  if (x.size() != clf.input_dim()) {
    throw ValidationError("public data length does not match classifier");
  }
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("public data outside [0, 1]");
  }
}

inline NoiseResult zero_noise(std::size_t n, int target) {
  NoiseResult r;
  r.noise.assign(n, 0.0);
  r.target = target;
  r.success = true;
  return r;
}

}  // namespace detail

// Policy-aware minimum-noise search: returns r such that the classifier
// predicts `target` on x + r. A restricted policy that exhausts maxiter is
// rerun once from scratch under ModifyAdd (fell_back = true; iterations
// counts both runs). Failure is reported through success = false.
inline NoiseResult find_noise(const Classifier& clf, std::span<const double> x,
                              int target, NoisePolicy policy,
                              const NoiseSearchConfig& cfg = {}) {
  detail::check_noise_inputs(clf, x, target, cfg);
  if (clf.predict(x) == target) return detail::zero_noise(x.size(), target);
  NoiseResult r = detail::saliency_search(clf, x, target, policy, cfg,
                                          detail::StepDirection::kEither);
  if (!r.success && policy != NoisePolicy::kModifyAdd) {
    const int first = r.iterations;
    r = detail::saliency_search(clf, x, target, NoisePolicy::kModifyAdd, cfg,
                                detail::StepDirection::kEither);
    r.fell_back = true;
    r.iterations += first;
  }
  return r;
}

// Single-direction comparison baseline: every modified entry moves in
// the same direction. Runs an increase-only and a decrease-only search over
// all coordinates and keeps the better one (success first, then smaller
// l0, then fewer iterations; ties favour increase-only).
inline NoiseResult find_noise_restricted_baseline(const Classifier& clf,
                                                  std::span<const double> x,
                                                  int target,
                                                  const NoiseSearchConfig& cfg = {}) {
  detail::check_noise_inputs(clf, x, target, cfg);
  if (clf.predict(x) == target) return detail::zero_noise(x.size(), target);
  NoiseResult up = detail::saliency_search(clf, x, target, NoisePolicy::kModifyAdd,
                                           cfg, detail::StepDirection::kIncreaseOnly);
  NoiseResult down = detail::saliency_search(clf, x, target, NoisePolicy::kModifyAdd,
                                             cfg, detail::StepDirection::kDecreaseOnly);
  auto better = [](const NoiseResult& a, const NoiseResult& b) {
    if (a.success != b.success) return a.success;
    if (a.l0 != b.l0) return a.l0 < b.l0;
    return a.iterations <= b.iterations;
  };
  return better(up, down) ? up : down;
}

// Nearest grid value; an exact midpoint rounds up to the higher grid index.
inline double snap_to_grid(double v, std::span<const double> grid) {
  auto hi = std::lower_bound(grid.begin(), grid.end(), v);
  if (hi == grid.begin()) return grid.front();
  if (hi == grid.end()) return grid.back();
  auto lo = hi - 1;
  return (*hi - v) <= (v - *lo) ? *hi : *lo;
}

// Snaps every modified entry of x + r onto the grid (unmodified entries
// keep the user's original value) and re-evaluates success.
inline NoiseResult quantize_noise(const Classifier& clf,
                                  std::span<const double> x,
                                  const NoiseResult& found,
                                  std::span<const double> grid) {
  NoiseSearchConfig check;
  check.grid = std::vector<double>(grid.begin(), grid.end());
  check.validate();
  if (found.noise.size() != x.size()) {
    throw ValidationError("noise length does not match public data");
  }
  NoiseResult r = found;
  std::vector<double> noisy(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (found.noise[j] == 0.0) continue;
    noisy[j] = snap_to_grid(x[j] + found.noise[j], grid);
    r.noise[j] = noisy[j] - x[j];
  }
  r.l0 = count_nonzero(r.noise);
  r.success = clf.predict(noisy) == found.target;
  return r;
}

}  // namespace privgraph

#endif  // PRIVGRAPH_EVASION_NOISE_HPP_
