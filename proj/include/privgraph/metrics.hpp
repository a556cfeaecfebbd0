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
#ifndef PRIVGRAPH_METRICS_HPP_
#define PRIVGRAPH_METRICS_HPP_

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "privgraph/error.hpp"

namespace privgraph {

// Fraction of positions where prediction equals truth.
inline double inference_accuracy(std::span<const int> predictions,
                                 std::span<const int> truth) {
  if (predictions.size() != truth.size()) {
    throw ValidationError("predictions and truth have different lengths");
  }
  if (truth.empty()) throw ValidationError("empty test set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

// Area under the ROC curve via the Mann-Whitney rank statistic; tied
// scores share their average rank. Labels are +1 / -1; both must occur.
inline double rank_auc(std::span<const double> scores,
                       std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores and labels have different lengths");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] > 0) {
        pos_rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw ValidationError("AUC needs both classes");
  const double p = static_cast<double>(pos);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

}  // namespace privgraph

#endif  // PRIVGRAPH_METRICS_HPP_
