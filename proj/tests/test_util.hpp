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
#ifndef PRIVGRAPH_TESTS_TEST_UTIL_HPP_
#define PRIVGRAPH_TESTS_TEST_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "privgraph/graph.hpp"
#include "privgraph/rng.hpp"

namespace privgraph::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("privgraph_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline SocialGraph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId u = 0; u + 1 < n; ++u) e.push_back({u, u + 1});
  return SocialGraph(n, e);
}

inline SocialGraph cycle_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId u = 0; u < n; ++u) e.push_back({u, (u + 1) % n});
  return SocialGraph(n, e);
}

inline SocialGraph complete_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) e.push_back({u, v});
  }
  return SocialGraph(n, e);
}

// K_{1,k}: node 0 is the hub.
inline SocialGraph star_graph(std::size_t k) {
  std::vector<Edge> e;
  for (NodeId v = 1; v <= k; ++v) e.push_back({0, v});
  return SocialGraph(k + 1, e);
}

// Random labelled tree: node v > 0 attaches to a uniform earlier node.
inline SocialGraph random_tree(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> e;
  for (NodeId v = 1; v < n; ++v) e.push_back({rng.below(v), v});
  return SocialGraph(n, e);
}

inline std::vector<double> random_priors(std::size_t n, Rng& rng,
                                         double lo = 0.05, double hi = 0.95) {
  std::vector<double> q(n);
  for (double& v : q) v = lo + (hi - lo) * rng.uniform();
  return q;
}

}  // namespace privgraph::testing

#endif  // PRIVGRAPH_TESTS_TEST_UTIL_HPP_
