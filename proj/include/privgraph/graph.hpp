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
#ifndef PRIVGRAPH_GRAPH_HPP_
#define PRIVGRAPH_GRAPH_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "privgraph/error.hpp"
#include "privgraph/rng.hpp"
#include "privgraph/text_io.hpp"

namespace privgraph {

using NodeId = std::size_t;

struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected simple graph. The adjacency matrix M is held in CSR form with
// both orientations of every edge and columns sorted within each row, so
// M is symmetric by construction and row sums are the degrees.
class SocialGraph {
 public:
  SocialGraph() = default;

  // Throws ValidationError on self-loops, duplicate edges (in either
  // orientation) and ids >= node_count.
  SocialGraph(std::size_t node_count, std::vector<Edge> edges)
      : node_count_(node_count), edges_(std::move(edges)) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges_.size() * 2);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const Edge e = edges_[i];
      if (e.u >= node_count_ || e.v >= node_count_) {
        throw ValidationError("edge " + std::to_string(i) +
                              " references node outside [0, " +
                              std::to_string(node_count_) + ")");
      }
      if (e.u == e.v) {
        throw ValidationError("self-loop on node " + std::to_string(e.u));
      }
      if (!seen.insert(key(e)).second) {
        throw ValidationError("duplicate edge " + std::to_string(e.u) + " " +
                              std::to_string(e.v));
      }
    }
    build_csr();
  }

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::size_t degree(NodeId u) const {
    return row_offsets_[u + 1] - row_offsets_[u];
  }
  std::span<const NodeId> neighbors(NodeId u) const {
    return {columns_.data() + row_offsets_[u], degree(u)};
  }
  std::size_t max_degree() const { return max_degree_; }
  double average_degree() const {
    return node_count_ == 0 ? 0.0
                            : 2.0 * static_cast<double>(edges_.size()) /
                                  static_cast<double>(node_count_);
  }
  bool is_regular() const {
    for (NodeId u = 0; u < node_count_; ++u) {
      if (degree(u) != max_degree_) return false;
    }
    return true;
  }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<NodeId>& columns() const { return columns_; }

  // y = M x. Each row is reduced in ascending column order.
  void multiply(std::span<const double> x, std::span<double> y) const {
    for (NodeId u = 0; u < node_count_; ++u) {
      double acc = 0.0;
      for (std::size_t k = row_offsets_[u]; k < row_offsets_[u + 1]; ++k) {
        acc += x[columns_[k]];
      }
      y[u] = acc;
    }
  }

  // Position of v inside u's CSR row, or npos when (u, v) is not an edge.
  std::size_t find_slot(NodeId u, NodeId v) const {
    auto first = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[u]);
    auto last = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[u + 1]);
    auto it = std::lower_bound(first, last, v);
    if (it == last || *it != v) return npos;
    return static_cast<std::size_t>(it - columns_.begin());
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  static std::uint64_t key(Edge e) {
    const std::uint64_t a = std::min(e.u, e.v);
    const std::uint64_t b = std::max(e.u, e.v);
    return (a << 32) ^ b;
  }

  void build_csr() {
    row_offsets_.assign(node_count_ + 1, 0);
    for (const Edge& e : edges_) {
      ++row_offsets_[e.u + 1];
      ++row_offsets_[e.v + 1];
    }
    for (std::size_t u = 0; u < node_count_; ++u) {
      row_offsets_[u + 1] += row_offsets_[u];
    }
    columns_.assign(row_offsets_[node_count_], 0);
    std::vector<std::size_t> fill(row_offsets_.begin(), row_offsets_.end() - 1);
    for (const Edge& e : edges_) {
      columns_[fill[e.u]++] = e.v;
      columns_[fill[e.v]++] = e.u;
    }
    max_degree_ = 0;
    for (NodeId u = 0; u < node_count_; ++u) {
      auto first = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[u]);
      auto last = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[u + 1]);
      std::sort(first, last);
      max_degree_ = std::max(max_degree_, degree(u));
    }
  }

  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<NodeId> columns_;
  std::size_t max_degree_ = 0;
};

// Graph file: one "u v" edge per line, '#' comments, optional "# nodes=N"
// header declaring isolated nodes. Without the header every id in
// [0, max id] must occur in some edge.
inline SocialGraph parse_graph(std::string_view contents) {
  std::optional<std::size_t> declared;
  std::vector<Edge> edges;
  std::vector<std::size_t> edge_lines;
  std::unordered_set<std::uint64_t> seen;
  std::size_t max_id = 0;
  bool any = false;
  for (const text::Line& line : text::lines(contents)) {
    auto toks = text::split_ws(line.text);
    if (toks.empty()) continue;
    if (toks.front().front() == '#') {
      if (auto n = text::header_value(line.text, "nodes")) {
        auto parsed = text::parse_uint(*n);
        if (!parsed) {
          throw ValidationError("bad nodes header" + text::at_line(line.number));
        }
        declared = *parsed;
      }
      continue;
    }
    if (toks.size() != 2) {
      throw ValidationError("expected 'u v'" + text::at_line(line.number));
    }
    auto u = text::parse_uint(toks[0]);
    auto v = text::parse_uint(toks[1]);
    if (!u || !v) {
      throw ValidationError("bad node id" + text::at_line(line.number));
    }
    if (*u >= (std::uint64_t{1} << 32) || *v >= (std::uint64_t{1} << 32)) {
      throw ValidationError("node id too large" + text::at_line(line.number));
    }
    if (*u == *v) {
      throw ValidationError("self-loop" + text::at_line(line.number));
    }
    const std::uint64_t k = (std::min(*u, *v) << 32) ^ std::max(*u, *v);
    if (!seen.insert(k).second) {
      throw ValidationError("duplicate edge" + text::at_line(line.number));
    }
    edges.push_back({static_cast<NodeId>(*u), static_cast<NodeId>(*v)});
    edge_lines.push_back(line.number);
    max_id = std::max<std::size_t>(max_id, std::max(*u, *v));
    any = true;
  }
  std::size_t n = any ? max_id + 1 : 0;
  if (declared) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (edges[i].u >= *declared || edges[i].v >= *declared) {
        throw ValidationError("dangling node id (nodes=" +
                              std::to_string(*declared) + ")" +
                              text::at_line(edge_lines[i]));
      }
    }
    n = *declared;
  } else {
    std::vector<char> present(n, 0);
    for (const Edge& e : edges) present[e.u] = present[e.v] = 1;
    for (std::size_t u = 0; u < n; ++u) {
      if (!present[u]) {
        throw ValidationError("gap in node ids: node " + std::to_string(u) +
                              " never appears (declare it with '# nodes=N')");
      }
    }
  }
  return SocialGraph(n, std::move(edges));
}

inline SocialGraph load_graph(const std::string& path) {
  return parse_graph(text::read_file(path));
}

inline std::string format_graph(const SocialGraph& g) {
  std::string out = "# nodes=" + std::to_string(g.node_count()) + "\n";
  for (const Edge& e : g.edges()) {
    out += std::to_string(e.u);
    out += ' ';
    out += std::to_string(e.v);
    out += '\n';
  }
  return out;
}

inline void save_graph(const SocialGraph& g, const std::string& path) {
  text::write_file(path, format_graph(g));
}

// Uniform G(n, m) graph with exactly `edge_count` distinct edges.
inline SocialGraph random_graph(std::size_t node_count, std::size_t edge_count,
                                std::uint64_t seed) {
  if (node_count < 2 || edge_count > node_count * (node_count - 1) / 2) {
    throw ValidationError("random_graph: too many edges for node count");
  }
  Rng rng(seed);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edge_count * 2);
  std::vector<Edge> edges;
  edges.reserve(edge_count);
  while (edges.size() < edge_count) {
    const NodeId u = rng.below(node_count);
    const NodeId v = rng.below(node_count);
    if (u == v) continue;
    const std::uint64_t k =
        (static_cast<std::uint64_t>(std::min(u, v)) << 32) ^ std::max(u, v);
    if (!seen.insert(k).second) continue;
    edges.push_back({u, v});
  }
  return SocialGraph(node_count, std::move(edges));
}

}  // namespace privgraph

#endif  // PRIVGRAPH_GRAPH_HPP_
