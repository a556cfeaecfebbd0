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
#ifndef PRIVGRAPH_BEHAVIOR_HPP_
#define PRIVGRAPH_BEHAVIOR_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "privgraph/error.hpp"
#include "privgraph/text_io.hpp"

namespace privgraph {

struct BehaviorEntry {
  std::size_t user;
  std::size_t object;
  double value;
};

struct RowEntry {
  std::size_t object;
  double value;
};

// Sparse user x object matrix with values in [0, 1]. Entries keep their
// insertion order (for byte-exact saving); rows are indexed separately
// with objects sorted ascending.
class BehaviorMatrix {
 public:
  BehaviorMatrix() = default;

  BehaviorMatrix(std::size_t user_count, std::size_t object_count,
                 std::vector<BehaviorEntry> entries)
      : user_count_(user_count),
        object_count_(object_count),
        entries_(std::move(entries)) {
    std::unordered_set<std::size_t> seen;
    seen.reserve(entries_.size() * 2);
    for (const BehaviorEntry& e : entries_) {
      if (e.user >= user_count_ || e.object >= object_count_) {
        throw ValidationError("behavior entry (" + std::to_string(e.user) +
                              ", " + std::to_string(e.object) +
                              ") outside matrix bounds");
      }
      if (!(e.value >= 0.0 && e.value <= 1.0)) {
        throw ValidationError("value out of range");
      }
      if (!seen.insert(e.user * object_count_ + e.object).second) {
        throw ValidationError("duplicate entry (" + std::to_string(e.user) +
                              ", " + std::to_string(e.object) + ")");
      }
    }
    build_rows();
  }

  // Builds a matrix from dense rows, storing only nonzero values.
  static BehaviorMatrix from_dense(const std::vector<std::vector<double>>& rows,
                                   std::size_t object_count) {
    std::vector<BehaviorEntry> entries;
    for (std::size_t u = 0; u < rows.size(); ++u) {
      if (rows[u].size() != object_count) {
        throw ValidationError("dense row " + std::to_string(u) +
                              " has wrong length");
      }
      for (std::size_t j = 0; j < object_count; ++j) {
        if (rows[u][j] != 0.0) entries.push_back({u, j, rows[u][j]});
      }
    }
    return BehaviorMatrix(rows.size(), object_count, std::move(entries));
  }

  std::size_t user_count() const { return user_count_; }
  std::size_t object_count() const { return object_count_; }
  const std::vector<BehaviorEntry>& entries() const { return entries_; }

  std::span<const RowEntry> row(std::size_t user) const {
    check_user(user);
    return {rows_.data() + offsets_[user], offsets_[user + 1] - offsets_[user]};
  }
  bool has_behaviors(std::size_t user) const { return !row(user).empty(); }

  std::vector<double> dense_row(std::size_t user) const {
    std::vector<double> out(object_count_, 0.0);
    for (const RowEntry& e : row(user)) out[e.object] = e.value;
    return out;
  }

  void check_user(std::size_t user) const {
    if (user >= user_count_) {
      throw ValidationError("unknown user id " + std::to_string(user));
    }
  }

 private:
  void build_rows() {
    offsets_.assign(user_count_ + 1, 0);
    for (const BehaviorEntry& e : entries_) ++offsets_[e.user + 1];
    for (std::size_t u = 0; u < user_count_; ++u) offsets_[u + 1] += offsets_[u];
    rows_.assign(entries_.size(), {});
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const BehaviorEntry& e : entries_) {
      rows_[fill[e.user]++] = {e.object, e.value};
    }
    for (std::size_t u = 0; u < user_count_; ++u) {
      std::sort(rows_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]),
                rows_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]),
                [](const RowEntry& a, const RowEntry& b) {
                  return a.object < b.object;
                });
    }
  }

  std::size_t user_count_ = 0;
  std::size_t object_count_ = 0;
  std::vector<BehaviorEntry> entries_;
  std::vector<std::size_t> offsets_{0};
  std::vector<RowEntry> rows_;
};

// Behavior file: "user object value" lines, optional
// "# users=U objects=O" header. Without the header the dimensions are
// max id + 1.
inline BehaviorMatrix parse_behaviors(std::string_view contents) {
  std::optional<std::size_t> users, objects;
  std::vector<BehaviorEntry> entries;
  std::unordered_set<std::uint64_t> seen;
  std::size_t max_user = 0, max_object = 0;
  bool any = false;
  std::vector<std::size_t> entry_lines;
  for (const text::Line& line : text::lines(contents)) {
    auto toks = text::split_ws(line.text);
    if (toks.empty()) continue;
    if (toks.front().front() == '#') {
      if (auto v = text::header_value(line.text, "users")) {
        users = text::parse_uint(*v);
        if (!users) throw ValidationError("bad users header" + text::at_line(line.number));
      }
      if (auto v = text::header_value(line.text, "objects")) {
        objects = text::parse_uint(*v);
        if (!objects) throw ValidationError("bad objects header" + text::at_line(line.number));
      }
      continue;
    }
    if (toks.size() != 3) {
      throw ValidationError("expected 'user object value'" +
                            text::at_line(line.number));
    }
    auto u = text::parse_uint(toks[0]);
    auto o = text::parse_uint(toks[1]);
    auto v = text::parse_double(toks[2]);
    if (!u || !o || !v) {
      throw ValidationError("bad behavior triplet" + text::at_line(line.number));
    }
    if (!(*v >= 0.0 && *v <= 1.0)) {
      throw ValidationError("value out of range" + text::at_line(line.number));
    }
    if (*u >= (std::uint64_t{1} << 32) || *o >= (std::uint64_t{1} << 32)) {
      throw ValidationError("id too large" + text::at_line(line.number));
    }
    if (!seen.insert((*u << 32) ^ *o).second) {
      throw ValidationError("duplicate entry" + text::at_line(line.number));
    }
    entries.push_back({*u, *o, *v});
    entry_lines.push_back(line.number);
    max_user = std::max<std::size_t>(max_user, *u);
    max_object = std::max<std::size_t>(max_object, *o);
    any = true;
  }
  const std::size_t nu = users ? *users : (any ? max_user + 1 : 0);
  const std::size_t no = objects ? *objects : (any ? max_object + 1 : 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].user >= nu || entries[i].object >= no) {
      throw ValidationError("id outside declared dimensions" +
                            text::at_line(entry_lines[i]));
    }
  }
  return BehaviorMatrix(nu, no, std::move(entries));
}

inline BehaviorMatrix load_behaviors(const std::string& path) {
  return parse_behaviors(text::read_file(path));
}

inline std::string format_behaviors(const BehaviorMatrix& b) {
  std::string out = "# users=" + std::to_string(b.user_count()) +
                    " objects=" + std::to_string(b.object_count()) + "\n";
  for (const BehaviorEntry& e : b.entries()) {
    out += std::to_string(e.user) + ' ' + std::to_string(e.object) + ' ' +
           text::format_double(e.value) + '\n';
  }
  return out;
}

inline void save_behaviors(const BehaviorMatrix& b, const std::string& path) {
  text::write_file(path, format_behaviors(b));
}

}  // namespace privgraph

#endif  // PRIVGRAPH_BEHAVIOR_HPP_
