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
#ifndef PRIVGRAPH_LABELS_HPP_
#define PRIVGRAPH_LABELS_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "privgraph/error.hpp"
#include "privgraph/text_io.hpp"

namespace privgraph {

enum class LabelMode { kBinary, kMulticlass };

struct LabelEntry {
  std::size_t user;
  int label;
};

// Partial map user -> label. Binary labels are +1 / -1; multiclass labels
// are 1..num_classes.
class LabelSet {
 public:
  LabelSet() = default;

  static LabelSet binary(std::vector<LabelEntry> entries) {
    for (const LabelEntry& e : entries) {
      if (e.label != 1 && e.label != -1) {
        throw ValidationError("binary label must be +1 or -1 (user " +
                              std::to_string(e.user) + ")");
      }
    }
    return LabelSet(LabelMode::kBinary, 2, std::move(entries));
  }

  static LabelSet multiclass(int num_classes, std::vector<LabelEntry> entries) {
    if (num_classes < 2) throw ValidationError("need at least 2 classes");
    for (const LabelEntry& e : entries) {
      if (e.label < 1 || e.label > num_classes) {
        throw ValidationError("label " + std::to_string(e.label) +
                              " outside 1.." + std::to_string(num_classes));
      }
    }
    return LabelSet(LabelMode::kMulticlass, num_classes, std::move(entries));
  }

  LabelMode mode() const { return mode_; }
  int num_classes() const { return num_classes_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<LabelEntry>& entries() const { return entries_; }

  std::optional<int> get(std::size_t user) const {
    auto it = index_.find(user);
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].label;
  }

  // Throws unless every labeled user is below `node_count`.
  void check_users(std::size_t node_count) const {
    for (const LabelEntry& e : entries_) {
      if (e.user >= node_count) {
        throw ValidationError("labeled user " + std::to_string(e.user) +
                              " is not a valid node id");
      }
    }
  }

  // Restriction to the given users, in the given order.
  LabelSet subset(const std::vector<std::size_t>& users) const {
    std::vector<LabelEntry> out;
    for (std::size_t u : users) {
      if (auto l = get(u)) out.push_back({u, *l});
    }
    return LabelSet(mode_, num_classes_, std::move(out));
  }

 private:
  LabelSet(LabelMode mode, int num_classes, std::vector<LabelEntry> entries)
      : mode_(mode), num_classes_(num_classes), entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!index_.emplace(entries_[i].user, i).second) {
        throw ValidationError("user " + std::to_string(entries_[i].user) +
                              " labeled twice");
      }
    }
  }

  LabelMode mode_ = LabelMode::kBinary;
  int num_classes_ = 2;
  std::vector<LabelEntry> entries_;
  std::unordered_map<std::size_t, std::size_t> index_;
};

// Multiclass class `positive` becomes +1, every other class -1.
inline LabelSet to_binary(const LabelSet& labels, int positive = 1) {
  std::vector<LabelEntry> out;
  out.reserve(labels.size());
  for (const LabelEntry& e : labels.entries()) {
    out.push_back({e.user, e.label == positive ? 1 : -1});
  }
  return LabelSet::binary(std::move(out));
}

// Label file: "user label" lines. Binary mode takes "+1"/"-1"; multiclass
// takes 1..m with m from an optional "# classes=m" header (else max label).
inline LabelSet parse_labels(std::string_view contents, LabelMode mode,
                             std::optional<std::size_t> node_count = {}) {
  std::optional<std::uint64_t> classes;
  std::vector<LabelEntry> entries;
  for (const text::Line& line : text::lines(contents)) {
    auto toks = text::split_ws(line.text);
    if (toks.empty()) continue;
    if (toks.front().front() == '#') {
      if (auto v = text::header_value(line.text, "classes")) {
        classes = text::parse_uint(*v);
        if (!classes) throw ValidationError("bad classes header" + text::at_line(line.number));
      }
      continue;
    }
    if (toks.size() != 2) {
      throw ValidationError("expected 'user label'" + text::at_line(line.number));
    }
    auto u = text::parse_uint(toks[0]);
    if (!u) throw ValidationError("bad user id" + text::at_line(line.number));
    int label = 0;
    if (mode == LabelMode::kBinary) {
      if (toks[1] == "+1" || toks[1] == "1") {
        label = 1;
      } else if (toks[1] == "-1") {
        label = -1;
      } else {
        throw ValidationError("binary label must be +1 or -1" +
                              text::at_line(line.number));
      }
    } else {
      auto l = text::parse_int(toks[1]);
      if (!l || *l < 1 || *l > 1'000'000) {
        throw ValidationError("label out of range" + text::at_line(line.number));
      }
      label = static_cast<int>(*l);
    }
    if (node_count && *u >= *node_count) {
      throw ValidationError("labeled user is not a valid node id" +
                            text::at_line(line.number));
    }
    entries.push_back({static_cast<std::size_t>(*u), label});
  }
  if (mode == LabelMode::kBinary) return LabelSet::binary(std::move(entries));
  int m = 0;
  for (const LabelEntry& e : entries) m = std::max(m, e.label);
  if (classes) m = static_cast<int>(*classes);
  return LabelSet::multiclass(m, std::move(entries));
}

inline LabelSet load_labels(const std::string& path, LabelMode mode,
                            std::optional<std::size_t> node_count = {}) {
  return parse_labels(text::read_file(path), mode, node_count);
}

inline std::string format_labels(const LabelSet& labels) {
  std::string out;
  if (labels.mode() == LabelMode::kMulticlass) {
    out = "# classes=" + std::to_string(labels.num_classes()) + "\n";
  }
  for (const LabelEntry& e : labels.entries()) {
    out += std::to_string(e.user) + ' ';
    if (labels.mode() == LabelMode::kBinary) {
      out += e.label > 0 ? "+1" : "-1";
    } else {
      out += std::to_string(e.label);
    }
    out += '\n';
  }
  return out;
}

inline void save_labels(const LabelSet& labels, const std::string& path) {
  text::write_file(path, format_labels(labels));
}

}  // namespace privgraph

#endif  // PRIVGRAPH_LABELS_HPP_
