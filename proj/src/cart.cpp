/*
 * Copyright 2026 The cxpred Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cxpred/cart.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cxpred/errors.hpp"

namespace cxpred {
namespace {

using i128 = __int128;

// Split quality S = (pL^2 + qL^2) / nL + (pR^2 + qR^2) / nR, kept as an exact
// fraction. Weighted child Gini is (n - S) / n, so larger S is a better split.
struct SplitScore {
  i128 num = 0;
  i128 den = 1;

  static SplitScore of(std::uint64_t l_pos, std::uint64_t l_n, std::uint64_t r_pos, std::uint64_t r_n) {
    const i128 l_neg = l_n - l_pos, r_neg = r_n - r_pos;
    const i128 a_l = i128(l_pos) * l_pos + l_neg * l_neg;
    const i128 a_r = i128(r_pos) * r_pos + r_neg * r_neg;
    return {a_l * r_n + a_r * l_n, i128(l_n) * r_n};
  }
  bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
};

struct Candidate {
  bool found = false;
  std::uint32_t feature = 0;
  double threshold = 0.0;
  bool binary = false;
  SplitScore score;
};

double midpoint(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid < b ? mid : a;
}

class Builder {
 public:
  Builder(const FeatureMatrix& x, std::span<const Label> labels, std::span<const std::size_t> features,
          std::span<const DimensionKind> kinds, const TreeParams& params, std::uint64_t n_root, double root_risk)
      : x_(x), labels_(labels), features_(features), kinds_(kinds), params_(params), n_root_(n_root),
        cp_floor_(params.cp * root_risk) {}

  std::vector<TreeNode> take() { return std::move(nodes_); }

  std::int32_t build(std::vector<std::uint32_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    std::uint64_t pos = 0;
    for (const auto r : rows) pos += labels_[r] == Label::kCall ? 1 : 0;
    const std::uint64_t n = rows.size();
    nodes_[id].n_pos = pos;
    nodes_[id].n_neg = n - pos;

    if (pos == 0 || pos == n || n < params_.min_split || depth >= params_.max_depth) return id;
    const Candidate best = best_split(rows, pos);
    if (!best.found) return id;

    // improvement = (S - (pos^2 + neg^2) / n) / n_root, numerator computed exactly
    // so that zero-gain splits score exactly zero.
    const i128 parent = i128(pos) * pos + i128(n - pos) * (n - pos);
    const i128 gain = best.score.num * i128(n) - parent * best.score.den;
    const double improvement = static_cast<double>(static_cast<long double>(gain) /
                                                   (static_cast<long double>(best.score.den) * n * n_root_));
    if (!(improvement >= cp_floor_)) return id;

    std::vector<std::uint32_t> left, right;
    for (const auto r : rows) {
      const double v = x_.at(r, best.feature);
      (best.binary ? v == 1.0 : v <= best.threshold) ? left.push_back(r) : right.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    TreeNode& node = nodes_[id];
    node.leaf = false;
    node.binary = best.binary;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.improvement = improvement;
    const auto l = build(std::move(left), depth + 1);
    nodes_[id].left = l;
    const auto r = build(std::move(right), depth + 1);
    nodes_[id].right = r;
    return id;
  }

 private:
  bool is_binary(std::size_t f) const { return !kinds_.empty() && kinds_[f] == DimensionKind::kBinary; }

  Candidate best_split(const std::vector<std::uint32_t>& rows, std::uint64_t pos) {
    Candidate best;
    const std::uint64_t n = rows.size();
    auto offer = [&best](std::size_t f, double threshold, bool binary, const SplitScore& s) {
      if (!best.found || s.better_than(best.score)) {
        best = {true, static_cast<std::uint32_t>(f), threshold, binary, s};
      }
    };
    for (const std::size_t f : features_) {
      if (is_binary(f)) {
        std::uint64_t ones = 0, ones_pos = 0;
        for (const auto r : rows) {
          if (x_.at(r, f) == 1.0) {
            ++ones;
            ones_pos += labels_[r] == Label::kCall ? 1 : 0;
          }
        }
        if (ones == 0 || ones == n) continue;
        offer(f, 0.5, true, SplitScore::of(ones_pos, ones, pos - ones_pos, n - ones));
        continue;
      }
      column_.clear();
      for (const auto r : rows) column_.emplace_back(x_.at(r, f), labels_[r] == Label::kCall);
      std::sort(column_.begin(), column_.end());
      std::uint64_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < column_.size(); ++i) {
        left_pos += column_[i].second ? 1 : 0;
        if (!(column_[i].first < column_[i + 1].first)) continue;
        const std::uint64_t left_n = i + 1;
        offer(f, midpoint(column_[i].first, column_[i + 1].first), false,
              SplitScore::of(left_pos, left_n, pos - left_pos, n - left_n));
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  std::span<const Label> labels_;
  std::span<const std::size_t> features_;
  std::span<const DimensionKind> kinds_;
  const TreeParams& params_;
  std::uint64_t n_root_;
  double cp_floor_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, bool>> column_;
};

}  // namespace

void TreeParams::validate() const {
  if (min_split < 2) throw ConfigError("min_split must be >= 2");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (!(cp >= 0.0)) throw ConfigError("cp must be >= 0");
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::string group_name, TreeParams params)
    : nodes_(std::move(nodes)), group_name_(std::move(group_name)), params_(params) {
  if (nodes_.empty()) throw StructuralError("tree has no nodes");
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
      throw StructuralError("dangling child id " + std::to_string(id));
    }
    if (seen[id]) throw StructuralError("node " + std::to_string(id) + " reached twice (cycle or shared child)");
    seen[id] = true;
    const TreeNode& node = nodes_[id];
    if (!node.leaf) {
      if (node.left <= id || node.right <= id) {
        throw StructuralError("node " + std::to_string(id) + " has a child that does not follow it in preorder");
      }
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw StructuralError("unreachable nodes in tree");
}

Label DecisionTree::predict(std::span<const double> x) const {
  const TreeNode* node = &nodes_[0];
  while (!node->leaf) node = &nodes_[node->goes_left(x[node->feature]) ? node->left : node->right];
  return node->label();
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {  // preorder: parents precede children
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].leaf) {
      d[nodes_[i].left] = d[i] + 1;
      d[nodes_[i].right] = d[i] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.leaf; }));
}

std::set<std::uint32_t> DecisionTree::split_features() const {
  std::set<std::uint32_t> out;
  for (const auto& n : nodes_) {
    if (!n.leaf) out.insert(n.feature);
  }
  return out;
}

DecisionTree fit_tree(const FeatureMatrix& x, std::span<const Label> labels, std::span<const std::uint32_t> rows,
                      std::span<const std::size_t> allowed_features, const TreeParams& params,
                      std::span<const DimensionKind> kinds, std::string group_name) {
  params.validate();
  if (rows.empty()) throw DataError("fit_tree: empty sample set");
  if (allowed_features.empty()) throw ConfigError("fit_tree: no allowed features");
  if (rows.size() > 30'000'000) throw DataError("fit_tree: sample set too large for exact split scoring");
  if (labels.size() != x.rows()) throw DataError("fit_tree: label count does not match feature rows");
  if (!kinds.empty() && kinds.size() != x.cols()) throw ConfigError("fit_tree: kinds width mismatch");
  std::vector<std::size_t> features(allowed_features.begin(), allowed_features.end());
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());
  if (features.back() >= x.cols()) throw ConfigError("fit_tree: allowed feature outside schema");
  for (const auto r : rows) {
    if (r >= x.rows()) throw DataError("fit_tree: row index out of range");
  }

  std::uint64_t pos = 0;
  for (const auto r : rows) pos += labels[r] == Label::kCall ? 1 : 0;
  const std::uint64_t n = rows.size();
  const double root_risk = static_cast<double>(std::min(pos, n - pos)) / static_cast<double>(n);

  Builder builder(x, labels, features, kinds, params, n, root_risk);
  builder.build(std::vector<std::uint32_t>(rows.begin(), rows.end()), 0);
  return DecisionTree(builder.take(), std::move(group_name), params);
}

std::vector<std::pair<std::uint32_t, double>> variable_importance(const DecisionTree& tree) {
  std::map<std::uint32_t, double> sum;
  for (const auto& n : tree.nodes()) {
    if (!n.leaf) sum[n.feature] += n.improvement;
  }
  std::vector<std::pair<std::uint32_t, double>> ranked(sum.begin(), sum.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

}  // namespace cxpred
