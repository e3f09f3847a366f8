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

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cxpred/datamodel.hpp"
#include "cxpred/featurizer.hpp"

namespace cxpred {

// Fitting controls with rpart semantics.
struct TreeParams {
  std::size_t min_split = 10;  // nodes with fewer samples are not split
  std::size_t max_depth = 10;  // root has depth 0
  double cp = 0.001;           // a split must improve the fit by cp * root risk

  void validate() const;
  bool operator==(const TreeParams&) const = default;
};

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

struct TreeNode {
  bool leaf = true;
  bool binary = false;          // split on a binary dimension: value == 1 goes left
  std::uint32_t feature = 0;
  double threshold = 0.0;       // real split: value <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint64_t n_neg = 0;      // training samples routed here, per class
  std::uint64_t n_pos = 0;
  double improvement = 0.0;     // (n_node / n_root) * Gini decrease; split nodes only

  // Majority class; equal counts predict kNoCall.
  Label label() const { return n_pos > n_neg ? Label::kCall : Label::kNoCall; }
  bool goes_left(double value) const { return binary ? value == 1.0 : value <= threshold; }
  bool operator==(const TreeNode&) const = default;
};

// Binary classification tree. Nodes are stored in preorder; node 0 is the root.
class DecisionTree {
 public:
  // Validates the node structure (every node reachable exactly once from the
  // root, child ids in range); throws StructuralError otherwise.
  DecisionTree(std::vector<TreeNode> nodes, std::string group_name, TreeParams params);

  Label predict(std::span<const double> x) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::string& group_name() const { return group_name_; }
  const TreeParams& params() const { return params_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;
  std::set<std::uint32_t> split_features() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::string group_name_;
  TreeParams params_;
};

// Greedy Gini partitioning over the sample rows listed in `rows` (which may
// repeat, as in a bootstrap bag), considering only `allowed_features`.
// `kinds` marks binary dimensions; empty means every dimension is real.
DecisionTree fit_tree(const FeatureMatrix& x, std::span<const Label> labels, std::span<const std::uint32_t> rows,
                      std::span<const std::size_t> allowed_features, const TreeParams& params,
                      std::span<const DimensionKind> kinds = {}, std::string group_name = {});

// Sum of node improvements per split feature, descending; ties by feature index.
std::vector<std::pair<std::uint32_t, double>> variable_importance(const DecisionTree& tree);

}  // namespace cxpred
