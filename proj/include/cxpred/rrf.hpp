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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cxpred/cart.hpp"
#include "cxpred/datamodel.hpp"
#include "cxpred/featurizer.hpp"

namespace cxpred {

// A named set of schema blocks that one ensemble member is restricted to.
struct FeatureGroup {
  std::string name;
  std::vector<std::string> blocks;
  TreeParams params;

  bool operator==(const FeatureGroup&) const = default;
};

// Sorted dimension indices covered by the group's blocks.
std::vector<std::size_t> group_dimensions(const FeatureSchema& schema, const FeatureGroup& group);

// Transaction-level groups: Application, Application_Type, Cell, Location_Area
// (cp 0.00015), Device_Model, Device_Manufacturer, Network_KPI.
std::vector<FeatureGroup> transaction_feature_groups();

// Profile-level groups: one per top application block, then Cell and Device.
std::vector<FeatureGroup> profile_feature_groups(const std::vector<std::string>& top_apps);

struct BagSpec {
  std::optional<std::size_t> negatives;  // nullopt: as many negatives as positives
  std::uint64_t seed = 0;

  bool operator==(const BagSpec&) const = default;
};

// Every positive once (in input order) followed by negatives drawn uniformly
// with replacement. Returned values index into `labels`.
std::vector<std::uint32_t> make_balanced_bag(std::span<const Label> labels, const BagSpec& spec);

struct TrainingMetadata {
  std::optional<Day> first_train_day;
  std::optional<Day> last_train_day;
  std::uint64_t seed = 0;
  std::uint64_t train_samples = 0;
  std::uint64_t train_positives = 0;

  bool operator==(const TrainingMetadata&) const = default;
};

// Restricted Random Forest: one tree per feature group, majority vote.
class RrfModel {
 public:
  // Throws StructuralError when trees and groups disagree or a tree splits
  // outside its group.
  RrfModel(FeatureSchema schema, std::vector<FeatureGroup> groups, std::vector<DecisionTree> trees,
           TrainingMetadata metadata);

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<FeatureGroup>& groups() const { return groups_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  const TrainingMetadata& metadata() const { return metadata_; }
  std::size_t size() const { return trees_.size(); }

  bool operator==(const RrfModel&) const = default;

 private:
  FeatureSchema schema_;
  std::vector<FeatureGroup> groups_;
  std::vector<DecisionTree> trees_;
  TrainingMetadata metadata_;
};

// One independent balanced bag per group, seeded by (bag seed, group index).
RrfModel train_rrf(const FeatureMatrix& x, std::span<const Label> labels, const FeatureSchema& schema,
                   const std::vector<FeatureGroup>& groups, const BagSpec& bag_spec, TrainingMetadata metadata = {});

struct Votes {
  std::size_t call = 0;
  std::size_t no_call = 0;
};

// kCall only on a strict majority; ties go to kNoCall.
inline Label majority(std::size_t call, std::size_t no_call) { return call > no_call ? Label::kCall : Label::kNoCall; }

Votes tally_votes(const RrfModel& model, std::span<const double> x);
Label predict_rrf(const RrfModel& model, std::span<const double> x);

// Majority over one user's predictions for one day. Throws on empty input.
Label aggregate_user_day(std::span<const Label> predictions);

struct GroupImportance {
  std::string group;
  std::vector<std::pair<std::uint32_t, double>> ranked;  // dimension index, importance
};

std::vector<GroupImportance> ensemble_importance(const RrfModel& model);

}  // namespace cxpred
