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

#include "cxpred/rrf.hpp"

#include <algorithm>

#include "cxpred/errors.hpp"
#include "cxpred/profiler.hpp"
#include "cxpred/rng.hpp"

namespace cxpred {

std::vector<std::size_t> group_dimensions(const FeatureSchema& schema, const FeatureGroup& group) {
  std::vector<std::size_t> dims;
  for (const auto& name : group.blocks) {
    const FeatureBlock& b = schema.at(name);
    for (std::size_t i = 0; i < b.width; ++i) dims.push_back(b.offset + i);
  }
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  return dims;
}

std::vector<FeatureGroup> transaction_feature_groups() {
  std::vector<FeatureGroup> g = {
      {"Application", {"application"}, {}},
      {"Application_Type", {std::string(kApplicationTypeField)}, {}},
      {"Cell", {"cell"}, {}},
      {"Location_Area", {"location_area"}, {}},
      {"Device_Model", {"device_model"}, {}},
      {"Device_Manufacturer", {"device_manufacturer"}, {}},
      {"Network_KPI", {std::string(kKpiBlock)}, {}},
  };
  g[3].params.cp = 0.00015;
  return g;
}

std::vector<FeatureGroup> profile_feature_groups(const std::vector<std::string>& top_apps) {
  std::vector<FeatureGroup> g;
  for (const auto& app : top_apps) g.push_back({app, {app_block_name(app)}, {}});
  g.push_back({"Cell", {"cell"}, {}});
  g.push_back({"Device", {"device"}, {}});
  return g;
}

std::vector<std::uint32_t> make_balanced_bag(std::span<const Label> labels, const BagSpec& spec) {
  std::vector<std::uint32_t> positives, negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == Label::kCall ? positives : negatives).push_back(static_cast<std::uint32_t>(i));
  }
  if (positives.empty() || negatives.empty()) throw DataError("degenerate class distribution");
  const std::size_t n_neg = spec.negatives.value_or(positives.size());
  std::vector<std::uint32_t> bag = positives;
  bag.reserve(positives.size() + n_neg);
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < n_neg; ++i) bag.push_back(negatives[rng.uniform_index(negatives.size())]);
  return bag;
}

RrfModel::RrfModel(FeatureSchema schema, std::vector<FeatureGroup> groups, std::vector<DecisionTree> trees,
                   TrainingMetadata metadata)
    : schema_(std::move(schema)), groups_(std::move(groups)), trees_(std::move(trees)), metadata_(metadata) {
  if (trees_.empty()) throw StructuralError("model has no trees");
  if (trees_.size() != groups_.size()) throw StructuralError("tree count differs from group count");
  for (std::size_t m = 0; m < trees_.size(); ++m) {
    if (trees_[m].group_name() != groups_[m].name) {
      throw StructuralError("tree " + std::to_string(m) + " is bound to '" + trees_[m].group_name() +
                            "' but group is '" + groups_[m].name + "'");
    }
    const auto dims = group_dimensions(schema_, groups_[m]);
    for (const auto f : trees_[m].split_features()) {
      if (!std::binary_search(dims.begin(), dims.end(), static_cast<std::size_t>(f))) {
        throw StructuralError("tree '" + groups_[m].name + "' splits on dimension " + std::to_string(f) +
                              " outside its group");
      }
    }
  }
}

RrfModel train_rrf(const FeatureMatrix& x, std::span<const Label> labels, const FeatureSchema& schema,
                   const std::vector<FeatureGroup>& groups, const BagSpec& bag_spec, TrainingMetadata metadata) {
  if (groups.empty()) throw ConfigError("train_rrf: no feature groups");
  if (x.cols() != schema.dimension()) throw ConfigError("train_rrf: feature matrix does not match schema");
  const auto kinds = schema.kinds();
  std::vector<DecisionTree> trees;
  trees.reserve(groups.size());
  for (std::size_t m = 0; m < groups.size(); ++m) {
    const FeatureGroup& g = groups[m];
    try {
      BagSpec spec = bag_spec;
      spec.seed = derive_seed(bag_spec.seed, "bag", m);
      const auto bag = make_balanced_bag(labels, spec);
      trees.push_back(fit_tree(x, labels, bag, group_dimensions(schema, g), g.params, kinds, g.name));
    } catch (const Error& e) {
      throw DataError("group '" + g.name + "': " + e.what());
    }
  }
  metadata.seed = bag_spec.seed;
  metadata.train_samples = labels.size();
  metadata.train_positives =
      static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), Label::kCall));
  return RrfModel(schema, groups, std::move(trees), metadata);
}

Votes tally_votes(const RrfModel& model, std::span<const double> x) {
  Votes v;
  for (const auto& tree : model.trees()) (tree.predict(x) == Label::kCall ? v.call : v.no_call) += 1;
  return v;
}

Label predict_rrf(const RrfModel& model, std::span<const double> x) {
  const Votes v = tally_votes(model, x);
  return majority(v.call, v.no_call);
}

Label aggregate_user_day(std::span<const Label> predictions) {
  if (predictions.empty()) throw DataError("aggregate_user_day: no predictions");
  const auto calls = static_cast<std::size_t>(std::count(predictions.begin(), predictions.end(), Label::kCall));
  return majority(calls, predictions.size() - calls);
}

std::vector<GroupImportance> ensemble_importance(const RrfModel& model) {
  std::vector<GroupImportance> out;
  for (std::size_t m = 0; m < model.size(); ++m) {
    out.push_back({model.groups()[m].name, variable_importance(model.trees()[m])});
  }
  return out;
}

}  // namespace cxpred
