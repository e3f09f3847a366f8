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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxpred/datamodel.hpp"
#include "cxpred/eval.hpp"
#include "cxpred/featurizer.hpp"
#include "cxpred/modelio.hpp"
#include "cxpred/profiler.hpp"
#include "cxpred/rrf.hpp"
#include "json.hpp"

namespace cxpred {

struct ProfilerConfig {
  std::size_t top_apps = 10;
  std::size_t cell_min_users = 7;
  std::size_t device_min_users = 5;
  CesConfig ces;
};

// kPerDay trains a forest on each training day separately; all trees share one
// encoder and vote together.
enum class TrainingMode { kPooled, kPerDay };

// Declarative description of one train/evaluate run.
struct ExperimentConfig {
  Approach approach = Approach::kTransaction;
  std::optional<Day> test_day;
  std::uint64_t seed = 1;
  std::optional<std::size_t> negatives;  // per-bag negatives; default n+
  TrainingMode training = TrainingMode::kPooled;
  std::optional<ProfilerConfig> profiler;  // required for the profile approach
  VocabularySpec vocabulary = default_vocabulary_spec();
  AppTypeMap app_types;
  // Optional tree parameter override applied to every group.
  std::optional<TreeParams> tree_params;
  // Per-group overrides by group name (e.g. a smaller cp for Location_Area).
  std::map<std::string, TreeParams> group_params;
  // Input files and artifact directory; command-line flags take precedence.
  std::string transactions_path;
  std::string care_calls_path;
  std::string output_dir;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ExperimentConfig& config);
AppTypeMap app_types_from_json(const nlohmann::json& j);

// Training rows are transaction indices; labels align with dataset.transactions.
ModelBundle train_transaction_model(const Dataset& dataset, std::span<const std::size_t> train_rows,
                                    std::span<const Label> labels, const ExperimentConfig& config);

// Top apps and rare-value maps are learned from train_rows; profiles are built
// from the same rows and labelled from the dataset's calls.
ModelBundle train_profile_model(const Dataset& dataset, std::span<const std::size_t> train_rows,
                                const ExperimentConfig& config);

// Batch reference scoring.
std::vector<Label> score_transactions(const ModelBundle& bundle, const std::vector<Transaction>& txns,
                                      std::span<const std::size_t> rows);
// One verdict per (user, day) present in rows. Transaction approach: majority
// over that user's transaction predictions; profile approach: the ensemble
// vote on the day's profile.
std::map<UserDayKey, Label> batch_user_day_verdicts(const ModelBundle& bundle, const std::vector<Transaction>& txns,
                                                    std::span<const std::size_t> rows);
// kCall iff the user placed a care call that day, for each (user, day) with activity in rows.
std::map<UserDayKey, Label> user_day_truth(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                           const std::vector<CareCallRecord>& care_calls);

struct ExperimentResult {
  ModelBundle bundle;
  Day test_day{};
  MetricsReport model_user_day;
  MetricsReport baseline_user_day;
  std::optional<MetricsReport> model_transaction;  // transaction approach only
  double baseline_rate = 0.0;
  std::vector<ImprovementRow> improvement;
  std::vector<GroupImportance> importance;
  nlohmann::ordered_json manifest;
};

// Trains on every day before the test day.
ModelBundle train_model(const Dataset& dataset, const ExperimentConfig& config);
// Scores the test day at user-day granularity against the previous-day coin baseline.
ExperimentResult evaluate_model(const Dataset& dataset, const ModelBundle& bundle, const ExperimentConfig& config);
// train_model followed by evaluate_model.
ExperimentResult run_experiment(const Dataset& dataset, const ExperimentConfig& config);

// Delimited feature table: "user_id,<key_column>,<dimension names>[,label]",
// one row per sample; labels are +1 / -1.
std::string format_feature_table(const FeatureSchema& schema, const FeatureMatrix& x,
                                 const std::vector<std::pair<std::string, std::string>>& keys,
                                 std::string_view key_column, std::span<const Label> labels = {});

// Writes model.json, metrics.json, improvement.txt, importance.csv,
// plot_series.csv and manifest.json into `directory` (created if missing).
void write_experiment_outputs(const ExperimentResult& result, const std::string& directory);

}  // namespace cxpred
