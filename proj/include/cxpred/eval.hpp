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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cxpred/datamodel.hpp"
#include "json.hpp"

namespace cxpred {

enum class Granularity { kTransaction, kUserDay };
std::string granularity_name(Granularity g);

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

// kCall is the positive class.
ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truths);
// Keys must match exactly; a key present on one side only is an error.
ConfusionCounts confusion(const std::map<UserDayKey, Label>& predictions, const std::map<UserDayKey, Label>& truths);

struct MetricsReport {
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // A 0/0 metric is reported as 0 with its flag set.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  Granularity granularity = Granularity::kUserDay;
};

MetricsReport metrics(const ConfusionCounts& counts, Granularity granularity);

// Independent draws, kCall with probability p.
std::vector<Label> biased_coin_baseline(std::size_t n, double p_positive, std::uint64_t seed);

// Positive share among samples dated the day before `test_day`.
double baseline_rate_from_previous_day(std::span<const Label> labels, std::span<const Day> days, Day test_day);

// (a - b) / b; nullopt when b is zero.
std::optional<double> relative_improvement(double a, double b);

struct ImprovementRow {
  std::string metric;
  double a = 0.0;
  double b = 0.0;
  std::optional<double> improvement;  // nullopt: incomparable
};

std::vector<ImprovementRow> compare(const MetricsReport& a, const MetricsReport& b);

nlohmann::ordered_json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);
std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string format_improvement_table(const std::vector<ImprovementRow>& rows);

}  // namespace cxpred
