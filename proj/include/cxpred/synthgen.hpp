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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cxpred/datamodel.hpp"
#include "cxpred/featurizer.hpp"
#include "json.hpp"

namespace cxpred {

// How strongly a caller's experience degrades in the hours before a call.
// strength 0 plants no signal: callers and no-callers draw KPIs from the same
// distributions. Larger values raise the retransmission rate, lower
// throughput, and concentrate trouble on fragile devices, congested cells
// and heavy applications.
struct PlantedEffect {
  double strength = 1.0;
  double trouble_window_hours = 6.0;  // mean length of the degraded period before a call
  double retries_per_call_day = 6.0;  // mean extra records before a call, scaled by strength
};

struct CatalogConfig {
  std::size_t cells = 400;
  std::size_t cells_per_location_area = 10;
  std::size_t devices = 80;   // the named catalog is padded with generic models
  double zipf_exponent = 1.2;
};

struct GeneratorConfig {
  std::size_t n_users = 2000;
  std::size_t n_days = 5;
  Day start_day = Day{std::chrono::year{2014} / 8 / 8};
  double mean_txn_per_user_day = 10.0;
  double active_day_probability = 0.8;
  double caller_fraction = 0.0334;
  double mean_calls_per_caller = 1.69;
  double background_stress_probability = 0.03;
  PlantedEffect planted;
  CatalogConfig catalog;
  std::uint64_t seed = 7;

  // Throws ConfigError, including "no positive class representable".
  void validate() const;
};

GeneratorConfig generator_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const GeneratorConfig& config);

// Pure function of the config (including its seed). Output is normalized.
Dataset generate(const GeneratorConfig& config);

// Application -> type mapping of the built-in catalog.
AppTypeMap synthetic_app_types();

struct StatsReport {
  std::optional<std::pair<Day, Day>> span;
  std::size_t transactions = 0;
  std::size_t users = 0;
  std::size_t callers = 0;
  std::size_t calls = 0;
  double calls_per_caller = 0.0;
  double caller_fraction = 0.0;
  std::array<std::size_t, 24> calls_by_hour{};
  // Top-10 applications by transaction count and devices by distinct users.
  std::vector<std::pair<std::string, std::size_t>> top_apps_callers, top_apps_no_callers;
  std::vector<std::pair<std::string, std::size_t>> top_devices_callers, top_devices_no_callers;
};

StatsReport summarize(const Dataset& dataset);
nlohmann::ordered_json to_json(const StatsReport& report);

}  // namespace cxpred
