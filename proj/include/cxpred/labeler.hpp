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
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cxpred/datamodel.hpp"
#include "cxpred/profiler.hpp"

namespace cxpred {

// Approach I: per (user, day) with a call, the latest call of the day is the
// anchor; transactions strictly before it are kCall, at or after it kNoCall.
// Output is aligned with dataset.transactions.
std::vector<Label> label_approach1(const Dataset& dataset);

struct ProfileLabels {
  std::vector<Label> labels;          // aligned with the profiles
  std::size_t orphan_call_days = 0;   // (caller, call day) pairs without a profile
};

// Approach II: a profile is kCall iff its user called on that day.
ProfileLabels label_approach2(const std::vector<UserDayProfile>& profiles,
                              const std::vector<CareCallRecord>& care_calls);

// Distinct (user, day) pairs with at least one call.
std::set<std::pair<std::string, Day>> call_days(const std::vector<CareCallRecord>& care_calls);

struct SplitSpec {
  std::optional<Day> test_day;  // defaults to the last day present
};

struct SplitResult {
  Day test_day{};
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::size_t> rejected;  // later than the test day
};

// Daily temporal split over per-sample days.
SplitResult temporal_split(std::span<const Day> sample_days, const SplitSpec& spec);

}  // namespace cxpred
