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

#include "cxpred/labeler.hpp"

#include <algorithm>
#include <map>

#include "cxpred/errors.hpp"

namespace cxpred {

std::vector<Label> label_approach1(const Dataset& dataset) {
  std::map<std::pair<std::string_view, Day>, TimePoint> anchors;
  for (const auto& c : dataset.care_calls) {
    auto [it, inserted] = anchors.try_emplace({c.user_id, c.day()}, c.timestamp);
    if (!inserted) it->second = std::max(it->second, c.timestamp);
  }
  std::vector<Label> labels(dataset.transactions.size(), Label::kNoCall);
  for (std::size_t i = 0; i < dataset.transactions.size(); ++i) {
    const Transaction& t = dataset.transactions[i];
    const auto it = anchors.find({t.user_id, t.day()});
    if (it != anchors.end() && t.timestamp < it->second) labels[i] = Label::kCall;
  }
  return labels;
}

std::set<std::pair<std::string, Day>> call_days(const std::vector<CareCallRecord>& care_calls) {
  std::set<std::pair<std::string, Day>> out;
  for (const auto& c : care_calls) out.emplace(c.user_id, c.day());
  return out;
}

ProfileLabels label_approach2(const std::vector<UserDayProfile>& profiles,
                              const std::vector<CareCallRecord>& care_calls) {
  const auto called = call_days(care_calls);
  ProfileLabels out;
  out.labels.reserve(profiles.size());
  std::set<std::pair<std::string_view, Day>> seen;
  for (const auto& p : profiles) {
    const bool positive = called.contains({p.user_id, p.day});
    out.labels.push_back(positive ? Label::kCall : Label::kNoCall);
    if (positive) seen.emplace(p.user_id, p.day);
  }
  out.orphan_call_days = called.size() - seen.size();
  return out;
}

SplitResult temporal_split(std::span<const Day> sample_days, const SplitSpec& spec) {
  if (sample_days.empty()) throw DataError("temporal split: no samples");
  const auto [lo, hi] = std::minmax_element(sample_days.begin(), sample_days.end());
  SplitResult r;
  r.test_day = spec.test_day.value_or(*hi);
  if (r.test_day < *lo || r.test_day > *hi) {
    throw DataError("temporal split: test day " + format_day(r.test_day) + " outside data span " + format_day(*lo) +
                    ".." + format_day(*hi));
  }
  for (std::size_t i = 0; i < sample_days.size(); ++i) {
    const Day d = sample_days[i];
    if (d < r.test_day) {
      r.train.push_back(i);
    } else if (d == r.test_day) {
      r.test.push_back(i);
    } else {
      r.rejected.push_back(i);
    }
  }
  if (r.train.empty()) throw DataError("temporal split: no training days before " + format_day(r.test_day));
  return r;
}

}  // namespace cxpred
