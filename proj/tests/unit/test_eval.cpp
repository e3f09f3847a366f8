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

#include <gtest/gtest.h>

#include <algorithm>

#include "cxpred/errors.hpp"
#include "cxpred/eval.hpp"
#include "cxpred/rng.hpp"

namespace cxpred {
namespace {

constexpr Label P = Label::kCall;
constexpr Label N = Label::kNoCall;

TEST(Confusion, Counts) {
  std::vector<Label> pred = {P, P, N, N}, truth = {P, N, P, N};
  EXPECT_EQ(confusion(pred, truth), (ConfusionCounts{1, 1, 1, 1}));
  EXPECT_EQ(confusion(truth, truth), (ConfusionCounts{2, 0, 0, 2}));
  auto empty = confusion(std::span<const Label>{}, std::span<const Label>{});
  EXPECT_EQ(empty.total(), 0u);
  auto m = metrics(empty, Granularity::kTransaction);
  EXPECT_TRUE(m.precision_undefined && m.recall_undefined && m.f1_undefined);
  std::vector<Label> short_truth = {P};
  EXPECT_THROW(confusion(pred, short_truth), DataError);
}

TEST(Confusion, KeyedMustMatch) {
  const Day d = day_of(make_time(2014, 8, 12, 0));
  std::map<UserDayKey, Label> a = {{{"u1", d}, P}, {{"u2", d}, N}};
  std::map<UserDayKey, Label> b = {{{"u1", d}, P}, {{"u2", d}, P}};
  EXPECT_EQ(confusion(a, b), (ConfusionCounts{1, 0, 1, 0}));
  std::map<UserDayKey, Label> c = {{{"u1", d}, P}, {{"u3", d}, P}};
  EXPECT_THROW(confusion(a, c), DataError);
  std::map<UserDayKey, Label> shorter = {{{"u1", d}, P}};
  EXPECT_THROW(confusion(a, shorter), DataError);
}

TEST(Metrics, WorkedExample) {
  auto m = metrics({2, 1, 2, 0}, Granularity::kUserDay);
  EXPECT_EQ(m.precision, 2.0 / 3.0);
  EXPECT_EQ(m.recall, 0.5);
  EXPECT_DOUBLE_EQ(m.f1, 4.0 / 7.0);
  EXPECT_FALSE(m.f1_undefined);
  auto perfect = metrics({5, 0, 0, 9}, Granularity::kUserDay);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
}

TEST(Metrics, UndefinedFlags) {
  auto m = metrics({0, 0, 3, 5}, Granularity::kUserDay);
  EXPECT_TRUE(m.precision_undefined);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_FALSE(m.recall_undefined);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_TRUE(m.f1_undefined);
  auto no_positives = metrics({0, 4, 0, 5}, Granularity::kUserDay);
  EXPECT_FALSE(no_positives.precision_undefined);
  EXPECT_TRUE(no_positives.recall_undefined);
}

TEST(Metrics, RandomMatricesMatchFormulasAndHarmonicMeanBounds) {
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    ConfusionCounts c{rng.uniform_index(100), rng.uniform_index(100), rng.uniform_index(100), rng.uniform_index(100)};
    auto m = metrics(c, Granularity::kTransaction);
    if (c.tp + c.fp) EXPECT_NEAR(m.precision, double(c.tp) / double(c.tp + c.fp), 1e-12);
    if (c.tp + c.fn) EXPECT_NEAR(m.recall, double(c.tp) / double(c.tp + c.fn), 1e-12);
    if (!m.f1_undefined) {
      EXPECT_NEAR(m.f1, 2.0 * double(c.tp) / double(2 * c.tp + c.fp + c.fn), 1e-12);
      EXPECT_GE(m.f1, std::min(m.precision, m.recall) - 1e-15);
      EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-15);
    }
  }
}

TEST(Metrics, OrderInvariantAndShardable) {
  Rng rng(79);
  std::vector<Label> pred, truth;
  for (int i = 0; i < 1000; ++i) {
    pred.push_back(rng.bernoulli(0.3) ? P : N);
    truth.push_back(rng.bernoulli(0.2) ? P : N);
  }
  auto whole = confusion(pred, truth);
  std::vector<std::size_t> order(1000);
  for (std::size_t i = 0; i < 1000; ++i) order[i] = i;
  for (std::size_t i = 999; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
  std::vector<Label> p2, t2;
  for (auto i : order) {
    p2.push_back(pred[i]);
    t2.push_back(truth[i]);
  }
  EXPECT_EQ(confusion(p2, t2), whole);
  ConfusionCounts sharded;
  for (std::size_t s = 0; s < 1000; s += 300) {
    const std::size_t e = std::min<std::size_t>(s + 300, 1000);
    sharded += confusion(std::span(pred).subspan(s, e - s), std::span(truth).subspan(s, e - s));
  }
  EXPECT_EQ(sharded, whole);
}

TEST(Baseline, CoinRateAndDeterminism) {
  auto draws = biased_coin_baseline(1'000'000, 0.13, 2014);
  const double frac = static_cast<double>(std::count(draws.begin(), draws.end(), P)) / 1e6;
  EXPECT_NEAR(frac, 0.13, 0.002);
  EXPECT_EQ(draws, biased_coin_baseline(1'000'000, 0.13, 2014));
  auto zero = biased_coin_baseline(1000, 0.0, 1);
  EXPECT_EQ(std::count(zero.begin(), zero.end(), P), 0);
  auto one = biased_coin_baseline(1000, 1.0, 1);
  EXPECT_EQ(std::count(one.begin(), one.end(), P), 1000);
  EXPECT_THROW(biased_coin_baseline(10, 1.5, 1), ConfigError);
  EXPECT_THROW(biased_coin_baseline(10, -0.1, 1), ConfigError);
}

TEST(Baseline, PreviousDayRate) {
  const Day d11 = day_of(make_time(2014, 8, 11, 0));
  const Day d12 = day_of(make_time(2014, 8, 12, 0));
  const Day d10 = day_of(make_time(2014, 8, 10, 0));
  std::vector<Label> labels;
  std::vector<Day> days;
  auto add = [&](Day d, int pos, int neg) {
    for (int i = 0; i < pos; ++i) labels.push_back(P), days.push_back(d);
    for (int i = 0; i < neg; ++i) labels.push_back(N), days.push_back(d);
  };
  add(d10, 50, 50);
  add(d11, 13, 87);
  EXPECT_DOUBLE_EQ(baseline_rate_from_previous_day(labels, days, d12), 0.13);
  labels.clear();
  days.clear();
  add(d11, 2577, 7423);
  EXPECT_DOUBLE_EQ(baseline_rate_from_previous_day(labels, days, d12), 0.2577);
  labels.clear();
  days.clear();
  add(d11, 0, 10);
  EXPECT_EQ(baseline_rate_from_previous_day(labels, days, d12), 0.0);
  EXPECT_THROW(baseline_rate_from_previous_day(labels, days, d11), DataError);
}

TEST(Compare, RelativeImprovement) {
  auto a = metrics({3, 7, 7, 83}, Granularity::kUserDay);  // f1 0.30
  auto b = metrics({2, 8, 8, 82}, Granularity::kUserDay);  // f1 0.20
  auto rows = compare(a, b);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].metric, "f1");
  EXPECT_NEAR(*rows[2].improvement, 0.5, 1e-12);
  for (const auto& r : compare(a, a)) EXPECT_EQ(*r.improvement, 0.0);
  auto undefined = metrics({0, 0, 5, 5}, Granularity::kUserDay);
  auto inc = compare(a, undefined);
  EXPECT_FALSE(inc[0].improvement);
  EXPECT_FALSE(inc[2].improvement);
  EXPECT_NE(format_improvement_table(inc).find("incomparable"), std::string::npos);
  EXPECT_THROW(compare(a, metrics({1, 1, 1, 1}, Granularity::kTransaction)), DataError);
  EXPECT_FALSE(relative_improvement(1.0, 0.0));
}

TEST(Report, JsonRoundTrip) {
  auto m = metrics({4, 3, 1, 10}, Granularity::kTransaction);
  auto back = metrics_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back.counts, m.counts);
  EXPECT_EQ(back.granularity, m.granularity);
  EXPECT_EQ(back.f1, m.f1);
  EXPECT_THROW(metrics_from_json(nlohmann::json{{"tp", 1}}), DataError);
  auto table = format_metrics_table({{"rrf", m}});
  EXPECT_NE(table.find("transaction"), std::string::npos);
}

}  // namespace
}  // namespace cxpred
