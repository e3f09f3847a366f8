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
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cxpred/errors.hpp"
#include "cxpred/io.hpp"
#include "cxpred/synthgen.hpp"
#include "support.hpp"

namespace cxpred {
namespace {

std::set<std::string> caller_set(const Dataset& ds) {
  std::set<std::string> s;
  for (const auto& c : ds.care_calls) s.insert(c.user_id);
  return s;
}

double retrans_rate(const Transaction& t) {
  double p = t.kpis.value_or_zero(kpi::kPacketsTotal);
  return p > 0 ? t.kpis.value_or_zero(kpi::kRetransTotal) / p : 0.0;
}

// Two-sample Kolmogorov-Smirnov test; returns the asymptotic p-value.
double ks_p_value(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

TEST(KsHelper, DetectsShiftAndAcceptsSameDistribution) {
  Rng r(1);
  std::vector<double> a(2000), b(2000), c(2000);
  for (auto& x : a) x = r.normal();
  for (auto& x : b) x = r.normal();
  for (auto& x : c) x = r.normal() + 0.3;
  EXPECT_GT(ks_p_value(a, b), 0.01);
  EXPECT_LT(ks_p_value(a, c), 1e-6);
}

TEST(GeneratorConfig, Validation) {
  GeneratorConfig c;
  c.n_users = 10;
  c.caller_fraction = 0.05;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "no positive class representable");
  }
  c = GeneratorConfig{};
  c.caller_fraction = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GeneratorConfig{};
  c.n_days = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GeneratorConfig{};
  c.n_users = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(GeneratorConfig, JsonRoundTripAndErrors) {
  GeneratorConfig c;
  c.n_users = 123;
  c.planted.strength = 0.5;
  c.seed = 99;
  auto back = generator_config_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(generator_config_from_json(nlohmann::json::parse(R"({"planted_effect":"none"})")).planted.strength, 0.0);
  EXPECT_THROW(generator_config_from_json(nlohmann::json::parse(R"({"n_userz":5})")), ConfigError);
  EXPECT_THROW(generator_config_from_json(nlohmann::json::parse(R"({"n_users":"many"})")), ConfigError);
  EXPECT_THROW(generator_config_from_json(nlohmann::json::parse(R"({"start_day":"08/08/2014"})")), ConfigError);
}

GeneratorConfig small_config(std::uint64_t seed = 7) {
  GeneratorConfig c;
  c.n_users = 400;
  c.n_days = 3;
  c.caller_fraction = 0.1;
  c.seed = seed;
  return c;
}

TEST(Generate, DeterministicAndByteIdentical) {
  auto a = generate(small_config());
  auto b = generate(small_config());
  std::ostringstream fa, fb, ca, cb;
  io::write_transactions(fa, a.transactions);
  io::write_transactions(fb, b.transactions);
  io::write_care_calls(ca, a.care_calls);
  io::write_care_calls(cb, b.care_calls);
  EXPECT_EQ(fa.str(), fb.str());
  EXPECT_EQ(ca.str(), cb.str());
  auto c = generate(small_config(8));
  EXPECT_NE(c.transactions, a.transactions);
}

TEST(Generate, SatisfiesDatamodelInvariants) {
  auto ds = generate(small_config());
  auto r = validate_dataset(ds);
  EXPECT_EQ(r.error_count(), 0u);
  EXPECT_EQ(r.orphan_calls, 0u);
  Dataset copy = ds;
  normalize(copy);
  EXPECT_EQ(copy.transactions, ds.transactions);
  auto span = ds.span();
  ASSERT_TRUE(span);
  EXPECT_EQ(format_day(span->first), "2014-08-08");
  EXPECT_EQ(format_day(span->second), "2014-08-10");
  for (const auto& c : ds.care_calls) {
    int h = hour_of(c.timestamp);
    EXPECT_GE(h, 8);
    EXPECT_LT(h, 20);
    EXPECT_GE(c.duration_s, 0.0);
  }
  for (const auto& t : ds.transactions) {
    EXPECT_EQ((t.timestamp - day_of(t.timestamp)) % std::chrono::hours(1), std::chrono::seconds(0));
  }
}

TEST(Generate, CallerFractionMatchesTarget) {
  GeneratorConfig c;
  c.n_users = 10000;
  c.n_days = 5;
  c.caller_fraction = 0.0334;
  c.seed = 7;
  auto ds = generate(c);
  auto stats = summarize(ds);
  // a few users are inactive on every day and never appear
  EXPECT_LE(stats.users, 10000u);
  EXPECT_GE(stats.users, 9990u);
  EXPECT_NEAR(stats.caller_fraction, 63594.0 / 1901612.0, 0.2 * 0.0334);
  EXPECT_NEAR(stats.caller_fraction, 0.0334, 1e-4);
}

TEST(Generate, CallsPerCallerMatchesTarget) {
  GeneratorConfig c;
  c.n_users = 20000;
  c.n_days = 2;
  c.mean_txn_per_user_day = 2;
  c.caller_fraction = 0.1;
  auto stats = summarize(generate(c));
  // 2000 callers; standard error of the mean extra-call count is about 0.019.
  EXPECT_NEAR(stats.calls_per_caller, 107459.0 / 63594.0, 0.06);
}

TEST(Generate, CallersRetransmissionDominates) {
  auto c = small_config();
  c.n_users = 2000;
  auto ds = generate(c);
  auto callers = caller_set(ds);
  std::vector<double> rc, rn;
  for (const auto& t : ds.transactions) (callers.count(t.user_id) ? rc : rn).push_back(retrans_rate(t));
  std::sort(rc.begin(), rc.end());
  std::sort(rn.begin(), rn.end());
  for (double q : {0.5, 0.75, 0.9, 0.95, 0.99}) {
    double a = rc[static_cast<std::size_t>(q * static_cast<double>(rc.size() - 1))];
    double b = rn[static_cast<std::size_t>(q * static_cast<double>(rn.size() - 1))];
    EXPECT_GE(a, b) << "quantile " << q;
  }
}

// Per-user means keep samples independent for the KS test.
std::map<std::string, std::vector<double>> per_user_means(const Dataset& ds) {
  std::map<std::string, std::array<double, 5>> sums;
  for (const auto& t : ds.transactions) {
    auto& s = sums[t.user_id];
    s[0] += retrans_rate(t);
    s[1] += t.kpis.value_or_zero(kpi::kThroughputBytesDown) / t.kpis.value_or_zero(kpi::kThroughputDownloadTime);
    s[2] += t.kpis.value_or_zero(kpi::kTotalRtt) / t.kpis.value_or_zero(kpi::kRttCount);
    s[3] += t.kpis.value_or_zero(kpi::kTimeToFirstByte);
    s[4] += 1;
  }
  std::map<std::string, std::vector<double>> out;
  for (auto& [u, s] : sums) out[u] = {s[0] / s[4], s[1] / s[4], s[2] / s[4], s[3] / s[4]};
  return out;
}

TEST(Generate, NoPlantedEffectIsIndistinguishable) {
  GeneratorConfig c;
  c.n_users = 10000;
  c.n_days = 2;
  c.mean_txn_per_user_day = 4;
  c.caller_fraction = 0.2;
  c.planted.strength = 0.0;
  c.seed = 21;
  auto ds = generate(c);
  auto callers = caller_set(ds);
  auto means = per_user_means(ds);
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> a, b;
    for (const auto& [u, v] : means) (callers.count(u) ? a : b).push_back(v[k]);
    EXPECT_GT(ks_p_value(a, b), 0.01) << "feature " << k;
  }
  // With the planted effect on, the same test rejects strongly.
  c.planted.strength = 1.0;
  auto ds1 = generate(c);
  auto callers1 = caller_set(ds1);
  std::vector<double> a, b;
  for (const auto& [u, v] : per_user_means(ds1)) (callers1.count(u) ? a : b).push_back(v[0]);
  EXPECT_LT(ks_p_value(a, b), 1e-6);
}

TEST(Generate, PlantedSignalMonotoneInStrength) {
  double previous = -1.0;
  for (double s : {0.5, 1.0, 2.0}) {
    auto c = small_config(13);
    c.n_users = 1500;
    c.planted.strength = s;
    auto ds = generate(c);
    auto callers = caller_set(ds);
    double sc = 0, sn = 0;
    std::size_t nc = 0, nn = 0;
    for (const auto& t : ds.transactions) {
      if (callers.count(t.user_id)) {
        sc += retrans_rate(t);
        ++nc;
      } else {
        sn += retrans_rate(t);
        ++nn;
      }
    }
    double gap = sc / static_cast<double>(nc) - sn / static_cast<double>(nn);
    EXPECT_GT(gap, previous) << "strength " << s;
    previous = gap;
  }
}

TEST(Summarize, EmptyDatasetIsAllZero) {
  auto r = summarize(Dataset{});
  EXPECT_FALSE(r.span);
  EXPECT_EQ(r.transactions, 0u);
  EXPECT_EQ(r.users, 0u);
  EXPECT_EQ(r.callers, 0u);
  EXPECT_EQ(r.calls, 0u);
  EXPECT_EQ(r.calls_per_caller, 0.0);
  EXPECT_EQ(r.caller_fraction, 0.0);
  for (auto h : r.calls_by_hour) EXPECT_EQ(h, 0u);
  EXPECT_TRUE(r.top_apps_callers.empty());
}

TEST(Summarize, SingleUserSingleCall) {
  Dataset ds;
  ds.transactions.push_back(testing::make_txn("u1", make_time(2014, 8, 8, 10)));
  ds.care_calls.push_back(testing::make_call("u1", make_time(2014, 8, 8, 11, 20)));
  auto r = summarize(ds);
  EXPECT_EQ(r.caller_fraction, 1.0);
  EXPECT_EQ(r.calls_per_caller, 1.0);
  EXPECT_EQ(r.calls_by_hour[11], 1u);
  ASSERT_EQ(r.top_apps_callers.size(), 1u);
  EXPECT_EQ(r.top_apps_callers[0].first, "http");
  EXPECT_TRUE(r.top_apps_no_callers.empty());
}

TEST(Summarize, TopTablesAreCappedAndSorted) {
  auto r = summarize(generate(small_config()));
  EXPECT_LE(r.top_apps_no_callers.size(), 10u);
  EXPECT_TRUE(std::is_sorted(r.top_apps_no_callers.begin(), r.top_apps_no_callers.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; }));
  auto j = to_json(r);
  EXPECT_EQ(j["calls_by_hour"].size(), 24u);
}

TEST(SyntheticAppTypes, CoversCatalog) {
  auto m = synthetic_app_types();
  EXPECT_EQ(m.type_of("youtube"), "video");
  EXPECT_EQ(m.type_of("whatsapp"), "messaging");
  EXPECT_EQ(m.type_of("not-an-app"), "other");
}

}  // namespace
}  // namespace cxpred
