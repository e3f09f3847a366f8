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

#include <thread>

#include "cxpred/errors.hpp"
#include "cxpred/speed.hpp"
#include "support.hpp"

namespace cxpred {
namespace {

using testing::make_txn;

// One KPI tree: more than `cut` retransmissions votes call.
ModelBundle retrans_bundle(double cut) {
  TransactionEncoder enc({}, {});
  TreeNode root;
  root.leaf = false;
  root.feature = static_cast<std::uint32_t>(kpi::kRetransTotal - 1);
  root.threshold = cut;
  root.left = 1;
  root.right = 2;
  root.n_neg = 1;
  root.n_pos = 1;
  TreeNode no;
  no.n_neg = 1;
  TreeNode yes;
  yes.n_pos = 1;
  DecisionTree tree({root, no, yes}, "Network_KPI", {});
  RrfModel model(enc.schema(), {{"Network_KPI", {"kpis"}, {}}}, {tree}, {});
  return {Approach::kTransaction, std::move(model), {}, std::nullopt};
}

std::shared_ptr<const ScoringContext> ctx(double cut = 5.0) {
  return std::make_shared<const ScoringContext>(retrans_bundle(cut));
}

TimePoint at(int day, int hour, int minute = 0) { return make_time(2014, 8, day, hour, minute); }

Transaction good(const std::string& u, TimePoint t) { return make_txn(u, t, "http", "c", "d", 1000, 1); }
Transaction bad(const std::string& u, TimePoint t) { return make_txn(u, t, "http", "c", "d", 1000, 50); }

TEST(SpeedLayer, EmitsOnlyOnClassChange) {
  SpeedLayer layer(ctx());
  EXPECT_FALSE(layer.ingest(good("u", at(8, 9))));  // 0 call / 1 no-call: stays -1
  EXPECT_FALSE(layer.ingest(bad("u", at(8, 10))));  // 1 / 1 tie: -1
  auto v = layer.ingest(bad("u", at(8, 11)));       // 2 / 1
  ASSERT_TRUE(v);
  EXPECT_EQ(v->label, Label::kCall);
  EXPECT_EQ(v->votes.call, 2u);
  EXPECT_EQ(v->transactions, 3u);
  EXPECT_EQ(v->emitted_at, at(8, 11));
  EXPECT_FALSE(layer.ingest(bad("u", at(8, 12))));
  EXPECT_FALSE(layer.ingest(good("u", at(8, 13))));  // 3 / 2
  auto back = layer.ingest(good("u", at(8, 14)));  // 3 / 3 tie falls back to -1
  ASSERT_TRUE(back);
  EXPECT_EQ(back->label, Label::kNoCall);
  EXPECT_EQ(layer.query("u", day_of(at(8, 0))).label, Label::kNoCall);
  EXPECT_EQ(layer.stats().emitted, 2u);
}

TEST(SpeedLayer, VerdictEqualsMajorityOfPredictionsSoFar) {
  SpeedLayer layer(ctx());
  Rng rng(3);
  std::size_t calls = 0, total = 0;
  Label last = Label::kNoCall;
  for (int i = 0; i < 300; ++i) {
    auto t = rng.bernoulli(0.5) ? bad("u", at(8, 0, 0) + std::chrono::seconds(i)) : good("u", at(8, 0) + std::chrono::seconds(i));
    calls += layer.context().score_transaction(t) == Label::kCall;
    ++total;
    auto v = layer.ingest(t);
    const Label now = majority(calls, total - calls);
    EXPECT_EQ(v.has_value(), now != last);
    last = now;
    const auto q = layer.query("u", t.day());
    EXPECT_EQ(q.label, now);
    EXPECT_EQ(q.votes.call, calls);
  }
}

TEST(SpeedLayer, QueryUnknownKeyIsNotFound) {
  SpeedLayer layer(ctx());
  EXPECT_THROW(layer.query("nobody", day_of(at(8, 0))), NotFoundError);
  layer.ingest(good("u", at(8, 1)));
  EXPECT_NO_THROW(layer.query("u", day_of(at(8, 0))));
  EXPECT_THROW(layer.query("u", day_of(at(9, 0))), NotFoundError);
}

TEST(SpeedLayer, WatermarkClosesOldDaysAndDropsLateRecords) {
  std::vector<Verdict> closed;
  SpeedLayer layer(ctx(), [&](const Verdict& v) { closed.push_back(v); });
  layer.ingest(bad("a", at(8, 10)));
  layer.ingest(good("b", at(9, 10)));
  layer.ingest(bad("a", at(8, 23)));  // day 8 still open while the watermark is day 9
  EXPECT_EQ(layer.stats().late_dropped, 0u);
  EXPECT_TRUE(closed.empty());
  layer.ingest(good("c", at(10, 0)));  // day 8 closes
  ASSERT_EQ(closed.size(), 1u);
  EXPECT_EQ(closed[0].user_id, "a");
  EXPECT_EQ(closed[0].label, Label::kCall);
  EXPECT_EQ(closed[0].transactions, 2u);
  EXPECT_EQ(layer.stats().evicted, 1u);
  EXPECT_FALSE(layer.ingest(bad("a", at(8, 23, 59))));
  EXPECT_EQ(layer.stats().late_dropped, 1u);
  EXPECT_THROW(layer.query("a", day_of(at(8, 0))), NotFoundError);
  EXPECT_EQ(layer.live_keys(), 2u);
  layer.flush();
  EXPECT_EQ(closed.size(), 3u);
  EXPECT_EQ(layer.live_keys(), 0u);
}

TEST(SpeedLayer, MalformedInputIsCountedAndSkipped) {
  SpeedLayer layer(ctx());
  EXPECT_FALSE(layer.ingest_line("this,is,not,a,transaction", 1));
  auto t = good("", at(8, 1));
  EXPECT_FALSE(layer.ingest(t));
  EXPECT_EQ(layer.stats().malformed, 2u);
  EXPECT_EQ(layer.stats().ingested, 0u);
}

TEST(SpeedLayer, SwapAffectsOnlyLaterTransactions) {
  SpeedLayer layer(ctx(5.0));
  layer.ingest(bad("u", at(8, 1)));  // 50 > 5: call
  EXPECT_EQ(layer.query("u", day_of(at(8, 0))).label, Label::kCall);
  layer.swap_context(ctx(100.0));
  layer.ingest(bad("u", at(8, 2)));  // 50 <= 100: no call under the new model
  auto q = layer.query("u", day_of(at(8, 0)));
  EXPECT_EQ(q.votes.call, 1u);
  EXPECT_EQ(q.votes.no_call, 1u);
  EXPECT_EQ(layer.stats().swaps, 1u);
}

TEST(SpeedLayer, FailedModelLoadKeepsPreviousModel) {
  SpeedLayer layer(ctx(5.0));
  std::string doc = serialize(retrans_bundle(100.0));
  EXPECT_THROW(layer.load_model(doc.substr(0, doc.size() / 2)), CorruptionError);
  layer.ingest(bad("u", at(8, 1)));
  EXPECT_EQ(layer.query("u", day_of(at(8, 0))).label, Label::kCall);
  layer.load_model(doc);
  layer.ingest(bad("v", at(8, 1)));
  EXPECT_EQ(layer.query("v", day_of(at(8, 0))).label, Label::kNoCall);
}

TEST(SpeedLayer, VerdictJson) {
  Verdict v{"u1", day_of(at(8, 0)), Label::kCall, {3, 1}, 4, at(8, 9, 30)};
  const auto j = nlohmann::json::parse(format_verdict_json(v));
  EXPECT_EQ(j["user_id"], "u1");
  EXPECT_EQ(j["day"], "2014-08-08");
  EXPECT_EQ(j["class"], 1);
  EXPECT_EQ(j["votes"]["call"], 3);
  EXPECT_EQ(j["transactions"], 4);
}

TEST(PartitionedSpeedLayer, MatchesSingleLayerUnderConcurrentIngest) {
  Rng rng(11);
  std::vector<Transaction> txns;
  for (int i = 0; i < 4000; ++i) {
    const std::string u = "u" + std::to_string(rng.uniform_index(200));
    const TimePoint t = at(8, 0) + std::chrono::seconds(i * 20);
    txns.push_back(rng.bernoulli(0.45) ? bad(u, t) : good(u, t));
  }
  SpeedLayer single(ctx());
  for (const auto& t : txns) single.ingest(t);

  PartitionedSpeedLayer part(ctx(), 4);
  // Each thread owns the users of one partition, so per-user order is kept.
  std::vector<std::thread> workers;
  for (std::size_t p = 0; p < 4; ++p) {
    workers.emplace_back([&, p] {
      for (const auto& t : txns) {
        if (part.partition_of(t.user_id) == p) part.ingest(t);
      }
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(part.stats().ingested, txns.size());
  for (const auto& v : single.live_verdicts()) {
    const auto q = part.query(v.user_id, v.day);
    EXPECT_EQ(q.label, v.label);
    EXPECT_EQ(q.votes.call, v.votes.call);
    EXPECT_EQ(q.transactions, v.transactions);
  }
  EXPECT_EQ(part.partition_of("u1"), part.partition_of("u1"));
  EXPECT_THROW(PartitionedSpeedLayer(ctx(), 0), ConfigError);
}

}  // namespace
}  // namespace cxpred
