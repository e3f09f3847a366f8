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

#include <numeric>

#include "cxpred/errors.hpp"
#include "cxpred/featurizer.hpp"
#include "support.hpp"

namespace cxpred {
namespace {

using testing::make_txn;

std::vector<std::string> names(const std::string& prefix, std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}

TEST(Vocabulary, HotPositions) {
  Vocabulary v("cell", {"a", "b"}, true);
  EXPECT_EQ(v.width(), 3u);
  EXPECT_EQ(v.hot_position("a"), 0u);
  EXPECT_EQ(v.hot_position("b"), 1u);
  EXPECT_EQ(v.hot_position("zzz"), 2u);
  Vocabulary full("application", {"a", "b"}, false);
  EXPECT_EQ(full.width(), 2u);
  EXPECT_FALSE(full.hot_position("zzz"));
}

TEST(BuildVocabularies, FullVocabularyKeepsEveryApplication) {
  std::vector<Transaction> txns;
  for (int i = 0; i < 178; ++i) {
    for (int k = 0; k <= i % 3; ++k) txns.push_back(make_txn("u", make_time(2014, 8, 8, 0), "app" + std::to_string(i)));
  }
  VocabularySpec spec{{"application", std::nullopt}};
  auto v = build_vocabularies(txns, all_rows(txns.size()), spec, {});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].categories().size(), 178u);
  EXPECT_FALSE(v[0].has_other_bit());
}

TEST(BuildVocabularies, TopKTieBreakIsLexicographic) {
  std::vector<Transaction> txns;
  auto add = [&](const std::string& cell, int n) {
    for (int i = 0; i < n; ++i) txns.push_back(make_txn("u", make_time(2014, 8, 8, 0), "http", cell));
  };
  add("C", 1);
  add("B", 5);
  add("A", 5);
  auto v = build_vocabularies(txns, all_rows(txns.size()), {{"cell", 2}}, {});
  EXPECT_EQ(v[0].categories(), (std::vector<std::string>{"A", "B"}));
  EXPECT_TRUE(v[0].has_other_bit());
}

TEST(BuildVocabularies, UsesOnlyListedRows) {
  std::vector<Transaction> txns = {make_txn("u", make_time(2014, 8, 8, 0), "train_app"),
                                   make_txn("u", make_time(2014, 8, 9, 0), "test_app")};
  std::vector<std::size_t> rows = {0};
  auto v = build_vocabularies(txns, rows, {{"application", std::nullopt}}, {});
  EXPECT_EQ(v[0].categories(), (std::vector<std::string>{"train_app"}));
}

TEST(BuildVocabularies, Errors) {
  std::vector<Transaction> txns = {make_txn("u", make_time(2014, 8, 8, 0))};
  EXPECT_THROW(build_vocabularies(txns, {}, default_vocabulary_spec(), {}), DataError);
  EXPECT_THROW(build_vocabularies(txns, all_rows(1), {{"colour", std::nullopt}}, {}), ConfigError);
  EXPECT_THROW(build_vocabularies(txns, all_rows(1), {{"cell", 0}}, {}), ConfigError);
}

TEST(DefaultSpec, TruncatesOnlyCellAndDevice) {
  auto spec = default_vocabulary_spec();
  EXPECT_EQ(spec.size(), 13u);
  for (const auto& [name, k] : spec) {
    if (name == "cell" || name == "device_model") {
      EXPECT_EQ(k, 16u);
    } else {
      EXPECT_FALSE(k) << name;
    }
  }
}

TEST(Encode, FacebookListedFifthIsHotAtFifthPosition) {
  Vocabulary apps("application", {"http", "blackberry_services", "google", "youtube", "facebook", "twitter"}, false);
  TransactionEncoder enc({apps}, {});
  auto x = enc.encode(make_txn("u", make_time(2014, 8, 8, 0), "facebook")).values;
  const auto& block = enc.schema().at("application");
  for (std::size_t i = 0; i < block.width; ++i) EXPECT_EQ(x[block.offset + i], i == 4 ? 1.0 : 0.0) << i;
}

TEST(Encode, CellOutsideTopSixteenActivatesOtherBit) {
  Vocabulary cells("cell", names("c", 16), true);
  TransactionEncoder enc({cells}, {});
  const auto& block = enc.schema().at("cell");
  EXPECT_EQ(block.width, 17u);
  auto x = enc.encode(make_txn("u", make_time(2014, 8, 8, 0), "http", "rare_cell")).values;
  for (std::size_t i = 0; i < 17; ++i) EXPECT_EQ(x[block.offset + i], i == 16 ? 1.0 : 0.0);
  auto y = enc.encode(make_txn("u", make_time(2014, 8, 8, 0), "http", "c3")).values;
  EXPECT_EQ(y[block.offset + 3], 1.0);
  EXPECT_EQ(y[block.offset + 16], 0.0);
}

TEST(Encode, UnseenCategoryInFullBlockIsAllZeros) {
  TransactionEncoder enc({Vocabulary("application", {"http", "dns"}, false)}, {});
  auto x = enc.encode(make_txn("u", make_time(2014, 8, 8, 0), "brand_new_app")).values;
  EXPECT_EQ(x[0] + x[1], 0.0);
}

TEST(Encode, AbsentKpisImputeZeroAndAreCounted) {
  TransactionEncoder enc({}, {});
  auto t = make_txn("u", make_time(2014, 8, 8, 0));
  for (int k = 1; k <= 55; ++k) t.kpis.clear(k);
  std::vector<double> out(enc.schema().dimension(), 7.0);
  EXPECT_EQ(enc.encode_into(t, out), 55u);
  EXPECT_TRUE(std::all_of(out.begin(), out.end(), [](double v) { return v == 0.0; }));
}

TEST(Encode, KpiBlockCopiesRawValues) {
  TransactionEncoder enc({}, {});
  auto t = make_txn("u", make_time(2014, 8, 8, 0), "http", "c", "d", 12345.5, 7);
  auto x = enc.encode(t).values;
  ASSERT_EQ(x.size(), 55u);
  for (int k = 1; k <= 55; ++k) EXPECT_EQ(x[static_cast<std::size_t>(k - 1)], *t.kpis.get(k));
}

TEST(SchemaDimension, FullCatalogIsFourHundredEighty) {
  // 178 applications, top-16 cells and devices with other-bits, 55 KPIs; the
  // remaining categorical fields account for 480 - 178 - 17 - 17 - 55 = 213 dimensions.
  std::vector<Vocabulary> v = {
      Vocabulary("protocol", names("p", 2), false),
      Vocabulary("application", names("a", 178), false),
      Vocabulary("application_type", names("t", 12), false),
      Vocabulary("apn", names("apn", 20), false),
      Vocabulary("sgsn", names("s", 10), false),
      Vocabulary("ggsn", names("g", 4), false),
      Vocabulary("cell", names("c", 16), true),
      Vocabulary("location_area", names("la", 120), false),
      Vocabulary("device_manufacturer", names("m", 35), false),
      Vocabulary("device_model", names("d", 16), true),
      Vocabulary("qos", names("q", 3), false),
      Vocabulary("rat", names("r", 2), false),
      Vocabulary("rule_type", names("rt", 5), false),
  };
  TransactionEncoder enc(v, {});
  EXPECT_EQ(schema_dimension(enc.schema()), 480u);
  EXPECT_EQ(enc.schema().at("application_type").offset, 2u + 178u);
  EXPECT_EQ(enc.schema().blocks().back().name, "kpis");
}

TEST(SchemaDimension, SmallCases) {
  TransactionEncoder enc({Vocabulary("protocol", {"tcp", "udp", "sctp"}, false)}, {});
  EXPECT_EQ(schema_dimension(enc.schema()), 58u);
  EXPECT_EQ(schema_dimension(FeatureSchema{}), 0u);
  auto kinds = enc.schema().kinds();
  EXPECT_EQ(std::count(kinds.begin(), kinds.end(), DimensionKind::kBinary), 3);
}

TEST(Schema, BlocksAreContiguousAndNamed) {
  std::vector<Transaction> txns;
  Rng rng(3);
  for (int i = 0; i < 100; ++i) txns.push_back(testing::random_txn(rng, "u", make_time(2014, 8, 8, 0)));
  AppTypeMap types{{{"http", "web"}, {"youtube", "video"}}, "other"};
  TransactionEncoder enc(build_vocabularies(txns, all_rows(txns.size()), default_vocabulary_spec(), types), types);
  std::size_t next = 0;
  for (const auto& b : enc.schema().blocks()) {
    EXPECT_EQ(b.offset, next);
    next += b.width;
    EXPECT_EQ(b.dimension_names.size(), b.width);
  }
  EXPECT_EQ(next, enc.schema().dimension());
  EXPECT_EQ(enc.schema().dimension_name(enc.schema().at("application").offset).rfind("application=", 0), 0u);
  EXPECT_THROW(enc.schema().at("nope"), Error);
  EXPECT_EQ(enc.schema().find("nope"), nullptr);
}

TEST(Encode, OneHotSoundnessOnRandomData) {
  Rng rng(17);
  std::vector<Transaction> txns;
  for (int i = 0; i < 400; ++i) txns.push_back(testing::random_txn(rng, "u" + std::to_string(i % 13), make_time(2014, 8, 8, i % 24)));
  std::vector<std::size_t> train(200), test(200);
  std::iota(train.begin(), train.end(), 0);
  std::iota(test.begin(), test.end(), 200);
  VocabularySpec spec = default_vocabulary_spec();
  spec["cell"] = 2;
  spec["device_model"] = 1;
  AppTypeMap types{{{"http", "web"}}, "other"};
  TransactionEncoder enc(build_vocabularies(txns, train, spec, types), types);
  for (const auto& rows : {train, test}) {
    const bool training = rows.front() == 0;
    for (auto r : rows) {
      auto x = enc.encode(txns[r]).values;
      for (const auto& b : enc.schema().blocks()) {
        if (b.kind != DimensionKind::kBinary) continue;
        double sum = 0;
        for (std::size_t i = 0; i < b.width; ++i) {
          EXPECT_TRUE(x[b.offset + i] == 0.0 || x[b.offset + i] == 1.0);
          sum += x[b.offset + i];
        }
        EXPECT_LE(sum, 1.0);
        if (training || b.vocabulary->has_other_bit()) EXPECT_EQ(sum, 1.0) << b.name;
      }
    }
  }
}

TEST(Encode, IndependentOfOtherTransactions) {
  Rng rng(23);
  std::vector<Transaction> txns;
  for (int i = 0; i < 50; ++i) txns.push_back(testing::random_txn(rng, "u", make_time(2014, 8, 8, 0)));
  TransactionEncoder enc(build_vocabularies(txns, all_rows(50), default_vocabulary_spec(), {}), {});
  auto m = enc.encode_rows(txns, all_rows(50));
  std::vector<std::size_t> reversed(50);
  std::iota(reversed.rbegin(), reversed.rend(), 0);
  auto mr = enc.encode_rows(txns, reversed);
  for (std::size_t r = 0; r < 50; ++r) {
    auto single = enc.encode(txns[r]);
    EXPECT_EQ(single.schema_id, enc.schema().fingerprint());
    for (std::size_t c = 0; c < m.cols(); ++c) {
      EXPECT_EQ(m.at(r, c), single.values[c]);
      EXPECT_EQ(mr.at(49 - r, c), single.values[c]);
    }
  }
}

TEST(AppTypeMap, DefaultForUnlisted) {
  AppTypeMap m{{{"youtube", "video"}}, "misc"};
  EXPECT_EQ(m.type_of("youtube"), "video");
  EXPECT_EQ(m.type_of("other"), "misc");
}

}  // namespace
}  // namespace cxpred
