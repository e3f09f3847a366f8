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

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "cxpred/errors.hpp"
#include "cxpred/io.hpp"
#include "support.hpp"

namespace cxpred {
namespace {

TEST(FormatDouble, ShortestRoundTrip) {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    double v = rng.lognormal(0.0, 8.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    auto s = io::format_double(v);
    auto back = io::parse_double(s);
    ASSERT_TRUE(back) << s;
    EXPECT_EQ(*back, v) << s;
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(1000.0), "1000");
  EXPECT_EQ(io::format_double(std::nextafter(0.37, 1.0)), "0.37000000000000005");
}

TEST(ParseDouble, RejectsTrailingGarbage) {
  EXPECT_FALSE(io::parse_double("1.5x"));
  EXPECT_FALSE(io::parse_double(""));
  EXPECT_FALSE(io::parse_double(" 1"));
  EXPECT_EQ(io::parse_double("2e3"), 2000.0);
}

TEST(TransactionFile, HeaderHas69Columns) {
  std::vector<std::string_view> f;
  auto h = io::transaction_header();
  io::split_fields(h, ',', f);
  EXPECT_EQ(f.size(), 69u);
  EXPECT_EQ(f[0], "user_id");
  EXPECT_EQ(f[1], "timestamp");
  EXPECT_EQ(f[2], "protocol");
  EXPECT_EQ(f[13], "rule_type");
}

TEST(TransactionFile, RoundTripPreservesAbsence) {
  Rng rng(5);
  std::vector<Transaction> txns;
  for (int i = 0; i < 200; ++i) {
    txns.push_back(testing::random_txn(rng, "u" + std::to_string(i % 9), make_time(2014, 8, 9, i % 24), 0.3));
  }
  std::stringstream ss;
  io::write_transactions(ss, txns);
  auto back = io::read_transactions(ss);
  EXPECT_EQ(back, txns);
}

TEST(TransactionFile, AbsentKpiIsEmptyField) {
  auto t = testing::make_txn("u1", make_time(2014, 8, 8, 1));
  t.kpis.clear(55);
  auto line = io::format_transaction(t);
  EXPECT_EQ(line.back(), ',');
  auto back = io::parse_transaction(line, 2);
  EXPECT_FALSE(back.kpis.present(55));
}

TEST(TransactionFile, MalformedLineReportsLineNumber) {
  std::stringstream ss;
  ss << io::transaction_header() << "\n" << io::format_transaction(testing::make_txn("u1", make_time(2014, 8, 8, 1)))
     << "\nu2,2014-08-08 01:00:00,tcp\n";
  try {
    io::read_transactions(ss);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(TransactionFile, BadNumberAndTimestampAreParseErrors) {
  auto line = io::format_transaction(testing::make_txn("u1", make_time(2014, 8, 8, 1)));
  auto bad_ts = line;
  bad_ts.replace(bad_ts.find("2014-08-08"), 10, "2014-18-08");
  EXPECT_THROW(io::parse_transaction(bad_ts, 7), ParseError);
  auto bad_num = line + "x";
  EXPECT_THROW(io::parse_transaction(bad_num, 7), ParseError);
}

TEST(TransactionFile, WrongHeaderIsLineOne) {
  std::stringstream ss("user,time\n");
  try {
    io::read_transactions(ss);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(CareCallFile, RoundTrip) {
  std::vector<CareCallRecord> calls = {testing::make_call("u1", make_time(2014, 8, 8, 14, 30)),
                                       {"u2", make_time(2014, 8, 9, 9, 5), 61.5, "agent_7", "billing"}};
  std::stringstream ss;
  io::write_care_calls(ss, calls);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), io::care_call_header());
  EXPECT_EQ(io::read_care_calls(ss), calls);
}

TEST(CareCallFile, MalformedDuration) {
  EXPECT_THROW(io::parse_care_call("u1,2014-08-08 10:00:00,abc,a,b", 4), ParseError);
  EXPECT_THROW(io::parse_care_call("u1,2014-08-08 10:00:00,1,a", 4), ParseError);
}

TEST(DatasetFiles, SaveLoad) {
  Dataset ds;
  ds.transactions.push_back(testing::make_txn("u1", make_time(2014, 8, 8, 1)));
  ds.care_calls.push_back(testing::make_call("u1", make_time(2014, 8, 8, 3, 10)));
  auto dir = std::filesystem::temp_directory_path() / "cxpred_io_test";
  std::filesystem::create_directories(dir);
  io::save_dataset(ds, dir / "t.csv", dir / "c.csv");
  auto back = io::load_dataset(dir / "t.csv", dir / "c.csv");
  EXPECT_EQ(back.transactions, ds.transactions);
  EXPECT_EQ(back.care_calls, ds.care_calls);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(io::read_file(dir / "missing"), Error);
}

}  // namespace
}  // namespace cxpred
