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
#include <numeric>

#include "cxpred/rng.hpp"

namespace cxpred {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformIndexInRangeAndRoughlyFlat) {
  Rng r(1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto k = r.uniform_index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, Uniform01InHalfOpenInterval) {
  Rng r(2);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Rng, DistributionMoments) {
  Rng r(3);
  const int n = 200000;
  double s_norm = 0, s_norm2 = 0, s_exp = 0, s_poi = 0, s_poi_big = 0;
  for (int i = 0; i < n; ++i) {
    double z = r.normal();
    s_norm += z;
    s_norm2 += z * z;
    s_exp += r.exponential(2.0);
    s_poi += static_cast<double>(r.poisson(0.69));
    s_poi_big += static_cast<double>(r.poisson(40.0));
  }
  EXPECT_NEAR(s_norm / n, 0.0, 0.01);
  EXPECT_NEAR(s_norm2 / n, 1.0, 0.02);
  EXPECT_NEAR(s_exp / n, 0.5, 0.01);
  EXPECT_NEAR(s_poi / n, 0.69, 0.01);
  EXPECT_NEAR(s_poi_big / n, 40.0, 0.1);
  EXPECT_EQ(r.poisson(0.0), 0u);
}

TEST(DeriveSeed, DistinctNamesAndIndices) {
  EXPECT_EQ(derive_seed(7, "bag", 3), derive_seed(7, "bag", 3));
  EXPECT_NE(derive_seed(7, "bag", 3), derive_seed(7, "bag", 4));
  EXPECT_NE(derive_seed(7, "bag", 3), derive_seed(8, "bag", 3));
  EXPECT_NE(derive_seed(7, "bag", 3), derive_seed(7, "bags", 3));
}

TEST(DiscreteSampler, FollowsWeights) {
  std::vector<double> w = {1, 0, 3};
  DiscreteSampler s(w);
  Rng r(4);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 40000; ++i) ++counts[s.sample(r)];
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[0], 10000, 400);
  EXPECT_NEAR(counts[2], 30000, 400);
}

TEST(ZipfWeights, PowerLaw) {
  auto w = zipf_weights(4, 1.2);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], std::pow(2.0, -1.2));
  EXPECT_TRUE(std::is_sorted(w.rbegin(), w.rend()));
}

}  // namespace
}  // namespace cxpred
