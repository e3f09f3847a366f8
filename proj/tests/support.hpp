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

// Helpers shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cxpred/datamodel.hpp"
#include "cxpred/featurizer.hpp"
#include "cxpred/rng.hpp"

namespace cxpred::testing {

// Consistent transaction with every KPI present. `bytes_down` and
// `retrans_down` are the knobs most tests need; the rest are derived.
inline Transaction make_txn(const std::string& user, TimePoint ts, const std::string& app = "http",
                            const std::string& cell = "cell_a", const std::string& device = "phone_a",
                            double bytes_down = 1000.0, double retrans_down = 1.0) {
  Transaction t;
  t.user_id = user;
  t.timestamp = ts;
  t.field(CatField::kProtocol) = "tcp";
  t.field(CatField::kApplication) = app;
  t.field(CatField::kApn) = "internet";
  t.field(CatField::kSgsn) = "sgsn_01";
  t.field(CatField::kGgsn) = "ggsn_01";
  t.field(CatField::kCell) = cell;
  t.field(CatField::kLocationArea) = "la_" + cell;
  t.field(CatField::kDeviceManufacturer) = "maker";
  t.field(CatField::kDeviceModel) = device;
  t.field(CatField::kQos) = "silver";
  t.field(CatField::kRat) = "utran";
  t.field(CatField::kRuleType) = "web";
  for (int k = 1; k <= static_cast<int>(kNumKpis); ++k) t.kpis.set(k, static_cast<double>(k));
  t.kpis.set(kpi::kBytesUp, 100.0);
  t.kpis.set(kpi::kBytesDown, bytes_down);
  t.kpis.set(kpi::kBytesTotal, 100.0 + bytes_down);
  t.kpis.set(kpi::kPacketsUp, 10.0);
  t.kpis.set(kpi::kPacketsDown, 40.0);
  t.kpis.set(kpi::kPacketsTotal, 50.0);
  t.kpis.set(kpi::kRetransUp, 0.0);
  t.kpis.set(kpi::kRetransDown, retrans_down);
  t.kpis.set(kpi::kRetransTotal, retrans_down);
  return t;
}

inline CareCallRecord make_call(const std::string& user, TimePoint ts) {
  return CareCallRecord{user, ts, 120.0, "agent_01", "technical"};
}

// Random transaction over small catalogs; KPI values are random but
// respect the total identities. Roughly `absent_rate` of the non-total KPIs are absent.
inline Transaction random_txn(Rng& rng, const std::string& user, TimePoint ts, double absent_rate = 0.05) {
  static const char* kApps[] = {"http", "youtube", "facebook", "maps", "mail"};
  static const char* kCells[] = {"c1", "c2", "c3", "c4"};
  static const char* kDevices[] = {"d1", "d2", "d3"};
  Transaction t = make_txn(user, ts, kApps[rng.uniform_index(5)], kCells[rng.uniform_index(4)],
                           kDevices[rng.uniform_index(3)]);
  for (int k = 1; k <= static_cast<int>(kNumKpis); ++k) {
    t.kpis.set(k, static_cast<double>(rng.uniform_index(5000)) + (rng.bernoulli(0.3) ? rng.uniform01() : 0.0));
  }
  auto pair_total = [&](int a, int b, int total) {
    t.kpis.set(total, *t.kpis.get(a) + *t.kpis.get(b));
  };
  pair_total(kpi::kBytesUp, kpi::kBytesDown, kpi::kBytesTotal);
  pair_total(kpi::kPacketsUp, kpi::kPacketsDown, kpi::kPacketsTotal);
  pair_total(kpi::kRetransUp, kpi::kRetransDown, kpi::kRetransTotal);
  for (int k = 10; k <= static_cast<int>(kNumKpis); ++k) {
    if (rng.bernoulli(absent_rate)) t.kpis.clear(k);
  }
  return t;
}

// Random vector shaped like `schema`: one hot bit (or none) per binary block,
// log-uniform reals on [0, 1e7).
inline std::vector<double> random_vector(Rng& rng, const FeatureSchema& schema) {
  std::vector<double> x(schema.dimension(), 0.0);
  for (const auto& b : schema.blocks()) {
    if (b.kind == DimensionKind::kBinary) {
      const auto hot = rng.uniform_index(b.width + 1);
      if (hot < b.width) x[b.offset + hot] = 1.0;
    } else {
      for (std::size_t i = 0; i < b.width; ++i) {
        x[b.offset + i] = rng.bernoulli(0.1) ? 0.0 : std::exp(rng.uniform01() * std::log(1e7)) - 1.0;
      }
    }
  }
  return x;
}

template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

}  // namespace cxpred::testing
