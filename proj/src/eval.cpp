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

#include "cxpred/eval.hpp"

#include <cstdio>

#include "cxpred/errors.hpp"
#include "cxpred/rng.hpp"

namespace cxpred {
namespace {

void count(ConfusionCounts& c, Label pred, Label truth) {
  const bool p = pred == Label::kCall;
  const bool t = truth == Label::kCall;
  if (p && t) {
    ++c.tp;
  } else if (p) {
    ++c.fp;
  } else if (t) {
    ++c.fn;
  } else {
    ++c.tn;
  }
}

std::string pct(std::optional<double> v) {
  if (!v) return "incomparable";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f%%", *v * 100.0);
  return buf;
}

}  // namespace

std::string granularity_name(Granularity g) { return g == Granularity::kTransaction ? "transaction" : "user-day"; }

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size()) {
    throw DataError("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                    std::to_string(truths.size()) + " truths");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < predictions.size(); ++i) count(c, predictions[i], truths[i]);
  return c;
}

ConfusionCounts confusion(const std::map<UserDayKey, Label>& predictions, const std::map<UserDayKey, Label>& truths) {
  if (predictions.size() != truths.size()) throw DataError("confusion: prediction and truth keys differ");
  ConfusionCounts c;
  auto p = predictions.begin();
  for (auto t = truths.begin(); t != truths.end(); ++t, ++p) {
    if (p->first != t->first) {
      throw DataError("confusion: key mismatch at user " + t->first.user_id + " day " + format_day(t->first.day));
    }
    count(c, p->second, t->second);
  }
  return c;
}

MetricsReport metrics(const ConfusionCounts& counts, Granularity granularity) {
  MetricsReport r;
  r.counts = counts;
  r.granularity = granularity;
  const auto tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp == 0) {
    r.precision_undefined = true;
  } else {
    r.precision = tp / static_cast<double>(counts.tp + counts.fp);
  }
  if (counts.tp + counts.fn == 0) {
    r.recall_undefined = true;
  } else {
    r.recall = tp / static_cast<double>(counts.tp + counts.fn);
  }
  if (r.precision_undefined || r.recall_undefined || r.precision + r.recall == 0.0) {
    r.f1_undefined = true;
  } else {
    // 2pr / (p + r) rewritten over the counts: one rounding instead of several.
    r.f1 = 2.0 * tp / static_cast<double>(2 * counts.tp + counts.fp + counts.fn);
  }
  return r;
}

std::vector<Label> biased_coin_baseline(std::size_t n, double p_positive, std::uint64_t seed) {
  if (!(p_positive >= 0.0 && p_positive <= 1.0)) throw ConfigError("baseline probability must be in [0, 1]");
  Rng rng(seed);
  std::vector<Label> out(n);
  for (auto& l : out) l = rng.bernoulli(p_positive) ? Label::kCall : Label::kNoCall;
  return out;
}

double baseline_rate_from_previous_day(std::span<const Label> labels, std::span<const Day> days, Day test_day) {
  if (labels.size() != days.size()) throw DataError("baseline rate: labels and days differ in length");
  const Day previous = test_day - std::chrono::days{1};
  std::size_t pos = 0, total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (days[i] != previous) continue;
    ++total;
    pos += labels[i] == Label::kCall ? 1 : 0;
  }
  if (total == 0) throw DataError("baseline rate: no samples on " + format_day(previous));
  return static_cast<double>(pos) / static_cast<double>(total);
}

std::optional<double> relative_improvement(double a, double b) {
  if (b == 0.0) return std::nullopt;
  return (a - b) / b;
}

std::vector<ImprovementRow> compare(const MetricsReport& a, const MetricsReport& b) {
  if (a.granularity != b.granularity) throw DataError("compare: reports have different granularities");
  auto row = [](std::string name, double va, bool ua, double vb, bool ub) {
    ImprovementRow r{std::move(name), va, vb, std::nullopt};
    if (!ua && !ub) r.improvement = relative_improvement(va, vb);
    return r;
  };
  return {
      row("precision", a.precision, a.precision_undefined, b.precision, b.precision_undefined),
      row("recall", a.recall, a.recall_undefined, b.recall, b.recall_undefined),
      row("f1", a.f1, a.f1_undefined, b.f1, b.f1_undefined),
  };
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["granularity"] = granularity_name(r.granularity);
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["fn"] = r.counts.fn;
  j["tn"] = r.counts.tn;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["undefined"] = {{"precision", r.precision_undefined}, {"recall", r.recall_undefined}, {"f1", r.f1_undefined}};
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  try {
    ConfusionCounts c{j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(),
                      j.at("fn").get<std::uint64_t>(), j.at("tn").get<std::uint64_t>()};
    const std::string g = j.at("granularity").get<std::string>();
    if (g != "transaction" && g != "user-day") throw DataError("unknown granularity '" + g + "'");
    return metrics(c, g == "transaction" ? Granularity::kTransaction : Granularity::kUserDay);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics report: ") + e.what());
  }
}

std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string out = "model            granularity   tp      fp      fn      tn        precision  recall   f1\n";
  for (const auto& [name, r] : rows) {
    char buf[256];
    auto cell = [](double v, bool undefined) {
      char b[16];
      std::snprintf(b, sizeof b, undefined ? "%.4f*" : "%.4f ", v);
      return std::string(b);
    };
    std::snprintf(buf, sizeof buf, "%-16s %-13s %-7llu %-7llu %-7llu %-9llu %-10s %-8s %s\n", name.c_str(),
                  granularity_name(r.granularity).c_str(), static_cast<unsigned long long>(r.counts.tp),
                  static_cast<unsigned long long>(r.counts.fp), static_cast<unsigned long long>(r.counts.fn),
                  static_cast<unsigned long long>(r.counts.tn), cell(r.precision, r.precision_undefined).c_str(),
                  cell(r.recall, r.recall_undefined).c_str(), cell(r.f1, r.f1_undefined).c_str());
    out += buf;
  }
  out += "(* = undefined, reported as 0)\n";
  return out;
}

std::string format_improvement_table(const std::vector<ImprovementRow>& rows) {
  std::string out = "metric     a         b         improvement\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-10s %-9.4f %-9.4f %s\n", r.metric.c_str(), r.a, r.b, pct(r.improvement).c_str());
    out += buf;
  }
  return out;
}

}  // namespace cxpred
