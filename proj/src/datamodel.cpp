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

#include "cxpred/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "cxpred/errors.hpp"

namespace cxpred {
namespace {

constexpr std::array<std::string_view, kNumCategoricalFields> kCatFieldNames = {
    "protocol", "application", "apn",        "sgsn", "ggsn", "cell",
    "location_area", "device_manufacturer", "device_model", "qos", "rat", "rule_type",
};

// Range-bucketed distributions (29-32, 37, 50-55) are carried as one scalar total.
constexpr std::array<std::string_view, kNumKpis> kKpiNames = {
    "bytes_up",
    "bytes_down",
    "bytes_total",
    "packets_up",
    "packets_down",
    "packets_total",
    "retransmissions_up",
    "retransmissions_down",
    "retransmissions_total",
    "server_setup_time",
    "server_setup_count",
    "client_setup_time",
    "client_setup_count",
    "time_to_first_byte",
    "time_to_first_byte_count",
    "download_time",
    "download_time_count",
    "upload_time",
    "upload_time_count",
    "new_tcp_connections",
    "throughput_bytes_up",
    "throughput_upload_time",
    "throughput_bytes_down",
    "throughput_download_time",
    "max_upload_tcp_throughput",
    "min_upload_tcp_throughput",
    "max_download_tcp_throughput",
    "min_download_tcp_throughput",
    "app_upload_bytes_ranged",
    "app_upload_time_ranged",
    "app_download_bytes_ranged",
    "app_download_time_ranged",
    "total_rtt",
    "rtt_count",
    "total_rtt_smoothed",
    "rtt_count_smoothed",
    "tcp_rtt_packets_ranged",
    "max_upload_app_throughput",
    "app_throughput_bytes_up",
    "app_throughput_active_time_up",
    "max_upload_user_throughput",
    "user_throughput_bytes_up",
    "user_throughput_active_time_up",
    "max_download_app_throughput",
    "app_throughput_bytes_down",
    "app_throughput_active_time_down",
    "max_download_user_throughput",
    "user_throughput_bytes_down",
    "user_throughput_active_time_down",
    "video_start_count_ranged",
    "video_gap_play_time_ranged",
    "video_bitrate_play_time_ranged",
    "video_bytes_ranged",
    "first_object_count_ranged",
    "page_load_count_ranged",
};

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::string_view cat_field_name(CatField field) { return kCatFieldNames[index_of(field)]; }

std::optional<CatField> cat_field_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kCatFieldNames.size(); ++i) {
    if (kCatFieldNames[i] == name) return static_cast<CatField>(i);
  }
  return std::nullopt;
}

std::string_view kpi_name(int one_based) { return kKpiNames.at(static_cast<std::size_t>(one_based - 1)); }

bool is_retransmission_kpi(int one_based) {
  return one_based == kpi::kRetransUp || one_based == kpi::kRetransDown || one_based == kpi::kRetransTotal;
}

Day day_of(TimePoint t) { return std::chrono::floor<std::chrono::days>(t); }

int hour_of(TimePoint t) {
  const auto since_midnight = t - day_of(t);
  return static_cast<int>(std::chrono::duration_cast<std::chrono::hours>(since_midnight).count());
}

TimePoint make_time(int year, unsigned month, unsigned day, int hour, int minute, int second) {
  const Day d{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}};
  return TimePoint{d} + std::chrono::hours{hour} + std::chrono::minutes{minute} + std::chrono::seconds{second};
}

std::optional<Day> parse_day(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Day{ymd};
}

std::optional<TimePoint> parse_timestamp(std::string_view text) {
  if (text.size() != 16 && text.size() != 19) return std::nullopt;
  if (text[10] != ' ' && text[10] != 'T') return std::nullopt;
  const auto day = parse_day(text.substr(0, 10));
  if (!day) return std::nullopt;
  int h = 0, mi = 0, s = 0;
  if (text[13] != ':' || !parse_int(text.substr(11, 2), h) || !parse_int(text.substr(14, 2), mi)) return std::nullopt;
  if (text.size() == 19 && (text[16] != ':' || !parse_int(text.substr(17, 2), s))) return std::nullopt;
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) return std::nullopt;
  return TimePoint{*day} + std::chrono::hours{h} + std::chrono::minutes{mi} + std::chrono::seconds{s};
}

std::string format_day(Day d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(TimePoint t) {
  const Day d = day_of(t);
  const auto secs = (t - d).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, " %02lld:%02lld:%02lld", static_cast<long long>(secs / 3600),
                static_cast<long long>(secs / 60 % 60), static_cast<long long>(secs % 60));
  return format_day(d) + buf;
}

std::size_t KpiVector::slot(int one_based) {
  if (one_based < 1 || one_based > static_cast<int>(kNumKpis)) {
    throw std::out_of_range("KPI index out of range: " + std::to_string(one_based));
  }
  return static_cast<std::size_t>(one_based - 1);
}

std::optional<double> KpiVector::get(int one_based) const {
  const auto i = slot(one_based);
  if (!present_.test(i)) return std::nullopt;
  return values_[i];
}

double KpiVector::value_or_zero(int one_based) const {
  const auto i = slot(one_based);
  return present_.test(i) ? values_[i] : 0.0;
}

void KpiVector::set(int one_based, double value) {
  const auto i = slot(one_based);
  values_[i] = value;
  present_.set(i);
}

void KpiVector::clear(int one_based) {
  const auto i = slot(one_based);
  values_[i] = 0.0;
  present_.reset(i);
}

bool KpiVector::operator==(const KpiVector& other) const {
  if (present_ != other.present_) return false;
  for (std::size_t i = 0; i < kNumKpis; ++i) {
    if (present_.test(i) && values_[i] != other.values_[i]) return false;
  }
  return true;
}

std::optional<std::pair<Day, Day>> Dataset::span() const {
  if (transactions.empty()) return std::nullopt;
  auto [lo, hi] = std::minmax_element(transactions.begin(), transactions.end(),
                                      [](const Transaction& a, const Transaction& b) { return a.timestamp < b.timestamp; });
  return std::make_pair(lo->day(), hi->day());
}

void normalize(Dataset& dataset) {
  std::stable_sort(dataset.transactions.begin(), dataset.transactions.end(),
                   [](const Transaction& a, const Transaction& b) {
                     if (a.user_id != b.user_id) return a.user_id < b.user_id;
                     return a.timestamp < b.timestamp;
                   });
  std::stable_sort(dataset.care_calls.begin(), dataset.care_calls.end(),
                   [](const CareCallRecord& a, const CareCallRecord& b) {
                     if (a.user_id != b.user_id) return a.user_id < b.user_id;
                     return a.timestamp < b.timestamp;
                   });
}

std::vector<std::pair<Day, std::vector<std::size_t>>> partition_by_day(const std::vector<Transaction>& transactions) {
  std::map<Day, std::vector<std::size_t>> by_day;
  for (std::size_t i = 0; i < transactions.size(); ++i) by_day[transactions[i].day()].push_back(i);
  return {by_day.begin(), by_day.end()};
}

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(), [](const ValidationIssue& i) {
    return i.severity == ValidationIssue::Severity::kError;
  }));
}

std::size_t ValidationReport::warning_count() const { return issues.size() - error_count(); }

ValidationReport validate_dataset(const Dataset& dataset) {
  ValidationReport report;
  const auto span = dataset.span();
  report.span_defined = span.has_value();

  auto add = [&report](ValidationIssue::Severity sev, bool in_calls, std::size_t row, std::string kind,
                       std::string message) {
    report.issues.push_back({sev, in_calls, row, std::move(kind), std::move(message)});
  };
  constexpr auto kErr = ValidationIssue::Severity::kError;
  constexpr auto kWarn = ValidationIssue::Severity::kWarning;

  std::set<std::string_view> users;
  for (std::size_t row = 0; row < dataset.transactions.size(); ++row) {
    const Transaction& t = dataset.transactions[row];
    users.insert(t.user_id);
    const std::string where = "transaction row " + std::to_string(row);
    if (t.user_id.empty()) add(kErr, false, row, "empty user id", where + ": empty user_id");
    if ((t.timestamp - day_of(t.timestamp)) % std::chrono::hours{1} != std::chrono::seconds{0}) {
      add(kErr, false, row, "timestamp not hour aligned", where + ": " + format_timestamp(t.timestamp));
    }
    report.absent_kpi_values += t.kpis.absent_count();
    for (int k = 1; k <= static_cast<int>(kNumKpis); ++k) {
      const auto v = t.kpis.get(k);
      if (v && (!std::isfinite(*v) || *v < 0.0)) {
        add(kErr, false, row, "invalid kpi value",
            where + ": kpi " + std::to_string(k) + " (" + std::string(kpi_name(k)) + ") is negative or non-finite");
      }
    }
    struct TotalRule {
      int a, b, total;
      const char* kind;
    };
    constexpr TotalRule kRules[] = {
        {kpi::kBytesUp, kpi::kBytesDown, kpi::kBytesTotal, "byte-total inconsistency"},
        {kpi::kPacketsUp, kpi::kPacketsDown, kpi::kPacketsTotal, "packet-total inconsistency"},
        {kpi::kRetransUp, kpi::kRetransDown, kpi::kRetransTotal, "retransmission-total inconsistency"},
    };
    for (const auto& rule : kRules) {
      const auto a = t.kpis.get(rule.a), b = t.kpis.get(rule.b), total = t.kpis.get(rule.total);
      if (a && b && total && *a + *b != *total) {
        add(kErr, false, row, rule.kind,
            where + ": kpi " + std::to_string(rule.total) + " != kpi " + std::to_string(rule.a) + " + kpi " +
                std::to_string(rule.b));
      }
    }
  }

  for (std::size_t row = 0; row < dataset.care_calls.size(); ++row) {
    const CareCallRecord& c = dataset.care_calls[row];
    const std::string where = "care-call row " + std::to_string(row);
    if (c.user_id.empty()) add(kErr, true, row, "empty user id", where + ": empty user_id");
    if (!std::isfinite(c.duration_s) || c.duration_s < 0.0) {
      add(kErr, true, row, "negative duration", where + ": duration must be >= 0");
    }
    if (span && (c.day() < span->first || c.day() > span->second)) {
      add(kErr, true, row, "call outside span", where + ": " + format_timestamp(c.timestamp) + " outside dataset span");
    }
    if (!users.contains(c.user_id)) {
      ++report.orphan_calls;
      add(kWarn, true, row, "orphan call", where + ": caller " + c.user_id + " has no transactions");
    }
  }
  return report;
}

bool is_well_formed(const Transaction& txn) {
  if (txn.user_id.empty()) return false;
  for (int k = 1; k <= static_cast<int>(kNumKpis); ++k) {
    const auto v = txn.kpis.get(k);
    if (v && (!std::isfinite(*v) || *v < 0.0)) return false;
  }
  const std::array<std::array<int, 3>, 3> totals = {{{kpi::kBytesUp, kpi::kBytesDown, kpi::kBytesTotal},
                                                     {kpi::kPacketsUp, kpi::kPacketsDown, kpi::kPacketsTotal},
                                                     {kpi::kRetransUp, kpi::kRetransDown, kpi::kRetransTotal}}};
  for (const auto& [a, b, total] : totals) {
    const auto va = txn.kpis.get(a), vb = txn.kpis.get(b), vt = txn.kpis.get(total);
    if (va && vb && vt && *va + *vb != *vt) return false;
  }
  return true;
}

}  // namespace cxpred
