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

#pragma once

#include <array>
#include <bitset>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cxpred {

inline constexpr std::size_t kNumKpis = 55;
inline constexpr std::size_t kNumCategoricalFields = 12;

// Categorical context fields of a data-feed record, in file column order.
enum class CatField : std::uint8_t {
  kProtocol,
  kApplication,
  kApn,
  kSgsn,
  kGgsn,
  kCell,
  kLocationArea,
  kDeviceManufacturer,
  kDeviceModel,
  kQos,
  kRat,
  kRuleType,
};

std::string_view cat_field_name(CatField field);
std::optional<CatField> cat_field_from_name(std::string_view name);
inline constexpr std::size_t index_of(CatField f) { return static_cast<std::size_t>(f); }

// 1-based KPI column numbers for the measurements referenced by name in code.
namespace kpi {
inline constexpr int kBytesUp = 1;
inline constexpr int kBytesDown = 2;
inline constexpr int kBytesTotal = 3;
inline constexpr int kPacketsUp = 4;
inline constexpr int kPacketsDown = 5;
inline constexpr int kPacketsTotal = 6;
inline constexpr int kRetransUp = 7;
inline constexpr int kRetransDown = 8;
inline constexpr int kRetransTotal = 9;
inline constexpr int kServerSetupTime = 10;
inline constexpr int kServerSetupCount = 11;
inline constexpr int kClientSetupTime = 12;
inline constexpr int kClientSetupCount = 13;
inline constexpr int kTimeToFirstByte = 14;
inline constexpr int kTimeToFirstByteCount = 15;
inline constexpr int kDownloadTime = 16;
inline constexpr int kDownloadTimeCount = 17;
inline constexpr int kUploadTime = 18;
inline constexpr int kUploadTimeCount = 19;
inline constexpr int kNewTcpConnections = 20;
inline constexpr int kThroughputBytesUp = 21;
inline constexpr int kThroughputUploadTime = 22;
inline constexpr int kThroughputBytesDown = 23;
inline constexpr int kThroughputDownloadTime = 24;
inline constexpr int kTotalRtt = 33;
inline constexpr int kRttCount = 34;
}  // namespace kpi

// Short machine name of KPI `one_based` (1..55), e.g. "retransmissions_total".
std::string_view kpi_name(int one_based);
bool is_retransmission_kpi(int one_based);

// Timestamps are timezone-naive operator-local wall-clock time; the sys_*
// clock types are used only as a calendar arithmetic carrier.
using TimePoint = std::chrono::sys_seconds;
using Day = std::chrono::sys_days;

Day day_of(TimePoint t);
int hour_of(TimePoint t);
TimePoint make_time(int year, unsigned month, unsigned day, int hour, int minute = 0, int second = 0);

// Accepts "YYYY-MM-DD HH:MM[:SS]" or the same with a 'T' separator.
std::optional<TimePoint> parse_timestamp(std::string_view text);
std::string format_timestamp(TimePoint t);
std::optional<Day> parse_day(std::string_view text);
std::string format_day(Day d);

// The 55 network-status measurements of a transaction. Absent values are
// tracked explicitly; value_or_zero() is the imputation used by encoders.
class KpiVector {
 public:
  std::optional<double> get(int one_based) const;
  double value_or_zero(int one_based) const;
  bool present(int one_based) const { return present_.test(slot(one_based)); }
  void set(int one_based, double value);
  void clear(int one_based);
  std::size_t absent_count() const { return kNumKpis - present_.count(); }

  bool operator==(const KpiVector& other) const;

 private:
  static std::size_t slot(int one_based);

  std::array<double, kNumKpis> values_{};
  std::bitset<kNumKpis> present_;
};

// One hourly per-user per-activity data-feed record.
struct Transaction {
  std::string user_id;
  TimePoint timestamp{};
  std::array<std::string, kNumCategoricalFields> categorical;
  KpiVector kpis;

  Day day() const { return day_of(timestamp); }
  const std::string& field(CatField f) const { return categorical[index_of(f)]; }
  std::string& field(CatField f) { return categorical[index_of(f)]; }

  bool operator==(const Transaction& other) const = default;
};

struct CareCallRecord {
  std::string user_id;
  TimePoint timestamp{};
  double duration_s = 0.0;
  std::string agent_id;
  std::string agent_expertise;

  Day day() const { return day_of(timestamp); }

  bool operator==(const CareCallRecord& other) const = default;
};

enum class Label : std::int8_t { kNoCall = -1, kCall = 1 };

struct UserDayKey {
  std::string user_id;
  Day day{};

  auto operator<=>(const UserDayKey&) const = default;
};

inline int to_int(Label l) { return static_cast<int>(l); }

struct Dataset {
  std::vector<Transaction> transactions;
  std::vector<CareCallRecord> care_calls;

  // [first day, last day] over transactions; nullopt when there are none.
  std::optional<std::pair<Day, Day>> span() const;
};

// Sorts transactions by (user_id, timestamp) and calls by (user_id, timestamp).
// Stable, so normalizing twice equals normalizing once.
void normalize(Dataset& dataset);

// Transaction indices grouped by calendar day, in ascending day order.
std::vector<std::pair<Day, std::vector<std::size_t>>> partition_by_day(
    const std::vector<Transaction>& transactions);

struct ValidationIssue {
  enum class Severity { kError, kWarning };
  Severity severity = Severity::kError;
  bool in_calls = false;   // false: transaction file, true: care-call file
  std::size_t row = 0;     // 0-based record index within its collection
  std::string kind;        // stable machine tag, e.g. "byte-total inconsistency"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool span_defined = false;
  std::size_t absent_kpi_values = 0;
  std::size_t orphan_calls = 0;

  std::size_t error_count() const;
  std::size_t warning_count() const;
  bool ok() const { return error_count() == 0; }
};

ValidationReport validate_dataset(const Dataset& dataset);

// Record-local checks only (user id, finite non-negative KPIs, total identities).
bool is_well_formed(const Transaction& txn);

}  // namespace cxpred
