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
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxpred/datamodel.hpp"
#include "cxpred/exact_sum.hpp"
#include "cxpred/featurizer.hpp"

namespace cxpred {

// Customer experience score thresholds. Throughput is bytes per millisecond of
// download time; retransmission rate is retransmitted / total packets.
// Low throughput maps to poor.
struct CesConfig {
  double poor_download_throughput = 20.0;
  double good_download_throughput = 100.0;
  double good_retransmission_rate = 0.02;
  double poor_retransmission_rate = 0.06;

  void validate() const;
  bool operator==(const CesConfig&) const = default;
};

enum class Ces : int { kPoor = 0, kFair = 1, kGood = 2 };

// Poor when throughput is below the poor threshold or retransmissions exceed the
// poor threshold; good when throughput is above the good threshold and
// retransmissions are below the good threshold; fair otherwise. A degenerate
// band (both threshold pairs collapsed) maps every input to fair.
Ces compute_ces(double download_throughput, double retransmission_rate, const CesConfig& config);

// Per-application summary features, in table order.
enum class AppFeature : std::size_t {
  kTotalBytesDown,
  kHourlyMeanRetransmissions,
  kMaxTimeToFirstByte,
  kMinDownloadTime,
  kMinUploadTime,
  kMinHourlyMeanRtt,
  kMinHourlyUploadThroughput,
  kMinHourlyDownloadThroughput,
  kHourlyMeanCes,
};
inline constexpr std::size_t kAppFeatureCount = 9;
std::string_view app_feature_name(std::size_t index);

// nullopt marks an absent feature (no activity for the app, or no usable KPI).
using AppBlock = std::array<std::optional<double>, kAppFeatureCount>;

inline const std::string kOtherCell = "other cell";
inline const std::string kOtherDevice = "other device";

struct UserDayProfile {
  std::string user_id;
  Day day{};
  std::vector<AppBlock> apps;  // one per top application, fixed order
  std::string most_visited_cell;  // retained cell or kOtherCell
  std::string device_model;       // retained device or kOtherDevice
  std::optional<double> ces;      // hourly-averaged score over all activity

  bool operator==(const UserDayProfile&) const = default;
};

// Top-k applications by total downloaded bytes, ties lexicographic.
std::vector<std::string> select_top_apps(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                         std::size_t k = 10);

// Categories used by at least `min_users` distinct users, lexicographic.
struct RareValueMap {
  std::vector<std::string> retained;
  std::string other_label;
  std::size_t min_users = 0;

  const std::string& map(const std::string& value) const;
  bool operator==(const RareValueMap&) const = default;
};

struct RareValueMaps {
  RareValueMap cells;
  RareValueMap devices;
};

RareValueMaps build_rare_value_maps(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                    std::size_t cell_min_users = 7, std::size_t device_min_users = 5);

// Everything needed to turn transactions into encoded profiles.
struct ProfileSpec {
  std::vector<std::string> top_apps;
  RareValueMap cells;
  RareValueMap devices;
  CesConfig ces;

  bool operator==(const ProfileSpec&) const = default;
};

// Mergeable partial aggregate for one (user, day). Sums are exact, so adding
// transactions in any order or merging any split gives the same profile.
class ProfileAccumulator {
 public:
  explicit ProfileAccumulator(const ProfileSpec& spec);

  void add(const Transaction& txn);
  void merge(const ProfileAccumulator& other);
  std::size_t transaction_count() const { return count_; }

  // Throws DataError("no activity") when nothing was added.
  UserDayProfile finalize(const std::string& user_id, Day day) const;

 private:
  struct HourSums {
    ExactSum retransmissions, packets, rtt_total, rtt_count, bytes_up, upload_time, bytes_down, download_time;
    void add(const Transaction& txn);
    void merge(const HourSums& other);
  };
  struct AppState {
    ExactSum bytes_down;
    std::map<int, HourSums> hours;
    std::optional<double> max_ttfb, min_download_time, min_upload_time;
  };

  const ProfileSpec* spec_;
  std::map<std::string, std::size_t, std::less<>> app_index_;
  std::vector<AppState> apps_;
  std::map<int, HourSums> all_hours_;
  std::map<std::string, ExactSum> cell_active_time_;
  std::map<std::string, std::size_t> device_counts_;
  std::size_t count_ = 0;
};

// Single-pass aggregation of one user's transactions within one calendar day.
UserDayProfile aggregate_day(std::span<const Transaction* const> txns, const ProfileSpec& spec);

// Builds the profile feature schema: one 9-wide real block per top app
// ("app:<name>"), then "cell" and "device" one-hot blocks with other-bits.
class ProfileEncoder {
 public:
  explicit ProfileEncoder(ProfileSpec spec);

  const ProfileSpec& spec() const { return spec_; }
  const FeatureSchema& schema() const { return schema_; }

  // Returns the number of absent features imputed as 0.
  std::size_t encode_into(const UserDayProfile& profile, std::span<double> out) const;
  FeatureVector encode(const UserDayProfile& profile) const;

 private:
  ProfileSpec spec_;
  FeatureSchema schema_;
};

std::string app_block_name(std::string_view app);

// Groups transactions by (user, day) and aggregates each group. Output is
// sorted by (user_id, day).
std::vector<UserDayProfile> build_profiles(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                           const ProfileSpec& spec);

}  // namespace cxpred
