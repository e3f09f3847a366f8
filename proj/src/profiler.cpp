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

#include "cxpred/profiler.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "cxpred/errors.hpp"

namespace cxpred {
namespace {

constexpr std::array<std::string_view, kAppFeatureCount> kAppFeatureNames = {
    "total_bytes_down",         "hourly_mean_retransmissions",  "max_time_to_first_byte",
    "min_download_time",        "min_upload_time",              "min_hourly_mean_rtt",
    "min_hourly_upload_throughput", "min_hourly_download_throughput", "hourly_mean_ces",
};

void add_present(ExactSum& sum, const KpiVector& kpis, int k) {
  if (const auto v = kpis.get(k)) sum.add(*v);
}

void keep_min(std::optional<double>& acc, std::optional<double> v) {
  if (v && (!acc || *v < *acc)) acc = v;
}

void keep_max(std::optional<double>& acc, std::optional<double> v) {
  if (v && (!acc || *v > *acc)) acc = v;
}

template <typename Hours, typename Ratio>
std::optional<double> min_hourly_ratio(const Hours& hours, Ratio ratio) {
  std::optional<double> best;
  for (const auto& [hour, sums] : hours) keep_min(best, ratio(sums));
  return best;
}

template <typename Hours>
std::optional<double> mean_hourly_ces(const Hours& hours, const CesConfig& config) {
  std::size_t scored = 0;
  long total = 0;
  for (const auto& [hour, s] : hours) {
    const double time = s.download_time.value();
    if (time <= 0.0) continue;
    const double packets = s.packets.value();
    const double rate = packets > 0.0 ? s.retransmissions.value() / packets : 0.0;
    total += static_cast<int>(compute_ces(s.bytes_down.value() / time, rate, config));
    ++scored;
  }
  if (scored == 0) return std::nullopt;
  return static_cast<double>(total) / static_cast<double>(scored);
}

}  // namespace

void CesConfig::validate() const {
  if (!(poor_download_throughput <= good_download_throughput)) {
    throw ConfigError("CES: poor throughput threshold must not exceed the good threshold");
  }
  if (!(good_retransmission_rate <= poor_retransmission_rate)) {
    throw ConfigError("CES: good retransmission threshold must not exceed the poor threshold");
  }
}

Ces compute_ces(double download_throughput, double retransmission_rate, const CesConfig& config) {
  if (config.poor_download_throughput == config.good_download_throughput &&
      config.good_retransmission_rate == config.poor_retransmission_rate) {
    return Ces::kFair;
  }
  if (download_throughput < config.poor_download_throughput ||
      retransmission_rate > config.poor_retransmission_rate) {
    return Ces::kPoor;
  }
  if (download_throughput > config.good_download_throughput &&
      retransmission_rate < config.good_retransmission_rate) {
    return Ces::kGood;
  }
  return Ces::kFair;
}

std::string_view app_feature_name(std::size_t index) { return kAppFeatureNames.at(index); }

std::vector<std::string> select_top_apps(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                         std::size_t k) {
  std::map<std::string_view, ExactSum> bytes;
  for (const std::size_t r : rows) {
    const Transaction& t = txns.at(r);
    add_present(bytes[t.field(CatField::kApplication)], t.kpis, kpi::kBytesDown);
  }
  std::vector<std::pair<std::string_view, double>> ranked;
  ranked.reserve(bytes.size());
  for (const auto& [app, sum] : bytes) ranked.emplace_back(app, sum.value());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> top;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) top.emplace_back(ranked[i].first);
  return top;
}

const std::string& RareValueMap::map(const std::string& value) const {
  return std::binary_search(retained.begin(), retained.end(), value) ? value : other_label;
}

RareValueMaps build_rare_value_maps(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                    std::size_t cell_min_users, std::size_t device_min_users) {
  std::map<std::string_view, std::set<std::string_view>> cell_users, device_users;
  for (const std::size_t r : rows) {
    const Transaction& t = txns.at(r);
    cell_users[t.field(CatField::kCell)].insert(t.user_id);
    device_users[t.field(CatField::kDeviceModel)].insert(t.user_id);
  }
  auto retain = [](const auto& users, std::size_t min_users, const std::string& other) {
    RareValueMap m;
    m.other_label = other;
    m.min_users = min_users;
    for (const auto& [value, who] : users) {
      if (who.size() >= min_users && value != other) m.retained.emplace_back(value);
    }
    return m;
  };
  return {retain(cell_users, cell_min_users, kOtherCell), retain(device_users, device_min_users, kOtherDevice)};
}

void ProfileAccumulator::HourSums::add(const Transaction& txn) {
  add_present(retransmissions, txn.kpis, kpi::kRetransTotal);
  add_present(packets, txn.kpis, kpi::kPacketsTotal);
  add_present(rtt_total, txn.kpis, kpi::kTotalRtt);
  add_present(rtt_count, txn.kpis, kpi::kRttCount);
  add_present(bytes_up, txn.kpis, kpi::kThroughputBytesUp);
  add_present(upload_time, txn.kpis, kpi::kThroughputUploadTime);
  add_present(bytes_down, txn.kpis, kpi::kThroughputBytesDown);
  add_present(download_time, txn.kpis, kpi::kThroughputDownloadTime);
}

void ProfileAccumulator::HourSums::merge(const HourSums& o) {
  retransmissions.merge(o.retransmissions);
  packets.merge(o.packets);
  rtt_total.merge(o.rtt_total);
  rtt_count.merge(o.rtt_count);
  bytes_up.merge(o.bytes_up);
  upload_time.merge(o.upload_time);
  bytes_down.merge(o.bytes_down);
  download_time.merge(o.download_time);
}

ProfileAccumulator::ProfileAccumulator(const ProfileSpec& spec) : spec_(&spec), apps_(spec.top_apps.size()) {
  for (std::size_t i = 0; i < spec.top_apps.size(); ++i) app_index_.emplace(spec.top_apps[i], i);
}

void ProfileAccumulator::add(const Transaction& txn) {
  ++count_;
  const int hour = hour_of(txn.timestamp);
  all_hours_[hour].add(txn);

  ExactSum& active = cell_active_time_[spec_->cells.map(txn.field(CatField::kCell))];
  add_present(active, txn.kpis, kpi::kDownloadTime);
  add_present(active, txn.kpis, kpi::kUploadTime);
  ++device_counts_[spec_->devices.map(txn.field(CatField::kDeviceModel))];

  const auto it = app_index_.find(txn.field(CatField::kApplication));
  if (it == app_index_.end()) return;
  AppState& app = apps_[it->second];
  add_present(app.bytes_down, txn.kpis, kpi::kBytesDown);
  app.hours[hour].add(txn);
  keep_max(app.max_ttfb, txn.kpis.get(kpi::kTimeToFirstByte));
  keep_min(app.min_download_time, txn.kpis.get(kpi::kDownloadTime));
  keep_min(app.min_upload_time, txn.kpis.get(kpi::kUploadTime));
}

void ProfileAccumulator::merge(const ProfileAccumulator& other) {
  if (other.spec_ != spec_ && !(*other.spec_ == *spec_)) throw DataError("cannot merge profiles of different specs");
  count_ += other.count_;
  for (const auto& [hour, sums] : other.all_hours_) all_hours_[hour].merge(sums);
  for (const auto& [cell, time] : other.cell_active_time_) cell_active_time_[cell].merge(time);
  for (const auto& [device, n] : other.device_counts_) device_counts_[device] += n;
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    AppState& a = apps_[i];
    const AppState& b = other.apps_[i];
    a.bytes_down.merge(b.bytes_down);
    for (const auto& [hour, sums] : b.hours) a.hours[hour].merge(sums);
    keep_max(a.max_ttfb, b.max_ttfb);
    keep_min(a.min_download_time, b.min_download_time);
    keep_min(a.min_upload_time, b.min_upload_time);
  }
}

UserDayProfile ProfileAccumulator::finalize(const std::string& user_id, Day day) const {
  if (count_ == 0) throw DataError("no activity");
  UserDayProfile p;
  p.user_id = user_id;
  p.day = day;
  p.apps.resize(apps_.size());
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    const AppState& a = apps_[i];
    AppBlock& block = p.apps[i];
    if (a.hours.empty()) continue;  // no activity: every feature absent
    auto at = [&block](AppFeature f) -> std::optional<double>& { return block[static_cast<std::size_t>(f)]; };

    ExactSum retrans;
    for (const auto& [hour, s] : a.hours) retrans.merge(s.retransmissions);
    at(AppFeature::kTotalBytesDown) = a.bytes_down.value();
    at(AppFeature::kHourlyMeanRetransmissions) = retrans.value() / static_cast<double>(a.hours.size());
    at(AppFeature::kMaxTimeToFirstByte) = a.max_ttfb;
    at(AppFeature::kMinDownloadTime) = a.min_download_time;
    at(AppFeature::kMinUploadTime) = a.min_upload_time;
    at(AppFeature::kMinHourlyMeanRtt) = min_hourly_ratio(a.hours, [](const HourSums& s) -> std::optional<double> {
      const double n = s.rtt_count.value();
      if (n <= 0.0) return std::nullopt;
      return s.rtt_total.value() / n;
    });
    at(AppFeature::kMinHourlyUploadThroughput) =
        min_hourly_ratio(a.hours, [](const HourSums& s) -> std::optional<double> {
          const double t = s.upload_time.value();
          if (t <= 0.0) return std::nullopt;
          return s.bytes_up.value() / t;
        });
    at(AppFeature::kMinHourlyDownloadThroughput) =
        min_hourly_ratio(a.hours, [](const HourSums& s) -> std::optional<double> {
          const double t = s.download_time.value();
          if (t <= 0.0) return std::nullopt;
          return s.bytes_down.value() / t;
        });
    at(AppFeature::kHourlyMeanCes) = mean_hourly_ces(a.hours, spec_->ces);
  }

  // Most active cell; std::map iteration makes ties resolve lexicographically.
  double best_time = -1.0;
  for (const auto& [cell, time] : cell_active_time_) {
    const double v = time.value();
    if (v > best_time) {
      best_time = v;
      p.most_visited_cell = cell;
    }
  }
  std::size_t best_count = 0;
  for (const auto& [device, n] : device_counts_) {
    if (n > best_count) {
      best_count = n;
      p.device_model = device;
    }
  }
  p.ces = mean_hourly_ces(all_hours_, spec_->ces);
  return p;
}

UserDayProfile aggregate_day(std::span<const Transaction* const> txns, const ProfileSpec& spec) {
  if (txns.empty()) throw DataError("no activity");
  const std::string& user = txns.front()->user_id;
  const Day day = txns.front()->day();
  ProfileAccumulator acc(spec);
  for (const Transaction* t : txns) {
    if (t->user_id != user || t->day() != day) {
      throw DataError("aggregate_day: transactions span several users or days");
    }
    acc.add(*t);
  }
  return acc.finalize(user, day);
}

std::string app_block_name(std::string_view app) { return "app:" + std::string(app); }

ProfileEncoder::ProfileEncoder(ProfileSpec spec) : spec_(std::move(spec)) {
  spec_.ces.validate();
  for (const auto& app : spec_.top_apps) {
    std::vector<std::string> dims;
    for (std::size_t f = 0; f < kAppFeatureCount; ++f) dims.push_back(app + ":" + std::string(app_feature_name(f)));
    schema_.add_real(app_block_name(app), std::move(dims));
  }
  schema_.add_categorical("cell", Vocabulary("cell", spec_.cells.retained, true));
  schema_.add_categorical("device", Vocabulary("device", spec_.devices.retained, true));
}

std::size_t ProfileEncoder::encode_into(const UserDayProfile& profile, std::span<double> out) const {
  if (out.size() != schema_.dimension()) throw std::invalid_argument("encode_into: output width mismatch");
  if (profile.apps.size() != spec_.top_apps.size()) throw DataError("profile does not match the encoder's app list");
  std::fill(out.begin(), out.end(), 0.0);
  std::size_t absent = 0;
  std::size_t pos = 0;
  for (const AppBlock& block : profile.apps) {
    for (const auto& v : block) {
      if (v) {
        out[pos] = *v;
      } else {
        ++absent;
      }
      ++pos;
    }
  }
  for (const char* name : {"cell", "device"}) {
    const FeatureBlock& b = schema_.at(name);
    const std::string& value = std::string_view(name) == "cell" ? profile.most_visited_cell : profile.device_model;
    if (const auto hot = b.vocabulary->hot_position(value)) out[b.offset + *hot] = 1.0;
  }
  return absent;
}

FeatureVector ProfileEncoder::encode(const UserDayProfile& profile) const {
  FeatureVector fv;
  fv.values.resize(schema_.dimension());
  fv.schema_id = schema_.fingerprint();
  encode_into(profile, fv.values);
  return fv;
}

std::vector<UserDayProfile> build_profiles(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                           const ProfileSpec& spec) {
  std::map<std::pair<std::string_view, Day>, std::vector<const Transaction*>> groups;
  for (const std::size_t r : rows) {
    const Transaction& t = txns.at(r);
    groups[{t.user_id, t.day()}].push_back(&t);
  }
  std::vector<UserDayProfile> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) out.push_back(aggregate_day(members, spec));
  return out;
}

}  // namespace cxpred
