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

#include "cxpred/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "cxpred/errors.hpp"
#include "cxpred/rng.hpp"

namespace cxpred {
namespace {

struct AppInfo {
  std::string_view name;
  std::string_view type;
  double packets;  // typical downlink packets per hourly record
  bool heavy;
};

// Ordered by popularity; the first ten mirror a typical operator's top apps.
constexpr AppInfo kApps[] = {
    {"http", "web", 500, false},
    {"blackberry_services", "push", 120, false},
    {"facebook", "social", 700, true},
    {"google", "web", 300, false},
    {"apple_maps", "maps", 900, true},
    {"youtube", "video", 3000, true},
    {"android_market", "store", 1500, false},
    {"sslv3", "web", 400, false},
    {"twitter", "social", 400, false},
    {"whatsapp", "messaging", 100, false},
    {"dns", "infra", 10, false},
    {"https", "web", 450, false},
    {"tango", "voip", 400, false},
    {"blackberry_messenger", "messaging", 80, false},
    {"mpns", "push", 20, false},
    {"msn_webmail", "email", 150, false},
    {"instagram", "social", 900, true},
    {"skype", "voip", 500, false},
    {"viber", "voip", 300, false},
    {"netflix", "video", 4000, true},
    {"spotify", "music", 1500, false},
    {"gmail", "email", 200, false},
    {"yahoo_mail", "email", 150, false},
    {"itunes", "store", 2000, false},
    {"windows_update", "store", 2500, false},
    {"dropbox", "cloud", 1000, false},
    {"linkedin", "social", 300, false},
    {"snapchat", "social", 600, false},
    {"wechat", "messaging", 120, false},
    {"line", "messaging", 120, false},
    {"bbc_iplayer", "video", 3500, true},
    {"soundcloud", "music", 1200, false},
    {"vimeo", "video", 3000, true},
    {"pandora", "music", 1300, false},
    {"waze", "maps", 500, false},
    {"google_maps", "maps", 800, true},
    {"amazon", "web", 600, false},
    {"ebay", "web", 500, false},
    {"wikipedia", "web", 300, false},
    {"tumblr", "social", 500, false},
    {"pinterest", "social", 600, false},
    {"flickr", "social", 800, false},
    {"outlook", "email", 200, false},
    {"icloud", "cloud", 900, false},
    {"apple_push", "push", 15, false},
    {"android_push", "push", 15, false},
    {"ntp", "infra", 4, false},
    {"sip", "voip", 200, false},
    {"rtsp", "video", 2000, false},
    {"ftp", "cloud", 1500, false},
    {"bittorrent", "p2p", 2500, false},
    {"opera_mini", "web", 200, false},
    {"nokia_services", "store", 400, false},
    {"samsung_apps", "store", 900, false},
    {"angry_birds", "games", 200, false},
    {"candy_crush", "games", 250, false},
    {"imessage", "messaging", 90, false},
    {"kik", "messaging", 80, false},
    {"hangouts", "messaging", 150, false},
    {"periscope", "video", 2500, false},
};
constexpr std::size_t kNumApps = std::size(kApps);
constexpr std::size_t kPopularApps = 10;

struct DeviceInfo {
  std::string_view manufacturer;
  std::string_view model;
  bool fragile;  // older handsets that degrade first under load
  bool legacy_rat;
};

constexpr DeviceInfo kNamedDevices[] = {
    {"apple", "iphone_5s", false, false},
    {"blackberry", "blackberry_9720", true, true},
    {"samsung", "galaxy_s4", false, false},
    {"apple", "iphone_5", false, false},
    {"blackberry", "blackberry_9300", true, true},
    {"samsung", "galaxy_s3", false, false},
    {"apple", "iphone_4s", true, false},
    {"blackberry", "blackberry_9360", true, true},
    {"htc", "htc_one", false, false},
    {"nokia", "lumia_520", false, false},
    {"samsung", "galaxy_y", true, true},
    {"apple", "iphone_4", true, true},
    {"blackberry", "blackberry_z10", false, false},
    {"sony", "xperia_z", false, false},
    {"lg", "lg_g2", false, false},
    {"huawei", "ascend_y300", true, false},
    {"google", "nexus_5", false, false},
    {"blackberry", "blackberry_q10", false, false},
    {"nokia", "lumia_920", false, false},
    {"samsung", "galaxy_note_2", false, false},
    {"motorola", "moto_g", false, false},
    {"nokia", "asha_501", true, true},
    {"apple", "ipad_mini", false, false},
    {"blackberry", "blackberry_9800", true, true},
};
constexpr std::string_view kGenericMakers[] = {"zte", "alcatel", "huawei", "lenovo", "sony", "lg"};

constexpr std::string_view kApns[] = {"internet", "mobile_web", "lte_data", "wap"};
constexpr std::string_view kQos[] = {"bronze", "silver", "gold"};
constexpr double kQosWeights[] = {0.6, 0.3, 0.1};
constexpr std::string_view kExpertise[] = {"technical", "billing", "general"};

// Relative activity by hour of day.
constexpr double kDiurnal[24] = {0.3, 0.2, 0.15, 0.1, 0.1, 0.15, 0.4, 0.7, 0.9, 1.0, 1.0, 1.0,
                                 1.1, 1.0, 1.0, 1.0, 1.0, 1.1, 1.2, 1.3, 1.3, 1.2, 0.9, 0.6};

struct Catalog {
  std::vector<DeviceInfo> devices;
  std::vector<std::string> device_names;  // owns generic model names
  std::vector<std::string> cells;
  std::vector<std::string> location_areas;  // per cell
  std::vector<std::string> sgsns;           // per cell
  std::vector<std::size_t> congested;       // cell indices
  DiscreteSampler app_sampler, device_sampler, fragile_device_sampler, cell_sampler, apn_sampler,
      qos_sampler, hour_sampler;
  std::vector<std::size_t> heavy_apps;
};

Catalog build_catalog(const GeneratorConfig& c) {
  Catalog cat;
  std::size_t n_dev = std::max(c.catalog.devices, std::size(kNamedDevices));
  cat.device_names.reserve(n_dev);
  for (std::size_t i = 0; i < n_dev; ++i) {
    if (i < std::size(kNamedDevices)) {
      cat.device_names.emplace_back(kNamedDevices[i].model);
    } else {
      char buf[48];
      std::string_view maker = kGenericMakers[i % std::size(kGenericMakers)];
      std::snprintf(buf, sizeof buf, "%.*s_model_%03zu", static_cast<int>(maker.size()), maker.data(), i);
      cat.device_names.emplace_back(buf);
    }
  }
  for (std::size_t i = 0; i < n_dev; ++i) {
    if (i < std::size(kNamedDevices)) {
      cat.devices.push_back(kNamedDevices[i]);
    } else {
      cat.devices.push_back({kGenericMakers[i % std::size(kGenericMakers)], cat.device_names[i], i % 5 == 0, false});
    }
  }

  const std::size_t per_la = std::max<std::size_t>(1, c.catalog.cells_per_location_area);
  for (std::size_t i = 0; i < c.catalog.cells; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "cell_%05zu", i);
    cat.cells.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "la_%03zu", i / per_la);
    cat.location_areas.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "sgsn_%02zu", (i / per_la) % 6);
    cat.sgsns.emplace_back(buf);
    if (i % 9 == 4) cat.congested.push_back(i);
  }
  if (cat.congested.empty()) cat.congested.push_back(0);

  auto z = c.catalog.zipf_exponent;
  cat.app_sampler = DiscreteSampler(zipf_weights(kNumApps, z));
  auto dw = zipf_weights(n_dev, z);
  cat.device_sampler = DiscreteSampler(dw);
  auto fw = dw;
  for (std::size_t i = 0; i < n_dev; ++i) {
    if (cat.devices[i].fragile) fw[i] *= 1.0 + 3.0 * std::min(c.planted.strength, 2.0);
  }
  cat.fragile_device_sampler = DiscreteSampler(fw);
  cat.cell_sampler = DiscreteSampler(zipf_weights(cat.cells.size(), 0.8));
  cat.apn_sampler = DiscreteSampler(zipf_weights(std::size(kApns), 1.5));
  cat.qos_sampler = DiscreteSampler(std::span<const double>(kQosWeights));
  cat.hour_sampler = DiscreteSampler(std::span<const double>(kDiurnal));
  for (std::size_t i = 0; i < kNumApps; ++i) {
    if (kApps[i].heavy) cat.heavy_apps.push_back(i);
  }
  return cat;
}

struct UserProfile {
  std::string id;
  std::size_t device = 0;
  std::size_t home_cell = 0;
  std::array<std::size_t, 3> cells{};
  std::size_t apn = 0;
  std::size_t qos = 0;
  std::array<std::size_t, 8> apps{};
  double intensity = 0.0;
  double throughput_factor = 1.0;
  double retrans_base = 0.006;
  bool caller = false;
};

struct Stress {
  double retrans = 1.0;     // multiplier on retransmission rate
  double retrans_add = 0.0; // additive retransmission rate
  double slowdown = 1.0;    // divisor on throughput
  double latency = 1.0;     // multiplier on setup, first-byte and round-trip times
};

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

// Fills every KPI of one record. Draw count is fixed so records stay
// comparable across effect strengths with the same seed.
void fill_kpis(Transaction& t, const AppInfo& app, const UserProfile& user, const Stress& s, Rng& rng) {
  KpiVector& k = t.kpis;
  double u_rate = rng.lognormal(0.0, 0.3);
  double u_pk = rng.lognormal(0.0, 0.8);
  double u_up = 0.2 + 0.3 * rng.uniform01();
  double u_bd = 900.0 + 500.0 * rng.uniform01();
  double u_bu = 80.0 + 220.0 * rng.uniform01();
  double u_tp = rng.lognormal(0.0, 0.4);
  double u_tpu = 0.2 + 0.2 * rng.uniform01();
  double u_conn = static_cast<double>(rng.poisson(1.5));
  double u_ss = rng.lognormal(0.0, 0.3);
  double u_cs = rng.lognormal(0.0, 0.3);
  double u_fb = rng.lognormal(0.0, 0.4);
  double u_rtt = rng.lognormal(0.0, 0.3);
  double u_rtt2 = 0.95 + 0.1 * rng.uniform01();
  std::array<double, 8> u_range{};
  for (auto& v : u_range) v = rng.uniform01();
  double u_video = static_cast<double>(rng.poisson(2.0));
  double u_pages = static_cast<double>(rng.poisson(6.0));

  double packets_down = std::max(1.0, std::round(app.packets * u_pk));
  double packets_up = std::max(1.0, std::round(packets_down * u_up));
  double bytes_down = std::round(packets_down * u_bd);
  double bytes_up = std::round(packets_up * u_bu);
  double rate = std::min(0.9, user.retrans_base * u_rate * s.retrans + s.retrans_add);
  double rt_down = std::min(packets_down, std::round(packets_down * rate));
  double rt_up = std::min(packets_up, std::round(packets_up * rate));

  double tput_down = std::max(0.5, 150.0 * user.throughput_factor * u_tp / s.slowdown);  // bytes per ms
  double tput_up = std::max(0.1, tput_down * u_tpu);
  double dl_time = std::max(1.0, std::round(bytes_down / tput_down));
  double ul_time = std::max(1.0, std::round(bytes_up / tput_up));
  double conns = 1.0 + u_conn;

  k.set(kpi::kBytesUp, bytes_up);
  k.set(kpi::kBytesDown, bytes_down);
  k.set(kpi::kBytesTotal, bytes_up + bytes_down);
  k.set(kpi::kPacketsUp, packets_up);
  k.set(kpi::kPacketsDown, packets_down);
  k.set(kpi::kPacketsTotal, packets_up + packets_down);
  k.set(kpi::kRetransUp, rt_up);
  k.set(kpi::kRetransDown, rt_down);
  k.set(kpi::kRetransTotal, rt_up + rt_down);
  k.set(kpi::kServerSetupTime, std::round(conns * 80.0 * u_ss * s.latency));
  k.set(kpi::kServerSetupCount, conns);
  k.set(kpi::kClientSetupTime, std::round(conns * 40.0 * u_cs * s.latency));
  k.set(kpi::kClientSetupCount, conns);
  k.set(kpi::kTimeToFirstByte, std::round(conns * 200.0 * u_fb * s.latency));
  k.set(kpi::kTimeToFirstByteCount, conns);
  k.set(kpi::kDownloadTime, dl_time);
  k.set(kpi::kDownloadTimeCount, conns);
  k.set(kpi::kUploadTime, ul_time);
  k.set(kpi::kUploadTimeCount, conns);
  k.set(kpi::kNewTcpConnections, conns);
  k.set(kpi::kThroughputBytesUp, bytes_up);
  k.set(kpi::kThroughputUploadTime, ul_time);
  k.set(kpi::kThroughputBytesDown, bytes_down);
  k.set(kpi::kThroughputDownloadTime, dl_time);
  double max_up = round3(tput_up * (1.2 + 0.8 * u_range[0]));
  double min_up = round3(tput_up * (0.3 + 0.5 * u_range[1]));
  double max_down = round3(tput_down * (1.2 + 0.8 * u_range[2]));
  double min_down = round3(tput_down * (0.3 + 0.5 * u_range[3]));
  k.set(25, max_up);
  k.set(26, min_up);
  k.set(27, max_down);
  k.set(28, min_down);
  k.set(29, bytes_up);
  k.set(30, ul_time);
  k.set(31, bytes_down);
  k.set(32, dl_time);
  double rtt_count = std::max(1.0, std::floor(packets_down / 10.0));
  double rtt_total = std::round(rtt_count * 120.0 * u_rtt * s.latency);
  k.set(kpi::kTotalRtt, rtt_total);
  k.set(kpi::kRttCount, rtt_count);
  k.set(35, std::round(rtt_total * u_rtt2));
  k.set(36, rtt_count);
  k.set(37, packets_up + packets_down);
  k.set(38, round3(max_up * (0.9 + 0.1 * u_range[4])));
  k.set(39, bytes_up);
  k.set(40, ul_time);
  k.set(41, max_up);
  k.set(42, bytes_up);
  k.set(43, ul_time);
  k.set(44, round3(max_down * (0.9 + 0.1 * u_range[5])));
  k.set(45, bytes_down);
  k.set(46, dl_time);
  k.set(47, max_down);
  k.set(48, bytes_down);
  k.set(49, dl_time);
  if (app.type == "video") {
    double play = std::round(dl_time * (2.0 + 4.0 * u_range[6]));
    k.set(50, 1.0 + u_video);
    k.set(51, play);
    k.set(52, std::round(play * (0.8 + 0.2 * u_range[7])));
    k.set(53, bytes_down);
  }
  if (app.type == "web" || app.type == "social") {
    k.set(54, 1.0 + u_pages);
    k.set(55, dl_time);
  }
}

std::string user_name(std::size_t i, std::size_t n) {
  int width = 1;
  for (std::size_t m = n > 0 ? n - 1 : 0; m >= 10; m /= 10) ++width;
  width = std::clamp(width, 6, 20);
  char buf[32];
  std::snprintf(buf, sizeof buf, "u%0*zu", width, i);
  return buf;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (n_users == 0) throw ConfigError("n_users must be positive");
  if (n_days == 0) throw ConfigError("n_days must be positive");
  if (!(mean_txn_per_user_day > 0.0)) throw ConfigError("mean_txn_per_user_day must be positive");
  if (!(active_day_probability >= 0.0 && active_day_probability <= 1.0))
    throw ConfigError("active_day_probability must be in [0, 1]");
  if (!(caller_fraction >= 0.0 && caller_fraction <= 1.0)) throw ConfigError("caller_fraction must be in [0, 1]");
  if (caller_fraction * static_cast<double>(n_users) < 1.0) throw ConfigError("no positive class representable");
  if (!(mean_calls_per_caller >= 1.0)) throw ConfigError("mean_calls_per_caller must be at least 1");
  if (!(background_stress_probability >= 0.0 && background_stress_probability <= 1.0))
    throw ConfigError("background_stress_probability must be in [0, 1]");
  if (!(planted.strength >= 0.0)) throw ConfigError("planted effect strength must be non-negative");
  if (!(planted.trouble_window_hours > 0.0)) throw ConfigError("trouble_window_hours must be positive");
  if (!(planted.retries_per_call_day >= 0.0)) throw ConfigError("retries_per_call_day must be non-negative");
  if (catalog.cells == 0) throw ConfigError("catalog needs at least one cell");
  if (!(catalog.zipf_exponent >= 0.0)) throw ConfigError("zipf_exponent must be non-negative");
}

Dataset generate(const GeneratorConfig& config) {
  config.validate();
  const Catalog cat = build_catalog(config);
  const std::size_t n = config.n_users;
  const double s = config.planted.strength;

  // Exactly round(f * n) callers, chosen by a partial Fisher-Yates shuffle.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const auto n_callers = static_cast<std::size_t>(std::llround(config.caller_fraction * static_cast<double>(n)));
  {
    Rng rng(derive_seed(config.seed, "callers"));
    for (std::size_t i = 0; i < n_callers; ++i) {
      std::size_t j = i + rng.uniform_index(n - i);
      std::swap(order[i], order[j]);
    }
  }
  std::vector<char> is_caller(n, 0);
  for (std::size_t i = 0; i < n_callers; ++i) is_caller[order[i]] = 1;

  // Probability that a record inside the trouble window is degraded, and how badly.
  const double p_trouble = std::min(1.0, 0.8 * s);
  const Stress trouble{1.0 + 6.0 * s, 0.02 * s, 1.0 + 2.0 * s, 1.0 + 1.5 * s};
  const Stress background{3.0, 0.0, 2.0, 1.5};
  const double p_heavy = 0.5 * std::min(s, 1.0);
  const double p_congested = std::min(1.0, 0.6 * s);

  Dataset out;
  for (std::size_t ui = 0; ui < n; ++ui) {
    Rng urng(derive_seed(config.seed, "user", ui));
    UserProfile u;
    u.id = user_name(ui, n);
    u.caller = is_caller[ui] != 0;
    // Callers skew toward fragile handsets; the draw count is the same either way.
    u.device = (u.caller ? cat.fragile_device_sampler : cat.device_sampler).sample(urng);
    u.home_cell = cat.cell_sampler.sample(urng);
    const std::size_t per_la = std::max<std::size_t>(1, config.catalog.cells_per_location_area);
    std::size_t la_first = (u.home_cell / per_la) * per_la;
    std::size_t la_size = std::min(per_la, cat.cells.size() - la_first);
    u.cells = {u.home_cell, la_first + urng.uniform_index(la_size), la_first + urng.uniform_index(la_size)};
    u.apn = cat.apn_sampler.sample(urng);
    u.qos = cat.qos_sampler.sample(urng);
    for (auto& a : u.apps) a = cat.app_sampler.sample(urng);
    u.intensity = config.mean_txn_per_user_day * urng.lognormal(-0.18, 0.6);
    u.throughput_factor = urng.lognormal(0.0, 0.3);
    u.retrans_base = 0.006 * urng.lognormal(0.0, 0.5);

    // Calls: 1 + Poisson(mean - 1) per caller, business hours, minute resolution.
    std::map<std::size_t, std::vector<TimePoint>> calls_by_day;
    {
      Rng crng(derive_seed(config.seed, "calls", ui));
      std::uint64_t k = 1 + crng.poisson(config.mean_calls_per_caller - 1.0);
      for (std::uint64_t c = 0; c < k; ++c) {
        std::size_t d = crng.uniform_index(config.n_days);
        auto minute = static_cast<int>(crng.uniform_index(12 * 60));
        TimePoint ts = TimePoint(config.start_day + std::chrono::days(d)) + std::chrono::minutes(8 * 60 + minute);
        double dur = std::round(crng.lognormal(std::log(300.0), 0.6));
        std::size_t agent = crng.uniform_index(40);
        std::size_t expertise = crng.uniform_index(std::size(kExpertise));
        if (!u.caller) continue;
        calls_by_day[d].push_back(ts);
        char buf[16];
        std::snprintf(buf, sizeof buf, "agent_%02zu", agent);
        out.care_calls.push_back({u.id, ts, dur, buf, std::string(kExpertise[expertise])});
      }
    }

    const DeviceInfo& dev = cat.devices[u.device];
    for (std::size_t d = 0; d < config.n_days; ++d) {
      Rng drng(derive_seed(derive_seed(config.seed, "day", d), "user", ui));
      const Day day = config.start_day + std::chrono::days(d);
      auto call_it = calls_by_day.find(d);
      const bool call_day = call_it != calls_by_day.end();
      bool active = drng.bernoulli(config.active_day_probability);
      std::uint64_t n_txn = std::max<std::uint64_t>(1, drng.poisson(u.intensity));
      double window = std::max(1.0, std::round(drng.exponential(1.0 / config.planted.trouble_window_hours)));
      std::size_t trouble_cell = cat.congested[drng.uniform_index(cat.congested.size())];
      // Troubled callers retry across popular services before giving up and calling.
      std::uint64_t retries = drng.poisson(config.planted.retries_per_call_day * s);
      if (!active && !call_day) continue;

      TimePoint anchor{};
      if (call_day) anchor = *std::max_element(call_it->second.begin(), call_it->second.end());
      const TimePoint window_start = anchor - std::chrono::hours(static_cast<int>(window));
      const TimePoint day_start{day};

      std::uint64_t total = n_txn + (call_day ? retries : 0);
      for (std::uint64_t ti = 0; ti < total; ++ti) {
        Rng trng(derive_seed(derive_seed(config.seed, "txn", ui), "day-txn", d * 1000003ULL + ti));
        int hour = static_cast<int>(cat.hour_sampler.sample(trng));
        double u_window = trng.uniform01();
        std::size_t app = u.apps[trng.uniform_index(u.apps.size())];
        std::size_t retry_app = trng.uniform_index(kPopularApps);
        std::size_t cell = u.cells[trng.uniform_index(u.cells.size())];
        double u_trouble = trng.uniform01();
        double u_heavy = trng.uniform01();
        std::size_t heavy_pick = cat.heavy_apps.empty() ? app : cat.heavy_apps[trng.uniform_index(cat.heavy_apps.size())];
        double u_cell = trng.uniform01();
        double u_bg = trng.uniform01();
        bool udp = trng.bernoulli(0.08);
        std::size_t ggsn = trng.uniform_index(3);

        TimePoint ts = day_start + std::chrono::hours(hour);
        if (ti >= n_txn) {
          // Retries cluster in the hours just before the call.
          auto span_h = static_cast<int>(window);
          int back = 1 + static_cast<int>(u_window * span_h);
          TimePoint t = std::chrono::floor<std::chrono::hours>(anchor) - std::chrono::hours(back - 1);
          if (t >= anchor) t -= std::chrono::hours(1);
          if (t < day_start) t = day_start;
          ts = t;
          app = retry_app;
        }

        Stress stress;
        bool troubled = call_day && ts < anchor && ts >= window_start && u_trouble < p_trouble;
        if (troubled) {
          stress = trouble;
          if (u_heavy < p_heavy) app = heavy_pick;
          if (u_cell < p_congested) cell = trouble_cell;
        } else if (u_bg < config.background_stress_probability) {
          stress = background;
        }

        Transaction t;
        t.user_id = u.id;
        t.timestamp = ts;
        const AppInfo& ai = kApps[app];
        t.field(CatField::kProtocol) = udp ? "udp" : "tcp";
        t.field(CatField::kApplication) = std::string(ai.name);
        t.field(CatField::kApn) = std::string(kApns[u.apn]);
        t.field(CatField::kSgsn) = cat.sgsns[cell];
        char buf[16];
        std::snprintf(buf, sizeof buf, "ggsn_%02zu", ggsn);
        t.field(CatField::kGgsn) = buf;
        t.field(CatField::kCell) = cat.cells[cell];
        t.field(CatField::kLocationArea) = cat.location_areas[cell];
        t.field(CatField::kDeviceManufacturer) = std::string(dev.manufacturer);
        t.field(CatField::kDeviceModel) = cat.device_names[u.device];
        t.field(CatField::kQos) = std::string(kQos[u.qos]);
        t.field(CatField::kRat) = dev.legacy_rat ? "geran" : "utran";
        t.field(CatField::kRuleType) = ai.type == "video" ? "video" : "web";
        fill_kpis(t, ai, u, stress, trng);
        out.transactions.push_back(std::move(t));
      }
    }
  }
  normalize(out);
  return out;
}

AppTypeMap synthetic_app_types() {
  AppTypeMap m;
  for (const auto& a : kApps) m.types.emplace(std::string(a.name), std::string(a.type));
  return m;
}

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("generator config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("unknown field '" + it.key() + "' in " + std::string(where));
  }
}

}  // namespace

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
  reject_unknown(j,
                 {"n_users", "n_days", "start_day", "mean_txn_per_user_day", "active_day_probability",
                  "caller_fraction", "mean_calls_per_caller", "background_stress_probability", "planted_effect",
                  "catalog", "seed"},
                 "generator config");
  GeneratorConfig c;
  c.n_users = get_or(j, "n_users", c.n_users);
  c.n_days = get_or(j, "n_days", c.n_days);
  if (j.contains("start_day")) {
    auto d = parse_day(get_or<std::string>(j, "start_day", ""));
    if (!d) throw ConfigError("start_day must be YYYY-MM-DD");
    c.start_day = *d;
  }
  c.mean_txn_per_user_day = get_or(j, "mean_txn_per_user_day", c.mean_txn_per_user_day);
  c.active_day_probability = get_or(j, "active_day_probability", c.active_day_probability);
  c.caller_fraction = get_or(j, "caller_fraction", c.caller_fraction);
  c.mean_calls_per_caller = get_or(j, "mean_calls_per_caller", c.mean_calls_per_caller);
  c.background_stress_probability = get_or(j, "background_stress_probability", c.background_stress_probability);
  if (j.contains("planted_effect")) {
    const auto& p = j.at("planted_effect");
    if (p.is_string()) {
      if (p.get<std::string>() != "none") throw ConfigError("planted_effect must be \"none\" or an object");
      c.planted.strength = 0.0;
    } else if (p.is_object()) {
      reject_unknown(p, {"strength", "trouble_window_hours", "retries_per_call_day"}, "planted_effect");
      c.planted.strength = get_or(p, "strength", c.planted.strength);
      c.planted.trouble_window_hours = get_or(p, "trouble_window_hours", c.planted.trouble_window_hours);
      c.planted.retries_per_call_day = get_or(p, "retries_per_call_day", c.planted.retries_per_call_day);
    } else {
      throw ConfigError("planted_effect must be \"none\" or an object");
    }
  }
  if (j.contains("catalog")) {
    const auto& p = j.at("catalog");
    if (!p.is_object()) throw ConfigError("catalog must be an object");
    reject_unknown(p, {"cells", "cells_per_location_area", "devices", "zipf_exponent"}, "catalog");
    c.catalog.cells = get_or(p, "cells", c.catalog.cells);
    c.catalog.cells_per_location_area = get_or(p, "cells_per_location_area", c.catalog.cells_per_location_area);
    c.catalog.devices = get_or(p, "devices", c.catalog.devices);
    c.catalog.zipf_exponent = get_or(p, "zipf_exponent", c.catalog.zipf_exponent);
  }
  c.seed = get_or(j, "seed", c.seed);
  c.validate();
  return c;
}

nlohmann::ordered_json to_json(const GeneratorConfig& c) {
  nlohmann::ordered_json j;
  j["n_users"] = c.n_users;
  j["n_days"] = c.n_days;
  j["start_day"] = format_day(c.start_day);
  j["mean_txn_per_user_day"] = c.mean_txn_per_user_day;
  j["active_day_probability"] = c.active_day_probability;
  j["caller_fraction"] = c.caller_fraction;
  j["mean_calls_per_caller"] = c.mean_calls_per_caller;
  j["background_stress_probability"] = c.background_stress_probability;
  j["planted_effect"] = {{"strength", c.planted.strength},
                         {"trouble_window_hours", c.planted.trouble_window_hours},
                         {"retries_per_call_day", c.planted.retries_per_call_day}};
  j["catalog"] = {{"cells", c.catalog.cells},
                  {"cells_per_location_area", c.catalog.cells_per_location_area},
                  {"devices", c.catalog.devices},
                  {"zipf_exponent", c.catalog.zipf_exponent}};
  j["seed"] = c.seed;
  return j;
}

namespace {

std::vector<std::pair<std::string, std::size_t>> top10(const std::unordered_map<std::string, std::size_t>& counts) {
  std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (v.size() > 10) v.resize(10);
  return v;
}

}  // namespace

StatsReport summarize(const Dataset& ds) {
  StatsReport r;
  r.span = ds.span();
  r.transactions = ds.transactions.size();
  std::unordered_set<std::string> users, callers;
  for (const auto& t : ds.transactions) users.insert(t.user_id);
  for (const auto& c : ds.care_calls) {
    callers.insert(c.user_id);
    ++r.calls_by_hour[static_cast<std::size_t>(hour_of(c.timestamp))];
  }
  r.calls = ds.care_calls.size();
  r.users = users.size();
  r.callers = callers.size();
  std::size_t population = users.size();
  for (const auto& c : callers) population += users.count(c) ? 0 : 1;
  r.calls_per_caller = r.callers ? static_cast<double>(r.calls) / static_cast<double>(r.callers) : 0.0;
  r.caller_fraction = population ? static_cast<double>(r.callers) / static_cast<double>(population) : 0.0;

  std::unordered_map<std::string, std::size_t> apps_c, apps_n, dev_c, dev_n;
  std::set<std::pair<std::string, std::string>> seen_device;
  for (const auto& t : ds.transactions) {
    bool caller = callers.count(t.user_id) > 0;
    ++(caller ? apps_c : apps_n)[t.field(CatField::kApplication)];
    const auto& model = t.field(CatField::kDeviceModel);
    if (seen_device.emplace(t.user_id, model).second) ++(caller ? dev_c : dev_n)[model];
  }
  r.top_apps_callers = top10(apps_c);
  r.top_apps_no_callers = top10(apps_n);
  r.top_devices_callers = top10(dev_c);
  r.top_devices_no_callers = top10(dev_n);
  return r;
}

nlohmann::ordered_json to_json(const StatsReport& r) {
  nlohmann::ordered_json j;
  if (r.span) {
    j["first_day"] = format_day(r.span->first);
    j["last_day"] = format_day(r.span->second);
  } else {
    j["first_day"] = nullptr;
    j["last_day"] = nullptr;
  }
  j["transactions"] = r.transactions;
  j["users"] = r.users;
  j["callers"] = r.callers;
  j["calls"] = r.calls;
  j["calls_per_caller"] = r.calls_per_caller;
  j["caller_fraction"] = r.caller_fraction;
  j["calls_by_hour"] = r.calls_by_hour;
  auto table = [](const std::vector<std::pair<std::string, std::size_t>>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& [name, count] : v) a.push_back({{"name", name}, {"count", count}});
    return a;
  };
  j["top_apps_callers"] = table(r.top_apps_callers);
  j["top_apps_no_callers"] = table(r.top_apps_no_callers);
  j["top_devices_callers"] = table(r.top_devices_callers);
  j["top_devices_no_callers"] = table(r.top_devices_no_callers);
  return j;
}

}  // namespace cxpred
