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

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cxpred/datamodel.hpp"
#include "cxpred/modelio.hpp"
#include "cxpred/profiler.hpp"
#include "cxpred/rrf.hpp"

namespace cxpred {

// Immutable model + encoder shared by every state that scores with it.
class ScoringContext {
 public:
  explicit ScoringContext(ModelBundle bundle);
  static std::shared_ptr<const ScoringContext> load(std::string_view document);

  Approach approach() const { return bundle_.approach; }
  const ModelBundle& bundle() const { return bundle_; }
  const ProfileSpec& profile_spec() const;

  Votes vote_transaction(const Transaction& txn) const;
  Label score_transaction(const Transaction& txn) const;
  Votes vote_profile(const UserDayProfile& profile) const;
  Label score_profile(const UserDayProfile& profile) const;

 private:
  ModelBundle bundle_;
  std::optional<TransactionEncoder> transaction_encoder_;
  std::optional<ProfileEncoder> profile_encoder_;
};

// Current experience verdict for one (user, day). `votes` counts transaction
// predictions in the transaction approach and tree votes in the profile approach.
struct Verdict {
  std::string user_id;
  Day day{};
  Label label = Label::kNoCall;
  Votes votes;
  std::size_t transactions = 0;
  TimePoint emitted_at{};
};

std::string format_verdict_json(const Verdict& v);

struct SpeedStats {
  std::size_t ingested = 0;
  std::size_t malformed = 0;
  std::size_t late_dropped = 0;
  std::size_t evicted = 0;
  std::size_t emitted = 0;
  std::size_t swaps = 0;
};

// One stream partition. A (user, day) state starts at kNoCall and a Verdict is
// emitted whenever its class changes. States are kept through the day after
// their own and then closed; transactions for closed days are dropped.
// In the profile approach a state keeps the context it started with when a
// swapped-in model uses a different profile spec.
//
// Not synchronized: one writer per partition.
class SpeedLayer {
 public:
  using CloseSink = std::function<void(const Verdict&)>;

  explicit SpeedLayer(std::shared_ptr<const ScoringContext> context, CloseSink on_close = {});

  // Parses and activates a new model document. On failure the previous model
  // stays active and the error propagates.
  void load_model(std::string_view document);
  void swap_context(std::shared_ptr<const ScoringContext> context);
  const ScoringContext& context() const { return *context_; }

  std::optional<Verdict> ingest(const Transaction& txn);
  // Malformed lines are counted and skipped.
  std::optional<Verdict> ingest_line(std::string_view line, std::size_t line_no);

  // Throws NotFoundError for unknown or closed keys.
  Verdict query(const std::string& user_id, Day day) const;

  // Closes every live state (end of stream), reporting each to the sink.
  void flush();
  std::vector<Verdict> live_verdicts() const;
  std::size_t live_keys() const;
  const SpeedStats& stats() const { return stats_; }

 private:
  struct UserState {
    std::shared_ptr<const ScoringContext> context;  // profile approach only
    std::optional<ProfileAccumulator> profile;
    Verdict verdict;
  };

  void advance_watermark(Day day);
  void close_day(std::map<Day, std::unordered_map<std::string, UserState>>::iterator it);

  std::shared_ptr<const ScoringContext> context_;
  CloseSink on_close_;
  std::map<Day, std::unordered_map<std::string, UserState>> days_;
  std::optional<Day> watermark_;
  SpeedStats stats_;
};

// Routes each user to one of N partitions by user-id hash. Each partition has
// its own lock, so calls may come from several threads.
class PartitionedSpeedLayer {
 public:
  PartitionedSpeedLayer(std::shared_ptr<const ScoringContext> context, std::size_t partitions,
                        SpeedLayer::CloseSink on_close = {});

  std::optional<Verdict> ingest(const Transaction& txn);
  Verdict query(const std::string& user_id, Day day) const;
  void swap_context(std::shared_ptr<const ScoringContext> context);
  void flush();
  // Counters summed over partitions.
  SpeedStats stats() const;
  std::size_t partition_of(const std::string& user_id) const;

 private:
  struct Partition {
    mutable std::mutex mutex;
    std::unique_ptr<SpeedLayer> layer;
  };
  std::vector<std::unique_ptr<Partition>> partitions_;
  std::mutex sink_mutex_;
  SpeedLayer::CloseSink on_close_;
};

}  // namespace cxpred
