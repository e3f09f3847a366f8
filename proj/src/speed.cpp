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

#include "cxpred/speed.hpp"

#include <algorithm>

#include "cxpred/errors.hpp"
#include "cxpred/io.hpp"

namespace cxpred {

ScoringContext::ScoringContext(ModelBundle bundle) : bundle_(std::move(bundle)) {
  if (bundle_.approach == Approach::kTransaction) {
    transaction_encoder_.emplace(bundle_.transaction_encoder());
  } else {
    profile_encoder_.emplace(bundle_.profile_encoder());
  }
}

std::shared_ptr<const ScoringContext> ScoringContext::load(std::string_view document) {
  return std::make_shared<const ScoringContext>(deserialize(document));
}

const ProfileSpec& ScoringContext::profile_spec() const {
  if (!profile_encoder_) throw ConfigError("transaction model has no profile spec");
  return profile_encoder_->spec();
}

Votes ScoringContext::vote_transaction(const Transaction& txn) const {
  if (!transaction_encoder_) throw ConfigError("profile model cannot score single transactions");
  thread_local std::vector<double> x;
  x.resize(transaction_encoder_->schema().dimension());
  transaction_encoder_->encode_into(txn, x);
  return tally_votes(bundle_.model, x);
}

Label ScoringContext::score_transaction(const Transaction& txn) const {
  const Votes v = vote_transaction(txn);
  return majority(v.call, v.no_call);
}

Votes ScoringContext::vote_profile(const UserDayProfile& profile) const {
  if (!profile_encoder_) throw ConfigError("transaction model cannot score profiles");
  thread_local std::vector<double> x;
  x.resize(profile_encoder_->schema().dimension());
  profile_encoder_->encode_into(profile, x);
  return tally_votes(bundle_.model, x);
}

Label ScoringContext::score_profile(const UserDayProfile& profile) const {
  const Votes v = vote_profile(profile);
  return majority(v.call, v.no_call);
}

std::string format_verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["user_id"] = v.user_id;
  j["day"] = format_day(v.day);
  j["class"] = to_int(v.label);
  j["votes"] = {{"call", v.votes.call}, {"no_call", v.votes.no_call}};
  j["transactions"] = v.transactions;
  j["timestamp"] = format_timestamp(v.emitted_at);
  return j.dump();
}

SpeedLayer::SpeedLayer(std::shared_ptr<const ScoringContext> context, CloseSink on_close)
    : context_(std::move(context)), on_close_(std::move(on_close)) {
  if (!context_) throw ConfigError("speed layer needs a model");
}

void SpeedLayer::load_model(std::string_view document) { swap_context(ScoringContext::load(document)); }

void SpeedLayer::swap_context(std::shared_ptr<const ScoringContext> context) {
  if (!context) throw ConfigError("cannot swap in an empty model");
  if (context->approach() != context_->approach()) {
    throw ConfigError("swapped model uses a different approach than the running stream");
  }
  context_ = std::move(context);
  ++stats_.swaps;
}

void SpeedLayer::close_day(std::map<Day, std::unordered_map<std::string, UserState>>::iterator it) {
  if (on_close_) {
    std::vector<const Verdict*> ordered;
    ordered.reserve(it->second.size());
    for (const auto& [user, state] : it->second) ordered.push_back(&state.verdict);
    std::sort(ordered.begin(), ordered.end(), [](const Verdict* a, const Verdict* b) { return a->user_id < b->user_id; });
    for (const Verdict* v : ordered) on_close_(*v);
  }
  stats_.evicted += it->second.size();
  days_.erase(it);
}

void SpeedLayer::advance_watermark(Day day) {
  if (watermark_ && day <= *watermark_) return;
  watermark_ = day;
  const Day keep_from = day - std::chrono::days{1};
  while (!days_.empty() && days_.begin()->first < keep_from) close_day(days_.begin());
}

std::optional<Verdict> SpeedLayer::ingest(const Transaction& txn) {
  if (!is_well_formed(txn)) {
    ++stats_.malformed;
    return std::nullopt;
  }
  const Day day = txn.day();
  if (watermark_ && day < *watermark_ - std::chrono::days{1}) {
    ++stats_.late_dropped;
    return std::nullopt;
  }
  ++stats_.ingested;
  advance_watermark(day);

  auto [it, created] = days_[day].try_emplace(txn.user_id);
  UserState& state = it->second;
  if (created) {
    state.verdict.user_id = txn.user_id;
    state.verdict.day = day;
    if (context_->approach() == Approach::kProfile) {
      state.context = context_;
      state.profile.emplace(context_->profile_spec());
    }
  }

  Votes votes;
  if (context_->approach() == Approach::kTransaction) {
    votes = state.verdict.votes;
    (context_->score_transaction(txn) == Label::kCall ? votes.call : votes.no_call) += 1;
  } else {
    if (state.context != context_ && state.context->profile_spec() == context_->profile_spec()) {
      state.context = context_;
    }
    state.profile->add(txn);
    votes = state.context->vote_profile(state.profile->finalize(txn.user_id, day));
  }
  Verdict& v = state.verdict;
  v.votes = votes;
  ++v.transactions;
  v.emitted_at = txn.timestamp;
  const Label label = majority(votes.call, votes.no_call);
  if (label == v.label) return std::nullopt;
  v.label = label;
  ++stats_.emitted;
  return v;
}

std::optional<Verdict> SpeedLayer::ingest_line(std::string_view line, std::size_t line_no) {
  Transaction txn;
  try {
    txn = io::parse_transaction(line, line_no);
  } catch (const ParseError&) {
    ++stats_.malformed;
    return std::nullopt;
  }
  return ingest(txn);
}

Verdict SpeedLayer::query(const std::string& user_id, Day day) const {
  const auto d = days_.find(day);
  if (d != days_.end()) {
    const auto u = d->second.find(user_id);
    if (u != d->second.end()) return u->second.verdict;
  }
  throw NotFoundError("no live state for user " + user_id + " on " + format_day(day));
}

void SpeedLayer::flush() {
  while (!days_.empty()) close_day(days_.begin());
}

std::vector<Verdict> SpeedLayer::live_verdicts() const {
  std::vector<Verdict> out;
  for (const auto& [day, users] : days_) {
    for (const auto& [user, state] : users) out.push_back(state.verdict);
  }
  std::sort(out.begin(), out.end(), [](const Verdict& a, const Verdict& b) {
    return std::tie(a.user_id, a.day) < std::tie(b.user_id, b.day);
  });
  return out;
}

std::size_t SpeedLayer::live_keys() const {
  std::size_t n = 0;
  for (const auto& [day, users] : days_) n += users.size();
  return n;
}

PartitionedSpeedLayer::PartitionedSpeedLayer(std::shared_ptr<const ScoringContext> context, std::size_t partitions,
                                             SpeedLayer::CloseSink on_close)
    : on_close_(std::move(on_close)) {
  if (partitions == 0) throw ConfigError("need at least one partition");
  auto sink = [this](const Verdict& v) {
    if (!on_close_) return;
    std::lock_guard lock(sink_mutex_);
    on_close_(v);
  };
  for (std::size_t i = 0; i < partitions; ++i) {
    auto p = std::make_unique<Partition>();
    p->layer = std::make_unique<SpeedLayer>(context, sink);
    partitions_.push_back(std::move(p));
  }
}

std::size_t PartitionedSpeedLayer::partition_of(const std::string& user_id) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : user_id) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h % partitions_.size());
}

std::optional<Verdict> PartitionedSpeedLayer::ingest(const Transaction& txn) {
  Partition& p = *partitions_[partition_of(txn.user_id)];
  std::lock_guard lock(p.mutex);
  return p.layer->ingest(txn);
}

Verdict PartitionedSpeedLayer::query(const std::string& user_id, Day day) const {
  const Partition& p = *partitions_[partition_of(user_id)];
  std::lock_guard lock(p.mutex);
  return p.layer->query(user_id, day);
}

void PartitionedSpeedLayer::swap_context(std::shared_ptr<const ScoringContext> context) {
  for (auto& p : partitions_) {
    std::lock_guard lock(p->mutex);
    p->layer->swap_context(context);
  }
}

SpeedStats PartitionedSpeedLayer::stats() const {
  SpeedStats total;
  for (const auto& p : partitions_) {
    std::lock_guard lock(p->mutex);
    const SpeedStats& s = p->layer->stats();
    total.ingested += s.ingested;
    total.malformed += s.malformed;
    total.late_dropped += s.late_dropped;
    total.evicted += s.evicted;
    total.emitted += s.emitted;
    total.swaps += s.swaps;
  }
  return total;
}

void PartitionedSpeedLayer::flush() {
  for (auto& p : partitions_) {
    std::lock_guard lock(p->mutex);
    p->layer->flush();
  }
}

}  // namespace cxpred
