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

#include "cxpred/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cxpred/errors.hpp"
#include "cxpred/io.hpp"
#include "cxpred/labeler.hpp"
#include "cxpred/rng.hpp"

namespace cxpred {
namespace {

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("unknown field '" + it.key() + "' in " + std::string(where));
  }
}

TrainingMetadata metadata_for(const std::vector<Day>& days, std::span<const Label> labels, std::uint64_t seed) {
  TrainingMetadata m;
  m.seed = seed;
  m.train_samples = labels.size();
  m.train_positives = static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), Label::kCall));
  if (!days.empty()) {
    auto [lo, hi] = std::minmax_element(days.begin(), days.end());
    m.first_train_day = *lo;
    m.last_train_day = *hi;
  }
  return m;
}

std::vector<FeatureGroup> with_params(std::vector<FeatureGroup> groups, const ExperimentConfig& c) {
  for (auto& g : groups) {
    if (c.tree_params) g.params = *c.tree_params;
    if (auto it = c.group_params.find(g.name); it != c.group_params.end()) g.params = it->second;
  }
  return groups;
}

TreeParams tree_params_from_json(const nlohmann::json& t, TreeParams p, std::string_view where) {
  if (!t.is_object()) throw ConfigError(std::string(where) + " must be an object");
  reject_unknown(t, {"min_split", "max_depth", "cp"}, where);
  p.min_split = field_or(t, "min_split", p.min_split);
  p.max_depth = field_or(t, "max_depth", p.max_depth);
  p.cp = field_or(t, "cp", p.cp);
  return p;
}

nlohmann::ordered_json tree_params_json(const TreeParams& p) {
  return {{"min_split", p.min_split}, {"max_depth", p.max_depth}, {"cp", p.cp}};
}

std::uint64_t bag_seed(const ExperimentConfig& c) { return derive_seed(c.seed, "bags"); }

// Per-day mode: day i (in date order) bags with derive_seed(bags, "day", i) and
// its groups are renamed "<group>@<day>".
RrfModel train_forest(const FeatureMatrix& x, const std::vector<Label>& y, const std::vector<Day>& days,
                      const FeatureSchema& schema, const std::vector<FeatureGroup>& groups,
                      const ExperimentConfig& config) {
  BagSpec bag{config.negatives, bag_seed(config)};
  if (config.training == TrainingMode::kPooled) {
    return train_rrf(x, y, schema, groups, bag, metadata_for(days, y, config.seed));
  }

  std::map<Day, std::vector<std::size_t>> by_day;
  for (std::size_t i = 0; i < days.size(); ++i) by_day[days[i]].push_back(i);
  std::vector<FeatureGroup> all_groups;
  std::vector<DecisionTree> all_trees;
  std::uint64_t index = 0;
  for (const auto& [day, idx] : by_day) {
    FeatureMatrix xd(idx.size(), x.cols());
    std::vector<Label> yd;
    yd.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto src = x.row(idx[r]);
      std::copy(src.begin(), src.end(), xd.row(r).begin());
      yd.push_back(y[idx[r]]);
    }
    auto day_groups = groups;
    for (auto& g : day_groups) g.name += "@" + format_day(day);
    try {
      const BagSpec day_bag{config.negatives, derive_seed(bag.seed, "day", index++)};
      RrfModel m = train_rrf(xd, yd, schema, day_groups, day_bag);
      all_groups.insert(all_groups.end(), m.groups().begin(), m.groups().end());
      all_trees.insert(all_trees.end(), m.trees().begin(), m.trees().end());
    } catch (const DataError& e) {
      throw DataError("training day " + format_day(day) + ": " + e.what());
    }
  }
  TrainingMetadata meta = metadata_for(days, y, config.seed);
  meta.seed = bag.seed;
  return RrfModel(schema, std::move(all_groups), std::move(all_trees), meta);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (approach == Approach::kProfile) {
    if (!profiler) throw ConfigError("approach 2 requires a profiler section");
    if (profiler->top_apps == 0) throw ConfigError("profiler.top_apps must be positive");
    profiler->ces.validate();
  }
  if (negatives && *negatives == 0) throw ConfigError("negatives must be positive");
  if (tree_params) tree_params->validate();
  for (const auto& [name, p] : group_params) {
    try {
      p.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("group " + name + ": " + e.what());
    }
  }
}

AppTypeMap app_types_from_json(const nlohmann::json& j) {
  AppTypeMap m;
  if (!j.is_object()) throw ConfigError("app types must be an object");
  const nlohmann::json* types = &j;
  if (j.contains("types")) {
    reject_unknown(j, {"types", "default"}, "app types");
    types = &j.at("types");
    m.default_type = field_or<std::string>(j, "default", m.default_type);
  }
  if (!types->is_object()) throw ConfigError("app types must map names to types");
  for (auto it = types->begin(); it != types->end(); ++it) {
    if (!it.value().is_string()) throw ConfigError("app type for '" + it.key() + "' must be a string");
    m.types.emplace(it.key(), it.value().get<std::string>());
  }
  return m;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  reject_unknown(j, {"approach", "test_day", "seed", "negatives", "training", "profiler", "vocabulary", "app_types",
                  "tree", "groups", "transactions", "care_calls", "output_dir"},
                 "experiment config");
  ExperimentConfig c;
  int approach = field_or(j, "approach", 1);
  if (approach != 1 && approach != 2) throw ConfigError("approach must be 1 or 2");
  c.approach = static_cast<Approach>(approach);
  if (j.contains("test_day") && !j.at("test_day").is_null()) {
    auto d = parse_day(field_or<std::string>(j, "test_day", ""));
    if (!d) throw ConfigError("test_day must be YYYY-MM-DD");
    c.test_day = *d;
  }
  c.seed = field_or(j, "seed", c.seed);
  c.transactions_path = field_or(j, "transactions", c.transactions_path);
  c.care_calls_path = field_or(j, "care_calls", c.care_calls_path);
  c.output_dir = field_or(j, "output_dir", c.output_dir);
  if (j.contains("negatives") && !j.at("negatives").is_null()) c.negatives = field_or<std::size_t>(j, "negatives", 0);
  if (j.contains("training")) {
    const auto mode = field_or<std::string>(j, "training", "");
    if (mode == "pooled") {
      c.training = TrainingMode::kPooled;
    } else if (mode == "per_day") {
      c.training = TrainingMode::kPerDay;
    } else {
      throw ConfigError("training must be \"pooled\" or \"per_day\"");
    }
  }
  if (j.contains("profiler")) {
    const auto& p = j.at("profiler");
    if (!p.is_object()) throw ConfigError("profiler must be an object");
    reject_unknown(p, {"top_apps", "cell_min_users", "device_min_users", "ces"}, "profiler");
    ProfilerConfig pc;
    pc.top_apps = field_or(p, "top_apps", pc.top_apps);
    pc.cell_min_users = field_or(p, "cell_min_users", pc.cell_min_users);
    pc.device_min_users = field_or(p, "device_min_users", pc.device_min_users);
    if (p.contains("ces")) {
      const auto& cj = p.at("ces");
      if (!cj.is_object()) throw ConfigError("profiler.ces must be an object");
      reject_unknown(cj,
                     {"poor_download_throughput", "good_download_throughput", "good_retransmission_rate",
                      "poor_retransmission_rate"},
                     "profiler.ces");
      pc.ces.poor_download_throughput = field_or(cj, "poor_download_throughput", pc.ces.poor_download_throughput);
      pc.ces.good_download_throughput = field_or(cj, "good_download_throughput", pc.ces.good_download_throughput);
      pc.ces.good_retransmission_rate = field_or(cj, "good_retransmission_rate", pc.ces.good_retransmission_rate);
      pc.ces.poor_retransmission_rate = field_or(cj, "poor_retransmission_rate", pc.ces.poor_retransmission_rate);
    }
    c.profiler = pc;
  }
  if (j.contains("vocabulary")) {
    const auto& v = j.at("vocabulary");
    if (!v.is_object()) throw ConfigError("vocabulary must be an object");
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (it.key() != kApplicationTypeField && !cat_field_from_name(it.key()))
        throw ConfigError("vocabulary: unknown field '" + it.key() + "'");
      if (it.value().is_null() || it.value() == "full") {
        c.vocabulary[it.key()] = std::nullopt;
      } else if (it.value().is_number_unsigned() && it.value().get<std::size_t>() > 0) {
        c.vocabulary[it.key()] = it.value().get<std::size_t>();
      } else {
        throw ConfigError("vocabulary: '" + it.key() + "' must be \"full\" or a positive top-k");
      }
    }
  }
  if (j.contains("app_types")) c.app_types = app_types_from_json(j.at("app_types"));
  if (j.contains("tree")) c.tree_params = tree_params_from_json(j.at("tree"), TreeParams{}, "tree");
  if (j.contains("groups")) {
    const auto& g = j.at("groups");
    if (!g.is_object()) throw ConfigError("groups must be an object");
    for (auto it = g.begin(); it != g.end(); ++it) {
      c.group_params[it.key()] =
          tree_params_from_json(it.value(), c.tree_params.value_or(TreeParams{}), "groups." + it.key());
    }
  }
  c.validate();
  return c;
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["approach"] = static_cast<int>(c.approach);
  j["test_day"] = c.test_day ? nlohmann::ordered_json(format_day(*c.test_day)) : nlohmann::ordered_json(nullptr);
  j["seed"] = c.seed;
  if (!c.transactions_path.empty()) j["transactions"] = c.transactions_path;
  if (!c.care_calls_path.empty()) j["care_calls"] = c.care_calls_path;
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
  j["negatives"] = c.negatives ? nlohmann::ordered_json(*c.negatives) : nlohmann::ordered_json(nullptr);
  j["training"] = c.training == TrainingMode::kPooled ? "pooled" : "per_day";
  if (c.profiler) {
    const auto& p = *c.profiler;
    j["profiler"] = {{"top_apps", p.top_apps},
                     {"cell_min_users", p.cell_min_users},
                     {"device_min_users", p.device_min_users},
                     {"ces",
                      {{"poor_download_throughput", p.ces.poor_download_throughput},
                       {"good_download_throughput", p.ces.good_download_throughput},
                       {"good_retransmission_rate", p.ces.good_retransmission_rate},
                       {"poor_retransmission_rate", p.ces.poor_retransmission_rate}}}};
  }
  nlohmann::ordered_json v = nlohmann::ordered_json::object();
  for (const auto& [k, top] : c.vocabulary) v[k] = top ? nlohmann::ordered_json(*top) : nlohmann::ordered_json("full");
  j["vocabulary"] = v;
  nlohmann::ordered_json types = nlohmann::ordered_json::object();
  for (const auto& [k, t] : c.app_types.types) types[k] = t;
  j["app_types"] = {{"types", types}, {"default", c.app_types.default_type}};
  if (c.tree_params) j["tree"] = tree_params_json(*c.tree_params);
  if (!c.group_params.empty()) {
    nlohmann::ordered_json g = nlohmann::ordered_json::object();
    for (const auto& [name, p] : c.group_params) g[name] = tree_params_json(p);
    j["groups"] = g;
  }
  return j;
}

ModelBundle train_transaction_model(const Dataset& ds, std::span<const std::size_t> rows,
                                    std::span<const Label> labels, const ExperimentConfig& config) {
  config.validate();
  if (labels.size() != ds.transactions.size()) throw DataError("labels do not align with transactions");
  if (rows.empty()) throw DataError("no training data");
  TransactionEncoder enc(build_vocabularies(ds.transactions, rows, config.vocabulary, config.app_types),
                         config.app_types);
  FeatureMatrix x = enc.encode_rows(ds.transactions, rows);
  std::vector<Label> y;
  std::vector<Day> days;
  y.reserve(rows.size());
  for (auto r : rows) {
    y.push_back(labels[r]);
    days.push_back(ds.transactions[r].day());
  }
  auto groups = with_params(transaction_feature_groups(), config);
  RrfModel model = train_forest(x, y, days, enc.schema(), groups, config);
  return ModelBundle{Approach::kTransaction, std::move(model), config.app_types, std::nullopt};
}

ModelBundle train_profile_model(const Dataset& ds, std::span<const std::size_t> rows, const ExperimentConfig& config) {
  config.validate();
  if (!config.profiler) throw ConfigError("approach 2 requires a profiler section");
  if (rows.empty()) throw DataError("no training data");
  const auto& pc = *config.profiler;
  auto maps = build_rare_value_maps(ds.transactions, rows, pc.cell_min_users, pc.device_min_users);
  ProfileSpec spec{select_top_apps(ds.transactions, rows, pc.top_apps), maps.cells, maps.devices, pc.ces};
  auto profiles = build_profiles(ds.transactions, rows, spec);
  auto labels = label_approach2(profiles, ds.care_calls).labels;
  ProfileEncoder enc(spec);
  FeatureMatrix x(profiles.size(), enc.schema().dimension());
  std::vector<Day> days;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    enc.encode_into(profiles[i], x.row(i));
    days.push_back(profiles[i].day);
  }
  auto groups = with_params(profile_feature_groups(spec.top_apps), config);
  RrfModel model = train_forest(x, labels, days, enc.schema(), groups, config);
  return ModelBundle{Approach::kProfile, std::move(model), AppTypeMap{}, spec};
}

std::vector<Label> score_transactions(const ModelBundle& bundle, const std::vector<Transaction>& txns,
                                      std::span<const std::size_t> rows) {
  if (bundle.approach != Approach::kTransaction) throw ConfigError("transaction scoring needs an approach 1 model");
  TransactionEncoder enc = bundle.transaction_encoder();
  std::vector<double> buf(enc.schema().dimension());
  std::vector<Label> out;
  out.reserve(rows.size());
  for (auto r : rows) {
    enc.encode_into(txns[r], buf);
    out.push_back(predict_rrf(bundle.model, buf));
  }
  return out;
}

std::map<UserDayKey, Label> batch_user_day_verdicts(const ModelBundle& bundle, const std::vector<Transaction>& txns,
                                                    std::span<const std::size_t> rows) {
  std::map<UserDayKey, Label> out;
  if (bundle.approach == Approach::kTransaction) {
    auto preds = score_transactions(bundle, txns, rows);
    std::map<UserDayKey, Votes> votes;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto& v = votes[UserDayKey{txns[rows[i]].user_id, txns[rows[i]].day()}];
      (preds[i] == Label::kCall ? v.call : v.no_call) += 1;
    }
    for (const auto& [k, v] : votes) out.emplace(k, majority(v.call, v.no_call));
    return out;
  }
  ProfileEncoder enc = bundle.profile_encoder();
  std::vector<double> buf(enc.schema().dimension());
  for (const auto& p : build_profiles(txns, rows, enc.spec())) {
    enc.encode_into(p, buf);
    out.emplace(UserDayKey{p.user_id, p.day}, predict_rrf(bundle.model, buf));
  }
  return out;
}

std::map<UserDayKey, Label> user_day_truth(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                           const std::vector<CareCallRecord>& care_calls) {
  auto called = call_days(care_calls);
  std::map<UserDayKey, Label> out;
  for (auto r : rows) {
    const auto& t = txns[r];
    UserDayKey k{t.user_id, t.day()};
    if (out.count(k)) continue;
    out.emplace(k, called.count({t.user_id, k.day}) ? Label::kCall : Label::kNoCall);
  }
  return out;
}

namespace {

std::vector<Day> transaction_days(const Dataset& ds) {
  std::vector<Day> days;
  days.reserve(ds.transactions.size());
  for (const auto& t : ds.transactions) days.push_back(t.day());
  return days;
}

}  // namespace

ModelBundle train_model(const Dataset& ds, const ExperimentConfig& config) {
  config.validate();
  SplitResult split = temporal_split(transaction_days(ds), SplitSpec{config.test_day});
  if (config.approach == Approach::kTransaction) {
    return train_transaction_model(ds, split.train, label_approach1(ds), config);
  }
  return train_profile_model(ds, split.train, config);
}

ExperimentResult evaluate_model(const Dataset& ds, const ModelBundle& bundle, const ExperimentConfig& config) {
  config.validate();
  if (bundle.approach != config.approach) throw ConfigError("model approach does not match the experiment config");
  const std::vector<Day> days = transaction_days(ds);
  SplitResult split = temporal_split(days, SplitSpec{config.test_day});

  std::optional<MetricsReport> txn_metrics;
  std::vector<Label> labels1;
  if (config.approach == Approach::kTransaction) {
    labels1 = label_approach1(ds);
    auto preds = score_transactions(bundle, ds.transactions, split.test);
    std::vector<Label> truth;
    truth.reserve(split.test.size());
    for (auto r : split.test) truth.push_back(labels1[r]);
    txn_metrics = metrics(confusion(preds, truth), Granularity::kTransaction);
  }

  auto verdicts = batch_user_day_verdicts(bundle, ds.transactions, split.test);
  auto truth = user_day_truth(ds.transactions, split.test, ds.care_calls);
  MetricsReport model_report = metrics(confusion(verdicts, truth), Granularity::kUserDay);

  // Baseline: a coin biased by the previous day's positive rate, measured at the
  // approach's own sample granularity (transactions or user-days).
  std::vector<Label> tl;
  std::vector<Day> td;
  if (config.approach == Approach::kTransaction) {
    for (auto r : split.train) {
      tl.push_back(labels1[r]);
      td.push_back(days[r]);
    }
  } else {
    for (const auto& [k, l] : user_day_truth(ds.transactions, split.train, ds.care_calls)) {
      tl.push_back(l);
      td.push_back(k.day);
    }
  }
  double rate = 0.0;
  try {
    rate = baseline_rate_from_previous_day(tl, td, split.test_day);
  } catch (const DataError&) {
    rate = tl.empty() ? 0.0
                      : static_cast<double>(std::count(tl.begin(), tl.end(), Label::kCall)) /
                            static_cast<double>(tl.size());
  }
  const std::uint64_t baseline_seed = derive_seed(config.seed, "baseline");
  auto coin = biased_coin_baseline(truth.size(), rate, baseline_seed);
  std::map<UserDayKey, Label> baseline;
  std::size_t i = 0;
  for (const auto& [k, l] : truth) baseline.emplace(k, coin[i++]);
  MetricsReport baseline_report = metrics(confusion(baseline, truth), Granularity::kUserDay);

  nlohmann::ordered_json manifest;
  auto cfg = to_json(config);
  manifest["config"] = cfg;
  manifest["config_hash"] = body_checksum(cfg);
  manifest["seeds"] = {{"root", config.seed}, {"bags", bag_seed(config)}, {"baseline", baseline_seed}};
  auto span = ds.span();
  manifest["dataset"] = {{"transactions", ds.transactions.size()},
                         {"care_calls", ds.care_calls.size()},
                         {"first_day", span ? format_day(span->first) : ""},
                         {"last_day", span ? format_day(span->second) : ""}};
  manifest["test_day"] = format_day(split.test_day);
  manifest["train_samples"] = bundle.model.metadata().train_samples;
  manifest["train_positives"] = bundle.model.metadata().train_positives;
  manifest["test_user_days"] = truth.size();
  manifest["format_version"] = kModelFormatVersion;

  return ExperimentResult{bundle,
                          split.test_day,
                          model_report,
                          baseline_report,
                          txn_metrics,
                          rate,
                          compare(model_report, baseline_report),
                          ensemble_importance(bundle.model),
                          std::move(manifest)};
}

ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& config) {
  return evaluate_model(ds, train_model(ds, config), config);
}

std::string format_feature_table(const FeatureSchema& schema, const FeatureMatrix& x,
                                 const std::vector<std::pair<std::string, std::string>>& keys,
                                 std::string_view key_column, std::span<const Label> labels) {
  if (keys.size() != x.rows() && x.cols() != 0) throw DataError("feature table: keys and rows differ");
  if (!labels.empty() && labels.size() != keys.size()) throw DataError("feature table: labels and rows differ");
  std::string out = "user_id,";
  out += key_column;
  for (std::size_t d = 0; d < schema.dimension(); ++d) {
    out += ',';
    out += schema.dimension_name(d);
  }
  if (!labels.empty()) out += ",label";
  out += '\n';
  for (std::size_t r = 0; r < keys.size(); ++r) {
    out += keys[r].first;
    out += ',';
    out += keys[r].second;
    for (std::size_t d = 0; d < schema.dimension(); ++d) {
      out += ',';
      out += io::format_double(x.at(r, d));
    }
    if (!labels.empty()) {
      out += ',';
      out += std::to_string(to_int(labels[r]));
    }
    out += '\n';
  }
  return out;
}

void write_experiment_outputs(const ExperimentResult& r, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error("cannot create " + directory + ": " + ec.message());
  const fs::path dir(directory);
  io::write_file((dir / "model.json").string(), serialize(r.bundle));

  nlohmann::ordered_json m;
  m["test_day"] = format_day(r.test_day);
  m["baseline_rate"] = r.baseline_rate;
  m["model"] = to_json(r.model_user_day);
  m["baseline"] = to_json(r.baseline_user_day);
  if (r.model_transaction) m["model_transaction"] = to_json(*r.model_transaction);
  io::write_file((dir / "metrics.json").string(), m.dump(2) + "\n");

  std::string table = format_metrics_table({{"model", r.model_user_day}, {"baseline", r.baseline_user_day}});
  io::write_file((dir / "improvement.txt").string(), table + "\n" + format_improvement_table(r.improvement));

  std::ostringstream imp;
  imp << "group,rank,dimension,name,importance\n";
  const auto& schema = r.bundle.model.schema();
  for (const auto& g : r.importance) {
    for (std::size_t k = 0; k < g.ranked.size(); ++k) {
      imp << g.group << ',' << (k + 1) << ',' << g.ranked[k].first << ',' << schema.dimension_name(g.ranked[k].first)
          << ',' << io::format_double(g.ranked[k].second) << '\n';
    }
  }
  io::write_file((dir / "importance.csv").string(), imp.str());

  std::ostringstream plot;
  plot << "series,metric,value\n";
  auto emit = [&](const char* series, const MetricsReport& rep) {
    plot << series << ",precision," << io::format_double(rep.precision) << '\n';
    plot << series << ",recall," << io::format_double(rep.recall) << '\n';
    plot << series << ",f1," << io::format_double(rep.f1) << '\n';
  };
  emit("model", r.model_user_day);
  emit("baseline", r.baseline_user_day);
  io::write_file((dir / "plot_series.csv").string(), plot.str());

  io::write_file((dir / "manifest.json").string(), r.manifest.dump(2) + "\n");
}

}  // namespace cxpred
