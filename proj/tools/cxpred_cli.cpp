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

// cxpred command-line entry point: batch stages and the stream scorer.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "cxpred/errors.hpp"
#include "cxpred/io.hpp"
#include "cxpred/labeler.hpp"
#include "cxpred/modelio.hpp"
#include "cxpred/pipeline.hpp"
#include "cxpred/speed.hpp"
#include "cxpred/synthgen.hpp"
#include "json.hpp"

namespace {

using namespace cxpred;

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

struct DataPaths {
  std::string config;
  std::string transactions;
  std::string care_calls;
};

void add_data_options(CLI::App* cmd, DataPaths& p, bool need_config) {
  auto* c = cmd->add_option("--config", p.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  if (need_config) c->required();
  cmd->add_option("--transactions", p.transactions, "Transaction file (overrides config)");
  cmd->add_option("--calls", p.care_calls, "Care-call file (overrides config)");
}

// Relative paths inside a config resolve against the config's directory and are
// kept absolute, so a manifest's config block can be rerun from anywhere;
// "app_types" may name a JSON file instead of holding the map inline.
nlohmann::json resolve_config_paths(nlohmann::json j, const std::string& config_path) {
  if (!j.is_object()) return j;
  const auto base = std::filesystem::path(config_path).parent_path();
  auto resolve = [&](const std::string& key) {
    if (!j.contains(key) || !j[key].is_string()) return;
    const std::filesystem::path path = j[key].get<std::string>();
    if (path.is_relative()) j[key] = std::filesystem::absolute(base / path).lexically_normal().string();
  };
  for (const char* key : {"transactions", "care_calls", "output_dir", "app_types"}) resolve(key);
  if (j.contains("app_types") && j["app_types"].is_string()) {
    const std::string path = j["app_types"].get<std::string>();
    if (!std::filesystem::exists(path)) throw ConfigError("no such app types file: " + path);
    j["app_types"] = read_json(path);
  }
  return j;
}

ExperimentConfig load_experiment(DataPaths& p) {
  ExperimentConfig c = experiment_config_from_json(resolve_config_paths(read_json(p.config), p.config));
  if (p.transactions.empty()) p.transactions = c.transactions_path;
  if (p.care_calls.empty()) p.care_calls = c.care_calls_path;
  return c;
}

Dataset load_data(const DataPaths& p) {
  if (p.transactions.empty() || p.care_calls.empty()) {
    throw ConfigError("transaction and care-call files are required (--transactions/--calls or config)");
  }
  for (const auto& f : {p.transactions, p.care_calls}) {
    if (!std::filesystem::exists(f)) throw ConfigError("no such file: " + f);
  }
  Dataset ds = io::load_dataset(p.transactions, p.care_calls);
  normalize(ds);
  return ds;
}

void write_or_print(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
  } else {
    io::write_file(path, bytes);
  }
}

// One "user_id,day,class" line per (user, day), sorted.
std::string format_final_verdicts(const std::map<UserDayKey, Label>& verdicts) {
  std::string out = "user_id,day,class\n";
  for (const auto& [k, l] : verdicts) {
    out += k.user_id + "," + format_day(k.day) + "," + std::to_string(to_int(l)) + "\n";
  }
  return out;
}

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out_dir) {
  GeneratorConfig g;
  if (!config_path.empty()) g = generator_config_from_json(read_json(config_path));
  if (seed) g.seed = *seed;
  Dataset ds = generate(g);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  io::save_dataset(ds, dir / "transactions.csv", dir / "care_calls.csv");
  io::write_file(dir / "generator.json", to_json(g).dump(2) + "\n");
  io::write_file(dir / "stats.json", to_json(summarize(ds)).dump(2) + "\n");
  io::write_file(dir / "app_types.json", [] {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [app, type] : synthetic_app_types().types) j[app] = type;
    return j.dump(2) + "\n";
  }());
  std::cerr << "wrote " << ds.transactions.size() << " transactions and " << ds.care_calls.size() << " care calls to "
            << out_dir << "\n";
  return 0;
}

int cmd_validate(const DataPaths& p, bool as_json) {
  Dataset ds = load_data(p);
  ValidationReport r = validate_dataset(ds);
  if (as_json) {
    nlohmann::ordered_json j;
    j["errors"] = r.error_count();
    j["warnings"] = r.issues.size() - r.error_count();
    j["span_defined"] = r.span_defined;
    j["absent_kpi_values"] = r.absent_kpi_values;
    j["orphan_calls"] = r.orphan_calls;
    auto& issues = j["issues"] = nlohmann::ordered_json::array();
    for (const auto& i : r.issues) {
      issues.push_back({{"severity", i.severity == ValidationIssue::Severity::kError ? "error" : "warning"},
                        {"file", i.in_calls ? "care_calls" : "transactions"},
                        {"row", i.row},
                        {"kind", i.kind},
                        {"message", i.message}});
    }
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& i : r.issues) {
      std::cout << (i.severity == ValidationIssue::Severity::kError ? "error" : "warning") << ": "
                << (i.in_calls ? "care_calls" : "transactions") << " row " << i.row << " (line " << i.row + 2
                << "): " << i.kind;
      if (!i.message.empty()) std::cout << " (" << i.message << ")";
      std::cout << "\n";
    }
    std::cout << r.error_count() << " errors, " << (r.issues.size() - r.error_count()) << " warnings, "
              << r.absent_kpi_values << " absent KPI values\n";
  }
  return r.ok() ? 0 : kExitValidation;
}

int cmd_label(DataPaths& p, const std::string& out) {
  ExperimentConfig c = load_experiment(p);
  Dataset ds = load_data(p);
  std::vector<Day> days;
  for (const auto& t : ds.transactions) days.push_back(t.day());
  SplitResult split = temporal_split(days, SplitSpec{c.test_day});
  if (c.approach == Approach::kTransaction) {
    auto labels = label_approach1(ds);
    TransactionEncoder enc(build_vocabularies(ds.transactions, split.train, c.vocabulary, c.app_types), c.app_types);
    auto rows = all_rows(ds.transactions.size());
    FeatureMatrix x = enc.encode_rows(ds.transactions, rows);
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& t : ds.transactions) keys.emplace_back(t.user_id, format_timestamp(t.timestamp));
    write_or_print(out, format_feature_table(enc.schema(), x, keys, "timestamp", labels));
  } else {
    const auto& pc = *c.profiler;
    auto maps = build_rare_value_maps(ds.transactions, split.train, pc.cell_min_users, pc.device_min_users);
    ProfileSpec spec{select_top_apps(ds.transactions, split.train, pc.top_apps), maps.cells, maps.devices, pc.ces};
    auto profiles = build_profiles(ds.transactions, all_rows(ds.transactions.size()), spec);
    auto labels = label_approach2(profiles, ds.care_calls);
    ProfileEncoder enc(spec);
    FeatureMatrix x(profiles.size(), enc.schema().dimension());
    std::vector<std::pair<std::string, std::string>> keys;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      enc.encode_into(profiles[i], x.row(i));
      keys.emplace_back(profiles[i].user_id, format_day(profiles[i].day));
    }
    write_or_print(out, format_feature_table(enc.schema(), x, keys, "day", labels.labels));
    std::cerr << labels.orphan_call_days << " orphan call-days without a profile\n";
  }
  return 0;
}

int cmd_train(DataPaths& p, const std::string& model_out) {
  ExperimentConfig c = load_experiment(p);
  Dataset ds = load_data(p);
  ModelBundle bundle = train_model(ds, c);
  io::write_file(model_out, serialize(bundle));
  std::cerr << "trained " << bundle.model.size() << " trees on " << bundle.model.metadata().train_samples
            << " samples; wrote " << model_out << "\n";
  return 0;
}

int cmd_score(const std::string& model_in, const std::string& txn_path, const std::string& out) {
  ModelBundle bundle = deserialize(io::read_file(model_in));
  std::ifstream in(txn_path);
  if (!in) throw ConfigError("no such file: " + txn_path);
  Dataset ds;
  ds.transactions = io::read_transactions(in);
  normalize(ds);
  auto verdicts = batch_user_day_verdicts(bundle, ds.transactions, all_rows(ds.transactions.size()));
  write_or_print(out, format_final_verdicts(verdicts));
  return 0;
}

int cmd_evaluate(DataPaths& p, const std::string& model_in, std::string out_dir) {
  ExperimentConfig c = load_experiment(p);
  if (out_dir.empty()) out_dir = c.output_dir;
  if (out_dir.empty()) throw ConfigError("an output directory is required (--out-dir or config output_dir)");
  Dataset ds = load_data(p);
  ModelBundle bundle = model_in.empty() ? train_model(ds, c) : deserialize(io::read_file(model_in));
  ExperimentResult r = evaluate_model(ds, bundle, c);
  write_experiment_outputs(r, out_dir);
  std::cout << format_metrics_table({{"model", r.model_user_day}, {"baseline", r.baseline_user_day}}) << "\n"
            << format_improvement_table(r.improvement);
  return 0;
}

int cmd_run(DataPaths& p, std::string out_dir) {
  ExperimentConfig c = load_experiment(p);
  if (out_dir.empty()) out_dir = c.output_dir;
  if (out_dir.empty()) throw ConfigError("an output directory is required (--out-dir or config output_dir)");
  Dataset ds = load_data(p);
  ExperimentResult r = run_experiment(ds, c);
  write_experiment_outputs(r, out_dir);
  std::cout << format_metrics_table({{"model", r.model_user_day}, {"baseline", r.baseline_user_day}}) << "\n"
            << format_improvement_table(r.improvement);
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path) {
  nlohmann::json a = read_json(a_path);
  MetricsReport ra, rb;
  if (b_path.empty()) {
    if (!a.contains("model") || !a.contains("baseline")) throw ConfigError(a_path + ": expected model and baseline");
    ra = metrics_from_json(a.at("model"));
    rb = metrics_from_json(a.at("baseline"));
  } else {
    nlohmann::json b = read_json(b_path);
    ra = metrics_from_json(a.contains("model") ? a.at("model") : a);
    rb = metrics_from_json(b.contains("model") ? b.at("model") : b);
  }
  std::cout << format_improvement_table(compare(ra, rb));
  return 0;
}

struct StreamOptions {
  std::string model_in;
  std::string mode;
  std::string replay;
  double speedup = 0.0;
  std::string state_dump;
  std::size_t partitions = 1;
  std::string swap_model;
  std::size_t swap_after = 0;
};

int cmd_stream(const StreamOptions& o) {
  auto ctx = ScoringContext::load(io::read_file(o.model_in));
  const Approach want = o.mode == "approach1" ? Approach::kTransaction : Approach::kProfile;
  if (ctx->approach() != want) throw ConfigError("model was trained for a different approach than --mode " + o.mode);

  std::map<UserDayKey, Label> finals;
  std::mutex finals_mutex;
  auto sink = [&](const Verdict& v) {
    std::lock_guard lock(finals_mutex);
    finals[UserDayKey{v.user_id, v.day}] = v.label;
  };
  PartitionedSpeedLayer layer(ctx, std::max<std::size_t>(1, o.partitions), sink);

  std::size_t malformed = 0;
  auto feed = [&](const Transaction& t) {
    if (auto v = layer.ingest(t)) std::cout << format_verdict_json(*v) << "\n";
  };
  auto parse = [&](const std::string& line, std::size_t line_no) -> std::optional<Transaction> {
    if (line.empty() || (line_no == 1 && line == io::transaction_header())) return std::nullopt;
    try {
      return io::parse_transaction(line, line_no);
    } catch (const ParseError& e) {
      ++malformed;
      std::cerr << "skipping malformed line " << line_no << ": " << e.what() << "\n";
      return std::nullopt;
    }
  };

  std::size_t ingested = 0;
  auto maybe_swap = [&] {
    if (!o.swap_model.empty() && ingested == o.swap_after) {
      layer.swap_context(ScoringContext::load(io::read_file(o.swap_model)));
      std::cerr << "swapped model after " << ingested << " transactions\n";
    }
  };
  std::string line;
  std::size_t line_no = 0;
  if (!o.replay.empty()) {
    // A replay presents the file's records in timestamp order; ties keep file order.
    std::ifstream file(o.replay);
    if (!file) throw ConfigError("no such file: " + o.replay);
    std::vector<Transaction> txns;
    while (std::getline(file, line)) {
      if (auto t = parse(line, ++line_no)) txns.push_back(std::move(*t));
    }
    std::stable_sort(txns.begin(), txns.end(),
                     [](const Transaction& a, const Transaction& b) { return a.timestamp < b.timestamp; });
    const auto start = std::chrono::steady_clock::now();
    for (const auto& t : txns) {
      if (o.speedup > 0.0) {
        const double offset = static_cast<double>((t.timestamp - txns.front().timestamp).count()) / o.speedup;
        std::this_thread::sleep_until(start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                  std::chrono::duration<double>(offset)));
      }
      maybe_swap();
      feed(t);
      ++ingested;
    }
  } else {
    while (std::getline(std::cin, line)) {
      if (auto t = parse(line, ++line_no)) {
        maybe_swap();
        feed(*t);
        ++ingested;
      }
    }
  }
  layer.flush();
  if (!o.state_dump.empty()) io::write_file(o.state_dump, format_final_verdicts(finals));
  const SpeedStats stats = layer.stats();
  std::cerr << ingested << " transactions scored, " << malformed << " malformed lines skipped, "
            << stats.late_dropped << " late transactions dropped, " << stats.emitted << " verdicts emitted, "
            << finals.size() << " user-days\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cxpred: customer-experience prediction with restricted random forests"};
  app.require_subcommand(1);

  std::string gen_config, gen_out = "data";
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic data feed and care-call log");
  gen->add_option("--config", gen_config, "Generator config (JSON)")->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_seed, "Override the config seed");
  gen->add_option("--out-dir", gen_out, "Output directory");

  DataPaths val_paths;
  bool val_json = false;
  auto* val = app.add_subcommand("validate", "Check dataset invariants");
  add_data_options(val, val_paths, false);
  val->add_flag("--json", val_json, "Print the report as JSON");

  DataPaths label_paths;
  std::string label_out;
  auto* lab = app.add_subcommand("label", "Write the labelled feature table");
  add_data_options(lab, label_paths, true);
  lab->add_option("--out", label_out, "Output file (default stdout)");

  DataPaths train_paths;
  std::string model_out;
  auto* tr = app.add_subcommand("train", "Train a model on the days before the test day");
  add_data_options(tr, train_paths, true);
  tr->add_option("--model-out", model_out, "Model document path")->required();

  std::string score_model, score_txns, score_out;
  auto* sc = app.add_subcommand("score", "Batch-score a transaction file into per-user-day verdicts");
  sc->add_option("--model-in", score_model, "Model document")->required()->check(CLI::ExistingFile);
  sc->add_option("--transactions", score_txns, "Transaction file")->required();
  sc->add_option("--out", score_out, "Output file (default stdout)");

  DataPaths eval_paths;
  std::string eval_model, eval_out;
  auto* ev = app.add_subcommand("evaluate", "Score the test day and compare against the baseline");
  add_data_options(ev, eval_paths, true);
  ev->add_option("--model-in", eval_model, "Model document (default: train first)")->check(CLI::ExistingFile);
  ev->add_option("--out-dir", eval_out, "Artifact directory (overrides config)");

  DataPaths run_paths;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Train, evaluate and write all artifacts");
  add_data_options(run, run_paths, true);
  run->add_option("--out-dir", run_out, "Artifact directory (overrides config)");

  std::string cmp_a, cmp_b;
  auto* cmp = app.add_subcommand("compare", "Relative improvement table between two metric reports");
  cmp->add_option("a", cmp_a, "metrics.json (model vs baseline when given alone)")->required()->check(CLI::ExistingFile);
  cmp->add_option("b", cmp_b, "Second metrics.json")->check(CLI::ExistingFile);

  StreamOptions so;
  auto* st = app.add_subcommand("stream", "Score a transaction stream and emit verdict events");
  st->add_option("--model-in", so.model_in, "Model document")->required()->check(CLI::ExistingFile);
  st->add_option("--mode", so.mode, "Scoring approach")->required()->check(CLI::IsMember({"approach1", "approach2"}));
  st->add_option("--replay", so.replay, "Replay a transaction file instead of reading stdin");
  st->add_option("--speedup", so.speedup, "Pace the replay at N times the recorded rate (0: as fast as possible)")
      ->check(CLI::NonNegativeNumber);
  st->add_option("--state-dump", so.state_dump, "Write final per-user-day verdicts here at end of stream");
  st->add_option("--partitions", so.partitions, "Number of user-hash partitions")->check(CLI::PositiveNumber);
  st->add_option("--swap-model", so.swap_model, "Model document to hot-swap in")->check(CLI::ExistingFile);
  st->add_option("--swap-after", so.swap_after, "Swap after this many transactions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (*gen) return cmd_generate(gen_config, gen_seed, gen_out);
    if (*val) return cmd_validate(val_paths, val_json);
    if (*lab) return cmd_label(label_paths, label_out);
    if (*tr) return cmd_train(train_paths, model_out);
    if (*sc) return cmd_score(score_model, score_txns, score_out);
    if (*ev) return cmd_evaluate(eval_paths, eval_model, eval_out);
    if (*run) return cmd_run(run_paths, run_out);
    if (*cmp) return cmd_compare(cmp_a, cmp_b);
    if (*st) return cmd_stream(so);
  } catch (const ConfigError& e) {
    std::cerr << stage << ": configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << stage << ": parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << stage << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
