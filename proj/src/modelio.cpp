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

#include "cxpred/modelio.hpp"

#include <cstdio>
#include <map>

#include "cxpred/errors.hpp"
#include "cxpred/io.hpp"

namespace cxpred {
namespace {

using ojson = nlohmann::ordered_json;

std::string real(double v) { return io::format_double(v); }

double parse_real(const ojson& j, const char* what) {
  if (!j.is_string()) throw StructuralError(std::string(what) + ": expected a decimal string");
  const auto v = io::parse_double(j.get<std::string>());
  if (!v) throw StructuralError(std::string(what) + ": bad decimal '" + j.get<std::string>() + "'");
  return *v;
}

ojson params_json(const TreeParams& p) {
  return ojson{{"min_split", p.min_split}, {"max_depth", p.max_depth}, {"cp", real(p.cp)}};
}

TreeParams params_from(const ojson& j) {
  TreeParams p;
  p.min_split = j.at("min_split").get<std::size_t>();
  p.max_depth = j.at("max_depth").get<std::size_t>();
  p.cp = parse_real(j.at("cp"), "cp");
  return p;
}

ojson rare_map_json(const RareValueMap& m) {
  return ojson{{"min_users", m.min_users}, {"other", m.other_label}, {"retained", m.retained}};
}

RareValueMap rare_map_from(const ojson& j) {
  RareValueMap m;
  m.min_users = j.at("min_users").get<std::size_t>();
  m.other_label = j.at("other").get<std::string>();
  m.retained = j.at("retained").get<std::vector<std::string>>();
  return m;
}

ojson schema_json(const FeatureSchema& schema) {
  ojson blocks = ojson::array();
  for (const auto& b : schema.blocks()) {
    ojson jb;
    jb["name"] = b.name;
    jb["kind"] = b.kind == DimensionKind::kBinary ? "binary" : "real";
    jb["offset"] = b.offset;
    jb["width"] = b.width;
    if (b.vocabulary) {
      jb["field"] = b.vocabulary->field();
      jb["categories"] = b.vocabulary->categories();
      jb["other_bit"] = b.vocabulary->has_other_bit();
    } else {
      jb["dimensions"] = b.dimension_names;
    }
    blocks.push_back(std::move(jb));
  }
  return ojson{{"dimension", schema.dimension()}, {"blocks", std::move(blocks)}};
}

FeatureSchema schema_from(const ojson& j) {
  FeatureSchema schema;
  for (const auto& jb : j.at("blocks")) {
    const auto name = jb.at("name").get<std::string>();
    const auto kind = jb.at("kind").get<std::string>();
    if (kind == "binary") {
      schema.add_categorical(name, Vocabulary(jb.at("field").get<std::string>(),
                                              jb.at("categories").get<std::vector<std::string>>(),
                                              jb.at("other_bit").get<bool>()));
    } else if (kind == "real") {
      schema.add_real(name, jb.at("dimensions").get<std::vector<std::string>>());
    } else {
      throw StructuralError("unknown block kind '" + kind + "'");
    }
    const FeatureBlock& added = schema.blocks().back();
    if (added.offset != jb.at("offset").get<std::size_t>() || added.width != jb.at("width").get<std::size_t>()) {
      throw StructuralError("block '" + name + "' offset/width disagree with its contents");
    }
  }
  if (schema.dimension() != j.at("dimension").get<std::size_t>()) {
    throw StructuralError("schema dimension disagrees with its blocks");
  }
  return schema;
}

ojson tree_json(const DecisionTree& tree) {
  ojson nodes = ojson::array();
  for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
    const TreeNode& n = tree.nodes()[id];
    ojson jn;
    jn["id"] = id;
    if (n.leaf) {
      jn["kind"] = "leaf";
      jn["class"] = to_int(n.label());
      jn["counts"] = {n.n_neg, n.n_pos};
    } else {
      jn["kind"] = "split";
      jn["feature"] = n.feature;
      jn["test"] = n.binary ? "eq1" : "le";
      jn["threshold"] = real(n.threshold);
      jn["left"] = n.left;
      jn["right"] = n.right;
      jn["counts"] = {n.n_neg, n.n_pos};
      jn["improvement"] = real(n.improvement);
    }
    nodes.push_back(std::move(jn));
  }
  return ojson{{"group", tree.group_name()}, {"params", params_json(tree.params())}, {"nodes", std::move(nodes)}};
}

DecisionTree tree_from(const ojson& j) {
  const auto& jnodes = j.at("nodes");
  std::vector<TreeNode> nodes(jnodes.size());
  std::vector<bool> filled(jnodes.size(), false);
  for (const auto& jn : jnodes) {
    const auto id = jn.at("id").get<std::int64_t>();
    if (id < 0 || static_cast<std::size_t>(id) >= nodes.size() || filled[id]) {
      throw StructuralError("bad or duplicate node id " + std::to_string(id));
    }
    filled[id] = true;
    TreeNode& n = nodes[id];
    const auto counts = jn.at("counts").get<std::vector<std::uint64_t>>();
    if (counts.size() != 2) throw StructuralError("node counts must be [neg, pos]");
    n.n_neg = counts[0];
    n.n_pos = counts[1];
    const auto kind = jn.at("kind").get<std::string>();
    if (kind == "leaf") {
      n.leaf = true;
      if (jn.at("class").get<int>() != to_int(n.label())) {
        throw StructuralError("leaf " + std::to_string(id) + " class disagrees with its counts");
      }
    } else if (kind == "split") {
      n.leaf = false;
      n.feature = jn.at("feature").get<std::uint32_t>();
      const auto test = jn.at("test").get<std::string>();
      if (test != "eq1" && test != "le") throw StructuralError("unknown split test '" + test + "'");
      n.binary = test == "eq1";
      n.threshold = parse_real(jn.at("threshold"), "threshold");
      n.left = jn.at("left").get<std::int32_t>();
      n.right = jn.at("right").get<std::int32_t>();
      n.improvement = parse_real(jn.at("improvement"), "improvement");
    } else {
      throw StructuralError("unknown node kind '" + kind + "'");
    }
  }
  return DecisionTree(std::move(nodes), j.at("group").get<std::string>(), params_from(j.at("params")));
}

ojson metadata_json(const TrainingMetadata& m) {
  ojson j;
  j["first_train_day"] = m.first_train_day ? format_day(*m.first_train_day) : "";
  j["last_train_day"] = m.last_train_day ? format_day(*m.last_train_day) : "";
  j["seed"] = m.seed;
  j["train_samples"] = m.train_samples;
  j["train_positives"] = m.train_positives;
  return j;
}

TrainingMetadata metadata_from(const ojson& j) {
  TrainingMetadata m;
  auto day = [](const ojson& v) -> std::optional<Day> {
    const auto s = v.get<std::string>();
    if (s.empty()) return std::nullopt;
    const auto d = parse_day(s);
    if (!d) throw StructuralError("bad day '" + s + "'");
    return d;
  };
  m.first_train_day = day(j.at("first_train_day"));
  m.last_train_day = day(j.at("last_train_day"));
  m.seed = j.at("seed").get<std::uint64_t>();
  m.train_samples = j.at("train_samples").get<std::uint64_t>();
  m.train_positives = j.at("train_positives").get<std::uint64_t>();
  return m;
}

ojson encoder_json(const ModelBundle& b) {
  if (b.approach == Approach::kTransaction) {
    return ojson{{"app_types", ojson{{"default", b.app_types.default_type}, {"map", b.app_types.types}}}};
  }
  const ProfileSpec& p = *b.profile;
  return ojson{{"top_apps", p.top_apps},
               {"cells", rare_map_json(p.cells)},
               {"devices", rare_map_json(p.devices)},
               {"ces",
                {{"poor_download_throughput", real(p.ces.poor_download_throughput)},
                 {"good_download_throughput", real(p.ces.good_download_throughput)},
                 {"good_retransmission_rate", real(p.ces.good_retransmission_rate)},
                 {"poor_retransmission_rate", real(p.ces.poor_retransmission_rate)}}}};
}

}  // namespace

TransactionEncoder ModelBundle::transaction_encoder() const {
  if (approach != Approach::kTransaction) throw ConfigError("model was trained on profiles, not transactions");
  std::vector<Vocabulary> vocabs;
  for (const auto& b : model.schema().blocks()) {
    if (b.vocabulary) vocabs.push_back(*b.vocabulary);
  }
  return TransactionEncoder(std::move(vocabs), app_types);
}

ProfileEncoder ModelBundle::profile_encoder() const {
  if (approach != Approach::kProfile || !profile) throw ConfigError("model was trained on transactions, not profiles");
  return ProfileEncoder(*profile);
}

std::string body_checksum(const ojson& body) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : body.dump()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string serialize(const ModelBundle& bundle) {
  if (bundle.approach == Approach::kProfile && !bundle.profile) throw ConfigError("profile model without profile spec");
  ojson body;
  body["approach"] = static_cast<int>(bundle.approach);
  body["schema"] = schema_json(bundle.model.schema());
  body["encoder"] = encoder_json(bundle);
  ojson groups = ojson::array();
  for (const auto& g : bundle.model.groups()) {
    groups.push_back(ojson{{"name", g.name}, {"blocks", g.blocks}, {"params", params_json(g.params)}});
  }
  body["groups"] = std::move(groups);
  ojson trees = ojson::array();
  for (const auto& t : bundle.model.trees()) trees.push_back(tree_json(t));
  body["trees"] = std::move(trees);
  body["metadata"] = metadata_json(bundle.model.metadata());

  ojson doc;
  doc["format"] = kModelFormatName;
  doc["version"] = kModelFormatVersion;
  doc["checksum"] = body_checksum(body);
  doc["body"] = std::move(body);
  return doc.dump(1) + "\n";
}

ModelBundle deserialize(std::string_view bytes) {
  ojson doc;
  try {
    doc = ojson::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptionError(std::string("model document is not parseable (truncated?): ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", std::string()) != kModelFormatName) {
      throw CorruptionError("not a " + std::string(kModelFormatName) + " document");
    }
    const auto version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw UnsupportedVersionError("unsupported model format version " + std::to_string(version));
    }
    const ojson& body = doc.at("body");
    if (doc.at("checksum").get<std::string>() != body_checksum(body)) {
      throw CorruptionError("model checksum mismatch");
    }

    const auto approach_id = body.at("approach").get<int>();
    if (approach_id != 1 && approach_id != 2) throw StructuralError("unknown approach " + std::to_string(approach_id));
    const auto approach = static_cast<Approach>(approach_id);
    FeatureSchema schema = schema_from(body.at("schema"));

    std::vector<FeatureGroup> groups;
    for (const auto& jg : body.at("groups")) {
      groups.push_back({jg.at("name").get<std::string>(), jg.at("blocks").get<std::vector<std::string>>(),
                        params_from(jg.at("params"))});
    }
    std::vector<DecisionTree> trees;
    for (const auto& jt : body.at("trees")) trees.push_back(tree_from(jt));
    for (const auto& t : trees) {
      for (const auto f : t.split_features()) {
        if (f >= schema.dimension()) throw StructuralError("split feature outside schema");
      }
    }

    const ojson& enc = body.at("encoder");
    AppTypeMap app_types;
    std::optional<ProfileSpec> profile;
    if (approach == Approach::kTransaction) {
      app_types.default_type = enc.at("app_types").at("default").get<std::string>();
      app_types.types = enc.at("app_types").at("map").get<std::map<std::string, std::string>>();
    } else {
      ProfileSpec p;
      p.top_apps = enc.at("top_apps").get<std::vector<std::string>>();
      p.cells = rare_map_from(enc.at("cells"));
      p.devices = rare_map_from(enc.at("devices"));
      const ojson& c = enc.at("ces");
      p.ces.poor_download_throughput = parse_real(c.at("poor_download_throughput"), "ces");
      p.ces.good_download_throughput = parse_real(c.at("good_download_throughput"), "ces");
      p.ces.good_retransmission_rate = parse_real(c.at("good_retransmission_rate"), "ces");
      p.ces.poor_retransmission_rate = parse_real(c.at("poor_retransmission_rate"), "ces");
      profile = std::move(p);
    }

    ModelBundle bundle{approach, RrfModel(std::move(schema), std::move(groups), std::move(trees),
                                          metadata_from(body.at("metadata"))),
                       std::move(app_types), std::move(profile)};
    const FeatureSchema rebuilt = approach == Approach::kTransaction ? bundle.transaction_encoder().schema()
                                                                     : bundle.profile_encoder().schema();
    if (!(rebuilt == bundle.model.schema())) throw StructuralError("encoder payload does not reproduce the schema");
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("model document is missing or mistypes a field: ") + e.what());
  } catch (const ConfigError& e) {
    throw StructuralError(std::string("model document is inconsistent: ") + e.what());
  }
}

}  // namespace cxpred
