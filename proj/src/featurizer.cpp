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

#include "cxpred/featurizer.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "cxpred/errors.hpp"

namespace cxpred {
namespace {

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  h ^= 0xff;  // field separator
  h *= 0x100000001b3ULL;
  return h;
}

// Canonical block order: column order with application_type after application.
std::vector<std::string> canonical_field_order() {
  std::vector<std::string> order;
  for (std::size_t i = 0; i < kNumCategoricalFields; ++i) {
    const auto f = static_cast<CatField>(i);
    order.emplace_back(cat_field_name(f));
    if (f == CatField::kApplication) order.emplace_back(kApplicationTypeField);
  }
  return order;
}

}  // namespace

Vocabulary::Vocabulary(std::string field, std::vector<std::string> categories, bool has_other_bit)
    : field_(std::move(field)), categories_(std::move(categories)), has_other_bit_(has_other_bit) {
  index_.reserve(categories_.size());
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (!index_.emplace(categories_[i], i).second) {
      throw ConfigError("vocabulary '" + field_ + "' lists '" + categories_[i] + "' twice");
    }
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view category) const {
  const auto it = index_.find(std::string(category));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Vocabulary::hot_position(std::string_view category) const {
  if (const auto i = index_of(category)) return i;
  if (has_other_bit_) return categories_.size();
  return std::nullopt;
}

void FeatureSchema::add_categorical(const std::string& name, Vocabulary vocabulary) {
  if (find(name)) throw ConfigError("duplicate feature block '" + name + "'");
  FeatureBlock b;
  b.name = name;
  b.kind = DimensionKind::kBinary;
  b.offset = dimension_;
  b.width = vocabulary.width();
  for (const auto& c : vocabulary.categories()) b.dimension_names.push_back(name + "=" + c);
  if (vocabulary.has_other_bit()) b.dimension_names.push_back(name + "=<other>");
  b.vocabulary = std::move(vocabulary);
  dimension_ += b.width;
  blocks_.push_back(std::move(b));
}

void FeatureSchema::add_real(const std::string& name, std::vector<std::string> dimension_names) {
  if (find(name)) throw ConfigError("duplicate feature block '" + name + "'");
  FeatureBlock b;
  b.name = name;
  b.kind = DimensionKind::kReal;
  b.offset = dimension_;
  b.width = dimension_names.size();
  b.dimension_names = std::move(dimension_names);
  dimension_ += b.width;
  blocks_.push_back(std::move(b));
}

const FeatureBlock* FeatureSchema::find(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const FeatureBlock& FeatureSchema::at(std::string_view name) const {
  if (const auto* b = find(name)) return *b;
  throw ConfigError("unknown feature block '" + std::string(name) + "'");
}

std::vector<DimensionKind> FeatureSchema::kinds() const {
  std::vector<DimensionKind> k;
  k.reserve(dimension_);
  for (const auto& b : blocks_) k.insert(k.end(), b.width, b.kind);
  return k;
}

const std::string& FeatureSchema::dimension_name(std::size_t index) const {
  for (const auto& b : blocks_) {
    if (index < b.offset + b.width) return b.dimension_names.at(index - b.offset);
  }
  throw std::out_of_range("dimension index out of range");
}

std::uint64_t FeatureSchema::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& b : blocks_) {
    h = fnv1a(h, b.name);
    h = fnv1a(h, b.kind == DimensionKind::kBinary ? "b" : "r");
    for (const auto& d : b.dimension_names) h = fnv1a(h, d);
  }
  return h;
}

bool FeatureSchema::operator==(const FeatureSchema& other) const {
  if (blocks_.size() != other.blocks_.size() || dimension_ != other.dimension_) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& a = blocks_[i];
    const auto& b = other.blocks_[i];
    if (a.name != b.name || a.kind != b.kind || a.offset != b.offset || a.width != b.width ||
        a.vocabulary != b.vocabulary || a.dimension_names != b.dimension_names) {
      return false;
    }
  }
  return true;
}

const std::string& AppTypeMap::type_of(const std::string& application) const {
  const auto it = types.find(application);
  return it == types.end() ? default_type : it->second;
}

VocabularySpec default_vocabulary_spec() {
  VocabularySpec spec;
  for (const auto& name : canonical_field_order()) spec[name] = std::nullopt;
  spec[std::string(cat_field_name(CatField::kCell))] = 16;
  spec[std::string(cat_field_name(CatField::kDeviceModel))] = 16;
  return spec;
}

std::vector<Vocabulary> build_vocabularies(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                           const VocabularySpec& spec, const AppTypeMap& app_types) {
  if (rows.empty()) throw DataError("cannot build vocabularies from an empty training set");
  for (const auto& [name, top_k] : spec) {
    if (name != kApplicationTypeField && !cat_field_from_name(name)) {
      throw ConfigError("unknown categorical field '" + name + "'");
    }
    if (top_k && *top_k == 0) throw ConfigError("top_k for '" + name + "' must be positive");
  }

  std::vector<Vocabulary> out;
  for (const auto& name : canonical_field_order()) {
    const auto it = spec.find(name);
    if (it == spec.end()) continue;
    const auto field = cat_field_from_name(name);

    std::unordered_map<std::string_view, std::size_t> freq;
    for (const std::size_t r : rows) {
      const Transaction& t = txns.at(r);
      const std::string& value = field ? t.field(*field) : app_types.type_of(t.field(CatField::kApplication));
      ++freq[value];
    }
    std::vector<std::pair<std::string_view, std::size_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    const bool truncated = it->second.has_value();
    if (truncated && ranked.size() > *it->second) ranked.resize(*it->second);
    std::vector<std::string> categories;
    categories.reserve(ranked.size());
    for (const auto& [value, count] : ranked) categories.emplace_back(value);
    out.emplace_back(name, std::move(categories), truncated);
  }
  return out;
}

TransactionEncoder::TransactionEncoder(std::vector<Vocabulary> vocabularies, AppTypeMap app_types)
    : vocabularies_(std::move(vocabularies)), app_types_(std::move(app_types)) {
  const auto order = canonical_field_order();
  std::size_t last_rank = 0;
  for (std::size_t v = 0; v < vocabularies_.size(); ++v) {
    const Vocabulary& vocab = vocabularies_[v];
    const auto rank = std::find(order.begin(), order.end(), vocab.field()) - order.begin();
    if (static_cast<std::size_t>(rank) == order.size()) {
      throw ConfigError("vocabulary for unknown field '" + vocab.field() + "'");
    }
    if (v > 0 && static_cast<std::size_t>(rank) <= last_rank) {
      throw ConfigError("vocabularies must be in canonical field order");
    }
    last_rank = static_cast<std::size_t>(rank);
    CategoricalSlot slot;
    if (vocab.field() != kApplicationTypeField) slot.field = cat_field_from_name(vocab.field());
    slot.vocabulary = v;
    slot.offset = schema_.dimension();
    slots_.push_back(slot);
    schema_.add_categorical(vocab.field(), vocab);
  }
  kpi_offset_ = schema_.dimension();
  std::vector<std::string> kpi_dims;
  for (int k = 1; k <= static_cast<int>(kNumKpis); ++k) {
    kpi_dims.push_back("kpi" + std::to_string(k) + ":" + std::string(kpi_name(k)));
  }
  schema_.add_real(std::string(kKpiBlock), std::move(kpi_dims));
}

std::size_t TransactionEncoder::encode_into(const Transaction& txn, std::span<double> out) const {
  if (out.size() != schema_.dimension()) throw std::invalid_argument("encode_into: output width mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& slot : slots_) {
    const std::string& value =
        slot.field ? txn.field(*slot.field) : app_types_.type_of(txn.field(CatField::kApplication));
    if (const auto pos = vocabularies_[slot.vocabulary].hot_position(value)) out[slot.offset + *pos] = 1.0;
  }
  std::size_t absent = 0;
  for (int k = 1; k <= static_cast<int>(kNumKpis); ++k) {
    if (const auto v = txn.kpis.get(k)) {
      out[kpi_offset_ + static_cast<std::size_t>(k - 1)] = *v;
    } else {
      ++absent;
    }
  }
  return absent;
}

FeatureVector TransactionEncoder::encode(const Transaction& txn) const {
  FeatureVector fv;
  fv.values.resize(schema_.dimension());
  fv.schema_id = schema_.fingerprint();
  encode_into(txn, fv.values);
  return fv;
}

FeatureMatrix TransactionEncoder::encode_rows(const std::vector<Transaction>& txns,
                                              std::span<const std::size_t> rows) const {
  FeatureMatrix m(rows.size(), schema_.dimension());
  for (std::size_t i = 0; i < rows.size(); ++i) encode_into(txns.at(rows[i]), m.row(i));
  return m;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

}  // namespace cxpred
