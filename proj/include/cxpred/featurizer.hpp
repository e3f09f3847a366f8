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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cxpred/datamodel.hpp"

namespace cxpred {

// Retained categories of one categorical field. Index i of categories() is
// hot position i of the encoded block; the other-bit, when present, is last.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::string field, std::vector<std::string> categories, bool has_other_bit);

  const std::string& field() const { return field_; }
  const std::vector<std::string>& categories() const { return categories_; }
  bool has_other_bit() const { return has_other_bit_; }
  std::size_t width() const { return categories_.size() + (has_other_bit_ ? 1 : 0); }

  std::optional<std::size_t> index_of(std::string_view category) const;
  // Hot position for `category`: its index, the other-bit, or nullopt (all zeros).
  std::optional<std::size_t> hot_position(std::string_view category) const;

  bool operator==(const Vocabulary& other) const {
    return field_ == other.field_ && categories_ == other.categories_ && has_other_bit_ == other.has_other_bit_;
  }

 private:
  std::string field_;
  std::vector<std::string> categories_;
  bool has_other_bit_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class DimensionKind : std::uint8_t { kBinary, kReal };

// A named contiguous run of dimensions sharing one source.
struct FeatureBlock {
  std::string name;
  DimensionKind kind = DimensionKind::kReal;
  std::size_t offset = 0;
  std::size_t width = 0;
  std::optional<Vocabulary> vocabulary;  // binary-categorical blocks only
  std::vector<std::string> dimension_names;
};

class FeatureSchema {
 public:
  void add_categorical(const std::string& name, Vocabulary vocabulary);
  void add_real(const std::string& name, std::vector<std::string> dimension_names);

  const std::vector<FeatureBlock>& blocks() const { return blocks_; }
  const FeatureBlock* find(std::string_view name) const;
  const FeatureBlock& at(std::string_view name) const;
  std::size_t dimension() const { return dimension_; }
  std::vector<DimensionKind> kinds() const;
  const std::string& dimension_name(std::size_t index) const;
  // Content hash of block names, kinds and vocabularies.
  std::uint64_t fingerprint() const;

  bool operator==(const FeatureSchema& other) const;

 private:
  std::vector<FeatureBlock> blocks_;
  std::size_t dimension_ = 0;
};

inline std::size_t schema_dimension(const FeatureSchema& schema) { return schema.dimension(); }

struct FeatureVector {
  std::vector<double> values;
  std::uint64_t schema_id = 0;
};

// Row-major dense feature rows sharing one schema.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return cols_ == 0 ? 0 : data_.size() / cols_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Application -> application type (messaging, video, ...). Unlisted apps map to default_type.
struct AppTypeMap {
  std::map<std::string, std::string> types;
  std::string default_type = "other";

  const std::string& type_of(const std::string& application) const;
  bool operator==(const AppTypeMap&) const = default;
};

inline constexpr std::string_view kApplicationTypeField = "application_type";
inline constexpr std::string_view kKpiBlock = "kpis";

// Per-field vocabulary policy: nullopt keeps every observed category,
// a value keeps only the top_k most frequent plus an other-bit.
using VocabularySpec = std::map<std::string, std::optional<std::size_t>, std::less<>>;

// Full vocabularies everywhere except cell and device_model (top 16).
VocabularySpec default_vocabulary_spec();

// Built from training rows only. Order is frequency descending, then lexicographic.
std::vector<Vocabulary> build_vocabularies(const std::vector<Transaction>& txns, std::span<const std::size_t> rows,
                                           const VocabularySpec& spec, const AppTypeMap& app_types);

// Approach I encoder: one-hot categorical blocks in column order (with the derived
// application_type block after application), then the 55 raw KPIs.
class TransactionEncoder {
 public:
  TransactionEncoder(std::vector<Vocabulary> vocabularies, AppTypeMap app_types);

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<Vocabulary>& vocabularies() const { return vocabularies_; }
  const AppTypeMap& app_types() const { return app_types_; }

  // Writes schema().dimension() values; returns the number of absent KPIs imputed as 0.
  std::size_t encode_into(const Transaction& txn, std::span<double> out) const;
  FeatureVector encode(const Transaction& txn) const;
  FeatureMatrix encode_rows(const std::vector<Transaction>& txns, std::span<const std::size_t> rows) const;

 private:
  struct CategoricalSlot {
    std::optional<CatField> field;  // nullopt: application_type
    std::size_t vocabulary = 0;  // index into vocabularies_
    std::size_t offset = 0;
  };

  std::vector<Vocabulary> vocabularies_;
  AppTypeMap app_types_;
  FeatureSchema schema_;
  std::vector<CategoricalSlot> slots_;
  std::size_t kpi_offset_ = 0;
};

std::vector<std::size_t> all_rows(std::size_t n);

}  // namespace cxpred
