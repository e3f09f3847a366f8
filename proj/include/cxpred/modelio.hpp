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

#include <optional>
#include <string>
#include <string_view>

#include "cxpred/featurizer.hpp"
#include "cxpred/profiler.hpp"
#include "cxpred/rrf.hpp"
#include "json.hpp"

namespace cxpred {

enum class Approach { kTransaction = 1, kProfile = 2 };

// A trained ensemble plus everything the scoring side needs to rebuild the
// exact encoder used at training time.
struct ModelBundle {
  Approach approach = Approach::kTransaction;
  RrfModel model;
  AppTypeMap app_types;               // transaction approach
  std::optional<ProfileSpec> profile; // profile approach

  TransactionEncoder transaction_encoder() const;
  ProfileEncoder profile_encoder() const;
};

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelFormatName = "cxpred-rrf";

// Canonical document bytes: fixed key order, reals as shortest round-trip
// decimal strings. The same bundle always yields identical bytes.
std::string serialize(const ModelBundle& bundle);

// Throws CorruptionError (unparseable, truncated, checksum mismatch),
// UnsupportedVersionError, or StructuralError (bad node graph, schema mismatch).
ModelBundle deserialize(std::string_view bytes);

// "fnv1a64:<16 hex digits>" over the compact dump of the document body.
std::string body_checksum(const nlohmann::ordered_json& body);

}  // namespace cxpred
