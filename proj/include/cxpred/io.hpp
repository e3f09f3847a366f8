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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cxpred/datamodel.hpp"

// Delimited-text readers and writers for the transaction and care-call files.
// The grammar is documented in FORMAT.md.
namespace cxpred::io {

// Shortest decimal that parses back to the identical double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

// Splits on `sep` without quoting rules; tokens never contain the separator.
void split_fields(std::string_view line, char sep, std::vector<std::string_view>& out);

std::string transaction_header();
std::string format_transaction(const Transaction& txn);
// Throws ParseError citing `line_no` on malformed input.
Transaction parse_transaction(std::string_view line, std::size_t line_no);

std::string care_call_header();
std::string format_care_call(const CareCallRecord& call);
CareCallRecord parse_care_call(std::string_view line, std::size_t line_no);

std::vector<Transaction> read_transactions(std::istream& in);
void write_transactions(std::ostream& out, const std::vector<Transaction>& txns);
std::vector<CareCallRecord> read_care_calls(std::istream& in);
void write_care_calls(std::ostream& out, const std::vector<CareCallRecord>& calls);

Dataset load_dataset(const std::filesystem::path& transactions, const std::filesystem::path& care_calls);
void save_dataset(const Dataset& dataset, const std::filesystem::path& transactions,
                  const std::filesystem::path& care_calls);

// Whole file as bytes; throws Error when unreadable.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace cxpred::io
