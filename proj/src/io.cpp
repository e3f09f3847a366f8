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

#include "cxpred/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cxpred/errors.hpp"

namespace cxpred::io {
namespace {

constexpr std::size_t kTransactionColumns = 2 + kNumCategoricalFields + kNumKpis;
constexpr std::size_t kCareCallColumns = 5;

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool valid_token(std::string_view s) {
  return s.find_first_of(",\n\r") == std::string_view::npos;
}

template <typename Record, typename Parse>
std::vector<Record> read_records(std::istream& in, const std::string& header, Parse parse) {
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return out;
  ++line_no;
  if (chomp(line) != header) throw ParseError(line_no, "unexpected header");
  while (std::getline(in, line)) {
    ++line_no;
    if (chomp(line).empty()) continue;
    out.push_back(parse(chomp(line), line_no));
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

void split_fields(std::string_view line, char sep, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string transaction_header() {
  std::string h = "user_id,timestamp";
  for (std::size_t i = 0; i < kNumCategoricalFields; ++i) {
    h += ',';
    h += cat_field_name(static_cast<CatField>(i));
  }
  for (int k = 1; k <= static_cast<int>(kNumKpis); ++k) {
    h += ',';
    h += kpi_name(k);
  }
  return h;
}

std::string format_transaction(const Transaction& txn) {
  std::string s;
  s.reserve(512);
  s += txn.user_id;
  s += ',';
  s += format_timestamp(txn.timestamp);
  for (const auto& c : txn.categorical) {
    s += ',';
    s += c;
  }
  for (int k = 1; k <= static_cast<int>(kNumKpis); ++k) {
    s += ',';
    if (const auto v = txn.kpis.get(k)) s += format_double(*v);
  }
  return s;
}

Transaction parse_transaction(std::string_view line, std::size_t line_no) {
  thread_local std::vector<std::string_view> f;
  split_fields(chomp(line), ',', f);
  if (f.size() != kTransactionColumns) {
    throw ParseError(line_no, "expected " + std::to_string(kTransactionColumns) + " fields, got " +
                                  std::to_string(f.size()));
  }
  Transaction t;
  t.user_id = std::string(f[0]);
  const auto ts = parse_timestamp(f[1]);
  if (!ts) throw ParseError(line_no, "bad timestamp '" + std::string(f[1]) + "'");
  t.timestamp = *ts;
  for (std::size_t i = 0; i < kNumCategoricalFields; ++i) t.categorical[i] = std::string(f[2 + i]);
  for (std::size_t k = 0; k < kNumKpis; ++k) {
    const std::string_view cell = f[2 + kNumCategoricalFields + k];
    if (cell.empty()) continue;
    const auto v = parse_double(cell);
    if (!v) throw ParseError(line_no, "bad number '" + std::string(cell) + "' in kpi " + std::to_string(k + 1));
    t.kpis.set(static_cast<int>(k) + 1, *v);
  }
  return t;
}

std::string care_call_header() { return "user_id,timestamp,duration,agent_id,agent_expertise"; }

std::string format_care_call(const CareCallRecord& call) {
  return call.user_id + ',' + format_timestamp(call.timestamp) + ',' + format_double(call.duration_s) + ',' +
         call.agent_id + ',' + call.agent_expertise;
}

CareCallRecord parse_care_call(std::string_view line, std::size_t line_no) {
  std::vector<std::string_view> f;
  split_fields(chomp(line), ',', f);
  if (f.size() != kCareCallColumns) {
    throw ParseError(line_no, "expected 5 fields, got " + std::to_string(f.size()));
  }
  CareCallRecord c;
  c.user_id = std::string(f[0]);
  const auto ts = parse_timestamp(f[1]);
  if (!ts) throw ParseError(line_no, "bad timestamp '" + std::string(f[1]) + "'");
  c.timestamp = *ts;
  const auto d = parse_double(f[2]);
  if (!d) throw ParseError(line_no, "bad duration '" + std::string(f[2]) + "'");
  c.duration_s = *d;
  c.agent_id = std::string(f[3]);
  c.agent_expertise = std::string(f[4]);
  return c;
}

std::vector<Transaction> read_transactions(std::istream& in) {
  return read_records<Transaction>(in, transaction_header(), parse_transaction);
}

void write_transactions(std::ostream& out, const std::vector<Transaction>& txns) {
  out << transaction_header() << '\n';
  for (const auto& t : txns) {
    if (!valid_token(t.user_id)) throw Error("user_id contains a separator: " + t.user_id);
    for (const auto& c : t.categorical) {
      if (!valid_token(c)) throw Error("categorical token contains a separator: " + c);
    }
    out << format_transaction(t) << '\n';
  }
}

std::vector<CareCallRecord> read_care_calls(std::istream& in) {
  return read_records<CareCallRecord>(in, care_call_header(), parse_care_call);
}

void write_care_calls(std::ostream& out, const std::vector<CareCallRecord>& calls) {
  out << care_call_header() << '\n';
  for (const auto& c : calls) out << format_care_call(c) << '\n';
}

Dataset load_dataset(const std::filesystem::path& transactions, const std::filesystem::path& care_calls) {
  Dataset ds;
  {
    auto in = open_in(transactions);
    ds.transactions = read_transactions(in);
  }
  {
    auto in = open_in(care_calls);
    ds.care_calls = read_care_calls(in);
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& transactions,
                  const std::filesystem::path& care_calls) {
  std::ostringstream t, c;
  write_transactions(t, dataset.transactions);
  write_care_calls(c, dataset.care_calls);
  write_file(transactions, t.str());
  write_file(care_calls, c.str());
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace cxpred::io
