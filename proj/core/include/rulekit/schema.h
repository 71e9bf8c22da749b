/*
 * Copyright 2026 The rulekit Authors.
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

#ifndef RULEKIT_SCHEMA_H_
#define RULEKIT_SCHEMA_H_

// Data dictionary, validated categorical records, filter pipelines and
// stratified cross-tabulation.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rulekit {

using CategoryIndex = std::uint16_t;

inline constexpr std::string_view kUnknownCategory = "unknown";
inline constexpr std::string_view kDefaultIdColumn = "crash_number";

// Trims, lowercases and maps each run of whitespace to an underscore:
// "Driver Age" -> "driver_age".
std::string normalize_name(std::string_view name);

enum class RoleHint { kNone, kFeature, kResponse, kStratum };

std::string_view to_string(RoleHint hint);
RoleHint parse_role_hint(std::string_view text);

struct VariableSchema {
  std::string name;
  std::vector<std::string> categories;
  // Advisory only; nothing in the library restricts usage by role.
  RoleHint role_hint = RoleHint::kNone;

  std::optional<CategoryIndex> category_index(std::string_view category) const;
  bool has_unknown() const { return category_index(kUnknownCategory).has_value(); }

  bool operator==(const VariableSchema&) const = default;
};

// The variable universe. Construction normalizes variable names and enforces
// the invariants: unique nonempty names, >= 2 categories per variable, unique
// categories within a variable.
class DataDictionary {
 public:
  DataDictionary(std::vector<VariableSchema> variables, std::string version);

  const std::vector<VariableSchema>& variables() const { return variables_; }
  const std::string& version() const { return version_; }
  std::size_t size() const { return variables_.size(); }
  const VariableSchema& variable(std::size_t index) const { return variables_.at(index); }

  // Looks a variable up by (normalized) name.
  std::optional<std::size_t> find(std::string_view name) const;
  // Like find() but throws ValidationError naming the variable.
  std::size_t index_of(std::string_view name) const;
  // Throws ValidationError when the category is not declared.
  CategoryIndex category_of(std::size_t variable, std::string_view category) const;

  bool operator==(const DataDictionary& other) const {
    return version_ == other.version_ && variables_ == other.variables_;
  }

 private:
  std::vector<VariableSchema> variables_;
  std::string version_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

// Parses the JSON dictionary document
//   {"version": "...", "variables": [{"name", "categories", "role_hint"}]}.
// ParseError for malformed JSON or missing fields, ValidationError for
// invariant violations; messages name the offending variable or category.
DataDictionary load_dictionary(std::istream& in);
DataDictionary load_dictionary_file(const std::filesystem::path& path);
std::string dictionary_to_json(const DataDictionary& dictionary);

// One crash row. `values[v]` is the category index of dictionary variable v.
struct Record {
  std::string id;
  std::vector<CategoryIndex> values;

  bool operator==(const Record&) const = default;
};

struct FilterLogEntry {
  std::string description;
  std::size_t records_before = 0;
  std::size_t records_after = 0;

  bool operator==(const FilterLogEntry&) const = default;
};

// Immutable, dictionary-validated set of records plus the filters that
// produced it.
class RecordSet {
 public:
  RecordSet(std::shared_ptr<const DataDictionary> dictionary,
            std::vector<Record> records,
            std::vector<FilterLogEntry> filter_log = {});

  const DataDictionary& dictionary() const { return *dictionary_; }
  const std::shared_ptr<const DataDictionary>& dictionary_ptr() const { return dictionary_; }
  const std::vector<Record>& records() const { return records_; }
  const std::vector<FilterLogEntry>& filter_log() const { return filter_log_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const std::string& category_name(std::size_t record, std::size_t variable) const;

  // Same dictionary contents, records and filter log.
  bool operator==(const RecordSet& other) const;

 private:
  std::shared_ptr<const DataDictionary> dictionary_;
  std::vector<Record> records_;
  std::vector<FilterLogEntry> filter_log_;
};

enum class UnknownPolicy {
  // Abort on the first out-of-dictionary value.
  kReject,
  // Map out-of-dictionary values to "unknown" where the variable declares it.
  kCoerce,
};

UnknownPolicy parse_unknown_policy(std::string_view text);

struct IngestOptions {
  UnknownPolicy policy = UnknownPolicy::kReject;
  std::string id_column = std::string(kDefaultIdColumn);
};

// Reads a CSV stream whose header names every dictionary variable plus the
// record-id column (extra columns are ignored). Empty cells become "unknown"
// when the variable declares it and are rejected otherwise.
RecordSet ingest(std::istream& in, std::shared_ptr<const DataDictionary> dictionary,
                 const IngestOptions& options = {});
RecordSet ingest_file(const std::filesystem::path& path,
                      std::shared_ptr<const DataDictionary> dictionary,
                      const IngestOptions& options = {});

// Writes records as CSV with the id column first, then dictionary variables
// in order. ingest() of the output reproduces the records.
void write_records(const RecordSet& records, std::ostream& out,
                   std::string_view id_column = kDefaultIdColumn);

// Keep records whose `variable` is one of `keep`.
struct FilterStep {
  std::string variable;
  std::vector<std::string> keep;
};

// Parses a JSON array [{"variable": ..., "keep": [...]}].
std::vector<FilterStep> parse_filter_steps(std::istream& in);
std::vector<FilterStep> parse_filter_steps(std::string_view json_text);

// Applies every step in order (conjunction). The result's filter log is the
// input's log followed by one entry per step.
RecordSet filter_records(const RecordSet& records, std::span<const FilterStep> steps);

// Integer counts of row_variable x col_variable. Percentages are derived at
// display time only.
class CrossTab {
 public:
  CrossTab(std::string row_variable, std::string col_variable,
           std::vector<std::string> row_categories,
           std::vector<std::string> col_categories,
           std::vector<std::size_t> cells);

  const std::string& row_variable() const { return row_variable_; }
  const std::string& col_variable() const { return col_variable_; }
  const std::vector<std::string>& row_categories() const { return row_categories_; }
  const std::vector<std::string>& col_categories() const { return col_categories_; }

  std::size_t cell(std::size_t row, std::size_t col) const {
    return cells_.at(row * col_categories_.size() + col);
  }
  std::size_t column_total(std::size_t col) const { return column_totals_.at(col); }
  std::size_t total() const;
  // cell / column_total, 0 for an empty column.
  double column_fraction(std::size_t row, std::size_t col) const;

 private:
  std::string row_variable_;
  std::string col_variable_;
  std::vector<std::string> row_categories_;
  std::vector<std::string> col_categories_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> column_totals_;
};

CrossTab cross_tabulate(const RecordSet& records, std::string_view row_variable,
                        std::string_view col_variable);

}  // namespace rulekit

#endif  // RULEKIT_SCHEMA_H_
