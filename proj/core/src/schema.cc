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

#include "rulekit/schema.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"
#include "rulekit/csv.h"
#include "rulekit/error.h"

namespace rulekit {
namespace {

using Json = nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string normalize_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char ch : trim(name)) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back('_');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

std::string_view to_string(RoleHint hint) {
  switch (hint) {
    case RoleHint::kFeature: return "feature";
    case RoleHint::kResponse: return "response";
    case RoleHint::kStratum: return "stratum";
    case RoleHint::kNone: break;
  }
  return "none";
}

RoleHint parse_role_hint(std::string_view text) {
  const std::string norm = normalize_name(text);
  if (norm.empty() || norm == "none") return RoleHint::kNone;
  if (norm == "feature") return RoleHint::kFeature;
  if (norm == "response") return RoleHint::kResponse;
  if (norm == "stratum") return RoleHint::kStratum;
  throw ValidationError(fmt::format("unknown role_hint '{}'", text));
}

std::optional<CategoryIndex> VariableSchema::category_index(std::string_view category) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == category) return static_cast<CategoryIndex>(i);
  }
  return std::nullopt;
}

DataDictionary::DataDictionary(std::vector<VariableSchema> variables, std::string version)
    : variables_(std::move(variables)), version_(std::move(version)) {
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    VariableSchema& var = variables_[v];
    var.name = normalize_name(var.name);
    if (var.name.empty()) {
      throw ValidationError(fmt::format("variable #{} has an empty name", v + 1));
    }
    if (!by_name_.emplace(var.name, v).second) {
      throw ValidationError(fmt::format("duplicate variable '{}'", var.name));
    }
    if (var.categories.size() < 2) {
      throw ValidationError(fmt::format(
          "variable '{}' declares {} categories; at least 2 are required", var.name,
          var.categories.size()));
    }
    if (var.categories.size() > std::numeric_limits<CategoryIndex>::max()) {
      throw ValidationError(fmt::format("variable '{}' has too many categories", var.name));
    }
    std::set<std::string_view> seen;
    for (std::string& category : var.categories) {
      category = std::string(trim(category));
      if (category.empty()) {
        throw ValidationError(fmt::format("variable '{}' has an empty category", var.name));
      }
    }
    for (const std::string& category : var.categories) {
      if (!seen.insert(category).second) {
        throw ValidationError(fmt::format("variable '{}' declares category '{}' twice",
                                          var.name, category));
      }
    }
  }
}

std::optional<std::size_t> DataDictionary::find(std::string_view name) const {
  auto it = by_name_.find(normalize_name(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t DataDictionary::index_of(std::string_view name) const {
  if (auto index = find(name)) return *index;
  throw ValidationError(fmt::format("unknown variable '{}'", name));
}

CategoryIndex DataDictionary::category_of(std::size_t variable,
                                          std::string_view category) const {
  const VariableSchema& var = variables_.at(variable);
  if (auto index = var.category_index(category)) return *index;
  throw ValidationError(
      fmt::format("'{}' is not a category of variable '{}'", category, var.name));
}

DataDictionary load_dictionary(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(fmt::format("dictionary: {}", e.what()));
  }
  if (!doc.is_object()) throw ParseError("dictionary: top level must be an object");
  const auto vars = doc.find("variables");
  if (vars == doc.end() || !vars->is_array()) {
    throw ParseError("dictionary: missing 'variables' array");
  }

  std::string version;
  if (auto it = doc.find("version"); it != doc.end()) {
    version = it->is_string() ? it->get<std::string>() : it->dump();
  }

  std::vector<VariableSchema> variables;
  variables.reserve(vars->size());
  for (std::size_t i = 0; i < vars->size(); ++i) {
    const Json& entry = (*vars)[i];
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string()) {
      throw ParseError(fmt::format("dictionary: variable #{} needs a string 'name'", i + 1));
    }
    VariableSchema var;
    var.name = entry["name"].get<std::string>();
    const auto cats = entry.find("categories");
    if (cats == entry.end() || !cats->is_array()) {
      throw ParseError(
          fmt::format("dictionary: variable '{}' needs a 'categories' array", var.name));
    }
    for (const Json& c : *cats) {
      if (!c.is_string()) {
        throw ParseError(
            fmt::format("dictionary: variable '{}' has a non-string category", var.name));
      }
      var.categories.push_back(c.get<std::string>());
    }
    if (auto hint = entry.find("role_hint"); hint != entry.end() && !hint->is_null()) {
      if (!hint->is_string()) {
        throw ParseError(
            fmt::format("dictionary: variable '{}' role_hint must be a string", var.name));
      }
      var.role_hint = parse_role_hint(hint->get<std::string>());
    }
    variables.push_back(std::move(var));
  }
  return DataDictionary(std::move(variables), std::move(version));
}

DataDictionary load_dictionary_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open dictionary '{}'", path.string()));
  return load_dictionary(in);
}

std::string dictionary_to_json(const DataDictionary& dictionary) {
  Json vars = Json::array();
  for (const VariableSchema& var : dictionary.variables()) {
    vars.push_back({{"name", var.name},
                    {"categories", var.categories},
                    {"role_hint", std::string(to_string(var.role_hint))}});
  }
  Json doc = {{"version", dictionary.version()}, {"variables", std::move(vars)}};
  return doc.dump(2);
}

RecordSet::RecordSet(std::shared_ptr<const DataDictionary> dictionary,
                     std::vector<Record> records, std::vector<FilterLogEntry> filter_log)
    : dictionary_(std::move(dictionary)),
      records_(std::move(records)),
      filter_log_(std::move(filter_log)) {
  if (!dictionary_) throw ValidationError("record set needs a dictionary");
  std::set<std::string_view> ids;
  for (const Record& record : records_) {
    if (record.values.size() != dictionary_->size()) {
      throw ValidationError(fmt::format("record '{}' assigns {} of {} variables", record.id,
                                        record.values.size(), dictionary_->size()));
    }
    for (std::size_t v = 0; v < record.values.size(); ++v) {
      if (record.values[v] >= dictionary_->variable(v).categories.size()) {
        throw ValidationError(fmt::format("record '{}' has an invalid category for '{}'",
                                          record.id, dictionary_->variable(v).name));
      }
    }
    if (!ids.insert(record.id).second) {
      throw ValidationError(fmt::format("duplicate record id '{}'", record.id));
    }
  }
  std::size_t previous = std::numeric_limits<std::size_t>::max();
  for (const FilterLogEntry& entry : filter_log_) {
    if (entry.records_after > entry.records_before || entry.records_before > previous) {
      throw ValidationError("filter log counts must be non-increasing");
    }
    previous = entry.records_after;
  }
}

const std::string& RecordSet::category_name(std::size_t record, std::size_t variable) const {
  return dictionary_->variable(variable).categories[records_.at(record).values.at(variable)];
}

bool RecordSet::operator==(const RecordSet& other) const {
  return *dictionary_ == *other.dictionary_ && records_ == other.records_ &&
         filter_log_ == other.filter_log_;
}

UnknownPolicy parse_unknown_policy(std::string_view text) {
  const std::string norm = normalize_name(text);
  if (norm == "reject") return UnknownPolicy::kReject;
  if (norm == "coerce") return UnknownPolicy::kCoerce;
  throw ValidationError(fmt::format("unknown policy '{}' (expected reject|coerce)", text));
}

RecordSet ingest(std::istream& in, std::shared_ptr<const DataDictionary> dictionary,
                 const IngestOptions& options) {
  if (!dictionary) throw ValidationError("ingest needs a dictionary");
  const DataDictionary& dict = *dictionary;
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row) || (row.size() == 1 && trim(row[0]).empty())) {
    throw ValidationError("record stream is empty");
  }

  // Header: map each dictionary variable (and the id column) to a position.
  const std::string id_column = normalize_name(options.id_column);
  std::optional<std::size_t> id_pos;
  std::vector<std::optional<std::size_t>> var_pos(dict.size());
  for (std::size_t col = 0; col < row.size(); ++col) {
    const std::string name = normalize_name(row[col]);
    if (name == id_column) {
      if (id_pos) throw ValidationError(fmt::format("duplicate column '{}'", name));
      id_pos = col;
    } else if (auto v = dict.find(name)) {
      if (var_pos[*v]) throw ValidationError(fmt::format("duplicate column '{}'", name));
      var_pos[*v] = col;
    }
  }
  if (!id_pos) throw ValidationError(fmt::format("missing column '{}'", id_column));
  for (std::size_t v = 0; v < dict.size(); ++v) {
    if (!var_pos[v]) {
      throw ValidationError(fmt::format("missing column '{}'", dict.variable(v).name));
    }
  }

  std::size_t needed = *id_pos;
  for (const auto& pos : var_pos) needed = std::max(needed, *pos);

  std::vector<Record> records;
  std::set<std::string> ids;
  while (reader.next(row)) {
    const std::size_t line = reader.line();
    if (row.size() == 1 && trim(row[0]).empty()) continue;  // blank line
    Record record;
    if (row.size() <= needed) {
      throw ValidationError(fmt::format("line {}: expected at least {} fields, found {}", line,
                                        needed + 1, row.size()));
    }
    record.id = std::string(trim(row[*id_pos]));
    if (record.id.empty()) throw ValidationError(fmt::format("line {}: empty record id", line));
    if (!ids.insert(record.id).second) {
      throw ValidationError(fmt::format("line {}: duplicate record id '{}'", line, record.id));
    }
    record.values.resize(dict.size());
    for (std::size_t v = 0; v < dict.size(); ++v) {
      const VariableSchema& var = dict.variable(v);
      const std::string_view value = trim(row[*var_pos[v]]);
      if (auto index = var.category_index(value)) {
        record.values[v] = *index;
        continue;
      }
      const bool missing = value.empty();
      if (missing || options.policy == UnknownPolicy::kCoerce) {
        if (auto unknown = var.category_index(kUnknownCategory)) {
          record.values[v] = *unknown;
          continue;
        }
      }
      if (missing) {
        throw ValidationError(fmt::format(
            "line {}: record '{}' has no value for '{}' and the variable has no '{}' category",
            line, record.id, var.name, kUnknownCategory));
      }
      throw ValidationError(fmt::format("line {}: value '{}' is not a category of '{}'", line,
                                        value, var.name));
    }
    records.push_back(std::move(record));
  }
  return RecordSet(std::move(dictionary), std::move(records));
}

RecordSet ingest_file(const std::filesystem::path& path,
                      std::shared_ptr<const DataDictionary> dictionary,
                      const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open data file '{}'", path.string()));
  return ingest(in, std::move(dictionary), options);
}

void write_records(const RecordSet& records, std::ostream& out, std::string_view id_column) {
  const DataDictionary& dict = records.dictionary();
  std::vector<std::string> fields;
  fields.emplace_back(id_column);
  for (const VariableSchema& var : dict.variables()) fields.push_back(var.name);
  out << csv_row(fields) << '\n';
  for (const Record& record : records.records()) {
    fields.clear();
    fields.push_back(record.id);
    for (std::size_t v = 0; v < dict.size(); ++v) {
      fields.push_back(dict.variable(v).categories[record.values[v]]);
    }
    out << csv_row(fields) << '\n';
  }
}

std::vector<FilterStep> parse_filter_steps(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ParseError(fmt::format("filter steps: {}", e.what()));
  }
  if (!doc.is_array()) throw ParseError("filter steps: expected a JSON array");
  std::vector<FilterStep> steps;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& entry = doc[i];
    if (!entry.is_object() || !entry.contains("variable") || !entry["variable"].is_string() ||
        !entry.contains("keep") || !entry["keep"].is_array()) {
      throw ParseError(
          fmt::format("filter steps: step #{} needs 'variable' and a 'keep' array", i + 1));
    }
    FilterStep step;
    step.variable = entry["variable"].get<std::string>();
    for (const Json& c : entry["keep"]) {
      if (!c.is_string()) {
        throw ParseError(fmt::format("filter steps: step #{} has a non-string category", i + 1));
      }
      step.keep.push_back(c.get<std::string>());
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

std::vector<FilterStep> parse_filter_steps(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_filter_steps(buffer.str());
}

RecordSet filter_records(const RecordSet& records, std::span<const FilterStep> steps) {
  const DataDictionary& dict = records.dictionary();

  // Resolve every predicate before touching records so a bad step fails cleanly.
  struct Resolved {
    std::size_t variable;
    std::vector<bool> keep;
    std::string description;
  };
  std::vector<Resolved> resolved;
  for (const FilterStep& step : steps) {
    Resolved r;
    r.variable = dict.index_of(step.variable);
    const VariableSchema& var = dict.variable(r.variable);
    r.keep.assign(var.categories.size(), false);
    std::vector<std::string> names;
    for (const std::string& category : step.keep) {
      r.keep[dict.category_of(r.variable, category)] = true;
    }
    for (std::size_t c = 0; c < var.categories.size(); ++c) {
      if (r.keep[c]) names.push_back(var.categories[c]);
    }
    r.description = fmt::format("{} in {{{}}}", var.name, fmt::join(names, ", "));
    resolved.push_back(std::move(r));
  }

  std::vector<Record> kept = records.records();
  std::vector<FilterLogEntry> log = records.filter_log();
  for (const Resolved& r : resolved) {
    const std::size_t before = kept.size();
    std::erase_if(kept, [&](const Record& rec) { return !r.keep[rec.values[r.variable]]; });
    log.push_back({r.description, before, kept.size()});
  }
  return RecordSet(records.dictionary_ptr(), std::move(kept), std::move(log));
}

CrossTab::CrossTab(std::string row_variable, std::string col_variable,
                   std::vector<std::string> row_categories,
                   std::vector<std::string> col_categories, std::vector<std::size_t> cells)
    : row_variable_(std::move(row_variable)),
      col_variable_(std::move(col_variable)),
      row_categories_(std::move(row_categories)),
      col_categories_(std::move(col_categories)),
      cells_(std::move(cells)),
      column_totals_(col_categories_.size(), 0) {
  if (cells_.size() != row_categories_.size() * col_categories_.size()) {
    throw ValidationError("cross-tab cell count does not match its dimensions");
  }
  for (std::size_t r = 0; r < row_categories_.size(); ++r) {
    for (std::size_t c = 0; c < col_categories_.size(); ++c) {
      column_totals_[c] += cells_[r * col_categories_.size() + c];
    }
  }
}

std::size_t CrossTab::total() const {
  return std::accumulate(column_totals_.begin(), column_totals_.end(), std::size_t{0});
}

double CrossTab::column_fraction(std::size_t row, std::size_t col) const {
  const std::size_t denom = column_total(col);
  return denom == 0 ? 0.0 : static_cast<double>(cell(row, col)) / static_cast<double>(denom);
}

CrossTab cross_tabulate(const RecordSet& records, std::string_view row_variable,
                        std::string_view col_variable) {
  const DataDictionary& dict = records.dictionary();
  const std::size_t rv = dict.index_of(row_variable);
  const std::size_t cv = dict.index_of(col_variable);
  const auto& rows = dict.variable(rv).categories;
  const auto& cols = dict.variable(cv).categories;
  std::vector<std::size_t> cells(rows.size() * cols.size(), 0);
  for (const Record& record : records.records()) {
    ++cells[record.values[rv] * cols.size() + record.values[cv]];
  }
  return CrossTab(dict.variable(rv).name, dict.variable(cv).name, rows, cols, std::move(cells));
}

}  // namespace rulekit
