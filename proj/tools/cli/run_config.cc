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

#include "cli/run_config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "rulekit/error.h"

namespace rulekit::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

const std::set<std::string> kTopLevelKeys = {
    "dictionary", "data",     "record_id_column", "unknown_policy", "filters",
    "stratum",    "crosstab_rows", "response",    "features",       "forest",
    "top_k_variables", "mining_variables", "full_universe", "cases", "output_dir",
    "seed"};

const std::set<std::string> kCaseKeys = {"name",     "consequent", "min_support",
                                         "min_confidence", "min_lift", "max_rule_items",
                                         "top_k",    "allow_empty_antecedent"};

const std::set<std::string> kForestKeys = {"n_trees", "mtry", "min_node_size", "max_depth",
                                           "seed"};

void reject_unknown_keys(const Json& object, const std::set<std::string>& allowed,
                         std::string_view where) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) {
      throw ParseError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

std::string require_string(const Json& object, const char* key, std::string_view where) {
  const auto it = object.find(key);
  if (it == object.end() || !it->is_string()) {
    throw ParseError(fmt::format("{}: '{}' must be a string", where, key));
  }
  return it->get<std::string>();
}

std::vector<std::string> string_list(const Json& value, std::string_view where) {
  if (!value.is_array()) throw ParseError(fmt::format("{} must be an array of strings", where));
  std::vector<std::string> out;
  for (const Json& v : value) {
    if (!v.is_string()) throw ParseError(fmt::format("{} must be an array of strings", where));
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::size_t non_negative(const Json& value, std::string_view where) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ParseError(fmt::format("{} must be a non-negative integer", where));
  }
  return value.get<std::size_t>();
}

double number(const Json& value, std::string_view where) {
  if (!value.is_number()) throw ParseError(fmt::format("{} must be a number", where));
  return value.get<double>();
}

// 0.00001, "0.001%", {"fraction": 0.00001} or {"count": 1}.
SupportSpec parse_support(const Json& value, std::string_view where) {
  if (value.is_number()) return SupportSpec::fraction(value.get<double>());
  if (value.is_string()) {
    std::string text = value.get<std::string>();
    if (text.empty() || text.back() != '%') {
      throw ParseError(fmt::format("{}: percentage strings must end with '%'", where));
    }
    text.pop_back();
    try {
      std::size_t used = 0;
      const double pct = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return SupportSpec::fraction(pct / 100.0);
    } catch (const std::logic_error&) {
      throw ParseError(fmt::format("{}: cannot read '{}%'", where, text));
    }
  }
  if (value.is_object() && value.size() == 1) {
    if (value.contains("count")) return SupportSpec::count(non_negative(value["count"], where));
    if (value.contains("fraction")) return SupportSpec::fraction(number(value["fraction"], where));
  }
  throw ParseError(fmt::format(
      "{}: expected a fraction, a \"p%\" string, {{\"count\": n}} or {{\"fraction\": f}}", where));
}

MiningCase parse_case(const Json& entry, std::size_t index) {
  const std::string where = fmt::format("cases[{}]", index);
  if (!entry.is_object()) throw ParseError(where + " must be an object");
  reject_unknown_keys(entry, kCaseKeys, where);
  MiningCase c;
  c.name = require_string(entry, "name", where);
  if (auto it = entry.find("consequent"); it != entry.end() && !it->is_null()) {
    if (it->is_string()) {
      const std::string token = it->get<std::string>();
      const auto eq = token.find('=');
      if (eq == std::string::npos) {
        throw ParseError(fmt::format("{}: consequent '{}' is not 'variable=category'", where,
                                     token));
      }
      c.consequent = ConsequentSpec{token.substr(0, eq), token.substr(eq + 1)};
    } else if (it->is_object()) {
      c.consequent = ConsequentSpec{require_string(*it, "variable", where + ".consequent"),
                                    require_string(*it, "category", where + ".consequent")};
    } else {
      throw ParseError(where + ": consequent must be a string, an object or null");
    }
  }
  if (entry.contains("min_support")) c.min_support = parse_support(entry["min_support"], where);
  if (entry.contains("min_confidence")) {
    c.min_confidence = number(entry["min_confidence"], where + ".min_confidence");
  }
  if (entry.contains("min_lift")) c.min_lift = number(entry["min_lift"], where + ".min_lift");
  if (entry.contains("max_rule_items")) {
    c.max_rule_items = non_negative(entry["max_rule_items"], where + ".max_rule_items");
  }
  if (entry.contains("top_k")) c.top_k = non_negative(entry["top_k"], where + ".top_k");
  if (entry.contains("allow_empty_antecedent")) {
    if (!entry["allow_empty_antecedent"].is_boolean()) {
      throw ParseError(where + ".allow_empty_antecedent must be a boolean");
    }
    c.allow_empty_antecedent = entry["allow_empty_antecedent"].get<bool>();
  }
  c.validate();
  return c;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

OrderedJson support_json(const SupportSpec& s) {
  if (s.is_fraction()) return OrderedJson{{"fraction", s.fraction_value()}};
  return OrderedJson{{"count", s.count_value()}};
}

}  // namespace

MiningCase parse_mining_case(const std::string& json_text) {
  try {
    return parse_case(Json::parse(json_text), 0);
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what());
  }
}

RunConfig load_run_config(const fs::path& path, const Overrides& overrides) {
  if (!fs::exists(path)) {
    throw ValidationError(fmt::format("config file '{}' does not exist", path.string()));
  }
  Json doc;
  try {
    doc = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(fmt::format("config '{}': {}", path.string(), e.what()));
  }
  if (!doc.is_object()) throw ParseError("config: top level must be an object");
  reject_unknown_keys(doc, kTopLevelKeys, "config");

  RunConfig cfg;
  cfg.config_path = path;
  const fs::path base = path.parent_path();

  cfg.dictionary_path = resolve(base, require_string(doc, "dictionary", "config"));
  cfg.data_path = resolve(base, require_string(doc, "data", "config"));
  for (const fs::path& p : {cfg.dictionary_path, cfg.data_path}) {
    if (!fs::is_regular_file(p)) {
      throw ValidationError(fmt::format("input file '{}' does not exist", p.string()));
    }
  }

  if (doc.contains("record_id_column")) {
    cfg.ingest.id_column = require_string(doc, "record_id_column", "config");
  }
  if (doc.contains("unknown_policy")) {
    cfg.ingest.policy = parse_unknown_policy(require_string(doc, "unknown_policy", "config"));
  }
  if (auto it = doc.find("filters"); it != doc.end() && !it->is_null()) {
    if (it->is_string()) {
      cfg.filters = parse_filter_steps(read_text(resolve(base, it->get<std::string>())));
    } else {
      cfg.filters = parse_filter_steps(it->dump());
    }
  }

  if (doc.contains("response")) cfg.response = require_string(doc, "response", "config");
  cfg.stratum = doc.contains("stratum") ? require_string(doc, "stratum", "config") : cfg.response;
  if (doc.contains("crosstab_rows")) cfg.crosstab_rows = string_list(doc["crosstab_rows"], "crosstab_rows");
  if (doc.contains("features")) cfg.features = string_list(doc["features"], "features");

  cfg.seed = doc.contains("seed") ? non_negative(doc["seed"], "seed") : 0;
  if (overrides.seed) cfg.seed = *overrides.seed;
  cfg.forest.seed = cfg.seed;
  if (auto it = doc.find("forest"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("forest must be an object");
    reject_unknown_keys(*it, kForestKeys, "forest");
    const Json& f = *it;
    if (f.contains("n_trees")) cfg.forest.n_trees = non_negative(f["n_trees"], "forest.n_trees");
    if (f.contains("mtry")) cfg.forest.mtry = non_negative(f["mtry"], "forest.mtry");
    if (f.contains("min_node_size")) {
      cfg.forest.min_node_size = non_negative(f["min_node_size"], "forest.min_node_size");
    }
    if (f.contains("max_depth")) cfg.forest.max_depth = non_negative(f["max_depth"], "forest.max_depth");
    if (f.contains("seed") && !overrides.seed) cfg.forest.seed = non_negative(f["seed"], "forest.seed");
  }
  if (cfg.forest.n_trees < 1) throw ValidationError("forest.n_trees must be at least 1");
  if (cfg.forest.min_node_size < 1) throw ValidationError("forest.min_node_size must be at least 1");
  if (doc.contains("top_k_variables")) {
    cfg.top_k_variables = non_negative(doc["top_k_variables"], "top_k_variables");
  }

  if (doc.contains("mining_variables") && !doc["mining_variables"].is_null()) {
    cfg.mining_variables = string_list(doc["mining_variables"], "mining_variables");
  }
  if (doc.contains("full_universe")) {
    if (!doc["full_universe"].is_boolean()) throw ParseError("full_universe must be a boolean");
    cfg.full_universe = doc["full_universe"].get<bool>();
  }
  if (auto it = doc.find("cases"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("cases must be an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < it->size(); ++i) {
      MiningCase c = parse_case((*it)[i], i);
      if (!names.insert(normalize_name(c.name)).second) {
        throw ValidationError(fmt::format("duplicate case name '{}'", c.name));
      }
      cfg.cases.push_back(std::move(c));
    }
  }

  cfg.output_dir = overrides.output_dir
                       ? *overrides.output_dir
                       : resolve(base, doc.contains("output_dir")
                                           ? require_string(doc, "output_dir", "config")
                                           : std::string("out"));

  // Resolved settings only; the output directory does not affect results.
  OrderedJson canonical;
  canonical["dictionary"] = doc["dictionary"];
  canonical["data"] = doc["data"];
  canonical["record_id_column"] = cfg.ingest.id_column;
  canonical["unknown_policy"] =
      cfg.ingest.policy == UnknownPolicy::kReject ? "reject" : "coerce";
  OrderedJson filters = OrderedJson::array();
  for (const FilterStep& step : cfg.filters) {
    filters.push_back({{"variable", step.variable}, {"keep", step.keep}});
  }
  canonical["filters"] = std::move(filters);
  canonical["stratum"] = cfg.stratum;
  canonical["crosstab_rows"] = cfg.crosstab_rows;
  canonical["response"] = cfg.response;
  canonical["features"] = cfg.features;
  canonical["forest"] = {{"n_trees", cfg.forest.n_trees},
                         {"mtry", cfg.forest.mtry},
                         {"min_node_size", cfg.forest.min_node_size},
                         {"max_depth", cfg.forest.max_depth},
                         {"seed", cfg.forest.seed}};
  canonical["top_k_variables"] = cfg.top_k_variables;
  canonical["mining_variables"] =
      cfg.mining_variables ? OrderedJson(*cfg.mining_variables) : OrderedJson(nullptr);
  canonical["full_universe"] = cfg.full_universe;
  OrderedJson cases = OrderedJson::array();
  for (const MiningCase& c : cfg.cases) {
    OrderedJson entry;
    entry["name"] = c.name;
    entry["consequent"] = c.consequent ? OrderedJson(c.consequent->variable + "=" +
                                                     c.consequent->category)
                                       : OrderedJson(nullptr);
    entry["min_support"] = support_json(c.min_support);
    entry["min_confidence"] = c.min_confidence;
    entry["min_lift"] = c.min_lift;
    entry["max_rule_items"] = c.max_rule_items;
    entry["top_k"] = c.top_k;
    entry["allow_empty_antecedent"] = c.allow_empty_antecedent;
    cases.push_back(std::move(entry));
  }
  canonical["cases"] = std::move(cases);
  canonical["seed"] = cfg.seed;
  cfg.canonical = canonical.dump();
  return cfg;
}

}  // namespace rulekit::cli
