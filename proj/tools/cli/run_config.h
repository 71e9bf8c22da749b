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

#ifndef RULEKIT_CLI_RUN_CONFIG_H_
#define RULEKIT_CLI_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rulekit/forest.h"
#include "rulekit/rules.h"
#include "rulekit/schema.h"

namespace rulekit::cli {

// Everything a run needs, resolved from the JSON config file. Relative paths
// are taken relative to the config file's directory.
struct RunConfig {
  std::filesystem::path config_path;
  std::filesystem::path dictionary_path;
  std::filesystem::path data_path;
  IngestOptions ingest;
  std::vector<FilterStep> filters;

  // Column variable of the descriptive cross-tabs; defaults to the response.
  std::string stratum;
  // Row variables of the cross-tabs; empty means every other variable.
  std::vector<std::string> crosstab_rows;

  std::string response;
  // Empty means every dictionary variable except the response.
  std::vector<std::string> features;
  ForestConfig forest;
  std::size_t top_k_variables = 10;

  // Explicit mining variables; when unset `mine` uses the select-vars output
  // if present, else the features.
  std::optional<std::vector<std::string>> mining_variables;
  bool full_universe = false;
  std::vector<MiningCase> cases;

  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  // Canonical JSON of the resolved settings; the manifest's config hash.
  std::string canonical;
};

struct Overrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
};

// Throws ParseError / ValidationError. Referenced input files must exist.
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides = {});

// Parses one mining case object (also used by tests).
MiningCase parse_mining_case(const std::string& json_text);

}  // namespace rulekit::cli

#endif  // RULEKIT_CLI_RUN_CONFIG_H_
