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

#ifndef RULEKIT_REPORT_H_
#define RULEKIT_REPORT_H_

// CSV / plain-text / SVG renderers for analysis artifacts and the run
// manifest. Artifact bodies contain no timestamps, so identical inputs give
// byte-identical files; every file is written to a temporary name and then
// renamed into place.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rulekit/forest.h"
#include "rulekit/rules.h"
#include "rulekit/schema.h"
#include "rulekit/transactions.h"

namespace rulekit {

enum class ArtifactKind {
  kRuleTable,
  kItemFreq,
  kImportance,
  kRuleScatter,
  kCrosstab,
  kSummary,
  kMetadata,
  kSelection,
};

std::string_view to_string(ArtifactKind kind);

struct Artifact {
  std::string name;
  ArtifactKind kind = ArtifactKind::kSummary;
  std::vector<std::filesystem::path> files;
};

// Writes `content` to `path` via a sibling temporary file and rename(),
// creating parent directories. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Display helpers shared by every table: S and C as percentages.
std::string format_percent3(double fraction);  // 0.037262 -> "3.726"
std::string format_percent2(double fraction);  // 0.732467 -> "73.25"
std::string format_fixed2(double value);       // 1.43944 -> "1.44"

// `<sink>.csv` (rules export columns) and `<sink>.txt`, an aligned table with
// columns ID, Antecedent(s), S (%), C (%), L printed as "3.726", "73.25",
// "1.44". Only the case's top_k rules are written. Throws ValidationError for
// an empty result unless allow_empty.
Artifact emit_rule_table(const CaseResult& result, const ItemUniverse& universe,
                         const std::filesystem::path& sink, bool allow_empty = true);

// `<sink>.svg`: horizontal bars, descending, axis 0..1; `<sink>.csv`:
// item, count, relative_frequency.
Artifact emit_item_freq_chart(std::span<const ItemFrequency> frequencies,
                              const ItemUniverse& universe, const std::filesystem::path& sink);

// `<sink>.svg`: x = support, y = confidence, fill from light (min lift) to
// dark (max lift); `<sink>.csv`: id, support, confidence, lift.
Artifact emit_rule_scatter(std::span<const Rule> rules, const std::filesystem::path& sink);

// `<sink>.svg`: horizontal bars from most to least important, x = MDA;
// `<sink>.csv`: variable, mda, sd, rank; `<sink>.json`.
Artifact emit_importance_chart(const ImportanceReport& report, const std::filesystem::path& sink);

// `<sink>.csv` with counts and column percentages plus `<sink>.txt` in
// "N (p%)" layout.
Artifact emit_crosstab(const CrossTab& table, const std::filesystem::path& sink);

// Writes `<sink>.json`.
Artifact emit_json(std::string name, ArtifactKind kind, std::string_view json,
                   const std::filesystem::path& sink);

// Run-level metadata. Only `created` varies between identical runs.
struct ReportBundle {
  std::string created;  // UTC ISO-8601
  std::string config_hash;
  std::string dataset_hash;
  std::vector<Artifact> artifacts;

  void add(Artifact artifact) { artifacts.push_back(std::move(artifact)); }
  // `<out_dir>/manifest.json`; artifact paths are stored relative to out_dir.
  std::filesystem::path write_manifest(const std::filesystem::path& out_dir) const;
};

std::string utc_timestamp();

}  // namespace rulekit

#endif  // RULEKIT_REPORT_H_
