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

#ifndef RULEKIT_TESTING_FIXTURES_H_
#define RULEKIT_TESTING_FIXTURES_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rulekit/rules.h"
#include "rulekit/schema.h"

namespace rulekit::testing {

using VariableSpec = std::pair<std::string, std::vector<std::string>>;

std::shared_ptr<const DataDictionary> make_dictionary(const std::vector<VariableSpec>& variables,
                                                      std::string version = "test");

// Rows are category names in dictionary order; ids are "r1", "r2", ...
RecordSet make_records(std::shared_ptr<const DataDictionary> dictionary,
                       const std::vector<std::vector<std::string>>& rows);

// ---------------------------------------------------------------------------
// Synthetic stand-in for the 7,568-crash study database. Per lighting
// condition, every variable's category counts equal the target marginals;
// values are shuffled independently per variable and column, so joint
// structure beyond the lighting stratum is random.

inline constexpr std::size_t kCrashDaylight = 3851;
inline constexpr std::size_t kCrashDarkWithStreetlight = 323;
inline constexpr std::size_t kCrashDarkNoStreetlight = 3394;
inline constexpr std::size_t kCrashRecords = 7568;

struct CrashFixtureOptions {
  std::uint64_t seed = 20220607;
  // Adds records that the three preparation filters remove: roadway departure
  // "no", non-injury severities, and dawn/dusk lighting.
  bool with_excluded = false;
};

// Survivor counts for the with_excluded variant, one per filter step.
inline constexpr std::size_t kExcludedNotRwd = 400;
inline constexpr std::size_t kExcludedSeverity = 900;
inline constexpr std::size_t kExcludedLighting = 250;

RecordSet crash_fixture(const CrashFixtureOptions& options = {});
// The three preparation filters, as filter steps.
std::vector<FilterStep> crash_filters();
// The 18 explanatory variables (everything but lighting_condition and rwd).
std::vector<std::string> crash_features();
// The ten variables the study's importance ranking kept.
std::vector<std::string> crash_top10();

// ---------------------------------------------------------------------------
// Randomized mining fixtures. Thresholds are drawn on a grid of twentieths so
// that an oracle can compare them exactly.

struct MiningFixture {
  RecordSet records;
  std::vector<std::string> variables;
  MiningCase mining_case;
  std::size_t confidence_twentieths = 0;
  std::size_t lift_twentieths = 0;
};

MiningFixture random_mining_fixture(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Planted rule: x=on -> y=yes with S = 0.10, C = 0.90, L = 2.0 exactly over
// 900 records, plus independent noise variables.

inline constexpr std::size_t kPlantedRecords = 900;
inline constexpr std::size_t kPlantedAntecedent = 100;
inline constexpr std::size_t kPlantedConsequent = 405;
inline constexpr std::size_t kPlantedJoint = 90;

RecordSet planted_rule_fixture(std::uint64_t seed, std::size_t noise_variables = 4);

// ---------------------------------------------------------------------------
// Forest fixtures.

// Response is a deterministic function of "a" (4 categories); "n1".."n5" are
// independent noise.
RecordSet planted_predictor_fixture(std::uint64_t seed, std::size_t n_records = 500);

// Response equals "signal" except for exactly `flipped` evenly spread records,
// so the best achievable accuracy is 1 - flipped / n.
RecordSet noisy_label_fixture(std::uint64_t seed, std::size_t n_records, std::size_t flipped);

// ---------------------------------------------------------------------------
// Demo workspace: dictionary.json, records.csv and config.json under `dir`,
// built from the crash fixture with excluded records. `n_trees` keeps
// test runs short.

struct DemoOptions {
  std::uint64_t seed = 7;
  std::size_t n_trees = 60;
  std::size_t scale_divisor = 1;  // keep every k-th record only
};

std::filesystem::path write_demo_workspace(const std::filesystem::path& dir,
                                           const DemoOptions& options = {});

// Unique scratch directory below the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "rulekit");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace rulekit::testing

#endif  // RULEKIT_TESTING_FIXTURES_H_
