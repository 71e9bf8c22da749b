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

#ifndef RULEKIT_CLI_COMMANDS_H_
#define RULEKIT_CLI_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>

namespace rulekit::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,     // I/O and other runtime failures
  kExitValidation = 2,  // bad config, dictionary, data or arguments
};

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

// Worker count: explicit value, else RULEKIT_THREADS, else the hardware
// concurrency. Never changes results.
unsigned resolve_threads(std::optional<unsigned> requested);

// Ingest + filter, then cross-tabs of every row variable against the stratum
// and a dataset summary.
int cmd_describe(const CommandOptions& options);
// Random forest on the response; importance report, chart and the selected
// top-k variable list (<out>/selected_variables.json).
int cmd_select_vars(const CommandOptions& options);
// Encodes the mining variables and runs every configured case, writing a rule
// table, scatter and metadata per case. A case without rules is not an error.
int cmd_mine(const CommandOptions& options);
// describe -> select-vars -> mine over a single ingest, one manifest.
int cmd_pipeline(const CommandOptions& options);

// Full command line entry point (argv[0] is the program name).
int run(int argc, const char* const* argv);

}  // namespace rulekit::cli

#endif  // RULEKIT_CLI_COMMANDS_H_
