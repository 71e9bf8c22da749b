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

#include <benchmark/benchmark.h>

#include "rulekit/forest.h"
#include "rulekit_testing/fixtures.h"

namespace {

using namespace rulekit;
namespace t = rulekit::testing;

void BM_TrainForest(benchmark::State& state) {
  static const RecordSet records = t::crash_fixture();
  const auto features = t::crash_features();
  ForestConfig cfg;
  cfg.n_trees = static_cast<std::size_t>(state.range(0));
  cfg.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(records, "lighting_condition", features, cfg));
  }
}
BENCHMARK(BM_TrainForest)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Importance(benchmark::State& state) {
  static const RecordSet records = t::crash_fixture();
  const auto features = t::crash_features();
  ForestConfig cfg;
  cfg.n_trees = 20;
  cfg.seed = 1;
  const Forest forest = train(records, "lighting_condition", features, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(mda_importance(forest, records, 1));
}
BENCHMARK(BM_Importance)->Unit(benchmark::kMillisecond);

void BM_BestSplit(benchmark::State& state) {
  const auto ncat = static_cast<std::size_t>(state.range(0));
  std::vector<std::uint32_t> counts(ncat * 3);
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = static_cast<std::uint32_t>(7 * i % 31 + 1);
  for (auto _ : state) benchmark::DoNotOptimize(best_categorical_split(counts, ncat, 3, 1));
}
BENCHMARK(BM_BestSplit)->Arg(4)->Arg(12)->Arg(24);

}  // namespace
