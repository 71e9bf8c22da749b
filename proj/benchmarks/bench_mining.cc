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

#include "rulekit/apriori.h"
#include "rulekit/rules.h"
#include "rulekit/transactions.h"
#include "rulekit_testing/fixtures.h"

namespace {

using namespace rulekit;
namespace t = rulekit::testing;

const TransactionSet& top10() {
  static const TransactionSet ts = [] {
    auto vars = t::crash_top10();
    vars.push_back("lighting_condition");
    return encode(t::crash_fixture(), vars);
  }();
  return ts;
}

void BM_SupportCount(benchmark::State& state) {
  const auto& ts = top10();
  const std::vector<ItemId> itemset = {0, 9, 20};
  for (auto _ : state) benchmark::DoNotOptimize(support_count(ts, itemset));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ts.size()));
}
BENCHMARK(BM_SupportCount);

void BM_MineFrequent(benchmark::State& state) {
  const auto& ts = top10();
  const auto max_len = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto sets = mine_frequent(ts, SupportSpec::fraction(0.001), max_len);
    benchmark::DoNotOptimize(sets);
  }
}
BENCHMARK(BM_MineFrequent)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_RunCase(benchmark::State& state) {
  const auto& ts = top10();
  MiningCase c;
  c.name = "daylight";
  c.consequent = ConsequentSpec{"lighting_condition", "daylight"};
  c.min_support = SupportSpec::fraction(0.00001);
  c.min_confidence = 0.6;
  for (auto _ : state) benchmark::DoNotOptimize(run_case(ts, c));
}
BENCHMARK(BM_RunCase)->Unit(benchmark::kMillisecond);

}  // namespace
