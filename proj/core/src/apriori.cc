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

#include "rulekit/apriori.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rulekit/csv.h"
#include "rulekit/error.h"
#include "rulekit/parallel.h"

namespace rulekit {

SupportSpec SupportSpec::fraction(double f) {
  if (!(f > 0.0 && f <= 1.0)) {
    throw ValidationError(fmt::format("support fraction {} is outside (0, 1]", f));
  }
  SupportSpec spec;
  spec.is_fraction_ = true;
  spec.fraction_ = f;
  return spec;
}

SupportSpec SupportSpec::count(std::size_t c) {
  if (c < 1) throw ValidationError("support count must be at least 1");
  SupportSpec spec;
  spec.count_ = c;
  return spec;
}

std::size_t SupportSpec::resolve(std::size_t n_transactions) const {
  if (!is_fraction_) return count_;
  // The relative slack keeps e.g. 0.1 * 100 from resolving to 11.
  const double raw = fraction_ * static_cast<double>(n_transactions);
  const double resolved = std::ceil(raw * (1.0 - 1e-12));
  return std::max<std::size_t>(1, static_cast<std::size_t>(resolved));
}

std::string SupportSpec::describe() const {
  if (is_fraction_) return fmt::format("fraction {}", fraction_);
  return fmt::format("count {}", count_);
}

std::size_t ItemsetHash::operator()(const Itemset& items) const noexcept {
  std::size_t h = 0xcbf29ce484222325ull;
  for (ItemId id : items) {
    h ^= id + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

FrequentItemsets::FrequentItemsets(std::size_t n_transactions, std::size_t min_support_count,
                                   std::size_t max_len,
                                   std::vector<std::vector<FrequentItemset>> levels)
    : n_transactions_(n_transactions),
      min_support_count_(min_support_count),
      max_len_(max_len),
      levels_(std::move(levels)) {
  for (const auto& level : levels_) {
    for (const FrequentItemset& f : level) counts_.emplace(f.items, f.count);
  }
}

const std::vector<FrequentItemset>& FrequentItemsets::level(std::size_t k) const {
  static const std::vector<FrequentItemset> kEmpty;
  if (k == 0 || k > levels_.size()) return kEmpty;
  return levels_[k - 1];
}

std::size_t FrequentItemsets::total() const {
  std::size_t n = 0;
  for (const auto& level : levels_) n += level.size();
  return n;
}

std::optional<std::size_t> FrequentItemsets::count_of(std::span<const ItemId> items) const {
  if (items.empty()) return n_transactions_;
  auto it = counts_.find(Itemset(items.begin(), items.end()));
  if (it == counts_.end()) return std::nullopt;
  return it->second;
}

namespace {

// Classic Apriori join: two k-itemsets sharing their first k-1 items yield a
// (k+1)-candidate, kept only if all of its k-subsets are frequent.
std::vector<Itemset> generate_candidates(const std::vector<FrequentItemset>& level,
                                         const ItemUniverse& universe) {
  std::unordered_set<Itemset, ItemsetHash> frequent;
  frequent.reserve(level.size());
  for (const FrequentItemset& f : level) frequent.insert(f.items);

  std::vector<Itemset> candidates;
  Itemset subset;
  for (std::size_t i = 0; i < level.size(); ++i) {
    const Itemset& a = level[i].items;
    const std::size_t k = a.size();
    for (std::size_t j = i + 1; j < level.size(); ++j) {
      const Itemset& b = level[j].items;
      if (!std::equal(a.begin(), a.end() - 1, b.begin())) break;  // prefix block ends
      if (universe.item(a.back()).variable == universe.item(b.back()).variable) continue;

      Itemset candidate = a;
      candidate.push_back(b.back());
      bool all_frequent = true;
      // Dropping either of the last two items gives a or b themselves.
      for (std::size_t drop = 0; drop + 2 <= k && all_frequent; ++drop) {
        subset.clear();
        for (std::size_t p = 0; p <= k; ++p) {
          if (p != drop) subset.push_back(candidate[p]);
        }
        all_frequent = frequent.contains(subset);
      }
      if (all_frequent) candidates.push_back(std::move(candidate));
    }
  }
  return candidates;
}

}  // namespace

FrequentItemsets mine_frequent(const TransactionSet& transactions, const SupportSpec& min_support,
                               std::size_t max_len, unsigned threads) {
  if (max_len < 1) throw ValidationError("max itemset length must be at least 1");
  const std::size_t n = transactions.size();
  const std::size_t threshold = min_support.resolve(n);
  spdlog::debug("apriori: min support {} resolved to {} of {} transactions",
                min_support.describe(), threshold, n);
  if (threshold > n) {
    spdlog::warn("apriori: minimum support count {} exceeds the {} transactions; no itemsets",
                 threshold, n);
    return FrequentItemsets(n, threshold, max_len, {});
  }

  const ItemUniverse& universe = transactions.universe();
  std::vector<std::vector<FrequentItemset>> levels;

  std::vector<Itemset> candidates;
  candidates.reserve(universe.size());
  for (std::size_t i = 0; i < universe.size(); ++i) {
    candidates.push_back({static_cast<ItemId>(i)});
  }

  for (std::size_t k = 1; k <= max_len && !candidates.empty(); ++k) {
    std::vector<std::size_t> counts(candidates.size(), 0);
    parallel_for(candidates.size(), threads, [&](std::size_t c) {
      ItemMask mask(universe.size());
      for (ItemId id : candidates[c]) mask.set(id);
      counts[c] = support_count(transactions, mask);
    });

    std::vector<FrequentItemset> level;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (counts[c] >= threshold) level.push_back({std::move(candidates[c]), counts[c]});
    }
    if (level.empty()) break;
    spdlog::debug("apriori: level {} has {} frequent itemsets", k, level.size());
    if (k < max_len) candidates = generate_candidates(level, universe);
    levels.push_back(std::move(level));
  }
  return FrequentItemsets(n, threshold, max_len, std::move(levels));
}

void write_itemsets_csv(const FrequentItemsets& itemsets, const ItemUniverse& universe,
                        std::ostream& out) {
  out << "level,items,support_count,support_fraction\n";
  const double n = static_cast<double>(itemsets.n_transactions());
  for (std::size_t k = 1; k <= itemsets.max_len(); ++k) {
    for (const FrequentItemset& f : itemsets.level(k)) {
      std::string items = "{";
      for (std::size_t i = 0; i < f.items.size(); ++i) {
        if (i) items += ",";
        items += universe.token(f.items[i]);
      }
      items += "}";
      out << csv_row({std::to_string(k), items, std::to_string(f.count),
                      fmt::format("{:.17g}", static_cast<double>(f.count) / n)})
          << '\n';
    }
  }
}

}  // namespace rulekit
