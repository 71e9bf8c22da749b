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

#ifndef RULEKIT_APRIORI_H_
#define RULEKIT_APRIORI_H_

// Level-wise frequent itemset mining with join-and-prune candidate
// generation over a horizontal bitset transaction database.

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rulekit/transactions.h"

namespace rulekit {

// Minimum support, either as a fraction of all transactions or as an absolute
// transaction count.
class SupportSpec {
 public:
  // f in (0, 1].
  static SupportSpec fraction(double f);
  // c >= 1.
  static SupportSpec count(std::size_t c);

  bool is_fraction() const { return is_fraction_; }
  double fraction_value() const { return fraction_; }
  std::size_t count_value() const { return count_; }

  // Minimum transaction count: ceil(f * n) floored at 1 for fractions, the
  // count itself otherwise. May exceed n.
  std::size_t resolve(std::size_t n_transactions) const;
  std::string describe() const;

 private:
  SupportSpec() = default;
  bool is_fraction_ = false;
  double fraction_ = 0.0;
  std::size_t count_ = 1;
};

// Items in ascending ItemId order.
using Itemset = std::vector<ItemId>;

struct ItemsetHash {
  std::size_t operator()(const Itemset& items) const noexcept;
};

struct FrequentItemset {
  Itemset items;
  std::size_t count = 0;
};

class FrequentItemsets {
 public:
  FrequentItemsets(std::size_t n_transactions, std::size_t min_support_count,
                   std::size_t max_len, std::vector<std::vector<FrequentItemset>> levels);

  std::size_t n_transactions() const { return n_transactions_; }
  std::size_t min_support_count() const { return min_support_count_; }
  std::size_t max_len() const { return max_len_; }

  // Itemsets of size k (1-based), lexicographic by ItemId sequence. Empty
  // past the last non-empty level.
  const std::vector<FrequentItemset>& level(std::size_t k) const;
  std::size_t total() const;

  // Support count of a stored itemset; n_transactions() for the empty set.
  std::optional<std::size_t> count_of(std::span<const ItemId> items) const;

 private:
  std::size_t n_transactions_;
  std::size_t min_support_count_;
  std::size_t max_len_;
  std::vector<std::vector<FrequentItemset>> levels_;
  std::unordered_map<Itemset, std::size_t, ItemsetHash> counts_;
};

// All itemsets of size <= max_len with support count >= min_support resolved
// against the transaction count. Items of one variable are never combined.
// A threshold above the transaction count logs a warning and yields nothing.
// Output does not depend on `threads`.
FrequentItemsets mine_frequent(const TransactionSet& transactions, const SupportSpec& min_support,
                               std::size_t max_len, unsigned threads = 1);

// CSV columns: level, items, support_count, support_fraction.
void write_itemsets_csv(const FrequentItemsets& itemsets, const ItemUniverse& universe,
                        std::ostream& out);

}  // namespace rulekit

#endif  // RULEKIT_APRIORI_H_
