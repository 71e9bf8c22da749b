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

#ifndef RULEKIT_TRANSACTIONS_H_
#define RULEKIT_TRANSACTIONS_H_

// Bitset transaction database over (variable, category) items.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rulekit/schema.h"

namespace rulekit {

using ItemId = std::uint32_t;

struct Item {
  std::size_t variable = 0;
  CategoryIndex category = 0;

  auto operator<=>(const Item&) const = default;
};

// Dense numbering of items. ItemIds follow dictionary variable order, then
// category order; every downstream tie-break keys off this order.
class ItemUniverse {
 public:
  ItemUniverse(std::shared_ptr<const DataDictionary> dictionary, std::vector<Item> items);

  std::size_t size() const { return items_.size(); }
  const Item& item(ItemId id) const { return items_.at(id); }
  const std::vector<Item>& items() const { return items_; }
  const DataDictionary& dictionary() const { return *dictionary_; }

  std::optional<ItemId> find(const Item& item) const;
  std::optional<ItemId> find(std::string_view variable, std::string_view category) const;
  // Like find() but throws ValidationError.
  ItemId id_of(std::string_view variable, std::string_view category) const;

  const std::string& variable_name(ItemId id) const;
  const std::string& category_name(ItemId id) const;
  // "variable=category"; a category ">64" prints as "driver_age=>64".
  std::string token(ItemId id) const;

 private:
  std::shared_ptr<const DataDictionary> dictionary_;
  std::vector<Item> items_;
  std::map<Item, ItemId> index_;
};

// One fixed-width bit row per transaction, 64-bit words.
class TransactionSet {
 public:
  TransactionSet(ItemUniverse universe, std::size_t n_transactions,
                 std::vector<std::uint64_t> bits);

  const ItemUniverse& universe() const { return universe_; }
  std::size_t size() const { return n_transactions_; }
  std::size_t words_per_row() const { return words_per_row_; }
  std::span<const std::uint64_t> row(std::size_t t) const {
    return {bits_.data() + t * words_per_row_, words_per_row_};
  }
  bool contains(std::size_t t, ItemId item) const {
    return (row(t)[item / 64] >> (item % 64)) & 1u;
  }
  std::vector<ItemId> items_of(std::size_t t) const;

 private:
  ItemUniverse universe_;
  std::size_t n_transactions_;
  std::size_t words_per_row_;
  std::vector<std::uint64_t> bits_;
};

struct EncodeOptions {
  // Include every dictionary category of the selected variables, not only
  // those that occur.
  bool full_universe = false;
};

TransactionSet encode(const RecordSet& records, std::span<const std::string> selected_variables,
                      const EncodeOptions& options = {});

struct ItemFrequency {
  ItemId item = 0;
  std::size_t count = 0;
  double relative = 0.0;
};

// Descending by count, ties by ItemId.
std::vector<ItemFrequency> item_frequencies(const TransactionSet& transactions);

// Bit mask over the universe; the unit of support counting.
class ItemMask {
 public:
  explicit ItemMask(std::size_t n_items) : words_((n_items + 63) / 64, 0) {}

  void set(ItemId item) { words_[item / 64] |= std::uint64_t{1} << (item % 64); }
  std::span<const std::uint64_t> words() const { return words_; }

 private:
  std::vector<std::uint64_t> words_;
};

// Number of transactions containing every item in `itemset`. The empty
// itemset is contained in every transaction. Throws ValidationError for an id
// outside the universe.
std::size_t support_count(const TransactionSet& transactions, std::span<const ItemId> itemset,
                          unsigned threads = 1);
std::size_t support_count(const TransactionSet& transactions, const ItemMask& mask,
                          unsigned threads = 1);

// Debug dump, one line per transaction: space-separated "variable=category".
void dump_transactions(const TransactionSet& transactions, std::ostream& out);

}  // namespace rulekit

#endif  // RULEKIT_TRANSACTIONS_H_
