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

#include "rulekit/transactions.h"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "rulekit/error.h"
#include "rulekit/parallel.h"

namespace rulekit {

ItemUniverse::ItemUniverse(std::shared_ptr<const DataDictionary> dictionary,
                           std::vector<Item> items)
    : dictionary_(std::move(dictionary)), items_(std::move(items)) {
  if (!dictionary_) throw ValidationError("item universe needs a dictionary");
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const Item& it = items_[i];
    if (it.variable >= dictionary_->size() ||
        it.category >= dictionary_->variable(it.variable).categories.size()) {
      throw ValidationError(fmt::format("item #{} is not in the dictionary", i));
    }
    if (!index_.emplace(it, static_cast<ItemId>(i)).second) {
      throw ValidationError(fmt::format("duplicate item '{}'", token(static_cast<ItemId>(i))));
    }
  }
}

std::optional<ItemId> ItemUniverse::find(const Item& item) const {
  auto it = index_.find(item);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ItemId> ItemUniverse::find(std::string_view variable,
                                         std::string_view category) const {
  const auto v = dictionary_->find(variable);
  if (!v) return std::nullopt;
  const auto c = dictionary_->variable(*v).category_index(category);
  if (!c) return std::nullopt;
  return find(Item{*v, *c});
}

ItemId ItemUniverse::id_of(std::string_view variable, std::string_view category) const {
  if (auto id = find(variable, category)) return *id;
  throw ValidationError(fmt::format("item '{}={}' is not in the item universe", variable,
                                    category));
}

const std::string& ItemUniverse::variable_name(ItemId id) const {
  return dictionary_->variable(item(id).variable).name;
}

const std::string& ItemUniverse::category_name(ItemId id) const {
  const Item& it = item(id);
  return dictionary_->variable(it.variable).categories[it.category];
}

std::string ItemUniverse::token(ItemId id) const {
  return variable_name(id) + "=" + category_name(id);
}

TransactionSet::TransactionSet(ItemUniverse universe, std::size_t n_transactions,
                               std::vector<std::uint64_t> bits)
    : universe_(std::move(universe)),
      n_transactions_(n_transactions),
      words_per_row_((universe_.size() + 63) / 64),
      bits_(std::move(bits)) {
  if (bits_.size() != n_transactions_ * words_per_row_) {
    throw ValidationError("transaction bit matrix has the wrong size");
  }
}

std::vector<ItemId> TransactionSet::items_of(std::size_t t) const {
  std::vector<ItemId> out;
  const auto words = row(t);
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::uint64_t bits = words[w]; bits; bits &= bits - 1) {
      out.push_back(static_cast<ItemId>(w * 64 + std::countr_zero(bits)));
    }
  }
  return out;
}

TransactionSet encode(const RecordSet& records, std::span<const std::string> selected_variables,
                      const EncodeOptions& options) {
  if (selected_variables.empty()) throw ValidationError("no variables selected for encoding");
  if (records.empty()) throw ValidationError("cannot encode an empty record set");
  const DataDictionary& dict = records.dictionary();

  std::vector<std::size_t> vars;
  for (const std::string& name : selected_variables) {
    const std::size_t v = dict.index_of(name);
    if (std::find(vars.begin(), vars.end(), v) != vars.end()) {
      throw ValidationError(fmt::format("variable '{}' selected twice", dict.variable(v).name));
    }
    vars.push_back(v);
  }
  std::sort(vars.begin(), vars.end());

  std::vector<Item> items;
  for (std::size_t v : vars) {
    const std::size_t n_categories = dict.variable(v).categories.size();
    std::vector<bool> present(n_categories, options.full_universe);
    if (!options.full_universe) {
      for (const Record& record : records.records()) present[record.values[v]] = true;
    }
    for (std::size_t c = 0; c < n_categories; ++c) {
      if (present[c]) items.push_back({v, static_cast<CategoryIndex>(c)});
    }
  }

  ItemUniverse universe(records.dictionary_ptr(), items);
  const std::size_t words = (universe.size() + 63) / 64;
  std::vector<std::uint64_t> bits(records.size() * words, 0);
  for (std::size_t t = 0; t < records.size(); ++t) {
    const Record& record = records.records()[t];
    for (std::size_t v : vars) {
      const ItemId id = *universe.find(Item{v, record.values[v]});
      bits[t * words + id / 64] |= std::uint64_t{1} << (id % 64);
    }
  }
  return TransactionSet(std::move(universe), records.size(), std::move(bits));
}

std::vector<ItemFrequency> item_frequencies(const TransactionSet& transactions) {
  const std::size_t n_items = transactions.universe().size();
  std::vector<std::size_t> counts(n_items, 0);
  for (std::size_t t = 0; t < transactions.size(); ++t) {
    const auto words = transactions.row(t);
    for (std::size_t w = 0; w < words.size(); ++w) {
      for (std::uint64_t bits = words[w]; bits; bits &= bits - 1) {
        ++counts[w * 64 + std::countr_zero(bits)];
      }
    }
  }
  std::vector<ItemFrequency> out;
  if (transactions.size() == 0) return out;
  out.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    out.push_back({static_cast<ItemId>(i), counts[i],
                   static_cast<double>(counts[i]) / static_cast<double>(transactions.size())});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ItemFrequency& a, const ItemFrequency& b) { return a.count > b.count; });
  return out;
}

namespace {

// Transactions per parallel block. Integer partial sums are reduced in block
// order, so the total is schedule independent.
constexpr std::size_t kCountBlock = 4096;

std::size_t count_rows(const TransactionSet& ts, std::span<const std::uint64_t> mask,
                       std::size_t begin, std::size_t end) {
  std::size_t hits = 0;
  if (mask.size() == 1) {
    const std::uint64_t m = mask[0];
    for (std::size_t t = begin; t < end; ++t) hits += (ts.row(t)[0] & m) == m;
    return hits;
  }
  for (std::size_t t = begin; t < end; ++t) {
    const auto row = ts.row(t);
    bool all = true;
    for (std::size_t w = 0; w < mask.size() && all; ++w) all = (row[w] & mask[w]) == mask[w];
    hits += all;
  }
  return hits;
}

}  // namespace

std::size_t support_count(const TransactionSet& transactions, const ItemMask& mask,
                          unsigned threads) {
  const auto words = mask.words();
  if (words.size() != transactions.words_per_row()) {
    throw ValidationError("item mask does not match the transaction universe");
  }
  const std::size_t n = transactions.size();
  const std::size_t blocks = (n + kCountBlock - 1) / kCountBlock;
  if (blocks <= 1 || threads <= 1) return count_rows(transactions, words, 0, n);
  std::vector<std::size_t> partial(blocks, 0);
  parallel_for(blocks, threads, [&](std::size_t b) {
    partial[b] = count_rows(transactions, words, b * kCountBlock,
                            std::min(n, (b + 1) * kCountBlock));
  });
  return std::accumulate(partial.begin(), partial.end(), std::size_t{0});
}

std::size_t support_count(const TransactionSet& transactions, std::span<const ItemId> itemset,
                          unsigned threads) {
  const std::size_t n_items = transactions.universe().size();
  ItemMask mask(n_items);
  for (ItemId id : itemset) {
    if (id >= n_items) {
      throw ValidationError(fmt::format("item id {} is outside the universe of {} items", id,
                                        n_items));
    }
    mask.set(id);
  }
  if (itemset.empty()) return transactions.size();
  return support_count(transactions, mask, threads);
}

void dump_transactions(const TransactionSet& transactions, std::ostream& out) {
  const ItemUniverse& universe = transactions.universe();
  for (std::size_t t = 0; t < transactions.size(); ++t) {
    bool first = true;
    for (ItemId id : transactions.items_of(t)) {
      if (!first) out << ' ';
      out << universe.token(id);
      first = false;
    }
    out << '\n';
  }
}

}  // namespace rulekit
