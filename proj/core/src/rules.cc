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

#include "rulekit/rules.h"

#include <algorithm>
#include <map>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "rulekit/csv.h"
#include "rulekit/error.h"

namespace rulekit {
namespace {

// Products of three counts overflow 64 bits on large inputs.
__extension__ typedef unsigned __int128 Wide;

}  // namespace

RuleScore score(std::size_t n, std::size_t count_x, std::size_t count_y, std::size_t count_xy) {
  if (count_x == 0 || count_y == 0) {
    throw ValidationError("confidence and lift are undefined for a zero antecedent or "
                          "consequent count");
  }
  if (count_x > n || count_y > n || count_xy > std::min(count_x, count_y)) {
    throw ValidationError(fmt::format("inconsistent rule counts (n={}, X={}, Y={}, XY={})", n,
                                      count_x, count_y, count_xy));
  }
  const double dn = static_cast<double>(n);
  const double dx = static_cast<double>(count_x);
  const double dy = static_cast<double>(count_y);
  const double dxy = static_cast<double>(count_xy);
  return {dxy / dn, dxy / dx, (dxy * dn) / (dx * dy)};
}

void MiningCase::validate() const {
  if (min_confidence < 0.0) {
    throw ValidationError(fmt::format("case '{}': min_confidence must be >= 0", name));
  }
  if (min_lift < 0.0) throw ValidationError(fmt::format("case '{}': min_lift must be >= 0", name));
  if (max_rule_items < 1) {
    throw ValidationError(fmt::format("case '{}': max_rule_items must be >= 1", name));
  }
}

namespace {

std::optional<ItemId> resolve_consequent(const MiningCase& mining_case,
                                         const ItemUniverse& universe) {
  if (!mining_case.consequent) return std::nullopt;
  return universe.id_of(mining_case.consequent->variable, mining_case.consequent->category);
}

}  // namespace

std::vector<Rule> generate_rules(const FrequentItemsets& itemsets,
                                 const TransactionSet& transactions,
                                 const MiningCase& mining_case) {
  mining_case.validate();
  const ItemUniverse& universe = transactions.universe();
  const std::optional<ItemId> fixed = resolve_consequent(mining_case, universe);
  const std::size_t n = transactions.size();
  const std::size_t threshold = mining_case.min_support.resolve(n);

  std::vector<Rule> rules;
  if (fixed && !itemsets.count_of(std::span<const ItemId>(&*fixed, 1))) {
    spdlog::warn("case '{}': consequent {} is not frequent at the support threshold",
                 mining_case.name, universe.token(*fixed));
    return rules;
  }

  auto emit = [&](const FrequentItemset& z, ItemId y) {
    Itemset antecedent;
    antecedent.reserve(z.items.size() - 1);
    for (ItemId id : z.items) {
      if (id != y) antecedent.push_back(id);
    }
    if (antecedent.empty() && !mining_case.allow_empty_antecedent) return;
    if (z.count < threshold || z.count == 0) return;

    std::optional<std::size_t> count_x = itemsets.count_of(antecedent);
    if (!count_x) count_x = support_count(transactions, antecedent);
    const std::size_t count_y = *itemsets.count_of(std::span<const ItemId>(&y, 1));
    const RuleScore s = score(n, *count_x, count_y, z.count);
    if (s.confidence < mining_case.min_confidence || s.lift < mining_case.min_lift) return;

    Rule rule;
    rule.antecedent = std::move(antecedent);
    rule.consequent = y;
    rule.joint_count = z.count;
    rule.antecedent_count = *count_x;
    rule.consequent_count = count_y;
    rule.n_transactions = n;
    rule.support = s.support;
    rule.confidence = s.confidence;
    rule.lift = s.lift;
    rules.push_back(std::move(rule));
  };

  const std::size_t max_k = std::min(mining_case.max_rule_items, itemsets.max_len());
  for (std::size_t k = 1; k <= max_k; ++k) {
    for (const FrequentItemset& z : itemsets.level(k)) {
      if (fixed) {
        if (std::binary_search(z.items.begin(), z.items.end(), *fixed)) emit(z, *fixed);
      } else {
        for (ItemId y : z.items) emit(z, y);
      }
    }
  }
  return rules;
}

std::vector<Rule> prune_redundant(const std::vector<Rule>& rules) {
  if (rules.empty()) return {};
  const ItemId consequent = rules.front().consequent;
  for (const Rule& rule : rules) {
    if (rule.consequent != consequent) {
      throw ValidationError("prune_redundant needs rules with a single shared consequent");
    }
  }

  // Visit antecedents by size so that every strict subset is settled first.
  // Checking retained rules only is enough: a removed subset rule is itself
  // dominated by a retained one with confidence at least as high.
  std::vector<std::size_t> order(rules.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rules[a].antecedent.size() < rules[b].antecedent.size();
  });

  std::unordered_map<Itemset, const Rule*, ItemsetHash> retained;
  std::vector<bool> keep(rules.size(), false);
  Itemset subset;
  for (std::size_t index : order) {
    const Rule& rule = rules[index];
    const std::size_t size = rule.antecedent.size();
    bool dominated = false;
    // Every strict subset, as a bit pattern over antecedent positions.
    if (size >= 64) throw ValidationError("antecedent too long for redundancy pruning");
    const std::uint64_t full = (std::uint64_t{1} << size) - 1;
    for (std::uint64_t bits = 0; bits < full && !dominated; ++bits) {
      subset.clear();
      for (std::size_t p = 0; p < size; ++p) {
        if ((bits >> p) & 1u) subset.push_back(rule.antecedent[p]);
      }
      auto it = retained.find(subset);
      if (it == retained.end()) continue;
      const Rule& simpler = *it->second;
      // conf(simpler) >= conf(rule), cross-multiplied.
      dominated = static_cast<Wide>(simpler.joint_count) * rule.antecedent_count >=
                  static_cast<Wide>(rule.joint_count) * simpler.antecedent_count;
    }
    if (!dominated) {
      keep[index] = true;
      retained.emplace(rule.antecedent, &rule);
    }
  }

  std::vector<Rule> out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (keep[i]) out.push_back(rules[i]);
  }
  return out;
}

namespace {

// Three-way comparison of a/b against c/d for positive denominators.
int compare_ratio(Wide a, Wide b, Wide c, Wide d) {
  const Wide lhs = a * d;
  const Wide rhs = c * b;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

bool ranks_before(const Rule& a, const Rule& b) {
  // lift = joint * n / (x * y)
  if (int c = compare_ratio(Wide{a.joint_count} * a.n_transactions,
                            Wide{a.antecedent_count} * a.consequent_count,
                            Wide{b.joint_count} * b.n_transactions,
                            Wide{b.antecedent_count} * b.consequent_count);
      c != 0) {
    return c > 0;
  }
  if (int c = compare_ratio(a.joint_count, a.antecedent_count, b.joint_count,
                            b.antecedent_count);
      c != 0) {
    return c > 0;
  }
  if (int c = compare_ratio(a.joint_count, a.n_transactions, b.joint_count, b.n_transactions);
      c != 0) {
    return c > 0;
  }
  if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
  return a.consequent < b.consequent;
}

}  // namespace

std::vector<Rule> rank_rules(std::vector<Rule> rules, std::size_t top_k) {
  std::sort(rules.begin(), rules.end(), ranks_before);
  if (top_k != 0 && rules.size() > top_k) rules.resize(top_k);
  for (std::size_t i = 0; i < rules.size(); ++i) rules[i].id = "R" + std::to_string(i + 1);
  return rules;
}

std::vector<Rule> CaseResult::top() const {
  const std::size_t k = mining_case.top_k;
  if (k == 0 || ranked.size() <= k) return ranked;
  return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k)};
}

CaseResult run_case(const TransactionSet& transactions, const MiningCase& mining_case,
                    unsigned threads) {
  mining_case.validate();
  CaseResult result;
  result.mining_case = mining_case;
  result.consequent = resolve_consequent(mining_case, transactions.universe());
  result.n_transactions = transactions.size();
  result.resolved_min_support_count = mining_case.min_support.resolve(transactions.size());

  const FrequentItemsets itemsets =
      mine_frequent(transactions, mining_case.min_support, mining_case.max_rule_items, threads);
  result.frequent_itemsets = itemsets.total();

  const std::vector<Rule> generated = generate_rules(itemsets, transactions, mining_case);
  result.rules_generated = generated.size();

  std::vector<Rule> pruned;
  if (result.consequent) {
    pruned = prune_redundant(generated);
  } else {
    std::map<ItemId, std::vector<Rule>> by_consequent;
    for (const Rule& rule : generated) by_consequent[rule.consequent].push_back(rule);
    for (const auto& [item, group] : by_consequent) {
      std::vector<Rule> kept = prune_redundant(group);
      pruned.insert(pruned.end(), kept.begin(), kept.end());
    }
  }
  result.rules_after_pruning = pruned.size();
  result.ranked = rank_rules(std::move(pruned), 0);

  spdlog::info("case '{}': min support {} resolved to {} of {} transactions; {} rules "
               "generated, {} after pruning",
               mining_case.name, mining_case.min_support.describe(),
               result.resolved_min_support_count, result.n_transactions, result.rules_generated,
               result.rules_after_pruning);
  if (result.ranked.empty()) spdlog::warn("case '{}' produced no rules", mining_case.name);
  return result;
}

std::string format_itemset(const Itemset& items, const ItemUniverse& universe) {
  std::string out = "{";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += universe.token(items[i]);
  }
  out += "}";
  return out;
}

void write_rules_csv(const std::vector<Rule>& rules, const ItemUniverse& universe,
                     std::ostream& out) {
  out << "id,antecedent_items,consequent,joint_count,support_pct,confidence_pct,lift\n";
  for (const Rule& rule : rules) {
    out << csv_row({rule.id, format_itemset(rule.antecedent, universe),
                    universe.token(rule.consequent), std::to_string(rule.joint_count),
                    fmt::format("{:.3f}", rule.support * 100.0),
                    fmt::format("{:.3f}", rule.confidence * 100.0),
                    fmt::format("{:.2f}", rule.lift)})
        << '\n';
  }
}

std::string case_metadata_json(const CaseResult& result, const ItemUniverse& universe) {
  const MiningCase& c = result.mining_case;
  nlohmann::ordered_json doc;
  doc["case"] = c.name;
  doc["consequent"] =
      result.consequent ? nlohmann::ordered_json(universe.token(*result.consequent)) : nullptr;
  doc["n_transactions"] = result.n_transactions;
  doc["min_support"] = c.min_support.describe();
  doc["resolved_min_support_count"] = result.resolved_min_support_count;
  doc["min_confidence"] = c.min_confidence;
  doc["min_lift"] = c.min_lift;
  doc["max_rule_items"] = c.max_rule_items;
  doc["frequent_itemsets"] = result.frequent_itemsets;
  doc["rules_generated"] = result.rules_generated;
  doc["rules_after_pruning"] = result.rules_after_pruning;
  doc["top_k"] = c.top_k;
  return doc.dump(2);
}

}  // namespace rulekit
