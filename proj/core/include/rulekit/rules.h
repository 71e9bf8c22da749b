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

#ifndef RULEKIT_RULES_H_
#define RULEKIT_RULES_H_

// Consequent-constrained association rules: scoring, generation from
// frequent itemsets, redundancy pruning and lift ranking.

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rulekit/apriori.h"
#include "rulekit/transactions.h"

namespace rulekit {

struct RuleScore {
  double support = 0.0;     // count_XY / n
  double confidence = 0.0;  // count_XY / count_X
  double lift = 0.0;        // count_XY * n / (count_X * count_Y)
};

// Requires 0 < count_x <= n, 0 < count_y <= n and
// count_xy <= min(count_x, count_y); throws ValidationError otherwise.
RuleScore score(std::size_t n, std::size_t count_x, std::size_t count_y, std::size_t count_xy);

struct Rule {
  std::string id;  // "R1".., assigned by rank_rules
  Itemset antecedent;
  ItemId consequent = 0;
  std::size_t joint_count = 0;
  std::size_t antecedent_count = 0;
  std::size_t consequent_count = 0;
  std::size_t n_transactions = 0;
  double support = 0.0;
  double confidence = 0.0;
  double lift = 0.0;
};

struct ConsequentSpec {
  std::string variable;
  std::string category;
};

struct MiningCase {
  std::string name;
  // Unset means every item may serve as the single consequent.
  std::optional<ConsequentSpec> consequent;
  SupportSpec min_support = SupportSpec::count(1);
  // Values above 1 are accepted and admit no rule.
  double min_confidence = 0.0;
  double min_lift = 1.1;
  std::size_t max_rule_items = 4;
  // 0 keeps every rule.
  std::size_t top_k = 20;
  bool allow_empty_antecedent = false;

  // Throws ValidationError for negative thresholds or max_rule_items < 1.
  void validate() const;
};

// Emits (Z \ {Y}) -> Y for every frequent Z containing the consequent Y with
// |Z| <= max_rule_items, keeping rules whose joint count meets the case's
// resolved support and whose confidence and lift are at least the case
// minimums (inclusive). Rules come out in frequent-itemset order.
std::vector<Rule> generate_rules(const FrequentItemsets& itemsets,
                                 const TransactionSet& transactions, const MiningCase& mining_case);

// Removes every rule X -> Y for which some rule X' -> Y with X' a strict
// subset of X has confidence >= confidence(X -> Y). Input order is kept.
// Throws ValidationError when rules have different consequents.
std::vector<Rule> prune_redundant(const std::vector<Rule>& rules);

// Sorts by lift desc, confidence desc, support desc, antecedent ItemIds asc,
// consequent asc; assigns ids R1..Rk and returns the first top_k (0 = all).
// Comparisons use the integer counts, so the order is exact.
std::vector<Rule> rank_rules(std::vector<Rule> rules, std::size_t top_k);

struct CaseResult {
  MiningCase mining_case;
  std::optional<ItemId> consequent;
  std::size_t n_transactions = 0;
  std::size_t resolved_min_support_count = 0;
  std::size_t frequent_itemsets = 0;
  std::size_t rules_generated = 0;
  std::size_t rules_after_pruning = 0;
  // Every rule surviving pruning, ranked and numbered.
  std::vector<Rule> ranked;
  // The first top_k of `ranked`.
  std::vector<Rule> top() const;
};

// mine_frequent -> generate_rules -> prune_redundant -> rank_rules.
CaseResult run_case(const TransactionSet& transactions, const MiningCase& mining_case,
                    unsigned threads = 1);

// "{a=x, b=y}".
std::string format_itemset(const Itemset& items, const ItemUniverse& universe);

// CSV columns: id, antecedent_items, consequent, joint_count, support_pct,
// confidence_pct, lift. Percentages at 3 decimals, lift at 2.
void write_rules_csv(const std::vector<Rule>& rules, const ItemUniverse& universe,
                     std::ostream& out);

// {case, resolved_min_support_count, rules_generated, rules_after_pruning, top_k}
std::string case_metadata_json(const CaseResult& result, const ItemUniverse& universe);

}  // namespace rulekit

#endif  // RULEKIT_RULES_H_
