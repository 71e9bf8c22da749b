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

#ifndef RULEKIT_FOREST_H_
#define RULEKIT_FOREST_H_

// Random forest classifier over categorical variables with out-of-bag
// permutation importance (mean decrease in accuracy).
//
// Each tree is grown on a bootstrap sample of the records. At every node
// `mtry` features are drawn without replacement and the best binary split of
// each drawn feature's categories is found by Gini impurity decrease. A tree's
// random stream is derived from (seed, tree index) alone, so forests and
// importance reports are identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rulekit/schema.h"

namespace rulekit {

struct ForestConfig {
  std::size_t n_trees = 500;
  // 0 selects floor(sqrt(#features)), at least 1.
  std::size_t mtry = 0;
  std::size_t min_node_size = 1;
  // 0 means unlimited.
  std::size_t max_depth = 0;
  std::uint64_t seed = 0;
};

// Categories with their bit set in `left_categories` go to the left child.
struct TreeNode {
  int feature = -1;  // index into Forest::features(); -1 for a leaf
  std::uint64_t left_categories = 0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::vector<std::uint32_t> class_counts;  // in-bag records reaching the node
  std::uint16_t prediction = 0;

  bool is_leaf() const { return feature < 0; }
};

class DecisionTree {
 public:
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  bool uses_feature(std::size_t feature) const;

  // `value(f)` returns the category of feature f for the record being
  // classified.
  template <typename ValueFn>
  std::uint16_t predict(ValueFn&& value) const {
    std::uint32_t n = 0;
    while (!nodes_[n].is_leaf()) {
      const TreeNode& node = nodes_[n];
      const auto category = value(static_cast<std::size_t>(node.feature));
      n = ((node.left_categories >> category) & 1u) ? node.left : node.right;
    }
    return nodes_[n].prediction;
  }

 private:
  std::vector<TreeNode> nodes_;
};

class Forest {
 public:
  Forest(std::shared_ptr<const DataDictionary> dictionary, std::size_t response_variable,
         std::vector<std::size_t> feature_variables, std::size_t n_records,
         std::vector<DecisionTree> trees, std::vector<std::vector<std::uint32_t>> in_bag);

  const DataDictionary& dictionary() const { return *dictionary_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t n_records() const { return n_records_; }
  std::size_t response_variable() const { return response_variable_; }
  const std::string& response() const { return dictionary_->variable(response_variable_).name; }
  const std::vector<std::string>& classes() const {
    return dictionary_->variable(response_variable_).categories;
  }
  // Dictionary indices of the features, in training order.
  const std::vector<std::size_t>& feature_variables() const { return feature_variables_; }
  std::vector<std::string> features() const;

  // Number of times record r was drawn into tree t's bootstrap sample.
  std::uint32_t in_bag_count(std::size_t tree, std::size_t record) const {
    return in_bag_[tree][record];
  }
  bool is_out_of_bag(std::size_t tree, std::size_t record) const {
    return in_bag_[tree][record] == 0;
  }

 private:
  std::shared_ptr<const DataDictionary> dictionary_;
  std::size_t response_variable_;
  std::vector<std::size_t> feature_variables_;
  std::size_t n_records_;
  std::vector<DecisionTree> trees_;
  std::vector<std::vector<std::uint32_t>> in_bag_;
};

// Requires >= 2 response classes present, a nonempty feature list not
// containing the response, and <= 64 categories per feature.
Forest train(const RecordSet& records, std::string_view response,
             std::span<const std::string> features, const ForestConfig& config,
             unsigned threads = 1);

struct OobPrediction {
  // Majority vote of the trees for which the record is out of bag; ties go to
  // the class listed first in the dictionary. Empty for records that are in
  // bag everywhere.
  std::vector<std::optional<std::uint16_t>> predicted;
  std::size_t covered = 0;
  std::size_t correct = 0;
  // correct / covered; 0 when nothing is covered.
  double accuracy = 0.0;
};

// `records` must be the training set (same dictionary and size).
OobPrediction oob_predict(const Forest& forest, const RecordSet& records);

struct ImportanceEntry {
  std::string variable;
  std::size_t variable_index = 0;  // dictionary index
  double mda = 0.0;
  double sd = 0.0;
};

struct ImportanceReport {
  std::string response;
  // Descending mda; ties in dictionary order.
  std::vector<ImportanceEntry> entries;
  double oob_accuracy = 0.0;
  // Trees with at least one out-of-bag record.
  std::size_t trees_used = 0;
};

// For every tree and feature: accuracy on the tree's out-of-bag records minus
// the accuracy after permuting that feature among the same records. mda is the
// mean over trees, sd the sample standard deviation. Unscaled.
ImportanceReport mda_importance(const Forest& forest, const RecordSet& records,
                                std::uint64_t seed, unsigned threads = 1);

// The first k variables of the report. Throws ValidationError unless
// 1 <= k <= entries.size().
std::vector<std::string> select_top_k(const ImportanceReport& report, std::size_t k);

struct CategoricalSplit {
  std::uint64_t left_categories = 0;
  // Weighted Gini decrease: gini(parent) - (nL gini(L) + nR gini(R)) / n.
  double decrease = 0.0;
};

// Best binary partition of a node's categories given its category x class
// contingency table (`counts[c * n_classes + k]`). Only categories present at
// the node are partitioned; absent ones follow the larger child. Exhaustive for
// <= 12 present categories, greedy otherwise. Returns nothing when no
// partition leaves min_node_size records on both sides with a positive
// decrease.
std::optional<CategoricalSplit> best_categorical_split(std::span<const std::uint32_t> counts,
                                                       std::size_t n_categories,
                                                       std::size_t n_classes,
                                                       std::size_t min_node_size);

}  // namespace rulekit

#endif  // RULEKIT_FOREST_H_
