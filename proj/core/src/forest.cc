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

#include "rulekit/forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rulekit/error.h"
#include "rulekit/parallel.h"

namespace rulekit {
namespace {

constexpr std::size_t kExhaustiveLimit = 12;
constexpr double kMinDecrease = 1e-12;

// Column-major category matrix of the training features plus the response.
struct CategoricalData {
  std::size_t n_records = 0;
  std::vector<std::size_t> n_categories;  // per feature
  std::vector<CategoryIndex> columns;     // [feature * n_records + record]
  std::vector<std::uint16_t> response;
  std::size_t n_classes = 0;

  CategoryIndex value(std::size_t feature, std::size_t record) const {
    return columns[feature * n_records + record];
  }
};

CategoricalData extract(const RecordSet& records, std::size_t response,
                        const std::vector<std::size_t>& features) {
  const DataDictionary& dict = records.dictionary();
  CategoricalData data;
  data.n_records = records.size();
  data.n_classes = dict.variable(response).categories.size();
  data.columns.resize(features.size() * data.n_records);
  for (std::size_t f = 0; f < features.size(); ++f) {
    data.n_categories.push_back(dict.variable(features[f]).categories.size());
    for (std::size_t r = 0; r < data.n_records; ++r) {
      data.columns[f * data.n_records + r] = records.records()[r].values[features[f]];
    }
  }
  data.response.reserve(data.n_records);
  for (const Record& record : records.records()) data.response.push_back(record.values[response]);
  return data;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                         std::uint32_t tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32),
                    tag};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kBootstrapTag = 0x62747265;  // tree growth stream
constexpr std::uint32_t kPermuteTag = 0x6d646121;    // importance permutations

std::uint16_t majority(std::span<const std::uint32_t> counts) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k] > counts[best]) best = k;
  }
  return static_cast<std::uint16_t>(best);
}

// Scores a partition of the present categories. `left` holds one flag per
// entry of `present`.
struct PartitionScorer {
  std::span<const std::uint32_t> counts;
  std::size_t n_classes;
  std::size_t min_node_size;
  const std::vector<std::size_t>& present;
  double total;
  double parent_term;
  mutable std::vector<double> left_k, right_k;

  std::optional<double> decrease(const std::vector<bool>& left) const {
    left_k.assign(n_classes, 0.0);
    right_k.assign(n_classes, 0.0);
    double nl = 0.0;
    double nr = 0.0;
    for (std::size_t i = 0; i < present.size(); ++i) {
      auto& side = left[i] ? left_k : right_k;
      double& n_side = left[i] ? nl : nr;
      for (std::size_t k = 0; k < n_classes; ++k) {
        const double c = counts[present[i] * n_classes + k];
        side[k] += c;
        n_side += c;
      }
    }
    if (nl < static_cast<double>(min_node_size) || nr < static_cast<double>(min_node_size) ||
        nl == 0.0 || nr == 0.0) {
      return std::nullopt;
    }
    double score = 0.0;
    double sl = 0.0;
    double sr = 0.0;
    for (std::size_t k = 0; k < n_classes; ++k) {
      sl += left_k[k] * left_k[k];
      sr += right_k[k] * right_k[k];
    }
    score = sl / nl + sr / nr;
    return (score - parent_term) / total;
  }
};

}  // namespace

std::optional<CategoricalSplit> best_categorical_split(std::span<const std::uint32_t> counts,
                                                       std::size_t n_categories,
                                                       std::size_t n_classes,
                                                       std::size_t min_node_size) {
  if (counts.size() != n_categories * n_classes) {
    throw ValidationError("contingency table size does not match its dimensions");
  }
  if (n_categories > 64) throw ValidationError("at most 64 categories per split feature");

  std::vector<std::size_t> present;
  std::vector<double> class_totals(n_classes, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < n_categories; ++c) {
    double row = 0.0;
    for (std::size_t k = 0; k < n_classes; ++k) {
      row += counts[c * n_classes + k];
      class_totals[k] += counts[c * n_classes + k];
    }
    if (row > 0.0) present.push_back(c);
    total += row;
  }
  const std::size_t m = present.size();
  if (m < 2) return std::nullopt;

  double parent_term = 0.0;
  for (double t : class_totals) parent_term += t * t;
  parent_term /= total;

  const PartitionScorer scorer{counts, n_classes, min_node_size, present, total, parent_term,
                               {}, {}};
  std::vector<bool> best_left;
  double best = -1.0;
  std::vector<bool> left(m, false);

  if (m <= kExhaustiveLimit) {
    // The first present category always goes left, which removes mirrored
    // duplicates; the all-left partition is skipped.
    const std::uint32_t limit = (std::uint32_t{1} << (m - 1)) - 1;
    for (std::uint32_t bits = 0; bits < limit; ++bits) {
      left[0] = true;
      for (std::size_t i = 1; i < m; ++i) left[i] = (bits >> (i - 1)) & 1u;
      if (auto d = scorer.decrease(left); d && *d > best) {
        best = *d;
        best_left = left;
      }
    }
  } else {
    // One-vs-rest seed, then single-category moves while they improve.
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(left.begin(), left.end(), false);
      left[i] = true;
      if (auto d = scorer.decrease(left); d && *d > best) {
        best = *d;
        best_left = left;
      }
    }
    for (std::size_t round = 0; round < m * m && !best_left.empty(); ++round) {
      std::vector<bool> round_best;
      double round_score = best;
      for (std::size_t i = 0; i < m; ++i) {
        left = best_left;
        left[i] = !left[i];
        if (auto d = scorer.decrease(left); d && *d > round_score + kMinDecrease) {
          round_score = *d;
          round_best = left;
        }
      }
      if (round_best.empty()) break;
      best = round_score;
      best_left = std::move(round_best);
    }
  }

  if (best_left.empty() || best <= kMinDecrease) return std::nullopt;

  CategoricalSplit split;
  split.decrease = best;
  double nl = 0.0;
  double nr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < n_classes; ++k) row += counts[present[i] * n_classes + k];
    if (best_left[i]) {
      split.left_categories |= std::uint64_t{1} << present[i];
      nl += row;
    } else {
      nr += row;
    }
  }
  if (nl >= nr) {
    std::size_t p = 0;
    for (std::size_t c = 0; c < n_categories; ++c) {
      if (p < m && present[p] == c) {
        ++p;
        continue;
      }
      split.left_categories |= std::uint64_t{1} << c;
    }
  }
  return split;
}

bool DecisionTree::uses_feature(std::size_t feature) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const TreeNode& node) {
    return node.feature == static_cast<int>(feature);
  });
}

Forest::Forest(std::shared_ptr<const DataDictionary> dictionary, std::size_t response_variable,
               std::vector<std::size_t> feature_variables, std::size_t n_records,
               std::vector<DecisionTree> trees, std::vector<std::vector<std::uint32_t>> in_bag)
    : dictionary_(std::move(dictionary)),
      response_variable_(response_variable),
      feature_variables_(std::move(feature_variables)),
      n_records_(n_records),
      trees_(std::move(trees)),
      in_bag_(std::move(in_bag)) {
  if (in_bag_.size() != trees_.size()) {
    throw ValidationError("forest needs one bootstrap record per tree");
  }
}

std::vector<std::string> Forest::features() const {
  std::vector<std::string> names;
  for (std::size_t v : feature_variables_) names.push_back(dictionary_->variable(v).name);
  return names;
}

namespace {

DecisionTree grow_tree(const CategoricalData& data, const std::vector<std::uint32_t>& in_bag,
                       const ForestConfig& config, std::size_t mtry, std::mt19937_64& rng) {
  const std::size_t n_features = data.n_categories.size();
  const std::size_t n_classes = data.n_classes;

  struct Pending {
    std::uint32_t node;
    std::vector<std::uint32_t> samples;
    std::size_t depth;
  };

  std::vector<TreeNode> nodes;
  std::vector<Pending> stack;
  {
    std::vector<std::uint32_t> root;
    for (std::size_t r = 0; r < in_bag.size(); ++r) {
      root.insert(root.end(), in_bag[r], static_cast<std::uint32_t>(r));
    }
    nodes.emplace_back();
    stack.push_back({0, std::move(root), 0});
  }

  std::vector<std::size_t> feature_pool(n_features);
  std::vector<std::uint32_t> table;
  while (!stack.empty()) {
    Pending work = std::move(stack.back());
    stack.pop_back();

    std::vector<std::uint32_t> class_counts(n_classes, 0);
    for (std::uint32_t r : work.samples) ++class_counts[data.response[r]];
    const std::size_t n = work.samples.size();
    const bool pure = std::count_if(class_counts.begin(), class_counts.end(),
                                    [](std::uint32_t c) { return c > 0; }) <= 1;
    {
      TreeNode& node = nodes[work.node];
      node.prediction = majority(class_counts);
      node.class_counts = class_counts;
    }
    if (pure || n < 2 * config.min_node_size ||
        (config.max_depth != 0 && work.depth >= config.max_depth)) {
      continue;
    }

    // Partial Fisher-Yates draw of mtry features.
    std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
    int best_feature = -1;
    CategoricalSplit best_split;
    for (std::size_t i = 0; i < mtry; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n_features - 1);
      std::swap(feature_pool[i], feature_pool[pick(rng)]);
      const std::size_t f = feature_pool[i];

      table.assign(data.n_categories[f] * n_classes, 0);
      for (std::uint32_t r : work.samples) {
        ++table[data.value(f, r) * n_classes + data.response[r]];
      }
      auto split =
          best_categorical_split(table, data.n_categories[f], n_classes, config.min_node_size);
      if (split && (best_feature < 0 || split->decrease > best_split.decrease)) {
        best_feature = static_cast<int>(f);
        best_split = *split;
      }
    }
    if (best_feature < 0) continue;

    std::vector<std::uint32_t> left_samples;
    std::vector<std::uint32_t> right_samples;
    for (std::uint32_t r : work.samples) {
      const auto category = data.value(static_cast<std::size_t>(best_feature), r);
      ((best_split.left_categories >> category) & 1u ? left_samples : right_samples).push_back(r);
    }
    const auto left_index = static_cast<std::uint32_t>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    TreeNode& node = nodes[work.node];
    node.feature = best_feature;
    node.left_categories = best_split.left_categories;
    node.left = left_index;
    node.right = left_index + 1;
    // Right pushed first so the left subtree is grown first.
    stack.push_back({left_index + 1, std::move(right_samples), work.depth + 1});
    stack.push_back({left_index, std::move(left_samples), work.depth + 1});
  }
  return DecisionTree(std::move(nodes));
}

void check_matches(const Forest& forest, const RecordSet& records) {
  if (records.size() != forest.n_records() || !(records.dictionary() == forest.dictionary())) {
    throw ValidationError(fmt::format(
        "record set ({} records) is not the forest's training set ({} records)", records.size(),
        forest.n_records()));
  }
}

}  // namespace

Forest train(const RecordSet& records, std::string_view response,
             std::span<const std::string> features, const ForestConfig& config,
             unsigned threads) {
  const DataDictionary& dict = records.dictionary();
  if (features.empty()) throw ValidationError("forest needs at least one feature");
  if (config.n_trees < 1) throw ValidationError("forest needs at least one tree");
  if (config.min_node_size < 1) throw ValidationError("min_node_size must be at least 1");
  const std::size_t response_index = dict.index_of(response);

  std::vector<std::size_t> feature_index;
  for (const std::string& name : features) {
    const std::size_t v = dict.index_of(name);
    if (v == response_index) {
      throw ValidationError(fmt::format("response '{}' cannot also be a feature", response));
    }
    if (std::find(feature_index.begin(), feature_index.end(), v) != feature_index.end()) {
      throw ValidationError(fmt::format("feature '{}' listed twice", name));
    }
    if (dict.variable(v).categories.size() > 64) {
      throw ValidationError(fmt::format("feature '{}' has more than 64 categories", name));
    }
    feature_index.push_back(v);
  }

  const std::size_t mtry =
      config.mtry == 0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                         std::sqrt(static_cast<double>(feature_index.size())))))
          : config.mtry;
  if (mtry > feature_index.size()) {
    throw ValidationError(fmt::format("mtry {} exceeds the {} features", mtry,
                                      feature_index.size()));
  }

  const CategoricalData data = extract(records, response_index, feature_index);
  std::vector<bool> seen(data.n_classes, false);
  for (std::uint16_t y : data.response) seen[y] = true;
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw ValidationError(fmt::format("response '{}' has fewer than two classes present",
                                      dict.variable(response_index).name));
  }

  const std::size_t n = data.n_records;
  std::vector<DecisionTree> trees(config.n_trees, DecisionTree({}));
  std::vector<std::vector<std::uint32_t>> in_bag(config.n_trees);
  parallel_for(config.n_trees, threads, [&](std::size_t t) {
    std::mt19937_64 rng = make_rng(config.seed, t, 0, kBootstrapTag);
    std::vector<std::uint32_t> counts(n, 0);
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) ++counts[draw(rng)];
    trees[t] = grow_tree(data, counts, config, mtry, rng);
    in_bag[t] = std::move(counts);
  });
  spdlog::debug("forest: grew {} trees on {} records, mtry {}", config.n_trees, n, mtry);
  return Forest(records.dictionary_ptr(), response_index, std::move(feature_index), n,
                std::move(trees), std::move(in_bag));
}

OobPrediction oob_predict(const Forest& forest, const RecordSet& records) {
  check_matches(forest, records);
  const CategoricalData data =
      extract(records, forest.response_variable(), forest.feature_variables());
  const std::size_t n = data.n_records;
  const std::size_t k = data.n_classes;

  std::vector<std::uint32_t> votes(n * k, 0);
  for (std::size_t t = 0; t < forest.trees().size(); ++t) {
    const DecisionTree& tree = forest.trees()[t];
    for (std::size_t r = 0; r < n; ++r) {
      if (!forest.is_out_of_bag(t, r)) continue;
      ++votes[r * k + tree.predict([&](std::size_t f) { return data.value(f, r); })];
    }
  }

  OobPrediction out;
  out.predicted.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::span<const std::uint32_t> v(votes.data() + r * k, k);
    if (std::all_of(v.begin(), v.end(), [](std::uint32_t c) { return c == 0; })) continue;
    const std::uint16_t cls = majority(v);
    out.predicted[r] = cls;
    ++out.covered;
    out.correct += cls == data.response[r];
  }
  out.accuracy = out.covered == 0 ? 0.0
                                  : static_cast<double>(out.correct) /
                                        static_cast<double>(out.covered);
  return out;
}

ImportanceReport mda_importance(const Forest& forest, const RecordSet& records,
                                std::uint64_t seed, unsigned threads) {
  check_matches(forest, records);
  const CategoricalData data =
      extract(records, forest.response_variable(), forest.feature_variables());
  const std::size_t n_trees = forest.trees().size();
  const std::size_t n_features = forest.feature_variables().size();

  // drops[t * n_features + f]; trees without out-of-bag records are skipped.
  std::vector<double> drops(n_trees * n_features, 0.0);
  std::vector<char> has_oob(n_trees, 0);  // not vector<bool>: written per tree concurrently
  parallel_for(n_trees, threads, [&](std::size_t t) {
    const DecisionTree& tree = forest.trees()[t];
    std::vector<std::uint32_t> oob;
    for (std::size_t r = 0; r < data.n_records; ++r) {
      if (forest.is_out_of_bag(t, r)) oob.push_back(static_cast<std::uint32_t>(r));
    }
    if (oob.empty()) return;
    has_oob[t] = 1;

    std::size_t base_correct = 0;
    for (std::uint32_t r : oob) {
      base_correct += tree.predict([&](std::size_t f) { return data.value(f, r); }) ==
                      data.response[r];
    }
    std::vector<std::uint32_t> donor;
    for (std::size_t j = 0; j < n_features; ++j) {
      // Permuting a feature the tree never splits on cannot change a prediction.
      if (!tree.uses_feature(j)) continue;
      std::mt19937_64 rng = make_rng(seed, t, j, kPermuteTag);
      donor = oob;
      std::shuffle(donor.begin(), donor.end(), rng);
      std::size_t permuted_correct = 0;
      for (std::size_t i = 0; i < oob.size(); ++i) {
        const std::uint32_t r = oob[i];
        const std::uint32_t d = donor[i];
        permuted_correct +=
            tree.predict([&](std::size_t f) { return data.value(f, f == j ? d : r); }) ==
            data.response[r];
      }
      drops[t * n_features + j] =
          (static_cast<double>(base_correct) - static_cast<double>(permuted_correct)) /
          static_cast<double>(oob.size());
    }
  });

  ImportanceReport report;
  report.response = forest.response();
  report.trees_used =
      static_cast<std::size_t>(std::count(has_oob.begin(), has_oob.end(), 1));
  const double used = static_cast<double>(report.trees_used);
  for (std::size_t j = 0; j < n_features; ++j) {
    ImportanceEntry entry;
    entry.variable_index = forest.feature_variables()[j];
    entry.variable = forest.dictionary().variable(entry.variable_index).name;
    if (report.trees_used > 0) {
      double sum = 0.0;
      for (std::size_t t = 0; t < n_trees; ++t) {
        if (has_oob[t]) sum += drops[t * n_features + j];
      }
      entry.mda = sum / used;
      if (report.trees_used > 1) {
        double sq = 0.0;
        for (std::size_t t = 0; t < n_trees; ++t) {
          if (!has_oob[t]) continue;
          const double d = drops[t * n_features + j] - entry.mda;
          sq += d * d;
        }
        entry.sd = std::sqrt(sq / (used - 1.0));
      }
    }
    report.entries.push_back(std::move(entry));
  }
  std::sort(report.entries.begin(), report.entries.end(),
            [](const ImportanceEntry& a, const ImportanceEntry& b) {
              if (a.mda != b.mda) return a.mda > b.mda;
              return a.variable_index < b.variable_index;
            });
  report.oob_accuracy = oob_predict(forest, records).accuracy;
  return report;
}

std::vector<std::string> select_top_k(const ImportanceReport& report, std::size_t k) {
  if (k < 1 || k > report.entries.size()) {
    throw ValidationError(fmt::format("cannot select {} of {} variables", k,
                                      report.entries.size()));
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(report.entries[i].variable);
  return out;
}

}  // namespace rulekit
