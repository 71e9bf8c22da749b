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

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rulekit/apriori.h"
#include "rulekit/error.h"
#include "rulekit/transactions.h"
#include "rulekit_testing/fixtures.h"
#include "rulekit_testing/oracles.h"

using namespace rulekit;
namespace t = rulekit::testing;

namespace {

std::map<t::ItemSet, std::size_t> as_item_map(const FrequentItemsets& freq,
                                              const ItemUniverse& universe) {
  std::map<t::ItemSet, std::size_t> out;
  for (std::size_t k = 1; k <= freq.max_len(); ++k) {
    for (const FrequentItemset& f : freq.level(k)) {
      t::ItemSet items;
      for (ItemId id : f.items) items.push_back(universe.item(id));
      std::sort(items.begin(), items.end());
      out.emplace(std::move(items), f.count);
    }
  }
  return out;
}

RecordSet shuffled(const RecordSet& rs, std::uint64_t seed) {
  std::vector<Record> records = rs.records();
  std::shuffle(records.begin(), records.end(), std::mt19937_64(seed));
  return RecordSet(rs.dictionary_ptr(), std::move(records));
}

}  // namespace

TEST_SUITE("apriori.support_spec") {
  TEST_CASE("fractions resolve by ceiling with a floor of one") {
    CHECK(SupportSpec::fraction(0.00001).resolve(7568) == 1);
    CHECK(SupportSpec::fraction(0.0000005).resolve(7568) == 1);
    CHECK(SupportSpec::fraction(0.1).resolve(100) == 10);
    CHECK(SupportSpec::fraction(0.101).resolve(100) == 11);
    CHECK(SupportSpec::fraction(1.0).resolve(37) == 37);
    CHECK(SupportSpec::fraction(0.05).resolve(900) == 45);
    CHECK(SupportSpec::count(12).resolve(5) == 12);
  }

  TEST_CASE("invalid specs") {
    CHECK_THROWS_AS(SupportSpec::fraction(0.0), ValidationError);
    CHECK_THROWS_AS(SupportSpec::fraction(1.5), ValidationError);
    CHECK_THROWS_AS(SupportSpec::fraction(-0.1), ValidationError);
    CHECK_THROWS_AS(SupportSpec::count(0), ValidationError);
  }

  TEST_CASE("property: fraction resolution equals the integer ceiling") {
    for (std::size_t n = 1; n <= 300; ++n) {
      for (std::size_t k = 1; k <= 100; ++k) {
        const std::size_t expected = std::max<std::size_t>(1, (k * n + 99) / 100);
        CHECK(SupportSpec::fraction(static_cast<double>(k) / 100.0).resolve(n) == expected);
      }
    }
  }
}

TEST_SUITE("apriori.mine") {
  TEST_CASE("single transaction with two items") {
    const auto dict = t::make_dictionary({{"a", {"x", "z"}}, {"b", {"y", "w"}}});
    const auto ts = encode(t::make_records(dict, {{"x", "y"}}), std::vector<std::string>{"a", "b"});
    const auto freq = mine_frequent(ts, SupportSpec::count(1), 2);
    REQUIRE(freq.level(1).size() == 2);
    REQUIRE(freq.level(2).size() == 1);
    CHECK(freq.level(2)[0].items == Itemset{0, 1});
    CHECK(freq.level(1)[0].count == 1);
    CHECK(freq.level(1)[1].count == 1);
    CHECK(freq.level(2)[0].count == 1);
    CHECK(freq.total() == 3);
  }

  TEST_CASE("fraction 1.0 keeps only itemsets present everywhere") {
    const auto dict = t::make_dictionary({{"a", {"x", "z"}}, {"b", {"y", "w"}}, {"c", {"u", "v"}}});
    const auto rs = t::make_records(dict, {{"x", "y", "u"}, {"x", "w", "u"}, {"x", "y", "u"}});
    const auto ts = encode(rs, std::vector<std::string>{"a", "b", "c"});
    const auto freq = mine_frequent(ts, SupportSpec::fraction(1.0), 3);
    const auto got = as_item_map(freq, ts.universe());
    const Item ax{0, 0};
    const Item cu{2, 0};
    CHECK(got == std::map<t::ItemSet, std::size_t>{{{ax}, 3}, {{cu}, 3}, {{ax, cu}, 3}});
  }

  TEST_CASE("threshold above the transaction count returns nothing") {
    const auto fx = t::random_mining_fixture(8);
    const auto ts = encode(fx.records, fx.variables);
    const auto freq = mine_frequent(ts, SupportSpec::count(ts.size() + 1), 3);
    CHECK(freq.total() == 0);
    CHECK(freq.min_support_count() == ts.size() + 1);
  }

  TEST_CASE("max_len below one is rejected") {
    const auto fx = t::random_mining_fixture(8);
    const auto ts = encode(fx.records, fx.variables);
    CHECK_THROWS_AS(mine_frequent(ts, SupportSpec::count(1), 0), ValidationError);
  }

  TEST_CASE("random fixtures match exhaustive enumeration") {
    for (std::uint64_t seed = 1000; seed < 1150; ++seed) {
      const auto fx = t::random_mining_fixture(seed);
      const auto ts = encode(fx.records, fx.variables);
      const std::size_t max_len = 1 + seed % 4;
      const std::size_t min_count = t::oracle_min_count(fx);
      const auto freq = mine_frequent(ts, fx.mining_case.min_support, max_len);
      CHECK(freq.min_support_count() == min_count);
      const auto expected = t::enumerate_frequent(fx.records, fx.variables, min_count, max_len);
      CHECK(as_item_map(freq, ts.universe()) == expected);
    }
  }

  TEST_CASE("property: full lattice at count one") {
    for (std::uint64_t seed = 2000; seed < 2030; ++seed) {
      const auto fx = t::random_mining_fixture(seed);
      const auto ts = encode(fx.records, fx.variables);
      const std::size_t n_items = ts.universe().size();
      const auto freq = mine_frequent(ts, SupportSpec::count(1), n_items);
      CHECK(as_item_map(freq, ts.universe()) ==
            t::enumerate_frequent(fx.records, fx.variables, 1, n_items));
    }
  }

  TEST_CASE("property: downward closure, one item per variable, sorted levels") {
    for (std::uint64_t seed = 3000; seed < 3040; ++seed) {
      const auto fx = t::random_mining_fixture(seed);
      const auto ts = encode(fx.records, fx.variables);
      const auto freq = mine_frequent(ts, SupportSpec::count(1 + seed % 3), 4);
      for (std::size_t k = 1; k <= 4; ++k) {
        const auto& level = freq.level(k);
        CHECK(std::is_sorted(level.begin(), level.end(),
                             [](const auto& a, const auto& b) { return a.items < b.items; }));
        for (const FrequentItemset& f : level) {
          CHECK(f.items.size() == k);
          CHECK(f.count >= freq.min_support_count());
          std::set<std::size_t> vars;
          for (ItemId id : f.items) vars.insert(ts.universe().item(id).variable);
          CHECK(vars.size() == k);
          for (std::size_t drop = 0; drop < k && k > 1; ++drop) {
            Itemset sub = f.items;
            sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
            const auto sub_count = freq.count_of(sub);
            REQUIRE(sub_count.has_value());
            CHECK(*sub_count >= f.count);
          }
        }
      }
    }
  }

  TEST_CASE("property: independent of transaction order and thread count") {
    for (std::uint64_t seed = 4000; seed < 4020; ++seed) {
      const auto fx = t::random_mining_fixture(seed);
      const auto ts = encode(fx.records, fx.variables);
      const auto base = as_item_map(mine_frequent(ts, SupportSpec::count(1), 4), ts.universe());
      const auto other = shuffled(fx.records, seed);
      const auto ts2 = encode(other, fx.variables);
      CHECK(as_item_map(mine_frequent(ts2, SupportSpec::count(1), 4), ts2.universe()) == base);
      CHECK(as_item_map(mine_frequent(ts, SupportSpec::count(1), 4, 8), ts.universe()) == base);
    }
  }

  TEST_CASE("property: raising the threshold never adds itemsets") {
    for (std::uint64_t seed = 5000; seed < 5020; ++seed) {
      const auto fx = t::random_mining_fixture(seed);
      const auto ts = encode(fx.records, fx.variables);
      auto previous = as_item_map(mine_frequent(ts, SupportSpec::count(1), 4), ts.universe());
      for (std::size_t c = 2; c <= 10; ++c) {
        const auto current = as_item_map(mine_frequent(ts, SupportSpec::count(c), 4), ts.universe());
        for (const auto& [items, count] : current) {
          CHECK(previous.count(items) == 1);
        }
        previous = current;
      }
    }
  }

  TEST_CASE("count_of and the itemset dump") {
    const auto dict = t::make_dictionary({{"a", {"x", "z"}}, {"b", {"y", "w"}}});
    const auto ts = encode(t::make_records(dict, {{"x", "y"}, {"x", "w"}}),
                           std::vector<std::string>{"a", "b"});
    const auto freq = mine_frequent(ts, SupportSpec::count(1), 2);
    CHECK(freq.count_of(std::vector<ItemId>{}) == 2u);
    CHECK(freq.count_of(std::vector<ItemId>{0}) == 2u);
    CHECK_FALSE(freq.count_of(std::vector<ItemId>{1, 2}).has_value());
    std::ostringstream out;
    write_itemsets_csv(freq, ts.universe(), out);
    CHECK(out.str() ==
          "level,items,support_count,support_fraction\n"
          "1,{a=x},2,1\n1,{b=y},1,0.5\n1,{b=w},1,0.5\n"
          "2,\"{a=x,b=y}\",1,0.5\n2,\"{a=x,b=w}\",1,0.5\n");
  }
}
