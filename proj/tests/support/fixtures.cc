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

#include "rulekit_testing/fixtures.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include <fmt/format.h>

#include "json.hpp"

namespace rulekit::testing {
namespace {

using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

// Modulo draw; the tiny bias is irrelevant for fixtures and, unlike the
// standard distributions, the sequence is the same on every library.
std::size_t draw(Rng& rng, std::size_t bound) { return static_cast<std::size_t>(rng() % bound); }

template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[draw(rng, i)]);
  }
}

struct Marginal {
  const char* category;
  std::array<std::size_t, 3> counts;  // daylight, dark with, dark without streetlight
};

struct CrashVariable {
  const char* name;
  std::vector<Marginal> marginals;
};

// Per-lighting-condition category counts of the 7,568 study crashes.
const std::vector<CrashVariable>& crash_variables() {
  static const std::vector<CrashVariable> vars = {
    {"injury_severity", {{"fatal", {485, 37, 626}}, {"severe", {246, 39, 248}}, {"moderate", {3120, 247, 2520}}}},
    {"manner_of_collision", {{"single_vehicle", {3470, 288, 3234}}, {"head_on", {107, 4, 33}}, {"rear_end", {24, 3, 6}}, {"right_angle", {59, 1, 21}}, {"right_left_turn", {11, 1, 5}}, {"sideswipe", {68, 4, 22}}, {"others", {112, 22, 73}}}},
    {"surface_condition", {{"dry", {3252, 268, 2884}}, {"non_dry", {599, 55, 502}}, {"unknown", {0, 0, 8}}}},
    {"weather_condition", {{"clear", {2799, 240, 2544}}, {"cloudy", {620, 42, 486}}, {"rain", {388, 29, 268}}, {"snow_sleet_hail", {18, 2, 7}}, {"others", {26, 10, 89}}}},
    {"day_of_week", {{"weekday", {2616, 178, 1941}}, {"weekend", {1235, 145, 1453}}}},
    {"aadt", {{"<400", {196, 8, 164}}, {"401-1000", {598, 31, 525}}, {"1001-5000", {2448, 192, 2125}}, {">5000", {609, 92, 580}}}},
    {"road_condition", {{"no_abnormalities", {3556, 298, 3049}}, {"shoulder_abnormality", {30, 1, 13}}, {"standing_water", {52, 2, 127}}, {"animal", {12, 0, 34}}, {"construction", {21, 3, 17}}, {"previous_crash", {1, 0, 2}}, {"others", {129, 7, 105}}, {"unknown", {50, 12, 47}}}},
    {"lane_width", {{"<11", {935, 75, 786}}, {"11<=lw<12", {1508, 113, 1304}}, {">=12", {1121, 105, 1008}}, {"unknown", {287, 30, 296}}}},
    {"shoulder_width", {{"<=2ft", {764, 46, 652}}, {"2ft<x<=4ft", {1124, 107, 989}}, {"4ft<x<=6ft", {580, 45, 510}}, {">6ft", {1154, 96, 998}}, {"unknown", {229, 29, 245}}}},
    {"curve_radius", {{"tangent", {2172, 186, 1945}}, {"<=500", {137, 17, 110}}, {"501_to_1000", {376, 33, 337}}, {"1001_to_2500", {663, 30, 594}}, {"2501_to_5000", {327, 28, 249}}, {"5001_to_10000", {176, 29, 159}}}},
    {"vertical_alignment", {{"level", {3088, 273, 2847}}, {"level_elevated", {172, 19, 102}}, {"on_grade", {420, 12, 319}}, {"dip_hump", {7, 3, 5}}, {"hillcrest", {106, 4, 67}}, {"other", {5, 0, 3}}, {"unknown", {53, 12, 51}}}},
    {"speed_limit", {{"<=35", {115, 51, 59}}, {"40<=x<=55", {3623, 258, 3268}}, {">55", {25, 1, 9}}, {"unknown", {88, 13, 58}}}},
    {"driver_age", {{"15-24", {1098, 102, 1177}}, {"25-34", {787, 85, 886}}, {"35-44", {571, 53, 553}}, {"45-54", {633, 42, 442}}, {"55-64", {435, 26, 192}}, {">64", {282, 6, 97}}, {"unknown", {45, 9, 47}}}},
    {"driver_gender", {{"male", {2508, 249, 2517}}, {"female", {1316, 69, 827}}, {"unknown", {27, 5, 50}}}},
    {"driver_protection_system", {{"properly_used", {2507, 169, 1718}}, {"improperly_used", {31, 3, 13}}, {"none_used", {1089, 99, 1402}}, {"unknown", {224, 52, 261}}}},
    {"driver_condition", {{"normal", {944, 58, 930}}, {"inattentive", {869, 29, 526}}, {"distracted", {125, 4, 103}}, {"ill_fatigued_asleep", {360, 8, 256}}, {"alcohol", {156, 44, 451}}, {"drug", {60, 3, 49}}, {"other", {1337, 177, 1079}}}},
    {"passenger_present", {{"yes", {1088, 101, 967}}, {"no", {2756, 220, 2421}}, {"unknown", {7, 2, 6}}}},
    {"vehicle_type", {{"car_van_SUV", {1942, 169, 1839}}, {"light_truck", {1155, 128, 1265}}, {"truck", {233, 3, 57}}, {"bus", {8, 0, 1}}, {"others", {513, 23, 232}}}},
  };
  return vars;
}

const std::array<const char*, 3> kLighting = {"daylight", "dark_with_streetlight",
                                              "dark_no_streetlight"};
const std::array<std::size_t, 3> kLightingCounts = {kCrashDaylight, kCrashDarkWithStreetlight,
                                                    kCrashDarkNoStreetlight};

std::shared_ptr<const DataDictionary> crash_dictionary() {
  std::vector<VariableSpec> specs;
  specs.push_back({"rwd", {"yes", "no"}});
  specs.push_back({"lighting_condition",
                   {"daylight", "dark_with_streetlight", "dark_no_streetlight", "dawn", "dusk"}});
  for (const CrashVariable& var : crash_variables()) {
    std::vector<std::string> categories;
    for (const Marginal& m : var.marginals) categories.emplace_back(m.category);
    if (std::string_view(var.name) == "injury_severity") {
      categories.emplace_back("complaint");
      categories.emplace_back("no_injury");
    }
    specs.emplace_back(var.name, std::move(categories));
  }
  return make_dictionary(specs, "crash-fixture-1");
}

}  // namespace

std::shared_ptr<const DataDictionary> make_dictionary(const std::vector<VariableSpec>& variables,
                                                      std::string version) {
  std::vector<VariableSchema> schemas;
  for (const auto& [name, categories] : variables) {
    schemas.push_back(VariableSchema{name, categories, RoleHint::kNone});
  }
  return std::make_shared<const DataDictionary>(std::move(schemas), std::move(version));
}

RecordSet make_records(std::shared_ptr<const DataDictionary> dictionary,
                       const std::vector<std::vector<std::string>>& rows) {
  std::vector<Record> records;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dictionary->size()) {
      throw std::invalid_argument(fmt::format("row {} has {} values", i + 1, rows[i].size()));
    }
    Record record{fmt::format("r{}", i + 1), {}};
    for (std::size_t v = 0; v < rows[i].size(); ++v) {
      record.values.push_back(dictionary->category_of(v, rows[i][v]));
    }
    records.push_back(std::move(record));
  }
  return RecordSet(std::move(dictionary), std::move(records));
}

RecordSet crash_fixture(const CrashFixtureOptions& options) {
  auto dict = crash_dictionary();
  const auto& vars = crash_variables();
  const std::size_t n_vars = dict->size();
  const std::size_t rwd = dict->index_of("rwd");
  const std::size_t lighting = dict->index_of("lighting_condition");
  const std::size_t severity = dict->index_of("injury_severity");

  std::vector<std::vector<CategoryIndex>> rows;
  rows.reserve(kCrashRecords);
  for (std::size_t column = 0; column < 3; ++column) {
    const std::size_t n = kLightingCounts[column];
    std::vector<std::vector<CategoryIndex>> column_rows(n, std::vector<CategoryIndex>(n_vars, 0));
    for (std::size_t r = 0; r < n; ++r) {
      column_rows[r][rwd] = dict->category_of(rwd, "yes");
      column_rows[r][lighting] = static_cast<CategoryIndex>(column);
    }
    for (std::size_t p = 0; p < vars.size(); ++p) {
      const std::size_t v = dict->index_of(vars[p].name);
      std::vector<CategoryIndex> pool;
      for (const Marginal& m : vars[p].marginals) {
        pool.insert(pool.end(), m.counts[column], dict->category_of(v, m.category));
      }
      if (pool.size() != n) {
        throw std::logic_error(fmt::format("marginals of {} do not sum to {}", vars[p].name, n));
      }
      Rng rng = make_rng(options.seed, column * 100 + p);
      shuffle(pool, rng);
      for (std::size_t r = 0; r < n; ++r) column_rows[r][v] = pool[r];
    }
    rows.insert(rows.end(), column_rows.begin(), column_rows.end());
  }

  if (options.with_excluded) {
    Rng rng = make_rng(options.seed, 999);
    auto random_row = [&] {
      std::vector<CategoryIndex> row(n_vars, 0);
      for (std::size_t v = 0; v < n_vars; ++v) {
        row[v] = static_cast<CategoryIndex>(draw(rng, dict->variable(v).categories.size()));
      }
      row[rwd] = 0;
      row[lighting] = static_cast<CategoryIndex>(draw(rng, 3));
      row[severity] = static_cast<CategoryIndex>(draw(rng, 3));
      return row;
    };
    for (std::size_t i = 0; i < kExcludedNotRwd; ++i) {
      auto row = random_row();
      row[rwd] = 1;
      rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < kExcludedSeverity; ++i) {
      auto row = random_row();
      row[severity] = static_cast<CategoryIndex>(3 + draw(rng, 2));
      rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < kExcludedLighting; ++i) {
      auto row = random_row();
      row[lighting] = static_cast<CategoryIndex>(3 + draw(rng, 2));
      rows.push_back(std::move(row));
    }
  }

  Rng order_rng = make_rng(options.seed, 12345);
  shuffle(rows, order_rng);
  std::vector<Record> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    records.push_back(Record{fmt::format("2014{:06}", i + 1), std::move(rows[i])});
  }
  return RecordSet(std::move(dict), std::move(records));
}

std::vector<FilterStep> crash_filters() {
  return {
      {"rwd", {"yes"}},
      {"injury_severity", {"fatal", "severe", "moderate"}},
      {"lighting_condition", {"daylight", "dark_with_streetlight", "dark_no_streetlight"}},
  };
}

std::vector<std::string> crash_features() {
  std::vector<std::string> names;
  for (const CrashVariable& var : crash_variables()) names.emplace_back(var.name);
  return names;
}

std::vector<std::string> crash_top10() {
  return {"vehicle_type",       "driver_condition", "manner_of_collision",
          "road_condition",     "driver_age",       "driver_gender",
          "day_of_week",        "driver_protection_system",
          "weather_condition",  "injury_severity"};
}

MiningFixture random_mining_fixture(std::uint64_t seed) {
  Rng rng = make_rng(seed, 77);

  std::vector<VariableSpec> specs;
  std::size_t budget = 12;
  const std::size_t wanted = 2 + draw(rng, 4);
  while (specs.size() < wanted && budget >= 2) {
    const std::size_t k = std::min<std::size_t>(budget, 2 + draw(rng, 3));
    std::vector<std::string> cats;
    for (std::size_t c = 0; c < k; ++c) cats.push_back(fmt::format("c{}", c));
    specs.emplace_back(fmt::format("v{}", specs.size()), std::move(cats));
    budget -= k;
  }
  auto dict = make_dictionary(specs, fmt::format("random-{}", seed));

  // A hidden class per record drives every variable, so items co-occur.
  const std::size_t n = 8 + draw(rng, 57);
  std::vector<std::vector<std::size_t>> preferred(specs.size(), std::vector<std::size_t>(3));
  for (std::size_t v = 0; v < specs.size(); ++v) {
    for (auto& p : preferred[v]) p = draw(rng, specs[v].second.size());
  }
  std::vector<Record> records;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hidden = draw(rng, 3);
    Record record{fmt::format("t{}", i), {}};
    for (std::size_t v = 0; v < specs.size(); ++v) {
      const std::size_t c =
          draw(rng, 10) < 6 ? preferred[v][hidden] : draw(rng, specs[v].second.size());
      record.values.push_back(static_cast<CategoryIndex>(c));
    }
    records.push_back(std::move(record));
  }

  MiningFixture fx{RecordSet(dict, std::move(records)), {}, {}, 0, 0};
  for (const auto& spec : specs) fx.variables.push_back(spec.first);

  MiningCase& c = fx.mining_case;
  c.name = fmt::format("random_{}", seed);
  if (draw(rng, 5) != 0) {
    const std::size_t v = draw(rng, specs.size());
    const std::size_t r = draw(rng, n);
    c.consequent = ConsequentSpec{specs[v].first, fx.records.category_name(r, v)};
  }
  if (draw(rng, 2) == 0) {
    c.min_support = SupportSpec::count(1 + draw(rng, 5));
  } else {
    c.min_support = SupportSpec::fraction(static_cast<double>(1 + draw(rng, 8)) / 20.0);
  }
  fx.confidence_twentieths = draw(rng, 19);
  fx.lift_twentieths = draw(rng, 41);
  c.min_confidence = static_cast<double>(fx.confidence_twentieths) / 20.0;
  c.min_lift = static_cast<double>(fx.lift_twentieths) / 20.0;
  c.max_rule_items = 1 + draw(rng, 4);
  c.top_k = 0;
  c.allow_empty_antecedent = draw(rng, 7) == 0;
  return fx;
}

RecordSet planted_rule_fixture(std::uint64_t seed, std::size_t noise_variables) {
  std::vector<VariableSpec> specs = {{"x", {"on", "off"}}, {"y", {"yes", "no"}}};
  for (std::size_t k = 1; k <= noise_variables; ++k) {
    specs.push_back({fmt::format("n{}", k), {"a", "b", "c"}});
  }
  auto dict = make_dictionary(specs, "planted-rule");
  Rng rng = make_rng(seed, 31);
  std::vector<Record> records;
  for (std::size_t i = 0; i < kPlantedRecords; ++i) {
    const bool x_on = i < kPlantedAntecedent;
    const bool y_yes = x_on ? i < kPlantedJoint
                            : i - kPlantedAntecedent < kPlantedConsequent - kPlantedJoint;
    Record record{"", {static_cast<CategoryIndex>(x_on ? 0 : 1),
                       static_cast<CategoryIndex>(y_yes ? 0 : 1)}};
    for (std::size_t k = 0; k < noise_variables; ++k) {
      record.values.push_back(static_cast<CategoryIndex>(draw(rng, 3)));
    }
    records.push_back(std::move(record));
  }
  shuffle(records, rng);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].id = fmt::format("p{:04}", i);
  return RecordSet(std::move(dict), std::move(records));
}

RecordSet planted_predictor_fixture(std::uint64_t seed, std::size_t n_records) {
  std::vector<VariableSpec> specs = {{"a", {"a0", "a1", "a2", "a3"}}};
  for (std::size_t k = 1; k <= 5; ++k) specs.push_back({fmt::format("n{}", k), {"k0", "k1", "k2"}});
  specs.push_back({"response", {"c0", "c1"}});
  auto dict = make_dictionary(specs, "planted-predictor");
  Rng rng = make_rng(seed, 41);
  std::vector<Record> records;
  for (std::size_t i = 0; i < n_records; ++i) {
    Record record{fmt::format("f{}", i), {}};
    const auto a = static_cast<CategoryIndex>(draw(rng, 4));
    record.values.push_back(a);
    for (std::size_t k = 0; k < 5; ++k) {
      record.values.push_back(static_cast<CategoryIndex>(draw(rng, 3)));
    }
    record.values.push_back(static_cast<CategoryIndex>(a < 2 ? 0 : 1));
    records.push_back(std::move(record));
  }
  return RecordSet(std::move(dict), std::move(records));
}

RecordSet noisy_label_fixture(std::uint64_t seed, std::size_t n_records, std::size_t flipped) {
  auto dict = make_dictionary({{"signal", {"s0", "s1"}},
                               {"n1", {"k0", "k1"}},
                               {"n2", {"k0", "k1"}},
                               {"response", {"c0", "c1"}}},
                              "noisy-label");
  Rng rng = make_rng(seed, 53);
  std::vector<bool> flip(n_records, false);
  for (std::size_t i = 0; i < flipped; ++i) flip[i * n_records / flipped] = true;
  std::vector<Record> records;
  for (std::size_t i = 0; i < n_records; ++i) {
    const auto signal = static_cast<CategoryIndex>(i % 2);
    records.push_back(Record{"", {signal, static_cast<CategoryIndex>(draw(rng, 2)),
                                  static_cast<CategoryIndex>(draw(rng, 2)),
                                  static_cast<CategoryIndex>(flip[i] ? 1 - signal : signal)}});
  }
  shuffle(records, rng);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].id = fmt::format("q{}", i);
  return RecordSet(std::move(dict), std::move(records));
}

std::filesystem::path write_demo_workspace(const std::filesystem::path& dir,
                                           const DemoOptions& options) {
  std::filesystem::create_directories(dir);
  const RecordSet full = crash_fixture({options.seed, true});
  std::vector<Record> kept;
  for (std::size_t i = 0; i < full.size(); i += std::max<std::size_t>(1, options.scale_divisor)) {
    kept.push_back(full.records()[i]);
  }
  const RecordSet records(full.dictionary_ptr(), std::move(kept));

  {
    std::ofstream out(dir / "dictionary.json");
    out << dictionary_to_json(records.dictionary()) << '\n';
  }
  {
    std::ofstream out(dir / "records.csv", std::ios::binary);
    write_records(records, out);
  }

  nlohmann::ordered_json filters = nlohmann::ordered_json::array();
  for (const FilterStep& step : crash_filters()) {
    filters.push_back({{"variable", step.variable}, {"keep", step.keep}});
  }
  auto mining_case = [](const char* name, const char* consequent, const char* support,
                        double confidence) {
    return nlohmann::ordered_json{{"name", name},
                                  {"consequent", consequent},
                                  {"min_support", support},
                                  {"min_confidence", confidence},
                                  {"min_lift", 1.1},
                                  {"max_rule_items", 4},
                                  {"top_k", 20}};
  };
  nlohmann::ordered_json config;
  config["dictionary"] = "dictionary.json";
  config["data"] = "records.csv";
  config["unknown_policy"] = "reject";
  config["filters"] = filters;
  config["stratum"] = "lighting_condition";
  config["response"] = "lighting_condition";
  config["features"] = crash_features();
  config["forest"] = {{"n_trees", options.n_trees}, {"seed", options.seed}};
  config["top_k_variables"] = 10;
  config["cases"] = {
      mining_case("daylight", "lighting_condition=daylight", "0.001%", 0.60),
      mining_case("dark_with_streetlight", "lighting_condition=dark_with_streetlight",
                  "0.00005%", 0.55),
      mining_case("dark_no_streetlight", "lighting_condition=dark_no_streetlight", "0.004%",
                  0.55),
  };
  config["output_dir"] = "out";
  config["seed"] = options.seed;
  const std::filesystem::path path = dir / "config.json";
  std::ofstream(path) << config.dump(2) << '\n';
  return path;
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          fmt::format("{}-{}-{}", prefix, ::getpid(), counter++);
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rulekit::testing
