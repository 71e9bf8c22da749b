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

#include "cli/commands.h"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "cli/run_config.h"
#include "json.hpp"
#include "rulekit/apriori.h"
#include "rulekit/error.h"
#include "rulekit/forest.h"
#include "rulekit/report.h"
#include "rulekit/rules.h"
#include "rulekit/schema.h"
#include "rulekit/transactions.h"

namespace rulekit::cli {
namespace {

namespace fs = std::filesystem;
using OrderedJson = nlohmann::ordered_json;

// State shared by the stages of one invocation.
struct Session {
  RunConfig config;
  unsigned threads = 1;
  std::string stage = "config";
  ReportBundle bundle;
  std::shared_ptr<const DataDictionary> dictionary;
  std::optional<RecordSet> records;

  const RecordSet& data() {
    if (!records) {
      stage = "dictionary";
      dictionary = std::make_shared<const DataDictionary>(
          load_dictionary_file(config.dictionary_path));
      stage = "ingest";
      RecordSet raw = ingest_file(config.data_path, dictionary, config.ingest);
      spdlog::info("ingested {} records from {}", raw.size(), config.data_path.string());
      stage = "filter";
      records = filter_records(raw, config.filters);
      for (const FilterLogEntry& entry : records->filter_log()) {
        spdlog::info("filter {}: {} -> {}", entry.description, entry.records_before,
                     entry.records_after);
      }
    }
    return *records;
  }

  fs::path out(const fs::path& relative) const { return config.output_dir / relative; }

  std::vector<std::string> all_but(std::string_view excluded) const {
    std::vector<std::string> names;
    for (const VariableSchema& var : dictionary->variables()) {
      if (var.name != normalize_name(excluded)) names.push_back(var.name);
    }
    return names;
  }

  std::vector<std::string> features() const {
    return config.features.empty() ? all_but(config.response) : config.features;
  }

  void finish() {
    stage = "manifest";
    bundle.created = utc_timestamp();
    bundle.config_hash = sha256_hex(config.canonical);
    bundle.dataset_hash = sha256_file(config.data_path);
    const fs::path manifest = bundle.write_manifest(config.output_dir);
    spdlog::info("wrote {} artifacts; manifest {}", bundle.artifacts.size(), manifest.string());
  }
};

std::string case_directory(const std::string& name) {
  std::string out;
  for (char ch : normalize_name(name)) {
    const bool safe = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_' ||
                      ch == '-';
    out.push_back(safe ? ch : '_');
  }
  return out.empty() ? "case" : out;
}

void run_describe(Session& s) {
  const RecordSet& records = s.data();
  s.stage = "describe";
  if (s.config.stratum.empty()) {
    throw ValidationError("describe needs 'stratum' or 'response' in the config");
  }
  const DataDictionary& dict = records.dictionary();
  const std::string stratum = dict.variable(dict.index_of(s.config.stratum)).name;
  const std::vector<std::string> rows =
      s.config.crosstab_rows.empty() ? s.all_but(stratum) : s.config.crosstab_rows;

  OrderedJson summary;
  summary["n_records"] = records.size();
  OrderedJson log = OrderedJson::array();
  for (const FilterLogEntry& e : records.filter_log()) {
    log.push_back({{"filter", e.description},
                   {"records_before", e.records_before},
                   {"records_after", e.records_after}});
  }
  summary["filter_log"] = std::move(log);
  OrderedJson variables = OrderedJson::object();
  for (std::size_t v = 0; v < dict.size(); ++v) {
    const VariableSchema& var = dict.variable(v);
    std::vector<std::size_t> counts(var.categories.size(), 0);
    for (const Record& r : records.records()) ++counts[r.values[v]];
    OrderedJson cats = OrderedJson::object();
    for (std::size_t c = 0; c < counts.size(); ++c) cats[var.categories[c]] = counts[c];
    variables[var.name] = std::move(cats);
  }
  summary["item_counts"] = std::move(variables);
  s.bundle.add(emit_json("summary", ArtifactKind::kSummary, summary.dump(2),
                         s.out("describe/summary")));

  for (const std::string& row : rows) {
    const CrossTab table = cross_tabulate(records, row, stratum);
    s.bundle.add(emit_crosstab(table, s.out(fmt::format("describe/crosstab_{}",
                                                        table.row_variable()))));
  }
  spdlog::info("describe: {} records, {} cross-tabs against {}", records.size(), rows.size(),
               stratum);
}

std::vector<std::string> run_select_vars(Session& s) {
  const RecordSet& records = s.data();
  s.stage = "select-vars";
  if (s.config.response.empty()) throw ValidationError("select-vars needs 'response' in the config");
  const std::vector<std::string> features = s.features();

  const Forest forest = train(records, s.config.response, features, s.config.forest, s.threads);
  const ImportanceReport report = mda_importance(forest, records, s.config.forest.seed, s.threads);
  spdlog::info("select-vars: {} trees, OOB accuracy {:.4f}", forest.trees().size(),
               report.oob_accuracy);

  std::size_t k = s.config.top_k_variables;
  if (k > report.entries.size() || k == 0) {
    spdlog::warn("select-vars: top_k_variables {} adjusted to the {} features", k,
                 report.entries.size());
    k = report.entries.size();
  }
  const std::vector<std::string> selected = select_top_k(report, k);

  s.stage = "report";
  s.bundle.add(emit_importance_chart(report, s.out("select_vars/importance")));
  OrderedJson doc;
  doc["response"] = report.response;
  doc["k"] = k;
  doc["variables"] = selected;
  s.bundle.add(emit_json("selected_variables", ArtifactKind::kSelection, doc.dump(2),
                         s.out("selected_variables")));
  return selected;
}

std::vector<std::string> mining_variables(Session& s,
                                          const std::optional<std::vector<std::string>>& selected) {
  std::vector<std::string> vars;
  if (s.config.mining_variables) {
    vars = *s.config.mining_variables;
  } else if (selected) {
    vars = *selected;
  } else if (const fs::path file = s.out("selected_variables.json"); fs::exists(file)) {
    std::ifstream in(file);
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("variables")) {
      throw ParseError(fmt::format("cannot read variable selection '{}'", file.string()));
    }
    vars = doc["variables"].get<std::vector<std::string>>();
    spdlog::info("mine: using variable selection from {}", file.string());
  } else {
    vars = s.features();
  }
  for (std::string& v : vars) v = normalize_name(v);
  for (const MiningCase& c : s.config.cases) {
    if (!c.consequent) continue;
    const std::string v = normalize_name(c.consequent->variable);
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  }
  return vars;
}

void run_mine(Session& s, const std::optional<std::vector<std::string>>& selected) {
  const RecordSet& records = s.data();
  s.stage = "mine";
  if (s.config.cases.empty()) throw ValidationError("mine needs at least one entry in 'cases'");

  const std::vector<std::string> vars = mining_variables(s, selected);
  EncodeOptions encode_options;
  encode_options.full_universe = s.config.full_universe;
  const TransactionSet transactions = encode(records, vars, encode_options);
  spdlog::info("mine: {} transactions over {} items from {} variables", transactions.size(),
               transactions.universe().size(), vars.size());

  s.stage = "report";
  const auto freqs = item_frequencies(transactions);
  s.bundle.add(emit_item_freq_chart(freqs, transactions.universe(), s.out("mine/item_frequency")));
  OrderedJson var_doc;
  var_doc["variables"] = vars;
  var_doc["n_items"] = transactions.universe().size();
  var_doc["n_transactions"] = transactions.size();
  s.bundle.add(emit_json("mining_variables", ArtifactKind::kSelection, var_doc.dump(2),
                         s.out("mine/variables")));

  for (const MiningCase& mining_case : s.config.cases) {
    s.stage = fmt::format("mine case '{}'", mining_case.name);
    const CaseResult result = run_case(transactions, mining_case, s.threads);
    const fs::path dir = fs::path("mine") / case_directory(mining_case.name);

    s.stage = "report";
    s.bundle.add(emit_rule_table(result, transactions.universe(), s.out(dir / "rules")));
    if (!result.ranked.empty()) {
      Artifact scatter = emit_rule_scatter(result.ranked, s.out(dir / "scatter"));
      scatter.name = mining_case.name + "_scatter";
      s.bundle.add(std::move(scatter));
    } else {
      spdlog::warn("case '{}': zero rules; rule table is header-only and no scatter is drawn",
                   mining_case.name);
    }
    s.bundle.add(emit_json(mining_case.name + "_metadata", ArtifactKind::kMetadata,
                           case_metadata_json(result, transactions.universe()),
                           s.out(dir / "metadata")));
  }
}

template <typename Fn>
int guarded(const char* command, const CommandOptions& options, Fn&& body) {
  Session session;
  try {
    session.config = load_run_config(options.config, Overrides{options.out, options.seed});
    session.threads = resolve_threads(options.threads);
    spdlog::debug("{}: {} worker threads", command, session.threads);
    body(session);
    session.finish();
    return kExitOk;
  } catch (const ParseError& e) {
    spdlog::error("{}: {} stage failed: {}", command, session.stage, e.what());
    return kExitValidation;
  } catch (const ValidationError& e) {
    spdlog::error("{}: {} stage failed: {}", command, session.stage, e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}: {} stage failed: {}", command, session.stage, e.what());
    return kExitRuntime;
  }
}

}  // namespace

unsigned resolve_threads(std::optional<unsigned> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("RULEKIT_THREADS"); env && *env) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<unsigned>(value);
    } catch (const std::logic_error&) {
    }
    spdlog::warn("ignoring RULEKIT_THREADS='{}'", env);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_describe(const CommandOptions& options) {
  return guarded("describe", options, [](Session& s) { run_describe(s); });
}

int cmd_select_vars(const CommandOptions& options) {
  return guarded("select-vars", options, [](Session& s) { run_select_vars(s); });
}

int cmd_mine(const CommandOptions& options) {
  return guarded("mine", options, [](Session& s) { run_mine(s, std::nullopt); });
}

int cmd_pipeline(const CommandOptions& options) {
  return guarded("pipeline", options, [](Session& s) {
    run_describe(s);
    const std::vector<std::string> selected = run_select_vars(s);
    run_mine(s, selected);
  });
}

int run(int argc, const char* const* argv) {
  if (!spdlog::get("rulekit")) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("rulekit"));
  }
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"rulekit: categorical association rule mining"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  CommandOptions options;
  std::string config;
  std::string out;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const CommandOptions&);
  };
  const Entry entries[] = {
      {"describe", "Cross-tabulate and summarize the filtered records", cmd_describe},
      {"select-vars", "Rank variables by random forest permutation importance",
       cmd_select_vars},
      {"mine", "Mine, prune and rank association rules per case", cmd_mine},
      {"pipeline", "describe, select-vars and mine in sequence", cmd_pipeline},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> out_opts, thread_opts, seed_opts;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", config, "Run configuration (JSON)")->required();
    out_opts.push_back(sub->add_option("--out", out, "Output directory"));
    thread_opts.push_back(sub->add_option("--threads", threads, "Worker threads"));
    seed_opts.push_back(sub->add_option("--seed", seed, "Global random seed"));
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  spdlog::set_level(verbose ? spdlog::level::debug
                            : quiet ? spdlog::level::warn : spdlog::level::info);
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    options.config = config;
    if (out_opts[i]->count()) options.out = fs::path(out);
    if (thread_opts[i]->count()) options.threads = threads;
    if (seed_opts[i]->count()) options.seed = seed;
    return entries[i].fn(options);
  }
  return kExitValidation;
}

}  // namespace rulekit::cli
