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

#include "rulekit/report.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>
#include <unistd.h>

#include "json.hpp"
#include "rulekit/csv.h"
#include "rulekit/error.h"

namespace rulekit {
namespace fs = std::filesystem;

std::string_view to_string(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::kRuleTable: return "rule_table";
    case ArtifactKind::kItemFreq: return "item_freq";
    case ArtifactKind::kImportance: return "importance";
    case ArtifactKind::kRuleScatter: return "rule_scatter";
    case ArtifactKind::kCrosstab: return "crosstab";
    case ArtifactKind::kSummary: return "summary";
    case ArtifactKind::kMetadata: return "metadata";
    case ArtifactKind::kSelection: return "selection";
  }
  return "unknown";
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError(fmt::format("cannot create directory '{}': {}",
                                path.parent_path().string(), ec.message()));
    }
  }
  fs::path tmp = path;
  tmp += fmt::format(".tmp{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError(fmt::format("write to '{}' failed", tmp.string()));
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(fmt::format("cannot move '{}' into place", path.string()));
  }
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

std::string format_percent3(double fraction) { return fmt::format("{:.3f}", fraction * 100.0); }
std::string format_percent2(double fraction) { return fmt::format("{:.2f}", fraction * 100.0); }
std::string format_fixed2(double value) { return fmt::format("{:.2f}", value); }

namespace {

fs::path with_suffix(const fs::path& sink, std::string_view suffix) {
  fs::path p = sink;
  p += suffix;
  return p;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

// Left-aligned text columns separated by two spaces; numeric columns
// right-aligned.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows,
                         const std::vector<bool>& numeric) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += "  ";
      const std::size_t pad = width[c] - cells[c].size();
      if (numeric[c]) out.append(pad, ' ');
      out += cells[c];
      if (!numeric[c] && c + 1 < cells.size()) out.append(pad, ' ');
    }
    out += '\n';
    return out;
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out.append(total + 2 * (width.size() - 1), '-');
  out += '\n';
  for (const auto& row : rows) out += line(row);
  return out;
}

std::string svg_open(double width, double height) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0f}\" "
      "height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n",
      width, height, width, height, width, height);
}

struct Rgb {
  int r, g, b;
};

constexpr Rgb kLight{254, 224, 210};
constexpr Rgb kDark{165, 15, 21};

std::string shade(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto mix = [t](int a, int b) {
    return static_cast<int>(std::lround(a + (b - a) * t));
  };
  return fmt::format("#{:02x}{:02x}{:02x}", mix(kLight.r, kDark.r), mix(kLight.g, kDark.g),
                     mix(kLight.b, kDark.b));
}

// Horizontal bar chart over a linear domain [lo, hi] with bars anchored at 0.
struct BarChart {
  std::string title;
  std::string axis_label;
  std::vector<std::string> labels;
  std::vector<double> values;
  double lo = 0.0;
  double hi = 1.0;
  int value_decimals = 2;

  static constexpr double kLeft = 260.0;
  static constexpr double kPlotWidth = 500.0;
  static constexpr double kTop = 40.0;
  static constexpr double kBar = 16.0;
  static constexpr double kGap = 4.0;

  double x_of(double v) const { return kLeft + (v - lo) / (hi - lo) * kPlotWidth; }

  std::string render() const {
    const double plot_height = static_cast<double>(values.size()) * (kBar + kGap);
    const double height = kTop + plot_height + 50.0;
    std::string svg = svg_open(kLeft + kPlotWidth + 70.0, height);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"20\" font-size=\"13\">{}</text>\n", kLeft,
                       xml_escape(title));
    const double zero = x_of(std::clamp(0.0, lo, hi));
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double y = kTop + static_cast<double>(i) * (kBar + kGap);
      const double end = x_of(values[i]);
      const double x = std::min(zero, end);
      const double w = std::abs(end - zero);
      svg += fmt::format(
          "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6.0,
          y + kBar - 4.0, xml_escape(labels[i]));
      svg += fmt::format(
          "<rect class=\"bar\" x=\"{:.3f}\" y=\"{:.2f}\" width=\"{:.3f}\" height=\"{:.2f}\" "
          "fill=\"#4a7ab5\" data-value=\"{}\"/>\n",
          x, y, w, kBar, values[i]);
      svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{:.{}f}</text>\n",
                         std::max(zero, end) + 4.0, y + kBar - 4.0, values[i], value_decimals);
    }
    const double axis_y = kTop + plot_height + 4.0;
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n",
        kLeft, axis_y, kLeft + kPlotWidth, axis_y);
    for (int tick = 0; tick <= 5; ++tick) {
      const double v = lo + (hi - lo) * tick / 5.0;
      const double x = x_of(v);
      svg += fmt::format(
          "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", x,
          axis_y, x, axis_y + 4.0);
      svg += fmt::format(
          "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.{}f}</text>\n", x,
          axis_y + 16.0, v, value_decimals);
    }
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
                       kLeft + kPlotWidth / 2.0, axis_y + 34.0, xml_escape(axis_label));
    svg += "</svg>\n";
    return svg;
  }
};

}  // namespace

Artifact emit_rule_table(const CaseResult& result, const ItemUniverse& universe,
                         const fs::path& sink, bool allow_empty) {
  const std::vector<Rule> rules = result.top();
  if (rules.empty() && !allow_empty) {
    throw ValidationError(fmt::format("case '{}' has no rules to tabulate",
                                      result.mining_case.name));
  }

  std::ostringstream csv;
  write_rules_csv(rules, universe, csv);

  const bool per_rule_consequent = !result.consequent.has_value();
  std::vector<std::string> header = {"ID", "Antecedent(s)"};
  if (per_rule_consequent) header.push_back("Consequent");
  header.insert(header.end(), {"S (%)", "C (%)", "L"});
  std::vector<bool> numeric(header.size(), true);
  numeric[1] = false;
  if (per_rule_consequent) numeric[2] = false;

  std::vector<std::vector<std::string>> rows;
  for (const Rule& rule : rules) {
    std::vector<std::string> row = {rule.id, format_itemset(rule.antecedent, universe)};
    if (per_rule_consequent) row.push_back("{" + universe.token(rule.consequent) + "}");
    row.insert(row.end(), {format_percent3(rule.support), format_percent2(rule.confidence),
                           format_fixed2(rule.lift)});
    rows.push_back(std::move(row));
  }
  std::string text = fmt::format("Case: {}\n", result.mining_case.name);
  if (result.consequent) text += fmt::format("Consequent: {{{}}}\n", universe.token(*result.consequent));
  text += fmt::format("Rules: {} generated, {} after pruning, top {} shown\n\n",
                      result.rules_generated, result.rules_after_pruning, rules.size());
  text += render_table(header, rows, numeric);

  Artifact artifact{result.mining_case.name, ArtifactKind::kRuleTable,
                    {with_suffix(sink, ".csv"), with_suffix(sink, ".txt")}};
  write_file_atomic(artifact.files[0], csv.str());
  write_file_atomic(artifact.files[1], text);
  return artifact;
}

Artifact emit_item_freq_chart(std::span<const ItemFrequency> frequencies,
                              const ItemUniverse& universe, const fs::path& sink) {
  if (frequencies.empty()) throw ValidationError("item frequency chart needs at least one item");
  std::string csv = "item,count,relative_frequency\n";
  BarChart chart;
  chart.title = "Relative item frequency";
  chart.axis_label = "relative frequency";
  for (const ItemFrequency& f : frequencies) {
    const std::string token = universe.token(f.item);
    csv += csv_row({token, std::to_string(f.count), fmt::format("{}", f.relative)}) + "\n";
    chart.labels.push_back(token);
    chart.values.push_back(f.relative);
  }
  Artifact artifact{"item_frequency", ArtifactKind::kItemFreq,
                    {with_suffix(sink, ".svg"), with_suffix(sink, ".csv")}};
  write_file_atomic(artifact.files[0], chart.render());
  write_file_atomic(artifact.files[1], csv);
  return artifact;
}

Artifact emit_rule_scatter(std::span<const Rule> rules, const fs::path& sink) {
  if (rules.empty()) throw ValidationError("rule scatter needs at least one rule");

  double max_support = 0.0;
  double min_lift = rules.front().lift;
  double max_lift = rules.front().lift;
  for (const Rule& rule : rules) {
    max_support = std::max(max_support, rule.support);
    min_lift = std::min(min_lift, rule.lift);
    max_lift = std::max(max_lift, rule.lift);
  }
  const double x_hi = max_support > 0.0 ? max_support * 1.05 : 1.0;

  constexpr double kLeft = 70.0;
  constexpr double kTop = 40.0;
  constexpr double kWidth = 520.0;
  constexpr double kHeight = 400.0;
  auto px = [&](double s) { return kLeft + s / x_hi * kWidth; };
  auto py = [&](double c) { return kTop + (1.0 - c) * kHeight; };
  auto lift_t = [&](double l) {
    return max_lift > min_lift ? (l - min_lift) / (max_lift - min_lift) : 1.0;
  };

  std::string svg = svg_open(kLeft + kWidth + 150.0, kTop + kHeight + 60.0);
  svg += fmt::format(
      "<text x=\"{:.2f}\" y=\"20\" font-size=\"13\">Rules: support vs confidence, shaded by "
      "lift</text>\n",
      kLeft);
  svg += fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      kLeft, kTop, kWidth, kHeight);
  for (int tick = 0; tick <= 5; ++tick) {
    const double s = x_hi * tick / 5.0;
    const double c = tick / 5.0;
    svg += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.3f}</text>\n", px(s),
        kTop + kHeight + 16.0, s);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.1f}</text>\n",
                       kLeft - 6.0, py(c) + 4.0, c);
  }
  svg += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">support</text>\n",
      kLeft + kWidth / 2.0, kTop + kHeight + 36.0);
  svg += fmt::format(
      "<text x=\"16\" y=\"{:.2f}\" transform=\"rotate(-90 16 {:.2f})\" "
      "text-anchor=\"middle\">confidence</text>\n",
      kTop + kHeight / 2.0, kTop + kHeight / 2.0);

  std::string csv = "id,support,confidence,lift\n";
  for (const Rule& rule : rules) {
    svg += fmt::format(
        "<circle class=\"rule\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"4\" fill=\"{}\" "
        "stroke=\"#555555\" stroke-width=\"0.5\" data-support=\"{}\" data-confidence=\"{}\" "
        "data-lift=\"{}\"/>\n",
        px(rule.support), py(rule.confidence), shade(lift_t(rule.lift)), rule.support,
        rule.confidence, rule.lift);
    csv += csv_row({rule.id, fmt::format("{}", rule.support), fmt::format("{}", rule.confidence),
                    fmt::format("{}", rule.lift)}) +
           "\n";
  }

  // Lift legend: light end = min, dark end = max.
  const double lx = kLeft + kWidth + 30.0;
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">lift</text>\n", lx, kTop);
  for (int step = 0; step < 10; ++step) {
    svg += fmt::format(
        "<rect class=\"legend\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"20\" height=\"20\" "
        "fill=\"{}\"/>\n",
        lx, kTop + 10.0 + step * 20.0, shade(step / 9.0));
  }
  svg += fmt::format("<text class=\"legend-min\" x=\"{:.2f}\" y=\"{:.2f}\">{:.2f}</text>\n",
                     lx + 26.0, kTop + 24.0, min_lift);
  svg += fmt::format("<text class=\"legend-max\" x=\"{:.2f}\" y=\"{:.2f}\">{:.2f}</text>\n",
                     lx + 26.0, kTop + 10.0 + 9 * 20.0 + 14.0, max_lift);
  svg += "</svg>\n";

  Artifact artifact{"rule_scatter", ArtifactKind::kRuleScatter,
                    {with_suffix(sink, ".svg"), with_suffix(sink, ".csv")}};
  write_file_atomic(artifact.files[0], svg);
  write_file_atomic(artifact.files[1], csv);
  return artifact;
}

Artifact emit_importance_chart(const ImportanceReport& report, const fs::path& sink) {
  if (report.entries.empty()) throw ValidationError("importance chart needs a nonempty report");

  BarChart chart;
  chart.title = fmt::format("Variable importance for {} (mean decrease accuracy)",
                            report.response);
  chart.axis_label = "mean decrease accuracy";
  chart.value_decimals = 3;
  chart.lo = 0.0;
  chart.hi = 0.0;
  std::string csv = "variable,mda,sd,rank\n";
  nlohmann::ordered_json vars = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const ImportanceEntry& e = report.entries[i];
    chart.labels.push_back(e.variable);
    chart.values.push_back(e.mda);
    chart.lo = std::min(chart.lo, e.mda);
    chart.hi = std::max(chart.hi, e.mda);
    csv += csv_row({e.variable, fmt::format("{}", e.mda), fmt::format("{}", e.sd),
                    std::to_string(i + 1)}) +
           "\n";
    vars.push_back({{"variable", e.variable}, {"mda", e.mda}, {"sd", e.sd}, {"rank", i + 1}});
  }
  if (chart.hi == chart.lo) chart.hi = chart.lo + 1.0;

  nlohmann::ordered_json doc;
  doc["response"] = report.response;
  doc["oob_accuracy"] = report.oob_accuracy;
  doc["trees_used"] = report.trees_used;
  doc["variables"] = std::move(vars);

  Artifact artifact{"importance", ArtifactKind::kImportance,
                    {with_suffix(sink, ".svg"), with_suffix(sink, ".csv"),
                     with_suffix(sink, ".json")}};
  write_file_atomic(artifact.files[0], chart.render());
  write_file_atomic(artifact.files[1], csv);
  write_file_atomic(artifact.files[2], doc.dump(2) + "\n");
  return artifact;
}

Artifact emit_crosstab(const CrossTab& table, const fs::path& sink) {
  const auto& rows = table.row_categories();
  const auto& cols = table.col_categories();

  std::vector<std::string> csv_header = {table.row_variable()};
  std::vector<std::string> text_header = {table.row_variable()};
  for (const std::string& c : cols) {
    csv_header.push_back(c + "_n");
    csv_header.push_back(c + "_pct");
    text_header.push_back(c);
  }
  std::string csv = csv_row(csv_header) + "\n";
  std::vector<std::vector<std::string>> text_rows;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> fields = {rows[r]};
    std::vector<std::string> cells = {rows[r]};
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string pct = format_percent2(table.column_fraction(r, c));
      fields.push_back(std::to_string(table.cell(r, c)));
      fields.push_back(pct);
      cells.push_back(fmt::format("{} ({}%)", table.cell(r, c), pct));
    }
    csv += csv_row(fields) + "\n";
    text_rows.push_back(std::move(cells));
  }
  std::vector<std::string> totals = {"total"};
  std::vector<std::string> total_cells = {"total"};
  for (std::size_t c = 0; c < cols.size(); ++c) {
    totals.push_back(std::to_string(table.column_total(c)));
    totals.push_back(table.column_total(c) == 0 ? "0.00" : "100.00");
    total_cells.push_back(std::to_string(table.column_total(c)));
  }
  csv += csv_row(totals) + "\n";
  text_rows.push_back(std::move(total_cells));

  std::vector<bool> numeric(text_header.size(), true);
  numeric[0] = false;
  std::string text = fmt::format("{} by {}\n\n", table.row_variable(), table.col_variable());
  text += render_table(text_header, text_rows, numeric);

  Artifact artifact{fmt::format("{}_by_{}", table.row_variable(), table.col_variable()),
                    ArtifactKind::kCrosstab,
                    {with_suffix(sink, ".csv"), with_suffix(sink, ".txt")}};
  write_file_atomic(artifact.files[0], csv);
  write_file_atomic(artifact.files[1], text);
  return artifact;
}

Artifact emit_json(std::string name, ArtifactKind kind, std::string_view json,
                   const fs::path& sink) {
  Artifact artifact{std::move(name), kind, {with_suffix(sink, ".json")}};
  std::string body(json);
  if (body.empty() || body.back() != '\n') body += '\n';
  write_file_atomic(artifact.files[0], body);
  return artifact;
}

fs::path ReportBundle::write_manifest(const fs::path& out_dir) const {
  nlohmann::ordered_json doc;
  doc["created"] = created;
  doc["config_hash"] = config_hash;
  doc["dataset_hash"] = dataset_hash;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const Artifact& a : artifacts) {
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const fs::path& f : a.files) files.push_back(f.lexically_relative(out_dir).generic_string());
    list.push_back({{"name", a.name}, {"kind", std::string(to_string(a.kind))}, {"files", files}});
  }
  doc["artifacts"] = std::move(list);
  const fs::path path = out_dir / "manifest.json";
  write_file_atomic(path, doc.dump(2) + "\n");
  return path;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", tm);
}

}  // namespace rulekit
