// Copyright 2026 The cft-forge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cftforge/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "cftforge/answer_verify.hpp"
#include "cftforge/csv.hpp"
#include "cftforge/errors.hpp"

namespace cftforge::report {
namespace {

std::string cell(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", verify::round_half_up_1(*v));
  return buf;
}

double parse_score(std::string_view text, std::string_view column) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw SchemaError(std::string(column), "not a number: \"" + std::string(text) + "\"");
  }
  return v;
}

std::vector<const ScoreRow*> sorted_rows(const ScoreTable& table) {
  std::vector<const ScoreRow*> rows;
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(),
            [](const ScoreRow* a, const ScoreRow* b) { return a->label < b->label; });
  return rows;
}

std::string markdown_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    if (c == '|') out.push_back('\\');
    out.push_back(c == '\n' ? ' ' : c);
  }
  return out;
}

}  // namespace

double row_average(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("row_average needs at least one score");
  long double sum = 0;
  for (const double s : scores) sum += s;
  return verify::round_half_up_1(static_cast<double>(sum / scores.size()));
}

std::optional<double> row_average(const ScoreRow& row) {
  std::vector<double> present;
  for (const auto& [bench, v] : row.scores) {
    if (v) present.push_back(*v);
  }
  if (present.empty()) return std::nullopt;
  return row_average(present);
}

void ComparisonSpec::validate() const {
  table.validate();
  (void)table.row(cft_row_label);
  if (sft_row_labels.empty()) throw ValidationError("comparison needs at least one SFT row");
  for (const auto& l : sft_row_labels) (void)table.row(l);
}

DeltaRow delta_row(const ComparisonSpec& spec) {
  spec.validate();
  const ScoreRow& cft = spec.table.row(spec.cft_row_label);
  DeltaRow out;
  for (const Benchmark b : spec.table.columns()) {
    std::optional<double> best;
    for (const auto& l : spec.sft_row_labels) {
      const auto v = spec.table.row(l).scores.at(b);
      if (v && (!best || *v > *best)) best = v;
    }
    const auto c = cft.scores.at(b);
    out.deltas[b] = (c && best) ? std::optional(verify::round_half_up_1(*c - *best)) : std::nullopt;
  }

  out.cft_average = row_average(cft);
  for (const auto& l : spec.sft_row_labels) {
    const auto avg = row_average(spec.table.row(l));
    if (avg && (!out.best_sft_average || *avg > *out.best_sft_average)) {
      out.best_sft_average = avg;
      out.best_sft_label = l;
    }
  }
  if (out.cft_average && out.best_sft_average) {
    out.average_delta = verify::round_half_up_1(*out.cft_average - *out.best_sft_average);
  }
  return out;
}

TableFormat table_format_from_string(std::string_view name) {
  if (name == "markdown" || name == "md") return TableFormat::Markdown;
  if (name == "csv") return TableFormat::Csv;
  throw UsageError("unknown table format \"" + std::string(name) + "\" (expected markdown or csv)");
}

std::string render_table(const ScoreTable& table, TableFormat format,
                         const std::optional<DeltaRow>& delta) {
  table.validate();
  const auto columns = table.columns();

  std::vector<csv::Row> lines;
  csv::Row header{"Model"};
  for (const Benchmark b : columns) header.emplace_back(to_string(b));
  header.emplace_back("AVG");
  lines.push_back(std::move(header));

  for (const ScoreRow* r : sorted_rows(table)) {
    csv::Row line{r->label};
    for (const Benchmark b : columns) line.push_back(cell(r->scores.at(b)));
    line.push_back(cell(row_average(*r)));
    lines.push_back(std::move(line));
  }
  if (delta) {
    csv::Row line{std::string(kDeltaLabel)};
    for (const Benchmark b : columns) {
      const auto it = delta->deltas.find(b);
      line.push_back(cell(it == delta->deltas.end() ? std::nullopt : it->second));
    }
    line.push_back(cell(delta->average_delta));
    lines.push_back(std::move(line));
  }

  std::string out;
  if (format == TableFormat::Csv) {
    for (const auto& l : lines) out += csv::format_row(l);
    return out;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += "|";
    for (const auto& f : lines[i]) out += " " + markdown_escape(f) + " |";
    out += "\n";
    if (i == 0) {
      out += "|";
      for (std::size_t k = 0; k < lines[i].size(); ++k) out += k == 0 ? " --- |" : " ---: |";
      out += "\n";
    }
  }
  return out;
}

ScoreTable parse_csv_table(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("header", "empty score csv");
  const auto& header = rows.front();
  if (header.empty()) throw SchemaError("header", "empty header");

  // Column index -> benchmark; AVG is derived and skipped.
  std::vector<std::optional<Benchmark>> column_of(header.size());
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] == "AVG") continue;
    column_of[i] = benchmark_from_string(header[i]);
  }

  ScoreTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r];
    if (fields.size() != header.size()) {
      throw SchemaError("row " + std::to_string(r), "expected " + std::to_string(header.size()) +
                                                       " fields, got " + std::to_string(fields.size()));
    }
    ScoreRow row;
    row.label = fields[0];
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (!column_of[i]) continue;
      const auto b = *column_of[i];
      if (fields[i] == "-" || fields[i].empty()) {
        row.scores[b] = std::nullopt;
      } else {
        row.scores[b] = parse_score(fields[i], header[i]);
      }
    }
    table.rows.push_back(std::move(row));
  }
  table.validate();
  return table;
}

}  // namespace cftforge::report
