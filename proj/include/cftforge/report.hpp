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

#pragma once

// Score-table arithmetic: per-row averages, CFT-minus-best-SFT delta rows, and
// deterministic markdown / CSV rendering.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cftforge/core.hpp"

namespace cftforge::report {

// Arithmetic mean, half-up to one decimal. Throws ValidationError when empty.
double row_average(std::span<const double> scores);

// Mean over the row's present cells; "-" cells are skipped. Absent when the
// row has no present cell.
std::optional<double> row_average(const ScoreRow& row);

struct ComparisonSpec {
  ScoreTable table;
  std::string cft_row_label;
  std::vector<std::string> sft_row_labels;

  // Table valid, labels present, at least one SFT row.
  void validate() const;
};

struct DeltaRow {
  // CFT cell minus the column maximum over the SFT rows; absent when the CFT
  // cell or every SFT cell of the column is "-".
  std::map<Benchmark, std::optional<double>> deltas;
  // CFT row average minus the best SFT row average, both rounded first.
  std::optional<double> average_delta;
  std::optional<double> cft_average;
  std::optional<double> best_sft_average;
  std::string best_sft_label;  // row with the best average
};

DeltaRow delta_row(const ComparisonSpec& spec);

inline constexpr std::string_view kDeltaLabel = "Delta = CFT - SFT_best";

enum class TableFormat { Markdown, Csv };

TableFormat table_format_from_string(std::string_view name);

// Rows sorted by label, columns in benchmark order followed by AVG, one
// decimal everywhere, "-" for absent cells. The optional delta row is
// appended last.
std::string render_table(const ScoreTable& table, TableFormat format,
                         const std::optional<DeltaRow>& delta = std::nullopt);

// Inverse of render_table(..., Csv) without a delta row. An AVG column, if
// present, is ignored; "-" cells become absent.
ScoreTable parse_csv_table(std::string_view csv);

}  // namespace cftforge::report
