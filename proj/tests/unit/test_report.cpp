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

#include "doctest.h"

#include <cmath>

#include "cftforge/errors.hpp"
#include "cftforge/report.hpp"
#include "support/generators.hpp"
#include "support/temp_dir.hpp"

using namespace cftforge;
using namespace cftforge::report;

namespace {

struct Group {
  std::string model;
  ScoreTable table;
  std::map<std::string, double> printed_avg;
  std::vector<Benchmark> columns;  // fixture order
  std::vector<double> delta;
  double delta_avg = 0;
};

std::vector<Group> reference_groups(std::vector<std::string>* sft_rows, std::string* cft_row) {
  const Json j = Json::parse(testing::slurp(testing::fixture("reference_scores.json")));
  std::vector<Benchmark> cols;
  for (const auto& c : j["columns"]) cols.push_back(benchmark_from_string(c.get<std::string>()));
  *cft_row = j["cft_row"].get<std::string>();
  *sft_rows = j["sft_rows"].get<std::vector<std::string>>();
  std::vector<Group> out;
  for (const auto& g : j["groups"]) {
    Group grp;
    grp.model = g["model"].get<std::string>();
    grp.columns = cols;
    for (const auto& r : g["rows"]) {
      ScoreRow row;
      row.label = r["label"].get<std::string>();
      for (std::size_t i = 0; i < cols.size(); ++i) row.scores[cols[i]] = r["scores"][i].get<double>();
      grp.printed_avg[row.label] = r["printed_avg"].get<double>();
      grp.table.rows.push_back(std::move(row));
    }
    grp.delta = g["delta"]["scores"].get<std::vector<double>>();
    grp.delta_avg = g["delta"]["avg"].get<double>();
    out.push_back(std::move(grp));
  }
  return out;
}

ScoreTable random_table(testing::Gen& g) {
  ScoreTable t;
  const int rows = g.range(2, 5);
  std::vector<Benchmark> cols;
  for (const auto b : kAllBenchmarks) {
    if (g.coin(0.6)) cols.push_back(b);
  }
  if (cols.empty()) cols.push_back(Benchmark::MATH);
  for (int r = 0; r < rows; ++r) {
    ScoreRow row;
    row.label = "row-" + std::to_string(r) + g.word(1, 3);
    for (const auto b : cols) {
      if (g.coin(0.1)) {
        row.scores[b] = std::nullopt;
      } else {
        row.scores[b] = static_cast<double>(g.range(0, 1000)) / 10.0;
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

TEST_CASE("row averages") {
  const std::vector<double> xs{33.8, 9.2, 64.3, 4.5, 0.0, 10.0};
  CHECK(row_average(xs) == 20.3);
  CHECK_THROWS_AS(row_average(std::span<const double>{}), ValidationError);
  ScoreRow r{"r", {{Benchmark::MATH, 10.0}, {Benchmark::GSM8K, std::nullopt}, {Benchmark::AIME24, 20.0}}};
  CHECK(row_average(r) == std::optional<double>(15.0));
  ScoreRow empty{"e", {{Benchmark::MATH, std::nullopt}}};
  CHECK_FALSE(row_average(empty));
}

TEST_CASE("reference tables: averages and delta rows reproduce the printed values") {
  std::vector<std::string> sft;
  std::string cft;
  const auto groups = reference_groups(&sft, &cft);
  REQUIRE(groups.size() == 3);
  for (const auto& g : groups) {
    CAPTURE(g.model);
    for (const auto& row : g.table.rows) {
      CAPTURE(row.label);
      CHECK(std::abs(*row_average(row) - g.printed_avg.at(row.label)) <= 0.05 + 1e-9);
    }
    const auto d = delta_row({g.table, cft, sft});
    const auto& cols = g.columns;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      CAPTURE(to_string(cols[i]));
      CHECK(d.deltas.at(cols[i]) == std::optional<double>(g.delta[i]));
    }
    CHECK(d.average_delta == std::optional<double>(g.delta_avg));
  }
}

TEST_CASE("comparison validation") {
  ScoreTable t;
  t.rows.push_back({"cft", {{Benchmark::MATH, 50.0}}});
  t.rows.push_back({"sft", {{Benchmark::MATH, 40.0}}});
  CHECK_NOTHROW((ComparisonSpec{t, "cft", {"sft"}}.validate()));
  CHECK_THROWS_AS((ComparisonSpec{t, "cft", {}}.validate()), ValidationError);
  CHECK_THROWS_AS((ComparisonSpec{t, "nope", {"sft"}}.validate()), ValidationError);
  CHECK_THROWS_AS((ComparisonSpec{t, "cft", {"nope"}}.validate()), ValidationError);
  const auto d = delta_row({t, "cft", {"sft"}});
  CHECK(d.deltas.at(Benchmark::MATH) == std::optional<double>(10.0));
  CHECK(d.best_sft_label == "sft");
}

TEST_CASE("absent cells propagate into the delta row") {
  ScoreTable t;
  t.rows.push_back({"cft", {{Benchmark::MATH, 50.0}, {Benchmark::GSM8K, std::nullopt}}});
  t.rows.push_back({"a", {{Benchmark::MATH, std::nullopt}, {Benchmark::GSM8K, 10.0}}});
  t.rows.push_back({"b", {{Benchmark::MATH, std::nullopt}, {Benchmark::GSM8K, 20.0}}});
  const auto d = delta_row({t, "cft", {"a", "b"}});
  CHECK_FALSE(d.deltas.at(Benchmark::MATH));
  CHECK_FALSE(d.deltas.at(Benchmark::GSM8K));
}

TEST_CASE("property: swapping a single SFT row with CFT negates the delta") {
  testing::Gen g(61);
  for (int i = 0; i < 200; ++i) {
    ScoreTable t;
    ScoreRow x{"x", {}}, y{"y", {}};
    for (const auto b : kAllBenchmarks) {
      x.scores[b] = static_cast<double>(g.range(0, 1000)) / 10.0;
      y.scores[b] = static_cast<double>(g.range(0, 1000)) / 10.0;
    }
    t.rows = {x, y};
    const auto xy = delta_row({t, "x", {"y"}});
    const auto yx = delta_row({t, "y", {"x"}});
    for (const auto b : kAllBenchmarks) {
      CHECK(*xy.deltas.at(b) == doctest::Approx(-*yx.deltas.at(b)));
    }
    CHECK(*xy.average_delta == doctest::Approx(-*yx.average_delta));
  }
}

TEST_CASE("render is deterministic and independent of row order") {
  testing::Gen g(62);
  for (int i = 0; i < 100; ++i) {
    auto t = random_table(g);
    const auto md = render_table(t, TableFormat::Markdown);
    const auto csv = render_table(t, TableFormat::Csv);
    CHECK(render_table(t, TableFormat::Markdown) == md);
    std::reverse(t.rows.begin(), t.rows.end());
    CHECK(render_table(t, TableFormat::Markdown) == md);
    CHECK(render_table(t, TableFormat::Csv) == csv);
  }
}

TEST_CASE("csv round trip") {
  testing::Gen g(63);
  for (int i = 0; i < 100; ++i) {
    auto t = random_table(g);
    const auto parsed = parse_csv_table(render_table(t, TableFormat::Csv));
    std::sort(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
    CHECK(parsed == t);
  }
}

TEST_CASE("markdown layout") {
  ScoreTable t;
  t.rows.push_back({"b", {{Benchmark::MATH, 80.25}, {Benchmark::GSM8K, std::nullopt}}});
  t.rows.push_back({"a", {{Benchmark::MATH, 59.0}, {Benchmark::GSM8K, 31.15}}});
  const auto d = delta_row({t, "b", {"a"}});
  const auto md = render_table(t, TableFormat::Markdown, d);
  CHECK(md ==
        "| Model | MATH | GSM8K | AVG |\n"
        "| --- | ---: | ---: | ---: |\n"
        "| a | 59.0 | 31.2 | 45.1 |\n"
        "| b | 80.3 | - | 80.3 |\n"
        "| Delta = CFT - SFT_best | 21.3 | - | 35.2 |\n");
  CHECK(table_format_from_string("md") == TableFormat::Markdown);
  CHECK(table_format_from_string("csv") == TableFormat::Csv);
  CHECK_THROWS_AS(table_format_from_string("html"), UsageError);
}
