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
#include <cstdio>

#include "cftforge/answer_verify.hpp"
#include "cftforge/jsonl.hpp"
#include "support/generators.hpp"
#include "support/temp_dir.hpp"

using namespace cftforge;
using namespace cftforge::verify;

namespace {

std::vector<Json> fixture_lines(const std::string& name) {
  std::vector<Json> out;
  std::istringstream in(testing::slurp(testing::fixture(name)));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(Json::parse(line));
  }
  return out;
}

EvalRecord record(Benchmark b, bool verdict) {
  EvalRecord r;
  r.item_id = "x";
  r.benchmark = b;
  r.num_model_calls = 1;
  if (verdict) r.extracted_answer = "1";
  r.verdict = verdict;
  return r;
}

}  // namespace

TEST_CASE("extraction fixtures") {
  const auto cases = fixture_lines("answer_examples.jsonl");
  REQUIRE(cases.size() >= 15);
  for (const auto& c : cases) {
    CAPTURE(c["name"].get<std::string>());
    const auto got = extract_answer(c["raw"].get<std::string>());
    CHECK(got.text == c["text"].get<std::string>());
    CHECK(to_string(got.method) == c["method"].get<std::string>());
  }
}

TEST_CASE("boxed extraction keeps nesting and takes the last group") {
  CHECK(last_boxed("\\boxed{1} then \\boxed{\\frac{a}{b}}") == std::optional<std::string>("\\frac{a}{b}"));
  CHECK(last_boxed("\\fbox{7}") == std::optional<std::string>("7"));
  CHECK_FALSE(last_boxed("\\boxed{unclosed"));
  CHECK_FALSE(last_boxed("nothing"));
}

TEST_CASE("equivalence fixtures") {
  const auto cases = fixture_lines("equivalence_examples.jsonl");
  REQUIRE(cases.size() >= 20);
  for (const auto& c : cases) {
    const auto a = c["candidate"].get<std::string>();
    const auto b = c["gold"].get<std::string>();
    CAPTURE(a);
    CAPTURE(b);
    CHECK(equivalent(a, b) == c["equivalent"].get<bool>());
    CHECK(equivalent(b, a) == c["equivalent"].get<bool>());
  }
}

TEST_CASE("normalization details") {
  CHECK(normalize("  1,000 ") == "1000");
  CHECK(normalize("\\left( 3 \\right)") == normalize("(3)"));
  CHECK(normalize("\\dfrac{1}{2}") == normalize("\\frac{1}{2}"));
  CHECK(numeric_value(normalize("\\frac{3}{4}")) == doctest::Approx(0.75));
  CHECK(numeric_value(normalize("-2.5")) == doctest::Approx(-2.5));
  CHECK_FALSE(numeric_value(normalize("x+1")));
  CHECK_FALSE(numeric_value(normalize("1/0")));
}

TEST_CASE("property: normalize is idempotent") {
  testing::Gen g(41);
  for (int i = 0; i < 1000; ++i) {
    const auto s = g.math_noise(16);
    const auto once = normalize(s);
    CAPTURE(s);
    CHECK(normalize(once) == once);
  }
}

TEST_CASE("property: equivalence is reflexive on non-empty answers and symmetric") {
  testing::Gen g(42);
  for (int i = 0; i < 500; ++i) {
    const auto a = g.math_noise(10);
    const auto b = g.coin(0.3) ? normalize(a) : g.math_noise(10);
    CAPTURE(a);
    CAPTURE(b);
    // An empty answer never scores, not even against itself.
    CHECK(equivalent(a, a) == !normalize(a).empty());
    CHECK(equivalent(a, b) == equivalent(b, a));
  }
}

TEST_CASE("property: fractions and decimals agree with exact arithmetic") {
  testing::Gen g(43);
  for (int i = 0; i < 500; ++i) {
    const int p = g.range(-999, 999);
    const int q = g.range(1, 999);
    const std::string frac = "\\frac{" + std::to_string(p) + "}{" + std::to_string(q) + "}";
    char dec[64];
    std::snprintf(dec, sizeof dec, "%.12f", static_cast<double>(p) / q);
    CAPTURE(frac);
    CAPTURE(dec);
    CHECK(equivalent(frac, dec));
    CHECK(equivalent(std::to_string(p) + "/" + std::to_string(q), frac));
    // A different rational is never equivalent: |p/q - r/s| >= 1/(q*s).
    const int r = p + g.range(1, 5);
    const std::string other = "\\frac{" + std::to_string(r) + "}{" + std::to_string(q) + "}";
    CHECK_FALSE(equivalent(other, frac));
  }
}

TEST_CASE("scores per benchmark") {
  const std::vector<EvalRecord> rs{record(Benchmark::MATH, true), record(Benchmark::MATH, true),
                                   record(Benchmark::MATH, false), record(Benchmark::MATH, true),
                                   record(Benchmark::GSM8K, false)};
  const auto s = score(rs);
  CHECK(s.at(Benchmark::MATH).accuracy == 75.0);
  CHECK(s.at(Benchmark::MATH).correct == 3);
  CHECK(s.at(Benchmark::MATH).total == 4);
  CHECK(s.at(Benchmark::GSM8K).accuracy == 0.0);
  CHECK_FALSE(s.contains(Benchmark::AIME24));

  std::vector<EvalRecord> thirds{record(Benchmark::AIME24, true), record(Benchmark::AIME24, false),
                                 record(Benchmark::AIME24, false)};
  CHECK(score(thirds).at(Benchmark::AIME24).accuracy == 33.3);
}

TEST_CASE("half-up rounding") {
  CHECK(round_half_up_1(37.35) == 37.4);
  CHECK(round_half_up_1(0.05) == 0.1);
  CHECK(round_half_up_1(2.25) == 2.3);
  CHECK(round_half_up_1(2.24999) == 2.2);
  CHECK(round_half_up_1(66.666666) == 66.7);
  CHECK(round_half_up_1(-1.25) == -1.3);
  CHECK(round_half_up_1(0.0) == 0.0);
}
