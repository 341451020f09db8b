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

// Final-answer extraction and math answer equivalence for benchmark scoring.
//
// equivalent() runs a fixed pipeline and succeeds if any stage matches:
//   1. normalize both sides (whitespace, outer brackets, trailing periods,
//      \left/\right, spacing macros, thousands separators, \dfrac/\tfrac)
//   2. exact string match
//   3. numeric match: integers, decimals, a/b, \frac{a}{b}, with relative
//      tolerance 1e-6
//   4. structural match after rewriting \frac{a}{b} -> a/b, \sqrt{a} ->
//      sqrt(a) and dropping a leading '+'
// Answers with top-level commas or \pm are compared element-wise as sets.
// There is no computer algebra: anything the stages cannot reconcile is false.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cftforge/core.hpp"

namespace cftforge::verify {

enum class ExtractMethod { BoxedLast, AnswerLineLast, None };

std::string_view to_string(ExtractMethod m);

struct ExtractedAnswer {
  std::string text;  // empty iff method == None
  ExtractMethod method = ExtractMethod::None;
};

// Last \boxed{...} group (balanced braces, nesting preserved); otherwise the
// text after the last line starting with "Answer:"; otherwise None.
ExtractedAnswer extract_answer(std::string_view raw_output);

// Content of the last balanced \boxed{...} (or \fbox{...}) group, if any.
std::optional<std::string> last_boxed(std::string_view text);

std::string normalize(std::string_view answer);

inline constexpr double kRelativeTolerance = 1e-6;

// Numeric value of a normalized answer when it is a plain number, a/b, or
// \frac{a}{b} with numeric parts.
std::optional<long double> numeric_value(std::string_view normalized);

bool equivalent(std::string_view candidate, std::string_view gold);

struct ScoreEntry {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;  // percentage, one decimal, half-up
};

// Per-benchmark accuracy; benchmarks with no records are absent.
std::map<Benchmark, ScoreEntry> score(std::span<const EvalRecord> records);

// Half-up rounding to one decimal (x.x5 -> up), robust to binary
// representation error of decimal inputs.
double round_half_up_1(double value);

}  // namespace cftforge::verify
