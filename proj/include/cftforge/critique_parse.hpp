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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cftforge/core.hpp"

namespace cftforge::critique {

struct ParsedConclusion {
  Judgment judgment = Judgment::Unknown;
  // Byte offsets into the critique text; absent when judgment is Unknown.
  std::optional<std::pair<std::size_t, std::size_t>> matched_span;
  std::string matched_literal;
};

struct ParseOptions {
  // Strict mode requires the trailing "[END]" marker on the conclusion line.
  bool strict = false;
};

// Finds conclusion lines of the form
//   [qualifier] conclusion <sep> <verdict> [[END]]
// case-insensitively, ignoring markdown emphasis (* and __). Verdicts
// right/correct map to Correct, wrong/incorrect to Wrong. The last match in
// the text wins; no match yields Unknown.
ParsedConclusion parse_judgment(std::string_view critique_text, ParseOptions options = {});

// Every conclusion match in text order. parse_judgment returns the last one.
std::vector<ParsedConclusion> find_conclusions(std::string_view critique_text,
                                               ParseOptions options = {});

struct JudgmentStats {
  std::size_t n_correct = 0;
  std::size_t n_wrong = 0;
  std::size_t n_unknown = 0;
  // n_correct / (n_correct + n_wrong); absent when nothing was judged.
  std::optional<double> correct_rate;

  Json to_json() const;
};

JudgmentStats judgment_stats(std::span<const Judgment> judgments);

// Re-parses each record's critique_text; the stored judgment field is a cache.
JudgmentStats judgment_stats(std::span<const CritiqueRecord> records, ParseOptions options = {});

// Returns a copy with judgment recomputed from critique_text.
CritiqueRecord reparse(CritiqueRecord record, ParseOptions options = {});

}  // namespace cftforge::critique
