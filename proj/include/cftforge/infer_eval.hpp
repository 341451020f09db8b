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

// Runs a model endpoint over benchmark items under the direct, single-pass
// self-critique and two-stage self-critique strategies.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cftforge/answer_verify.hpp"
#include "cftforge/core.hpp"
#include "cftforge/critique_parse.hpp"
#include "cftforge/teacher_client.hpp"

namespace cftforge::eval {

inline constexpr int kSolveMaxTokens = 4096;
inline constexpr int kCritiqueMaxTokens = 2048;

struct EvalOptions {
  int solve_max_tokens = kSolveMaxTokens;
  int critique_max_tokens = kCritiqueMaxTokens;
  // Two-stage critique calls use the solve temperature unless set.
  std::optional<double> critique_temperature;
  critique::ParseOptions parse;
};

// Exactly one call. Transport failures yield verdict false with an error note.
EvalRecord run_direct(const BenchmarkItem& item, teacher::ChatClient& client, double temperature,
                      const EvalOptions& options = {});

// Exactly one call with the single-pass template; the answer comes from the
// corrected-solution section when there is one, else from the initial
// solution.
EvalRecord run_single_pass(const BenchmarkItem& item, teacher::ChatClient& client,
                           double temperature, const EvalOptions& options = {});

// Solve / critique loop, stopping at the first Correct judgment or after
// max_iterations. Unknown judgments continue the loop. The final answer is the
// last solution's. num_model_calls counts issued calls, cache hits included.
EvalRecord run_two_stage(const BenchmarkItem& item, teacher::ChatClient& client, double temperature,
                         int max_iterations = 8, const EvalOptions& options = {});

EvalRecord run_item(const BenchmarkItem& item, teacher::ChatClient& client,
                    const InferenceStrategy& strategy, const EvalOptions& options = {});

// Strategy-aware extraction from a stored raw output.
verify::ExtractedAnswer extract_for_strategy(StrategyKind kind, std::string_view raw_output);

// Recomputes extracted_answer and verdict from raw_output against `gold`.
EvalRecord rescore(EvalRecord record, const BenchmarkItem& gold);

struct SuiteResult {
  std::vector<EvalRecord> records;  // item order
  std::map<Benchmark, verify::ScoreEntry> scores;
  std::size_t failed_items = 0;  // records carrying an error note
};

// Items run in parallel (bounded by the endpoint's max_parallel); each
// item's two-stage loop is sequential.
SuiteResult run_suite(std::span<const BenchmarkItem> items, teacher::ChatClient& client,
                      const InferenceStrategy& strategy, const EvalOptions& options = {},
                      const teacher::ProgressFn& progress = {});

}  // namespace cftforge::eval
