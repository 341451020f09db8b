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

#include "cftforge/infer_eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <mutex>
#include <thread>

#include "cftforge/errors.hpp"
#include "cftforge/prompts.hpp"

namespace cftforge::eval {
namespace {

using prompts::PromptKind;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string error_note(const teacher::CallError& e) {
  std::string kind;
  switch (e.kind) {
    case teacher::CallErrorKind::Transport: kind = "transport"; break;
    case teacher::CallErrorKind::Request: kind = "request"; break;
    case teacher::CallErrorKind::Protocol: kind = "protocol"; break;
    case teacher::CallErrorKind::Validation: kind = "validation"; break;
  }
  std::string note = kind + " error";
  if (e.status != 0) note += " (status " + std::to_string(e.status) + ")";
  if (!e.message.empty()) note += ": " + e.message;
  return note;
}

EvalRecord base_record(const BenchmarkItem& item, const teacher::ChatClient& client,
                       StrategyKind kind, double temperature, int max_iterations) {
  EvalRecord r;
  r.item_id = item.id;
  r.benchmark = item.benchmark;
  r.strategy = InferenceStrategy{kind, temperature, max_iterations};
  r.model = client.config().model;
  r.num_model_calls = 1;
  return r;
}

void finalize(EvalRecord& r, const BenchmarkItem& item) {
  const auto extracted = extract_for_strategy(r.strategy.kind, r.raw_output);
  if (extracted.method == verify::ExtractMethod::None) {
    r.extracted_answer.reset();
    r.verdict = false;
  } else {
    r.extracted_answer = extracted.text;
    r.verdict = verify::equivalent(extracted.text, item.gold_answer);
  }
}

EvalRecord single_call(const BenchmarkItem& item, teacher::ChatClient& client, StrategyKind kind,
                       PromptKind prompt, double temperature, const EvalOptions& options) {
  EvalRecord r = base_record(item, client, kind, temperature, 8);
  teacher::ChatRequest req;
  req.user = prompts::render(prompt, item.question);
  req.temperature = temperature;
  req.max_output_tokens = options.solve_max_tokens;
  try {
    r.raw_output = client.complete(req).content;
  } catch (...) {
    r.error = error_note(teacher::classify_exception(std::current_exception()));
    r.verdict = false;
    return r;
  }
  finalize(r, item);
  return r;
}

}  // namespace

verify::ExtractedAnswer extract_for_strategy(StrategyKind kind, std::string_view raw) {
  if (kind != StrategyKind::SinglePassSelfCritique) return verify::extract_answer(raw);
  const std::string low = lower(raw);
  if (const auto pos = low.rfind("corrected solution"); pos != std::string::npos) {
    auto from_corrected = verify::extract_answer(raw.substr(pos));
    if (from_corrected.method != verify::ExtractMethod::None) return from_corrected;
  }
  // No usable correction: the initial solution precedes the critique.
  if (const auto pos = low.find("critique"); pos != std::string::npos) {
    auto initial = verify::extract_answer(raw.substr(0, pos));
    if (initial.method != verify::ExtractMethod::None) return initial;
  }
  return verify::extract_answer(raw);
}

EvalRecord run_direct(const BenchmarkItem& item, teacher::ChatClient& client, double temperature,
                      const EvalOptions& options) {
  return single_call(item, client, StrategyKind::Direct, PromptKind::DirectInference, temperature,
                     options);
}

EvalRecord run_single_pass(const BenchmarkItem& item, teacher::ChatClient& client,
                           double temperature, const EvalOptions& options) {
  return single_call(item, client, StrategyKind::SinglePassSelfCritique,
                     PromptKind::SinglePassSelfCritique, temperature, options);
}

EvalRecord run_two_stage(const BenchmarkItem& item, teacher::ChatClient& client, double temperature,
                         int max_iterations, const EvalOptions& options) {
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  EvalRecord r =
      base_record(item, client, StrategyKind::TwoStageSelfCritique, temperature, max_iterations);
  const double critique_temperature = options.critique_temperature.value_or(temperature);

  std::optional<std::string> solution;
  int calls = 0;
  int iterations = 0;
  try {
    for (int i = 1; i <= max_iterations; ++i) {
      iterations = i;
      // The per-iteration seed keeps every attempt a distinct cache entry.
      teacher::ChatRequest solve;
      solve.user = prompts::render(PromptKind::TwoStageSolve, item.question);
      solve.temperature = temperature;
      solve.max_output_tokens = options.solve_max_tokens;
      solve.seed = i;
      ++calls;
      solution = client.complete(solve).content;

      teacher::ChatRequest crit;
      crit.user = prompts::render(PromptKind::TwoStageCritique, item.question, *solution);
      crit.temperature = critique_temperature;
      crit.max_output_tokens = options.critique_max_tokens;
      crit.seed = i;
      ++calls;
      const std::string critique = client.complete(crit).content;
      if (critique::parse_judgment(critique, options.parse).judgment == Judgment::Correct) break;
    }
  } catch (...) {
    r.error = error_note(teacher::classify_exception(std::current_exception()));
  }
  r.num_model_calls = std::max(calls, 1);
  r.iterations_used = iterations;
  if (!solution) {
    r.verdict = false;
    return r;
  }
  r.raw_output = *solution;
  finalize(r, item);
  return r;
}

EvalRecord run_item(const BenchmarkItem& item, teacher::ChatClient& client,
                    const InferenceStrategy& strategy, const EvalOptions& options) {
  strategy.validate();
  switch (strategy.kind) {
    case StrategyKind::Direct: return run_direct(item, client, strategy.temperature, options);
    case StrategyKind::SinglePassSelfCritique:
      return run_single_pass(item, client, strategy.temperature, options);
    case StrategyKind::TwoStageSelfCritique:
      return run_two_stage(item, client, strategy.temperature, strategy.max_iterations, options);
  }
  throw UsageError("unknown strategy");
}

EvalRecord rescore(EvalRecord record, const BenchmarkItem& gold) {
  if (record.item_id != gold.id) {
    throw ValidationError("rescore: record " + record.item_id + " paired with item " + gold.id);
  }
  finalize(record, gold);
  return record;
}

SuiteResult run_suite(std::span<const BenchmarkItem> items, teacher::ChatClient& client,
                      const InferenceStrategy& strategy, const EvalOptions& options,
                      const teacher::ProgressFn& progress) {
  strategy.validate();
  SuiteResult result;
  result.records.resize(items.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;
  const auto workers = std::min<std::size_t>(
      static_cast<std::size_t>(std::max(client.config().max_parallel, 1)), items.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
          result.records[i] = run_item(items[i], client, strategy, options);
          if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(++done, items.size());
          }
        }
      });
    }
  }
  for (const auto& r : result.records) {
    if (r.error) ++result.failed_items;
  }
  result.scores = verify::score(result.records);
  return result;
}

}  // namespace cftforge::eval
