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

// Builds SFT / verified-SFT / teacher-SFT / CFT / CFT-short training sets from
// samples and teacher critiques, mixes datasets, and emits TrainConfig files.
//
// Every builder deduplicates samples by id (first occurrence wins), preserves
// corpus order, and skips rather than fails on degenerate inputs. Skips are
// counted per reason in BuildReport::excluded.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cftforge/core.hpp"
#include "cftforge/critique_parse.hpp"
#include "cftforge/teacher_client.hpp"

namespace cftforge::forge {

// Version of the filtering / ordering rules below; written to metadata.
inline constexpr std::string_view kRuleVersion = "forge-rules/v1";

// Exclusion reason keys.
inline constexpr std::string_view kEmptyResponse = "empty_response";
inline constexpr std::string_view kDuplicateId = "duplicate_id";
inline constexpr std::string_view kMissingCritique = "missing_critique";
inline constexpr std::string_view kJudgedWrong = "judged_wrong";
inline constexpr std::string_view kJudgedUnknown = "judged_unknown";
inline constexpr std::string_view kSizeCap = "size_cap";
inline constexpr std::string_view kMissingTeacherAnswer = "missing_teacher_answer";
inline constexpr std::string_view kOverTokenBudget = "over_token_budget";

struct BuildReport {
  std::vector<TrainingExample> examples;
  std::map<std::string, std::size_t, std::less<>> excluded;
  std::vector<std::string> warnings;
  // Over the critiques consulted by the build (verified / cft variants).
  std::optional<critique::JudgmentStats> judgment_stats;
  std::optional<std::size_t> token_budget;  // CftShort only

  std::size_t excluded_count(std::string_view reason) const;
  Json metadata(Variant variant) const;
};

struct MixSpec {
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  enum class Order { Mixed, TwoStage } order = Order::Mixed;
  std::uint64_t seed = 0;
};

struct MixResult {
  std::vector<TrainingExample> examples;
  // Index of the first stage-two example (TwoStage only).
  std::optional<std::size_t> stage_boundary;

  Json metadata(const MixSpec& spec) const;
};

struct BuildSpec {
  Variant variant = Variant::Sft;
  std::optional<std::size_t> size_cap;
  std::optional<std::size_t> token_budget;  // CftShort only
  critique::ParseOptions parse;

  void validate() const;
};

// Prompt segment for SFT-family examples: the direct-inference prompt plus a
// newline; the response follows as the supervised segment.
std::string sft_prompt_segment(std::string_view question);
// Prompt segment for CFT examples: the critique-teacher prompt embedding
// question and response, plus a blank line; the critique follows.
std::string cft_prompt_segment(std::string_view question, std::string_view response);

BuildReport build_sft(std::span<const Sample> samples, std::optional<std::size_t> size_cap = {});

BuildReport build_verified_sft(std::span<const Sample> samples,
                               std::span<const CritiqueRecord> critiques,
                               std::optional<std::size_t> size_cap = {},
                               critique::ParseOptions parse = {});

BuildReport build_teacher_sft(std::span<const Sample> samples,
                              const std::unordered_map<std::string, std::string>& teacher_answers,
                              std::optional<std::size_t> size_cap = {});

BuildReport build_cft(std::span<const Sample> samples, std::span<const CritiqueRecord> critiques,
                      std::optional<std::size_t> size_cap = {}, critique::ParseOptions parse = {});

// build_cft restricted to examples whose whole-text approx token count is at
// most token_budget. Without a budget, the median (lower middle) SFT example
// length of the same corpus is used.
BuildReport build_cft_short(std::span<const Sample> samples,
                            std::span<const CritiqueRecord> critiques,
                            std::optional<std::size_t> token_budget,
                            std::optional<std::size_t> size_cap = {},
                            critique::ParseOptions parse = {});

// Dispatches on spec.variant. teacher_answers is only read for TeacherSft.
BuildReport build(const BuildSpec& spec, std::span<const Sample> samples,
                  std::span<const CritiqueRecord> critiques,
                  const std::unordered_map<std::string, std::string>& teacher_answers = {});

std::size_t median_sft_length(std::span<const Sample> samples);

// Takes the first count_a of `a` and first count_b of `b`. Mixed: seeded
// platform-stable shuffle of the union. TwoStage: a's part then b's part.
MixResult mix_datasets(std::span<const TrainingExample> a, std::span<const TrainingExample> b,
                       const MixSpec& spec);

// ---------------------------------------------------------------------------
// Teacher / student generation

struct GenerationError {
  std::size_t index = 0;
  std::string sample_id;
  teacher::CallError error;
};

struct CritiqueRun {
  std::vector<CritiqueRecord> critiques;
  std::vector<GenerationError> errors;
};

struct GenerationOptions {
  double temperature = 0.0;
  std::optional<int> max_output_tokens;
  critique::ParseOptions parse;
};

// One CritiqueTeacher completion per sample. created_at is the time the
// completion was fetched, so a warm-cache rerun reproduces records exactly.
CritiqueRun generate_critiques(std::span<const Sample> samples, teacher::ChatClient& client,
                               const GenerationOptions& options = {},
                               const teacher::ProgressFn& progress = {});

struct TeacherAnswerRun {
  std::vector<std::pair<std::string, std::string>> answers;  // (sample_id, text)
  std::vector<GenerationError> errors;
};

TeacherAnswerRun generate_teacher_answers(std::span<const Sample> samples,
                                          teacher::ChatClient& client,
                                          const GenerationOptions& options = {},
                                          const teacher::ProgressFn& progress = {});

struct NoisyResponseRun {
  std::vector<Sample> samples;
  std::vector<GenerationError> errors;
};

// One DirectInference completion per question (temperature 0.0 by default);
// the completion becomes the noisy response of a SelfGenerated sample.
NoisyResponseRun generate_noisy_responses(std::span<const Sample> questions,
                                          teacher::ChatClient& student,
                                          const GenerationOptions& options = {},
                                          const teacher::ProgressFn& progress = {});

// ---------------------------------------------------------------------------
// Training configuration

struct TrainConfigOverrides {
  std::optional<double> learning_rate;
  std::optional<double> warmup_ratio;
  std::optional<int> global_batch_size;
  std::optional<int> epochs;
  std::optional<Benchmark> validation_set;
};

struct EmittedTrainConfig {
  TrainConfig config;
  std::vector<std::string> overridden;  // field names, declaration order

  Json to_json() const;
  static EmittedTrainConfig from_json(const Json&);
};

// Defaults (5e-6, cosine decay, warmup 0.1, batch 512, 1 epoch, MATH500)
// with overrides applied field-wise. Throws ValidationError on nonpositive
// learning rate, batch size, or epochs.
EmittedTrainConfig emit_train_config(const TrainConfigOverrides& overrides = {});

}  // namespace cftforge::forge
