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

// Shared domain types and their JSON schemas. Every type here is an immutable
// value object once constructed; validation happens in the factories and in
// deserialization.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cftforge {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Samples

enum class SourceKind { WebInstruct, MetaMathQA, NuminaMath, SelfGenerated, Other };

struct SampleSource {
  SourceKind kind = SourceKind::WebInstruct;
  std::string other_name;  // only meaningful for Other

  static SampleSource other(std::string name) { return {SourceKind::Other, std::move(name)}; }

  // "WebInstruct", ..., or "Other:<name>".
  std::string tag() const;
  static SampleSource parse(std::string_view tag);

  friend bool operator==(const SampleSource&, const SampleSource&) = default;
};

struct Sample {
  std::string id;
  std::string question;
  std::string response;
  SampleSource source;
  std::optional<std::string> subject;
  std::size_t approx_token_len = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Lowercase hex SHA-256 over the length-prefixed (source, question, response)
// triple. Throws ValidationError if the question is blank.
std::string sample_id(std::string_view question, std::string_view response,
                      const SampleSource& source);

// Whitespace-delimited token count; the corpus-level length proxy.
std::size_t approx_token_count(std::string_view text);

// Builds a Sample with id and approx_token_len filled in.
Sample make_sample(std::string question, std::string response, SampleSource source,
                   std::optional<std::string> subject = std::nullopt);

// ---------------------------------------------------------------------------
// Critiques

enum class Judgment { Correct, Wrong, Unknown };

struct CritiqueRecord {
  std::string sample_id;
  std::string teacher_model;
  std::string prompt_fingerprint;
  std::string critique_text;
  Judgment judgment = Judgment::Unknown;
  std::string created_at;  // UTC ISO-8601

  friend bool operator==(const CritiqueRecord&, const CritiqueRecord&) = default;
};

// ---------------------------------------------------------------------------
// Training data

enum class Variant { Sft, VerifiedSft, TeacherSft, Cft, CftShort };

struct Segment {
  std::string text;
  bool supervised = false;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Segmented model-visible text with per-segment loss flags. Construction
// rejects examples without a supervised segment.
class TrainingExample {
 public:
  TrainingExample(std::string sample_id, Variant variant, std::vector<Segment> segments);

  const std::string& sample_id() const noexcept { return sample_id_; }
  Variant variant() const noexcept { return variant_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }

  // Concatenation of every segment: exactly what the model sees.
  std::string text() const;
  // Concatenation of the supervised segments only.
  std::string supervised_text() const;
  std::string unsupervised_text() const;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;

 private:
  std::string sample_id_;
  Variant variant_;
  std::vector<Segment> segments_;
};

// ---------------------------------------------------------------------------
// Benchmarks and evaluation

// Declaration order is the canonical column order of every rendered table.
enum class Benchmark {
  MATH,
  MinervaMath,
  GSM8K,
  OlympiadBench,
  AIME24,
  AMC23,
  MATH500,
  TheoremQA,
  MMLUPro,
  GPQA,
};

inline constexpr Benchmark kAllBenchmarks[] = {
    Benchmark::MATH,    Benchmark::MinervaMath, Benchmark::GSM8K,   Benchmark::OlympiadBench,
    Benchmark::AIME24,  Benchmark::AMC23,       Benchmark::MATH500, Benchmark::TheoremQA,
    Benchmark::MMLUPro, Benchmark::GPQA,
};

struct BenchmarkItem {
  std::string id;
  Benchmark benchmark = Benchmark::MATH;
  std::string question;
  std::string gold_answer;

  friend bool operator==(const BenchmarkItem&, const BenchmarkItem&) = default;
};

enum class StrategyKind { Direct, SinglePassSelfCritique, TwoStageSelfCritique };

struct InferenceStrategy {
  StrategyKind kind = StrategyKind::Direct;
  double temperature = 0.0;
  int max_iterations = 8;

  // Direct -> 0.0; self-critique kinds -> 0.1 (lowest of the evaluated
  // settings). max_iterations is always 8.
  static InferenceStrategy defaults(StrategyKind kind);
  void validate() const;

  friend bool operator==(const InferenceStrategy&, const InferenceStrategy&) = default;
};

struct EvalRecord {
  std::string item_id;
  Benchmark benchmark = Benchmark::MATH;
  InferenceStrategy strategy;
  std::string model;
  std::string raw_output;
  std::optional<std::string> extracted_answer;
  bool verdict = false;
  int num_model_calls = 1;
  std::optional<int> iterations_used;  // two-stage only
  std::optional<std::string> error;    // transport failure note

  void validate() const;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

// ---------------------------------------------------------------------------
// Training configuration

enum class LrSchedule { CosineDecay };

struct TrainConfig {
  double learning_rate = 5e-6;
  LrSchedule schedule = LrSchedule::CosineDecay;
  double warmup_ratio = 0.1;
  int global_batch_size = 512;
  int epochs = 1;
  Benchmark validation_set = Benchmark::MATH500;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// ---------------------------------------------------------------------------
// Score tables

struct ScoreRow {
  std::string label;
  // Absent value = "-" cell (not evaluated).
  std::map<Benchmark, std::optional<double>> scores;

  friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

struct ScoreTable {
  std::vector<ScoreRow> rows;

  // Benchmarks present in the table, in canonical order.
  std::vector<Benchmark> columns() const;
  const ScoreRow& row(std::string_view label) const;
  // Every row must carry the same column set; scores within [0, 100].
  void validate() const;

  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;
};

// ---------------------------------------------------------------------------
// Enum tags

std::string_view to_string(Judgment);
std::string_view to_string(Variant);
std::string_view to_string(Benchmark);
std::string_view to_string(StrategyKind);
std::string_view to_string(LrSchedule);

Judgment judgment_from_string(std::string_view);
Variant variant_from_string(std::string_view);
Benchmark benchmark_from_string(std::string_view);
StrategyKind strategy_kind_from_string(std::string_view);
LrSchedule schedule_from_string(std::string_view);

// ---------------------------------------------------------------------------
// JSON. Deserializers throw SchemaError naming the offending field.

Json to_json(const Sample&);
Json to_json(const CritiqueRecord&);
Json to_json(const TrainingExample&);
Json to_json(const BenchmarkItem&);
Json to_json(const InferenceStrategy&);
Json to_json(const EvalRecord&);
Json to_json(const TrainConfig&);
Json to_json(const ScoreTable&);

template <class T>
T from_json(const Json&);

template <> Sample from_json<Sample>(const Json&);
template <> CritiqueRecord from_json<CritiqueRecord>(const Json&);
template <> TrainingExample from_json<TrainingExample>(const Json&);
template <> BenchmarkItem from_json<BenchmarkItem>(const Json&);
template <> InferenceStrategy from_json<InferenceStrategy>(const Json&);
template <> EvalRecord from_json<EvalRecord>(const Json&);
template <> TrainConfig from_json<TrainConfig>(const Json&);
template <> ScoreTable from_json<ScoreTable>(const Json&);

// Compact single-line dump; invalid UTF-8 is replaced rather than thrown on.
std::string dump_line(const Json&);

// Current time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now_iso8601();

}  // namespace cftforge
