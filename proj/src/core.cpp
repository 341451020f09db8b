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

#include "cftforge/core.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>

#include "cftforge/errors.hpp"
#include "cftforge/hashing.hpp"

namespace cftforge {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), is_space);
}

template <class E, std::size_t N>
E enum_from(std::string_view tag, const std::array<std::string_view, N>& names, const char* field) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == tag) return static_cast<E>(i);
  }
  throw SchemaError(field, "unknown tag \"" + std::string(tag) + "\"");
}

constexpr std::array<std::string_view, 3> kJudgmentNames = {"Correct", "Wrong", "Unknown"};
constexpr std::array<std::string_view, 5> kVariantNames = {"Sft", "VerifiedSft", "TeacherSft",
                                                           "Cft", "CftShort"};
constexpr std::array<std::string_view, 10> kBenchmarkNames = {
    "MATH", "MinervaMath", "GSM8K",     "OlympiadBench", "AIME24",
    "AMC23", "MATH500",    "TheoremQA", "MMLUPro",       "GPQA"};
constexpr std::array<std::string_view, 3> kStrategyNames = {"Direct", "SinglePassSelfCritique",
                                                            "TwoStageSelfCritique"};
constexpr std::array<std::string_view, 1> kScheduleNames = {"CosineDecay"};

// --- field access helpers -------------------------------------------------

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw SchemaError(name, "record is not a JSON object");
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) throw SchemaError(name, "missing required field");
  return *it;
}

const Json* optional_field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string get_string(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) throw SchemaError(name, "expected string");
  return v.get<std::string>();
}

std::optional<std::string> get_optional_string(const Json& j, const char* name) {
  const Json* v = optional_field(j, name);
  if (!v) return std::nullopt;
  if (!v->is_string()) throw SchemaError(name, "expected string");
  return v->get<std::string>();
}

bool get_bool(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_boolean()) throw SchemaError(name, "expected boolean");
  return v.get<bool>();
}

double get_number(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number()) throw SchemaError(name, "expected number");
  return v.get<double>();
}

std::int64_t get_integer(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) throw SchemaError(name, "expected integer");
  return v.get<std::int64_t>();
}

template <class F>
auto rethrow_as_schema(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const ValidationError& e) {
    throw SchemaError(name, e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string SampleSource::tag() const {
  switch (kind) {
    case SourceKind::WebInstruct: return "WebInstruct";
    case SourceKind::MetaMathQA: return "MetaMathQA";
    case SourceKind::NuminaMath: return "NuminaMath";
    case SourceKind::SelfGenerated: return "SelfGenerated";
    case SourceKind::Other: return "Other:" + other_name;
  }
  return {};
}

SampleSource SampleSource::parse(std::string_view tag) {
  if (tag == "WebInstruct") return {SourceKind::WebInstruct, {}};
  if (tag == "MetaMathQA") return {SourceKind::MetaMathQA, {}};
  if (tag == "NuminaMath") return {SourceKind::NuminaMath, {}};
  if (tag == "SelfGenerated") return {SourceKind::SelfGenerated, {}};
  if (tag.starts_with("Other:") && tag.size() > 6) {
    return other(std::string(tag.substr(6)));
  }
  throw SchemaError("source", "unknown tag \"" + std::string(tag) + "\"");
}

std::string sample_id(std::string_view question, std::string_view response,
                      const SampleSource& source) {
  if (is_blank(question)) throw ValidationError("sample question is empty");
  // Length-prefixing keeps ("ab","c") and ("a","bc") apart.
  std::string buf = "cft-sample/v1";
  for (std::string_view part : {std::string_view(source.tag()), question, response}) {
    buf += '\n';
    buf += std::to_string(part.size());
    buf += ':';
    buf.append(part);
  }
  return sha256_hex(buf);
}

std::size_t approx_token_count(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

Sample make_sample(std::string question, std::string response, SampleSource source,
                   std::optional<std::string> subject) {
  Sample s;
  s.id = sample_id(question, response, source);
  s.approx_token_len = approx_token_count(question) + approx_token_count(response);
  s.question = std::move(question);
  s.response = std::move(response);
  s.source = std::move(source);
  s.subject = std::move(subject);
  return s;
}

// ---------------------------------------------------------------------------

TrainingExample::TrainingExample(std::string sample_id, Variant variant,
                                 std::vector<Segment> segments)
    : sample_id_(std::move(sample_id)), variant_(variant), segments_(std::move(segments)) {
  if (std::none_of(segments_.begin(), segments_.end(),
                   [](const Segment& s) { return s.supervised; })) {
    throw ValidationError("training example " + sample_id_ + " has no supervised segment");
  }
}

std::string TrainingExample::text() const {
  std::string out;
  for (const auto& s : segments_) out += s.text;
  return out;
}

std::string TrainingExample::supervised_text() const {
  std::string out;
  for (const auto& s : segments_) {
    if (s.supervised) out += s.text;
  }
  return out;
}

std::string TrainingExample::unsupervised_text() const {
  std::string out;
  for (const auto& s : segments_) {
    if (!s.supervised) out += s.text;
  }
  return out;
}

// ---------------------------------------------------------------------------

InferenceStrategy InferenceStrategy::defaults(StrategyKind kind) {
  InferenceStrategy s;
  s.kind = kind;
  s.temperature = kind == StrategyKind::Direct ? 0.0 : 0.1;
  s.max_iterations = 8;
  return s;
}

void InferenceStrategy::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ValidationError("temperature must lie in [0, 2]");
  }
  if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
}

void EvalRecord::validate() const {
  strategy.validate();
  if (num_model_calls < 1) throw ValidationError("num_model_calls must be positive");
  if (verdict && !extracted_answer) {
    throw ValidationError("eval record " + item_id + " has verdict true without an answer");
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be positive");
  }
  if (global_batch_size <= 0) throw ValidationError("global_batch_size must be positive");
  if (epochs <= 0) throw ValidationError("epochs must be positive");
  if (!(warmup_ratio >= 0.0 && warmup_ratio <= 1.0)) {
    throw ValidationError("warmup_ratio must lie in [0, 1]");
  }
}

std::vector<Benchmark> ScoreTable::columns() const {
  std::vector<Benchmark> cols;
  for (Benchmark b : kAllBenchmarks) {
    for (const auto& r : rows) {
      if (r.scores.contains(b)) {
        cols.push_back(b);
        break;
      }
    }
  }
  return cols;
}

const ScoreRow& ScoreTable::row(std::string_view label) const {
  for (const auto& r : rows) {
    if (r.label == label) return r;
  }
  throw ValidationError("no row labelled \"" + std::string(label) + "\"");
}

void ScoreTable::validate() const {
  if (rows.empty()) return;
  const auto& first = rows.front();
  for (const auto& r : rows) {
    if (r.scores.size() != first.scores.size() ||
        !std::equal(r.scores.begin(), r.scores.end(), first.scores.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw ValidationError("row \"" + r.label + "\" does not cover the same benchmark columns as \"" +
                            first.label + "\"");
    }
    for (const auto& [bench, value] : r.scores) {
      if (value && !(*value >= 0.0 && *value <= 100.0)) {
        throw ValidationError("row \"" + r.label + "\" score for " + std::string(to_string(bench)) +
                              " is outside [0, 100]");
      }
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      if (rows[i].label == rows[j].label) {
        throw ValidationError("duplicate row label \"" + rows[i].label + "\"");
      }
    }
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(Judgment v) { return kJudgmentNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Variant v) { return kVariantNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Benchmark v) { return kBenchmarkNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(StrategyKind v) { return kStrategyNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(LrSchedule v) { return kScheduleNames[static_cast<std::size_t>(v)]; }

Judgment judgment_from_string(std::string_view s) {
  return enum_from<Judgment>(s, kJudgmentNames, "judgment");
}
Variant variant_from_string(std::string_view s) {
  return enum_from<Variant>(s, kVariantNames, "variant");
}
Benchmark benchmark_from_string(std::string_view s) {
  return enum_from<Benchmark>(s, kBenchmarkNames, "benchmark");
}
StrategyKind strategy_kind_from_string(std::string_view s) {
  return enum_from<StrategyKind>(s, kStrategyNames, "kind");
}
LrSchedule schedule_from_string(std::string_view s) {
  return enum_from<LrSchedule>(s, kScheduleNames, "schedule");
}

// ---------------------------------------------------------------------------

Json to_json(const Sample& s) {
  Json j;
  j["id"] = s.id;
  j["question"] = s.question;
  j["response"] = s.response;
  j["source"] = s.source.tag();
  if (s.subject) j["subject"] = *s.subject;
  j["approx_token_len"] = s.approx_token_len;
  return j;
}

template <>
Sample from_json<Sample>(const Json& j) {
  Sample s;
  s.id = get_string(j, "id");
  s.question = get_string(j, "question");
  if (is_blank(s.question)) throw SchemaError("question", "must be nonempty");
  s.response = get_string(j, "response");
  s.source = SampleSource::parse(get_string(j, "source"));
  s.subject = get_optional_string(j, "subject");
  const auto len = get_integer(j, "approx_token_len");
  if (len < 0) throw SchemaError("approx_token_len", "must be nonnegative");
  s.approx_token_len = static_cast<std::size_t>(len);
  return s;
}

Json to_json(const CritiqueRecord& r) {
  Json j;
  j["sample_id"] = r.sample_id;
  j["teacher_model"] = r.teacher_model;
  j["prompt_fingerprint"] = r.prompt_fingerprint;
  j["critique_text"] = r.critique_text;
  j["judgment"] = to_string(r.judgment);
  j["created_at"] = r.created_at;
  return j;
}

template <>
CritiqueRecord from_json<CritiqueRecord>(const Json& j) {
  CritiqueRecord r;
  r.sample_id = get_string(j, "sample_id");
  r.teacher_model = get_string(j, "teacher_model");
  r.prompt_fingerprint = get_string(j, "prompt_fingerprint");
  r.critique_text = get_string(j, "critique_text");
  r.judgment = judgment_from_string(get_string(j, "judgment"));
  r.created_at = get_string(j, "created_at");
  return r;
}

Json to_json(const TrainingExample& e) {
  Json j;
  j["sample_id"] = e.sample_id();
  j["variant"] = to_string(e.variant());
  Json segs = Json::array();
  for (const auto& s : e.segments()) {
    Json seg;
    seg["text"] = s.text;
    seg["supervised"] = s.supervised;
    segs.push_back(std::move(seg));
  }
  j["segments"] = std::move(segs);
  return j;
}

template <>
TrainingExample from_json<TrainingExample>(const Json& j) {
  auto id = get_string(j, "sample_id");
  auto variant = variant_from_string(get_string(j, "variant"));
  const Json& segs = field(j, "segments");
  if (!segs.is_array()) throw SchemaError("segments", "expected array");
  std::vector<Segment> segments;
  for (const auto& s : segs) {
    segments.push_back({get_string(s, "text"), get_bool(s, "supervised")});
  }
  return rethrow_as_schema("segments", [&] {
    return TrainingExample(std::move(id), variant, std::move(segments));
  });
}

Json to_json(const BenchmarkItem& i) {
  Json j;
  j["id"] = i.id;
  j["benchmark"] = to_string(i.benchmark);
  j["question"] = i.question;
  j["gold_answer"] = i.gold_answer;
  return j;
}

template <>
BenchmarkItem from_json<BenchmarkItem>(const Json& j) {
  BenchmarkItem i;
  i.id = get_string(j, "id");
  i.benchmark = benchmark_from_string(get_string(j, "benchmark"));
  i.question = get_string(j, "question");
  i.gold_answer = get_string(j, "gold_answer");
  if (is_blank(i.gold_answer)) throw SchemaError("gold_answer", "must be nonempty");
  return i;
}

Json to_json(const InferenceStrategy& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  j["temperature"] = s.temperature;
  j["max_iterations"] = s.max_iterations;
  return j;
}

template <>
InferenceStrategy from_json<InferenceStrategy>(const Json& j) {
  InferenceStrategy s;
  s.kind = strategy_kind_from_string(get_string(j, "kind"));
  s.temperature = get_number(j, "temperature");
  s.max_iterations = static_cast<int>(get_integer(j, "max_iterations"));
  rethrow_as_schema("strategy", [&] { s.validate(); });
  return s;
}

Json to_json(const EvalRecord& r) {
  Json j;
  j["item_id"] = r.item_id;
  j["benchmark"] = to_string(r.benchmark);
  j["strategy"] = to_json(r.strategy);
  j["model"] = r.model;
  j["raw_output"] = r.raw_output;
  if (r.extracted_answer) j["extracted_answer"] = *r.extracted_answer;
  j["verdict"] = r.verdict;
  j["num_model_calls"] = r.num_model_calls;
  if (r.iterations_used) j["iterations_used"] = *r.iterations_used;
  if (r.error) j["error"] = *r.error;
  return j;
}

template <>
EvalRecord from_json<EvalRecord>(const Json& j) {
  EvalRecord r;
  r.item_id = get_string(j, "item_id");
  r.benchmark = benchmark_from_string(get_string(j, "benchmark"));
  r.strategy = from_json<InferenceStrategy>(field(j, "strategy"));
  r.model = get_string(j, "model");
  r.raw_output = get_string(j, "raw_output");
  r.extracted_answer = get_optional_string(j, "extracted_answer");
  r.verdict = get_bool(j, "verdict");
  r.num_model_calls = static_cast<int>(get_integer(j, "num_model_calls"));
  if (optional_field(j, "iterations_used")) {
    r.iterations_used = static_cast<int>(get_integer(j, "iterations_used"));
  }
  r.error = get_optional_string(j, "error");
  rethrow_as_schema("verdict", [&] { r.validate(); });
  return r;
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["learning_rate"] = c.learning_rate;
  j["schedule"] = to_string(c.schedule);
  j["warmup_ratio"] = c.warmup_ratio;
  j["global_batch_size"] = c.global_batch_size;
  j["epochs"] = c.epochs;
  j["validation_set"] = to_string(c.validation_set);
  return j;
}

template <>
TrainConfig from_json<TrainConfig>(const Json& j) {
  TrainConfig c;
  c.learning_rate = get_number(j, "learning_rate");
  c.schedule = schedule_from_string(get_string(j, "schedule"));
  c.warmup_ratio = get_number(j, "warmup_ratio");
  c.global_batch_size = static_cast<int>(get_integer(j, "global_batch_size"));
  c.epochs = static_cast<int>(get_integer(j, "epochs"));
  c.validation_set = benchmark_from_string(get_string(j, "validation_set"));
  rethrow_as_schema("learning_rate", [&] { c.validate(); });
  return c;
}

Json to_json(const ScoreTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json scores = Json::object();
    for (const auto& [bench, value] : r.scores) {
      scores[std::string(to_string(bench))] = value ? Json(*value) : Json(nullptr);
    }
    rows.push_back(Json{{"label", r.label}, {"scores", std::move(scores)}});
  }
  return Json{{"rows", std::move(rows)}};
}

template <>
ScoreTable from_json<ScoreTable>(const Json& j) {
  ScoreTable t;
  const Json& rows = field(j, "rows");
  if (!rows.is_array()) throw SchemaError("rows", "expected array");
  for (const auto& rj : rows) {
    ScoreRow r;
    r.label = get_string(rj, "label");
    const Json& scores = field(rj, "scores");
    if (!scores.is_object()) throw SchemaError("scores", "expected object");
    for (const auto& [key, value] : scores.items()) {
      const Benchmark b = benchmark_from_string(key);
      if (value.is_null() || (value.is_string() && value.get<std::string>() == "-")) {
        r.scores[b] = std::nullopt;
      } else if (value.is_number()) {
        r.scores[b] = value.get<double>();
      } else {
        throw SchemaError("scores", "cell " + key + " is neither a number nor null");
      }
    }
    t.rows.push_back(std::move(r));
  }
  rethrow_as_schema("rows", [&] { t.validate(); });
  return t;
}

std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace cftforge
