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

#include "cftforge/dataset_forge.hpp"

#include <algorithm>
#include <unordered_set>

#include "cftforge/errors.hpp"
#include "cftforge/prompts.hpp"
#include "cftforge/rng.hpp"

namespace cftforge::forge {
namespace {

using prompts::PromptKind;

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

void count(BuildReport& r, std::string_view reason) {
  auto it = r.excluded.find(reason);
  if (it == r.excluded.end()) {
    r.excluded.emplace(std::string(reason), 1);
  } else {
    ++it->second;
  }
}

// First critique per sample id, in file order.
std::unordered_map<std::string_view, const CritiqueRecord*> index_critiques(
    std::span<const CritiqueRecord> critiques) {
  std::unordered_map<std::string_view, const CritiqueRecord*> by_id;
  for (const auto& c : critiques) by_id.try_emplace(c.sample_id, &c);
  return by_id;
}

// Calls fn(sample) for each first-seen sample id, counting duplicates.
template <class Fn>
void for_each_unique(std::span<const Sample> samples, BuildReport& report, Fn&& fn) {
  std::unordered_set<std::string_view> seen;
  for (const auto& s : samples) {
    if (!seen.insert(s.id).second) {
      count(report, kDuplicateId);
      continue;
    }
    fn(s);
  }
}

void apply_size_cap(BuildReport& report, std::optional<std::size_t> size_cap) {
  if (!size_cap || report.examples.size() <= *size_cap) return;
  const std::size_t dropped = report.examples.size() - *size_cap;
  report.examples.erase(report.examples.begin() + static_cast<std::ptrdiff_t>(*size_cap),
                        report.examples.end());
  report.excluded[std::string(kSizeCap)] += dropped;
}

void warn_if_empty(BuildReport& report, std::string_view what) {
  if (report.examples.empty()) {
    report.warnings.push_back(std::string(what) + " produced no examples");
  }
}

TrainingExample sft_example(const Sample& s, Variant variant, std::string target) {
  return TrainingExample(s.id, variant,
                         {Segment{sft_prompt_segment(s.question), false}, Segment{std::move(target), true}});
}

TrainingExample cft_example(const Sample& s, Variant variant, const CritiqueRecord& c) {
  return TrainingExample(s.id, variant,
                         {Segment{cft_prompt_segment(s.question, s.response), false},
                          Segment{c.critique_text, true}});
}

BuildReport build_cft_impl(std::span<const Sample> samples, std::span<const CritiqueRecord> critiques,
                           Variant variant, critique::ParseOptions parse) {
  BuildReport report;
  const auto by_id = index_critiques(critiques);
  std::vector<Judgment> judgments;
  for_each_unique(samples, report, [&](const Sample& s) {
    if (is_blank(s.response)) return count(report, kEmptyResponse);
    const auto it = by_id.find(s.id);
    if (it == by_id.end()) return count(report, kMissingCritique);
    if (is_blank(it->second->critique_text)) return count(report, kMissingCritique);
    judgments.push_back(critique::parse_judgment(it->second->critique_text, parse).judgment);
    report.examples.push_back(cft_example(s, variant, *it->second));
  });
  report.judgment_stats = critique::judgment_stats(judgments);
  return report;
}

std::string_view order_name(MixSpec::Order o) {
  return o == MixSpec::Order::Mixed ? "Mixed" : "TwoStage";
}

}  // namespace

std::size_t BuildReport::excluded_count(std::string_view reason) const {
  const auto it = excluded.find(reason);
  return it == excluded.end() ? 0 : it->second;
}

Json BuildReport::metadata(Variant variant) const {
  Json j;
  j["variant"] = to_string(variant);
  j["rule_version"] = kRuleVersion;
  j["prompt_version"] = prompts::kTemplateVersion;
  j["selection_rule"] =
      "dedup by sample id (first wins); keep corpus order; filter; truncate to size_cap";
  j["examples"] = examples.size();
  Json ex = Json::object();
  for (const auto& [reason, n] : excluded) ex[reason] = n;
  j["excluded"] = std::move(ex);
  if (judgment_stats) j["judgments"] = judgment_stats->to_json();
  j["correct_rate"] = judgment_stats && judgment_stats->correct_rate
                          ? Json(*judgment_stats->correct_rate)
                          : Json(nullptr);
  if (token_budget) j["token_budget"] = *token_budget;
  j["warnings"] = warnings;
  return j;
}

Json MixResult::metadata(const MixSpec& spec) const {
  Json j;
  j["rule_version"] = kRuleVersion;
  j["order"] = order_name(spec.order);
  j["seed"] = spec.seed;
  j["count_a"] = spec.count_a;
  j["count_b"] = spec.count_b;
  j["examples"] = examples.size();
  j["stage_boundary"] = stage_boundary ? Json(*stage_boundary) : Json(nullptr);
  return j;
}

void BuildSpec::validate() const {
  if (token_budget && variant != Variant::CftShort) {
    throw UsageError("token_budget is only valid for the cft-short variant");
  }
  if (token_budget && *token_budget < 1) throw UsageError("token_budget must be >= 1");
  if (size_cap && *size_cap < 1) throw UsageError("size_cap must be >= 1");
}

std::string sft_prompt_segment(std::string_view question) {
  return prompts::render(PromptKind::DirectInference, question) + "\n";
}

std::string cft_prompt_segment(std::string_view question, std::string_view response) {
  return prompts::render(PromptKind::CritiqueTeacher, question, response) + "\n\n";
}

BuildReport build_sft(std::span<const Sample> samples, std::optional<std::size_t> size_cap) {
  BuildReport report;
  for_each_unique(samples, report, [&](const Sample& s) {
    if (is_blank(s.response)) return count(report, kEmptyResponse);
    report.examples.push_back(sft_example(s, Variant::Sft, s.response));
  });
  apply_size_cap(report, size_cap);
  if (report.excluded_count(kEmptyResponse) > 0) {
    report.warnings.push_back(std::to_string(report.excluded_count(kEmptyResponse)) +
                              " samples skipped for empty responses");
  }
  return report;
}

BuildReport build_verified_sft(std::span<const Sample> samples,
                               std::span<const CritiqueRecord> critiques,
                               std::optional<std::size_t> size_cap, critique::ParseOptions parse) {
  BuildReport report;
  const auto by_id = index_critiques(critiques);
  std::vector<Judgment> judgments;
  for_each_unique(samples, report, [&](const Sample& s) {
    if (is_blank(s.response)) return count(report, kEmptyResponse);
    const auto it = by_id.find(s.id);
    if (it == by_id.end()) return count(report, kMissingCritique);
    // The stored judgment is a cache; the critique text decides.
    const Judgment j = critique::parse_judgment(it->second->critique_text, parse).judgment;
    judgments.push_back(j);
    if (j == Judgment::Wrong) return count(report, kJudgedWrong);
    if (j == Judgment::Unknown) return count(report, kJudgedUnknown);
    report.examples.push_back(sft_example(s, Variant::VerifiedSft, s.response));
  });
  report.judgment_stats = critique::judgment_stats(judgments);
  apply_size_cap(report, size_cap);
  warn_if_empty(report, "verified-sft build");
  return report;
}

BuildReport build_teacher_sft(std::span<const Sample> samples,
                              const std::unordered_map<std::string, std::string>& teacher_answers,
                              std::optional<std::size_t> size_cap) {
  BuildReport report;
  for_each_unique(samples, report, [&](const Sample& s) {
    const auto it = teacher_answers.find(s.id);
    if (it == teacher_answers.end() || is_blank(it->second)) {
      return count(report, kMissingTeacherAnswer);
    }
    report.examples.push_back(sft_example(s, Variant::TeacherSft, it->second));
  });
  apply_size_cap(report, size_cap);
  warn_if_empty(report, "teacher-sft build");
  return report;
}

BuildReport build_cft(std::span<const Sample> samples, std::span<const CritiqueRecord> critiques,
                      std::optional<std::size_t> size_cap, critique::ParseOptions parse) {
  BuildReport report = build_cft_impl(samples, critiques, Variant::Cft, parse);
  apply_size_cap(report, size_cap);
  warn_if_empty(report, "cft build");
  return report;
}

std::size_t median_sft_length(std::span<const Sample> samples) {
  const BuildReport sft = build_sft(samples);
  if (sft.examples.empty()) return 0;
  std::vector<std::size_t> lengths;
  lengths.reserve(sft.examples.size());
  for (const auto& e : sft.examples) lengths.push_back(approx_token_count(e.text()));
  const auto mid = lengths.begin() + static_cast<std::ptrdiff_t>((lengths.size() - 1) / 2);
  std::nth_element(lengths.begin(), mid, lengths.end());
  return *mid;
}

BuildReport build_cft_short(std::span<const Sample> samples,
                            std::span<const CritiqueRecord> critiques,
                            std::optional<std::size_t> token_budget,
                            std::optional<std::size_t> size_cap, critique::ParseOptions parse) {
  const std::size_t budget = token_budget ? *token_budget : median_sft_length(samples);
  if (token_budget && *token_budget < 1) throw UsageError("token_budget must be >= 1");
  BuildReport report = build_cft_impl(samples, critiques, Variant::CftShort, parse);
  report.token_budget = budget;
  std::vector<TrainingExample> kept;
  kept.reserve(report.examples.size());
  for (auto& e : report.examples) {
    if (approx_token_count(e.text()) <= budget) {
      kept.push_back(std::move(e));
    } else {
      count(report, kOverTokenBudget);
    }
  }
  report.examples = std::move(kept);
  apply_size_cap(report, size_cap);
  warn_if_empty(report, "cft-short build (token budget " + std::to_string(budget) + ")");
  return report;
}

BuildReport build(const BuildSpec& spec, std::span<const Sample> samples,
                  std::span<const CritiqueRecord> critiques,
                  const std::unordered_map<std::string, std::string>& teacher_answers) {
  spec.validate();
  switch (spec.variant) {
    case Variant::Sft: return build_sft(samples, spec.size_cap);
    case Variant::VerifiedSft: return build_verified_sft(samples, critiques, spec.size_cap, spec.parse);
    case Variant::TeacherSft: return build_teacher_sft(samples, teacher_answers, spec.size_cap);
    case Variant::Cft: return build_cft(samples, critiques, spec.size_cap, spec.parse);
    case Variant::CftShort:
      return build_cft_short(samples, critiques, spec.token_budget, spec.size_cap, spec.parse);
  }
  throw UsageError("unknown variant");
}

MixResult mix_datasets(std::span<const TrainingExample> a, std::span<const TrainingExample> b,
                       const MixSpec& spec) {
  if (spec.count_a > a.size()) {
    throw ValidationError("mix count " + std::to_string(spec.count_a) + " exceeds first dataset size " +
                          std::to_string(a.size()));
  }
  if (spec.count_b > b.size()) {
    throw ValidationError("mix count " + std::to_string(spec.count_b) + " exceeds second dataset size " +
                          std::to_string(b.size()));
  }
  MixResult out;
  out.examples.reserve(spec.count_a + spec.count_b);
  out.examples.insert(out.examples.end(), a.begin(), a.begin() + static_cast<std::ptrdiff_t>(spec.count_a));
  out.examples.insert(out.examples.end(), b.begin(), b.begin() + static_cast<std::ptrdiff_t>(spec.count_b));
  if (spec.order == MixSpec::Order::Mixed) {
    StableRng rng(spec.seed);
    rng.shuffle(std::span<TrainingExample>(out.examples));
  } else {
    out.stage_boundary = spec.count_a;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

template <class MakeRequest>
std::vector<teacher::BatchItem> run_batch(std::span<const Sample> samples, teacher::ChatClient& client,
                                          const teacher::ProgressFn& progress, MakeRequest&& make) {
  std::vector<teacher::ChatRequest> reqs;
  reqs.reserve(samples.size());
  for (const auto& s : samples) reqs.push_back(make(s));
  return client.complete_batch(reqs, progress);
}

GenerationError to_generation_error(const teacher::BatchItem& item, const Sample& s) {
  return GenerationError{item.index, s.id, *item.error};
}

}  // namespace

CritiqueRun generate_critiques(std::span<const Sample> samples, teacher::ChatClient& client,
                               const GenerationOptions& options, const teacher::ProgressFn& progress) {
  auto results = run_batch(samples, client, progress, [&](const Sample& s) {
    teacher::ChatRequest r;
    r.user = prompts::render(PromptKind::CritiqueTeacher, s.question, s.response);
    r.temperature = options.temperature;
    r.max_output_tokens = options.max_output_tokens;
    return r;
  });
  CritiqueRun run;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& item = results[i];
    if (!item.ok()) {
      run.errors.push_back(to_generation_error(item, samples[i]));
      continue;
    }
    CritiqueRecord c;
    c.sample_id = samples[i].id;
    c.teacher_model = client.config().model;
    c.prompt_fingerprint =
        prompts::fingerprint(PromptKind::CritiqueTeacher, samples[i].question, samples[i].response);
    c.critique_text = item.response->content;
    c.judgment = critique::parse_judgment(c.critique_text, options.parse).judgment;
    c.created_at = item.response->fetched_at;
    run.critiques.push_back(std::move(c));
  }
  return run;
}

TeacherAnswerRun generate_teacher_answers(std::span<const Sample> samples, teacher::ChatClient& client,
                                          const GenerationOptions& options,
                                          const teacher::ProgressFn& progress) {
  auto results = run_batch(samples, client, progress, [&](const Sample& s) {
    teacher::ChatRequest r;
    r.user = prompts::render(PromptKind::ReferenceAnswer, s.question);
    r.temperature = options.temperature;
    r.max_output_tokens = options.max_output_tokens;
    return r;
  });
  TeacherAnswerRun run;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!results[i].ok()) {
      run.errors.push_back(to_generation_error(results[i], samples[i]));
      continue;
    }
    run.answers.emplace_back(samples[i].id, results[i].response->content);
  }
  return run;
}

NoisyResponseRun generate_noisy_responses(std::span<const Sample> questions,
                                          teacher::ChatClient& student,
                                          const GenerationOptions& options,
                                          const teacher::ProgressFn& progress) {
  auto results = run_batch(questions, student, progress, [&](const Sample& s) {
    teacher::ChatRequest r;
    r.user = prompts::render(PromptKind::DirectInference, s.question);
    r.temperature = options.temperature;
    r.max_output_tokens = options.max_output_tokens ? options.max_output_tokens : 4096;
    return r;
  });
  NoisyResponseRun run;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (!results[i].ok()) {
      run.errors.push_back(to_generation_error(results[i], questions[i]));
      continue;
    }
    run.samples.push_back(make_sample(questions[i].question, results[i].response->content,
                                      SampleSource{SourceKind::SelfGenerated, {}},
                                      questions[i].subject));
  }
  return run;
}

// ---------------------------------------------------------------------------

Json EmittedTrainConfig::to_json() const {
  Json j = cftforge::to_json(config);
  j["overridden"] = overridden;
  return j;
}

EmittedTrainConfig EmittedTrainConfig::from_json(const Json& j) {
  EmittedTrainConfig e;
  e.config = cftforge::from_json<TrainConfig>(j);
  if (auto it = j.find("overridden"); it != j.end()) {
    if (!it->is_array()) throw SchemaError("overridden", "expected array");
    for (const auto& v : *it) {
      if (!v.is_string()) throw SchemaError("overridden", "expected array of strings");
      e.overridden.push_back(v.get<std::string>());
    }
  }
  return e;
}

EmittedTrainConfig emit_train_config(const TrainConfigOverrides& o) {
  EmittedTrainConfig e;
  if (o.learning_rate) {
    e.config.learning_rate = *o.learning_rate;
    e.overridden.emplace_back("learning_rate");
  }
  if (o.warmup_ratio) {
    e.config.warmup_ratio = *o.warmup_ratio;
    e.overridden.emplace_back("warmup_ratio");
  }
  if (o.global_batch_size) {
    e.config.global_batch_size = *o.global_batch_size;
    e.overridden.emplace_back("global_batch_size");
  }
  if (o.epochs) {
    e.config.epochs = *o.epochs;
    e.overridden.emplace_back("epochs");
  }
  if (o.validation_set) {
    e.config.validation_set = *o.validation_set;
    e.overridden.emplace_back("validation_set");
  }
  e.config.validate();
  return e;
}

}  // namespace cftforge::forge
