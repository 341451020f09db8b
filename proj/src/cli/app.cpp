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

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "cftforge/answer_verify.hpp"
#include "cftforge/cli.hpp"
#include "cftforge/critique_parse.hpp"
#include "cftforge/csv.hpp"
#include "cftforge/dataset_forge.hpp"
#include "cftforge/errors.hpp"
#include "cftforge/hashing.hpp"
#include "cftforge/infer_eval.hpp"
#include "cftforge/jsonl.hpp"
#include "cftforge/prompts.hpp"
#include "cftforge/report.hpp"
#include "cftforge/rng.hpp"

namespace cftforge::cli {
namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Shared plumbing

struct GlobalFlags {
  std::string config;
  std::string cache_dir;
  std::string log_format = "text";
  std::string log_level;
};

struct EndpointFlags {
  std::string profile;
  std::string base_url;
  std::string model;
  int max_parallel = 0;
};

void add_endpoint_flags(CLI::App* cmd, EndpointFlags& f, const std::string& default_profile) {
  f.profile = default_profile;
  cmd->add_option("--endpoint", f.profile, "Endpoint profile name from --config")
      ->capture_default_str();
  cmd->add_option("--base-url", f.base_url, "Override the profile's base URL");
  cmd->add_option("--model", f.model, "Override the profile's model");
  cmd->add_option("--max-parallel", f.max_parallel, "Override the profile's parallelism bound");
}

teacher::EndpointConfig resolve_endpoint(const GlobalConfig& cfg, const EndpointFlags& f) {
  teacher::EndpointConfig e;
  if (const auto it = cfg.endpoints.find(f.profile); it != cfg.endpoints.end()) {
    e = it->second;
  } else if (f.base_url.empty() || f.model.empty()) {
    (void)cfg.endpoint(f.profile);  // throws the usage error
  }
  if (!f.base_url.empty()) e.base_url = f.base_url;
  if (!f.model.empty()) e.model = f.model;
  if (f.max_parallel > 0) e.max_parallel = f.max_parallel;
  e.validate();
  return e;
}

class Runner {
 public:
  Runner(const Environment& env, GlobalConfig cfg, std::vector<std::string> argv)
      : env_(env), cfg_(std::move(cfg)), argv_(std::move(argv)) {}

  std::ostream& out() const { return env_.out ? *env_.out : std::cout; }
  const GlobalConfig& config() const { return cfg_; }
  const std::vector<std::string>& argv() const { return argv_; }

  std::unique_ptr<teacher::ChatClient> client(const teacher::EndpointConfig& e) {
    if (!cache_) cache_ = std::make_shared<teacher::ResponseCache>(cfg_.cache_dir / "responses");
    std::shared_ptr<teacher::ChatTransport> transport =
        env_.transport ? env_.transport(e) : std::make_shared<teacher::HttpTransport>(e);
    teacher::SleepFn sleep = env_.sleep;
    if (!sleep) sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    return std::make_unique<teacher::ChatClient>(e, std::move(transport), cache_, std::move(sleep));
  }

 private:
  const Environment& env_;
  GlobalConfig cfg_;
  std::vector<std::string> argv_;
  std::shared_ptr<teacher::ResponseCache> cache_;
};

// Everything needed to re-execute a run, minus wall-clock time.
class Manifest {
 public:
  Manifest(std::string command, const Runner& r) {
    j_["tool"] = "cft-forge";
    j_["tool_version"] = kToolVersion;
    j_["command"] = std::move(command);
    j_["argv"] = r.argv();
    j_["prompt_version"] = prompts::kTemplateVersion;
    j_["rule_version"] = forge::kRuleVersion;
    j_["inputs"] = Json::array();
    j_["outputs"] = Json::array();
    j_["params"] = Json::object();
    j_["counts"] = Json::object();
  }

  void input(const fs::path& p) { j_["inputs"].push_back(file_entry(p)); }
  Json& params() { return j_["params"]; }
  Json& counts() { return j_["counts"]; }
  void endpoint(const teacher::EndpointConfig& e) { j_["endpoint"] = e.to_json(); }

  // Hashes every output, then writes <primary>.manifest.json.
  void write(const fs::path& primary, const std::vector<fs::path>& extra_outputs = {}) {
    j_["outputs"].push_back(file_entry(primary));
    for (const auto& p : extra_outputs) j_["outputs"].push_back(file_entry(p));
    const fs::path path = primary.string() + ".manifest.json";
    write_json_file(path, j_);
    spdlog::info("wrote manifest {}", path.string());
  }

 private:
  static Json file_entry(const fs::path& p) {
    return Json{{"path", p.string()}, {"sha256", sha256_file_hex(p)}};
  }
  Json j_;
};

teacher::ProgressFn progress_logger(std::string what) {
  return [what = std::move(what)](std::size_t done, std::size_t total) {
    const std::size_t step = std::max<std::size_t>(1, total / 10);
    if (done == total || done % step == 0) spdlog::info("{}: {}/{}", what, done, total);
  };
}

fs::path sidecar(const fs::path& out, std::string_view suffix) {
  return fs::path(out.string() + std::string(suffix));
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// 0 when every failure is absent, otherwise the exit code for the worst one.
int exit_code_for(const std::vector<teacher::CallError>& errors) {
  int code = kExitOk;
  for (const auto& e : errors) {
    if (e.kind == teacher::CallErrorKind::Transport) return kExitTransport;
    code = kExitValidation;
  }
  return code;
}

std::vector<teacher::CallError> call_errors(std::span<const forge::GenerationError> errors) {
  std::vector<teacher::CallError> out;
  for (const auto& e : errors) {
    spdlog::warn("sample {} failed: {}", e.sample_id, e.error.message);
    out.push_back(e.error);
  }
  return out;
}

Json errors_json(std::span<const forge::GenerationError> errors) {
  Json arr = Json::array();
  for (const auto& e : errors) {
    arr.push_back(Json{{"index", e.index}, {"sample_id", e.sample_id}, {"status", e.error.status},
                       {"message", e.error.message}});
  }
  return arr;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestFlags {
  std::string in, out, format = "auto", source = "WebInstruct";
  std::vector<std::string> maps;
  std::optional<std::size_t> count;
  std::optional<std::uint64_t> seed;
};

using RawRow = std::map<std::string, std::string, std::less<>>;

std::vector<RawRow> read_raw_rows(const fs::path& path, std::string format) {
  if (format == "auto") {
    const auto ext = path.extension().string();
    format = ext == ".csv" ? "csv" : "jsonl";
  }
  std::vector<RawRow> rows;
  if (format == "csv") {
    const auto records = csv::parse(read_text(path));
    if (records.empty()) return rows;
    const auto& header = records.front();
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].size() != header.size()) {
        throw ValidationError(path.string() + ": csv record " + std::to_string(i) + " has " +
                              std::to_string(records[i].size()) + " fields, header has " +
                              std::to_string(header.size()));
      }
      RawRow row;
      for (std::size_t k = 0; k < header.size(); ++k) row[header[k]] = records[i][k];
      rows.push_back(std::move(row));
    }
  } else if (format == "jsonl") {
    for (const auto& v : read_jsonl_values(path)) {
      if (!v.is_object()) throw ValidationError(path.string() + ": expected JSON objects");
      RawRow row;
      for (const auto& [k, val] : v.items()) {
        if (val.is_null()) continue;
        row[k] = val.is_string() ? val.get<std::string>() : dump_line(val);
      }
      rows.push_back(std::move(row));
    }
  } else {
    throw UsageError("unknown --format \"" + format + "\" (expected auto, csv or jsonl)");
  }
  return rows;
}

int cmd_ingest(Runner& r, const IngestFlags& f) {
  std::map<std::string, std::string> columns{
      {"question", "question"}, {"response", "response"}, {"subject", "subject"}};
  for (const auto& m : f.maps) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) throw UsageError("--map expects FIELD=COLUMN, got \"" + m + "\"");
    const auto field = m.substr(0, eq);
    if (!columns.contains(field)) {
      throw UsageError("--map field must be question, response or subject, got \"" + field + "\"");
    }
    columns[field] = m.substr(eq + 1);
  }
  const SampleSource source = SampleSource::parse(f.source);
  const auto rows = read_raw_rows(f.in, f.format);

  std::vector<Sample> samples;
  std::unordered_set<std::string> seen;
  std::size_t blank_questions = 0, duplicates = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const auto q = row.find(columns["question"]);
    if (q == row.end()) throw SchemaError(columns["question"], "missing in input row " + std::to_string(i + 1));
    const auto a = row.find(columns["response"]);
    if (a == row.end()) throw SchemaError(columns["response"], "missing in input row " + std::to_string(i + 1));
    std::optional<std::string> subject;
    if (const auto s = row.find(columns["subject"]); s != row.end() && !s->second.empty()) subject = s->second;
    if (q->second.find_first_not_of(" \t\r\n") == std::string::npos) {
      ++blank_questions;
      continue;
    }
    Sample s = make_sample(q->second, a->second, source, subject);
    if (!seen.insert(s.id).second) {
      ++duplicates;
      continue;
    }
    samples.push_back(std::move(s));
  }
  if (blank_questions) spdlog::warn("skipped {} rows with a blank question", blank_questions);
  if (duplicates) spdlog::info("dropped {} duplicate rows", duplicates);

  const std::uint64_t seed = f.seed.value_or(r.config().seed);
  std::vector<Sample> selected;
  if (f.count && *f.count < samples.size()) {
    StableRng rng(seed);
    for (const auto i : rng.sample_indices(samples.size(), *f.count)) selected.push_back(samples[i]);
  } else {
    if (f.count) {
      spdlog::warn("--count {} exceeds the {} available samples; keeping all", *f.count, samples.size());
    }
    selected = std::move(samples);
  }
  write_jsonl(f.out, selected);
  spdlog::info("wrote {} samples to {}", selected.size(), f.out);

  Manifest m("ingest", r);
  m.input(f.in);
  m.params() = Json{{"seed", seed},
                    {"count", f.count ? Json(*f.count) : Json(nullptr)},
                    {"source", source.tag()},
                    {"columns", columns},
                    {"sampling", "uniform without replacement, kept in corpus order"}};
  m.counts() = Json{{"rows", rows.size()},
                    {"blank_questions", blank_questions},
                    {"duplicates", duplicates},
                    {"samples", selected.size()}};
  m.write(f.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// critique / gen-responses

struct GenerateFlags {
  std::string in, out, kind = "critique";
  EndpointFlags endpoint;
  double temperature = 0.0;
  std::optional<int> max_tokens;
  bool strict = false;
};

std::vector<Sample> read_question_rows(const fs::path& path) {
  std::vector<Sample> out;
  std::size_t n = 0;
  for (const auto& v : read_jsonl_values(path)) {
    ++n;
    const auto q = v.find("question");
    if (q == v.end() || !q->is_string()) {
      throw SchemaError("question", "missing in " + path.string() + " record " + std::to_string(n));
    }
    Sample s;
    s.question = q->get<std::string>();
    if (const auto sub = v.find("subject"); sub != v.end() && sub->is_string()) {
      s.subject = sub->get<std::string>();
    }
    s.id = v.value("id", std::string());
    out.push_back(std::move(s));
  }
  return out;
}

int cmd_critique(Runner& r, const GenerateFlags& f) {
  if (f.kind != "critique" && f.kind != "answer") {
    throw UsageError("--kind must be critique or answer, got \"" + f.kind + "\"");
  }
  const auto endpoint = resolve_endpoint(r.config(), f.endpoint);
  const auto samples = read_jsonl<Sample>(f.in);
  auto client = r.client(endpoint);
  forge::GenerationOptions opts;
  opts.temperature = f.temperature;
  opts.max_output_tokens = f.max_tokens;
  opts.parse.strict = f.strict;

  Manifest m("critique", r);
  m.input(f.in);
  m.endpoint(endpoint);
  m.params() = Json{{"kind", f.kind}, {"temperature", f.temperature}, {"strict", f.strict}};

  std::vector<teacher::CallError> errors;
  if (f.kind == "critique") {
    auto run = forge::generate_critiques(samples, *client, opts, progress_logger("critique"));
    write_jsonl(f.out, run.critiques);
    const auto stats = critique::judgment_stats(run.critiques, opts.parse);
    spdlog::info("wrote {} critiques; {} failed", run.critiques.size(), run.errors.size());
    m.counts() = Json{{"samples", samples.size()},
                      {"critiques", run.critiques.size()},
                      {"failed", run.errors.size()},
                      {"judgments", stats.to_json()}};
    spdlog::info("network calls: {} (cache hits are free)", client->network_calls());
    m.params()["errors"] = errors_json(run.errors);
    errors = call_errors(run.errors);
  } else {
    auto run = forge::generate_teacher_answers(samples, *client, opts, progress_logger("answer"));
    std::vector<Json> rows;
    for (const auto& [id, text] : run.answers) {
      rows.push_back(Json{{"sample_id", id}, {"teacher_model", endpoint.model}, {"answer", text}});
    }
    write_jsonl_values(f.out, rows);
    m.counts() = Json{{"samples", samples.size()},
                      {"answers", rows.size()},
                      {"failed", run.errors.size()}};
    spdlog::info("network calls: {} (cache hits are free)", client->network_calls());
    m.params()["errors"] = errors_json(run.errors);
    errors = call_errors(run.errors);
  }
  m.write(f.out);
  return exit_code_for(errors);
}

int cmd_gen_responses(Runner& r, const GenerateFlags& f) {
  const auto endpoint = resolve_endpoint(r.config(), f.endpoint);
  const auto questions = read_question_rows(f.in);
  auto client = r.client(endpoint);
  forge::GenerationOptions opts;
  opts.temperature = f.temperature;
  opts.max_output_tokens = f.max_tokens;
  auto run = forge::generate_noisy_responses(questions, *client, opts, progress_logger("gen-responses"));

  std::vector<Sample> unique;
  std::unordered_set<std::string> seen;
  for (auto& s : run.samples) {
    if (seen.insert(s.id).second) unique.push_back(std::move(s));
  }
  write_jsonl(f.out, unique);
  spdlog::info("wrote {} self-generated samples; {} failed", unique.size(), run.errors.size());

  Manifest m("gen-responses", r);
  m.input(f.in);
  m.endpoint(endpoint);
  m.params() = Json{{"temperature", f.temperature}, {"errors", errors_json(run.errors)}};
  m.counts() = Json{{"questions", questions.size()},
                    {"samples", unique.size()},
                    {"failed", run.errors.size()}};
  spdlog::info("network calls: {} (cache hits are free)", client->network_calls());
  m.write(f.out);
  return exit_code_for(call_errors(run.errors));
}

// ---------------------------------------------------------------------------
// parse-critiques

struct ParseFlags {
  std::string in, out;
  bool strict = false;
};

int cmd_parse_critiques(Runner& r, const ParseFlags& f) {
  auto records = read_jsonl<CritiqueRecord>(f.in);
  const critique::ParseOptions opts{f.strict};
  std::size_t changed = 0;
  for (auto& rec : records) {
    auto fresh = critique::reparse(rec, opts);
    if (fresh.judgment != rec.judgment) ++changed;
    rec = std::move(fresh);
  }
  const auto stats = critique::judgment_stats(records, opts);
  Json summary = stats.to_json();
  summary["records"] = records.size();
  summary["judgments_changed"] = changed;
  r.out() << summary.dump(2) << "\n";
  if (!f.out.empty()) {
    write_jsonl(f.out, records);
    Manifest m("parse-critiques", r);
    m.input(f.in);
    m.params() = Json{{"strict", f.strict}};
    m.counts() = summary;
    m.write(f.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// build

struct BuildFlags {
  std::string variant, in, critiques, teacher_answers, out;
  std::optional<std::size_t> size_cap, token_budget;
  bool strict = false;
};

Variant variant_from_cli(std::string_view name) {
  if (name == "sft") return Variant::Sft;
  if (name == "verified") return Variant::VerifiedSft;
  if (name == "teacher") return Variant::TeacherSft;
  if (name == "cft") return Variant::Cft;
  if (name == "cft-short") return Variant::CftShort;
  throw UsageError("unknown --variant \"" + std::string(name) +
                   "\" (expected sft, verified, teacher, cft or cft-short)");
}

std::unordered_map<std::string, std::string> read_teacher_answers(const fs::path& path) {
  std::unordered_map<std::string, std::string> out;
  std::size_t n = 0;
  for (const auto& v : read_jsonl_values(path)) {
    ++n;
    const auto id = v.find("sample_id");
    const auto ans = v.find("answer");
    if (id == v.end() || !id->is_string()) throw SchemaError("sample_id", "record " + std::to_string(n));
    if (ans == v.end() || !ans->is_string()) throw SchemaError("answer", "record " + std::to_string(n));
    out.try_emplace(id->get<std::string>(), ans->get<std::string>());
  }
  return out;
}

int cmd_build(Runner& r, const BuildFlags& f) {
  forge::BuildSpec spec;
  spec.variant = variant_from_cli(f.variant);
  spec.size_cap = f.size_cap;
  spec.token_budget = f.token_budget;
  spec.parse.strict = f.strict;
  spec.validate();
  const bool needs_critiques = spec.variant == Variant::VerifiedSft || spec.variant == Variant::Cft ||
                               spec.variant == Variant::CftShort;
  if (needs_critiques && f.critiques.empty()) {
    throw UsageError("--variant " + f.variant + " requires --critiques");
  }
  if (spec.variant == Variant::TeacherSft && f.teacher_answers.empty()) {
    throw UsageError("--variant teacher requires --teacher-answers");
  }

  Manifest m("build", r);
  const auto samples = read_jsonl<Sample>(f.in);
  m.input(f.in);
  std::vector<CritiqueRecord> critiques;
  if (!f.critiques.empty()) {
    critiques = read_jsonl<CritiqueRecord>(f.critiques);
    m.input(f.critiques);
  }
  std::unordered_map<std::string, std::string> answers;
  if (!f.teacher_answers.empty()) {
    answers = read_teacher_answers(f.teacher_answers);
    m.input(f.teacher_answers);
  }

  const auto report = forge::build(spec, samples, critiques, answers);
  for (const auto& w : report.warnings) spdlog::warn("{}", w);
  write_jsonl(f.out, report.examples);
  Json meta = report.metadata(spec.variant);
  meta["seed"] = r.config().seed;
  meta["size_cap"] = f.size_cap ? Json(*f.size_cap) : Json(nullptr);
  const auto meta_path = sidecar(f.out, ".meta.json");
  write_json_file(meta_path, meta);
  spdlog::info("wrote {} {} examples to {}", report.examples.size(), to_string(spec.variant), f.out);

  m.params() = Json{{"variant", to_string(spec.variant)},
                    {"size_cap", f.size_cap ? Json(*f.size_cap) : Json(nullptr)},
                    {"token_budget", report.token_budget ? Json(*report.token_budget) : Json(nullptr)},
                    {"strict", f.strict}};
  m.counts() = Json{{"samples", samples.size()},
                    {"critiques", critiques.size()},
                    {"examples", report.examples.size()}};
  m.write(f.out, {meta_path});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// mix

struct MixFlags {
  std::string a, b, out, order = "mixed";
  std::optional<std::size_t> count_a, count_b;
  std::optional<std::uint64_t> seed;
};

int cmd_mix(Runner& r, const MixFlags& f) {
  const auto a = read_jsonl<TrainingExample>(f.a);
  const auto b = read_jsonl<TrainingExample>(f.b);
  forge::MixSpec spec;
  spec.count_a = f.count_a.value_or(a.size());
  spec.count_b = f.count_b.value_or(b.size());
  spec.seed = f.seed.value_or(r.config().seed);
  if (f.order == "mixed") {
    spec.order = forge::MixSpec::Order::Mixed;
  } else if (f.order == "two-stage") {
    spec.order = forge::MixSpec::Order::TwoStage;
  } else {
    throw UsageError("--order must be mixed or two-stage, got \"" + f.order + "\"");
  }
  const auto result = forge::mix_datasets(a, b, spec);
  write_jsonl(f.out, result.examples);
  const auto meta_path = sidecar(f.out, ".meta.json");
  write_json_file(meta_path, result.metadata(spec));

  Manifest m("mix", r);
  m.input(f.a);
  m.input(f.b);
  m.params() = result.metadata(spec);
  m.counts() = Json{{"examples", result.examples.size()}};
  m.write(f.out, {meta_path});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// emit-config

struct EmitFlags {
  std::string out;
  forge::TrainConfigOverrides overrides;
  std::string validation_set;
};

int cmd_emit_config(Runner& r, EmitFlags f) {
  if (!f.validation_set.empty()) f.overrides.validation_set = benchmark_from_string(f.validation_set);
  const auto emitted = forge::emit_train_config(f.overrides);
  write_json_file(f.out, emitted.to_json());
  Manifest m("emit-config", r);
  m.params() = Json{{"overridden", emitted.overridden}};
  m.write(f.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval / verify

struct EvalFlags {
  std::string items, out, strategy = "direct", label;
  std::optional<double> temperature, critique_temperature;
  int max_iters = 8;
  int solve_max_tokens = eval::kSolveMaxTokens;
  int critique_max_tokens = eval::kCritiqueMaxTokens;
  std::vector<std::string> benchmarks;
  EndpointFlags endpoint;
};

StrategyKind strategy_from_cli(std::string_view name) {
  if (name == "direct") return StrategyKind::Direct;
  if (name == "single-pass") return StrategyKind::SinglePassSelfCritique;
  if (name == "two-stage") return StrategyKind::TwoStageSelfCritique;
  throw UsageError("unknown --strategy \"" + std::string(name) +
                   "\" (expected direct, single-pass or two-stage)");
}

Json scores_json(const std::map<Benchmark, verify::ScoreEntry>& scores) {
  Json j = Json::object();
  for (const auto& [b, e] : scores) {
    j[std::string(to_string(b))] = Json{{"correct", e.correct}, {"total", e.total}, {"accuracy", e.accuracy}};
  }
  return j;
}

ScoreTable score_table(std::string label, const std::map<Benchmark, verify::ScoreEntry>& scores) {
  ScoreRow row;
  row.label = std::move(label);
  for (const auto& [b, e] : scores) row.scores[b] = e.accuracy;
  return ScoreTable{{std::move(row)}};
}

int cmd_eval(Runner& r, const EvalFlags& f) {
  InferenceStrategy strategy = InferenceStrategy::defaults(strategy_from_cli(f.strategy));
  if (f.temperature) strategy.temperature = *f.temperature;
  strategy.max_iterations = f.max_iters;
  strategy.validate();
  eval::EvalOptions opts;
  opts.solve_max_tokens = f.solve_max_tokens;
  opts.critique_max_tokens = f.critique_max_tokens;
  opts.critique_temperature = f.critique_temperature;

  std::set<Benchmark> filter;
  for (const auto& b : f.benchmarks) filter.insert(benchmark_from_string(b));
  std::vector<BenchmarkItem> items;
  for (auto& item : read_jsonl<BenchmarkItem>(f.items)) {
    if (filter.empty() || filter.contains(item.benchmark)) items.push_back(std::move(item));
  }

  const auto endpoint = resolve_endpoint(r.config(), f.endpoint);
  auto client = r.client(endpoint);
  const auto result = eval::run_suite(items, *client, strategy, opts, progress_logger("eval"));
  write_jsonl(f.out, result.records);

  const std::string label = f.label.empty() ? endpoint.model : f.label;
  const auto scores_path = sidecar(f.out, ".scores.json");
  write_json_file(scores_path, to_json(score_table(label, result.scores)));
  r.out() << scores_json(result.scores).dump(2) << "\n";

  bool transport_failure = false;
  for (const auto& rec : result.records) {
    if (rec.error) {
      spdlog::warn("item {} failed: {}", rec.item_id, *rec.error);
      transport_failure = transport_failure || rec.error->starts_with("transport");
    }
  }

  Manifest m("eval", r);
  m.input(f.items);
  m.endpoint(endpoint);
  m.params() = Json{{"strategy", to_json(strategy)},
                    {"critique_temperature",
                     f.critique_temperature ? Json(*f.critique_temperature) : Json(nullptr)},
                    {"solve_max_tokens", f.solve_max_tokens},
                    {"critique_max_tokens", f.critique_max_tokens},
                    {"benchmarks", f.benchmarks},
                    {"label", label}};
  m.counts() = Json{{"items", items.size()},
                    {"failed_items", result.failed_items},
                    {"scores", scores_json(result.scores)}};
  spdlog::info("network calls: {} (cache hits are free)", client->network_calls());
  m.write(f.out, {scores_path});
  if (transport_failure) return kExitTransport;
  return result.failed_items ? kExitValidation : kExitOk;
}

struct VerifyFlags {
  std::string pred, gold, out;
};

int cmd_verify(Runner& r, const VerifyFlags& f) {
  const auto records = read_jsonl<EvalRecord>(f.pred);
  std::unordered_map<std::string, BenchmarkItem> gold;
  for (auto& item : read_jsonl<BenchmarkItem>(f.gold)) gold.try_emplace(item.id, std::move(item));

  std::vector<EvalRecord> rescored;
  std::size_t flipped = 0;
  for (const auto& rec : records) {
    const auto it = gold.find(rec.item_id);
    if (it == gold.end()) throw ValidationError("no gold item for \"" + rec.item_id + "\"");
    auto fresh = eval::rescore(rec, it->second);
    if (fresh.verdict != rec.verdict) ++flipped;
    rescored.push_back(std::move(fresh));
  }
  const auto scores = verify::score(rescored);
  const fs::path out = f.out.empty() ? fs::path(f.pred) : fs::path(f.out);
  write_jsonl(out, rescored);
  r.out() << scores_json(scores).dump(2) << "\n";
  if (flipped) spdlog::warn("{} verdicts changed on rescoring", flipped);

  Manifest m("verify", r);
  m.input(f.gold);
  m.counts() = Json{{"records", rescored.size()}, {"verdicts_changed", flipped}, {"scores", scores_json(scores)}};
  m.write(out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportFlags {
  std::vector<std::string> scores;
  std::string compare, against, format = "markdown", out;
};

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = std::min(s.find(',', start), s.size());
    if (end > start) out.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

ScoreTable read_score_file(const fs::path& path) {
  if (path.extension() == ".csv") return report::parse_csv_table(read_text(path));
  return from_json<ScoreTable>(read_json_file(path));
}

int cmd_report(Runner& r, const ReportFlags& f) {
  ScoreTable table;
  for (const auto& p : f.scores) {
    auto part = read_score_file(p);
    for (auto& row : part.rows) table.rows.push_back(std::move(row));
  }
  table.validate();

  std::optional<report::DeltaRow> delta;
  if (!f.compare.empty() || !f.against.empty()) {
    if (f.compare.empty() || f.against.empty()) throw UsageError("--compare and --against go together");
    report::ComparisonSpec spec;
    spec.table = table;
    spec.cft_row_label = f.compare.starts_with("cft:") ? f.compare.substr(4) : f.compare;
    spec.sft_row_labels = split_commas(f.against);
    delta = report::delta_row(spec);
  }
  const auto text = report::render_table(table, report::table_format_from_string(f.format), delta);
  if (f.out.empty()) {
    r.out() << text;
    return kExitOk;
  }
  write_text(f.out, text);
  Manifest m("report", r);
  for (const auto& p : f.scores) m.input(p);
  m.params() = Json{{"format", f.format}, {"compare", f.compare}, {"against", f.against}};
  m.counts() = Json{{"rows", table.rows.size()}, {"columns", table.columns().size()}};
  m.write(f.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// dump-prompts

struct DumpFlags {
  std::string kind, out;
};

int cmd_dump_prompts(Runner& r, const DumpFlags& f) {
  std::string text;
  for (const auto kind : prompts::kAllKinds) {
    if (!f.kind.empty() && prompts::kind_name(kind) != f.kind) continue;
    text += "### ";
    text += prompts::kind_name(kind);
    text += "\n";
    text += prompts::template_text(kind);
    text += "\n\n";
  }
  if (!f.kind.empty() && text.empty()) (void)prompts::kind_from_name(f.kind);  // throws
  if (f.out.empty()) {
    r.out() << text;
    return kExitOk;
  }
  write_text(f.out, text);
  Manifest m("dump-prompts", r);
  m.write(f.out);
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, const Environment& env) {
  std::ostream& out = env.out ? *env.out : std::cout;
  std::ostream& err = env.err ? *env.err : std::cerr;

  CLI::App app{"Critique fine-tuning dataset builder and math evaluation harness", "cft-forge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  GlobalFlags g;
  app.add_option("--config", g.config, "YAML configuration file")->check(CLI::ExistingFile);
  app.add_option("--cache-dir", g.cache_dir, "Response cache directory (overrides config)");
  app.add_option("--log", g.log_format, "Log format: text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");

  std::function<int(Runner&)> action;

  IngestFlags ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Import a csv/jsonl corpus into samples.jsonl");
  c_ingest->add_option("--in", ingest.in, "Raw csv or jsonl file")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out, "samples.jsonl")->required();
  c_ingest->add_option("--format", ingest.format, "auto, csv or jsonl")->capture_default_str();
  c_ingest->add_option("--map", ingest.maps, "FIELD=COLUMN for question, response, subject");
  c_ingest->add_option("--source", ingest.source, "Source tag, or Other:<name>")->capture_default_str();
  c_ingest->add_option("--count", ingest.count, "Sample this many rows");
  c_ingest->add_option("--seed", ingest.seed, "Sampling seed (default: config seed)");
  c_ingest->callback([&] { action = [&](Runner& r) { return cmd_ingest(r, ingest); }; });

  GenerateFlags crit;
  auto* c_crit = app.add_subcommand("critique", "Request teacher critiques (or reference answers)");
  c_crit->add_option("--in", crit.in, "samples.jsonl")->required()->check(CLI::ExistingFile);
  c_crit->add_option("--out", crit.out, "critiques.jsonl (or answers.jsonl)")->required();
  c_crit->add_option("--kind", crit.kind, "critique or answer")->capture_default_str();
  c_crit->add_option("--temperature", crit.temperature)->capture_default_str();
  c_crit->add_option("--max-tokens", crit.max_tokens);
  c_crit->add_flag("--strict", crit.strict, "Require [END] after the conclusion");
  add_endpoint_flags(c_crit, crit.endpoint, "teacher");
  c_crit->callback([&] { action = [&](Runner& r) { return cmd_critique(r, crit); }; });

  GenerateFlags gen;
  auto* c_gen = app.add_subcommand("gen-responses", "Generate self-generated noisy responses");
  c_gen->add_option("--in", gen.in, "jsonl with a question field")->required()->check(CLI::ExistingFile);
  c_gen->add_option("--out", gen.out, "samples.jsonl")->required();
  c_gen->add_option("--temperature", gen.temperature)->capture_default_str();
  c_gen->add_option("--max-tokens", gen.max_tokens);
  add_endpoint_flags(c_gen, gen.endpoint, "student");
  c_gen->callback([&] { action = [&](Runner& r) { return cmd_gen_responses(r, gen); }; });

  ParseFlags parse;
  auto* c_parse = app.add_subcommand("parse-critiques", "Re-parse judgments and print statistics");
  c_parse->add_option("--in", parse.in, "critiques.jsonl")->required()->check(CLI::ExistingFile);
  c_parse->add_option("--out", parse.out, "Write critiques with refreshed judgments");
  c_parse->add_flag("--strict", parse.strict, "Require [END] after the conclusion");
  c_parse->callback([&] { action = [&](Runner& r) { return cmd_parse_critiques(r, parse); }; });

  BuildFlags build;
  auto* c_build = app.add_subcommand("build", "Build a training set");
  c_build->add_option("--variant", build.variant, "sft, verified, teacher, cft or cft-short")->required();
  c_build->add_option("--in", build.in, "samples.jsonl")->required()->check(CLI::ExistingFile);
  c_build->add_option("--critiques", build.critiques, "critiques.jsonl")->check(CLI::ExistingFile);
  c_build->add_option("--teacher-answers", build.teacher_answers, "answers.jsonl")->check(CLI::ExistingFile);
  c_build->add_option("--size-cap", build.size_cap);
  c_build->add_option("--token-budget", build.token_budget, "cft-short only; default: median SFT length");
  c_build->add_flag("--strict", build.strict, "Require [END] after the conclusion");
  c_build->add_option("--out", build.out, "train.jsonl")->required();
  c_build->callback([&] { action = [&](Runner& r) { return cmd_build(r, build); }; });

  MixFlags mix;
  auto* c_mix = app.add_subcommand("mix", "Combine two training sets");
  c_mix->add_option("--a", mix.a, "First train.jsonl")->required()->check(CLI::ExistingFile);
  c_mix->add_option("--b", mix.b, "Second train.jsonl")->required()->check(CLI::ExistingFile);
  c_mix->add_option("--count-a", mix.count_a);
  c_mix->add_option("--count-b", mix.count_b);
  c_mix->add_option("--order", mix.order, "mixed or two-stage")->capture_default_str();
  c_mix->add_option("--seed", mix.seed);
  c_mix->add_option("--out", mix.out)->required();
  c_mix->callback([&] { action = [&](Runner& r) { return cmd_mix(r, mix); }; });

  EmitFlags emit;
  auto* c_emit = app.add_subcommand("emit-config", "Write a training configuration");
  c_emit->add_option("--out", emit.out)->required();
  c_emit->add_option("--lr", emit.overrides.learning_rate);
  c_emit->add_option("--warmup", emit.overrides.warmup_ratio);
  c_emit->add_option("--batch", emit.overrides.global_batch_size);
  c_emit->add_option("--epochs", emit.overrides.epochs);
  c_emit->add_option("--validation-set", emit.validation_set);
  c_emit->callback([&] { action = [&](Runner& r) { return cmd_emit_config(r, emit); }; });

  EvalFlags ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate an endpoint on benchmark items");
  c_eval->add_option("--items", ev.items, "items.jsonl")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", ev.out, "eval.jsonl")->required();
  c_eval->add_option("--strategy", ev.strategy, "direct, single-pass or two-stage")->capture_default_str();
  c_eval->add_option("--temperature", ev.temperature, "Default: 0.0 direct, 0.1 self-critique");
  c_eval->add_option("--critique-temperature", ev.critique_temperature, "Two-stage critique calls");
  c_eval->add_option("--max-iters", ev.max_iters)->capture_default_str();
  c_eval->add_option("--solve-max-tokens", ev.solve_max_tokens)->capture_default_str();
  c_eval->add_option("--critique-max-tokens", ev.critique_max_tokens)->capture_default_str();
  c_eval->add_option("--benchmark", ev.benchmarks, "Restrict to these benchmarks");
  c_eval->add_option("--label", ev.label, "Score-table row label (default: model)");
  add_endpoint_flags(c_eval, ev.endpoint, "student");
  c_eval->callback([&] { action = [&](Runner& r) { return cmd_eval(r, ev); }; });

  VerifyFlags ver;
  auto* c_ver = app.add_subcommand("verify", "Recompute verdicts from raw outputs");
  c_ver->add_option("--pred", ver.pred, "eval.jsonl")->required()->check(CLI::ExistingFile);
  c_ver->add_option("--gold", ver.gold, "items.jsonl")->required()->check(CLI::ExistingFile);
  c_ver->add_option("--out", ver.out, "Default: rewrite --pred");
  c_ver->callback([&] { action = [&](Runner& r) { return cmd_verify(r, ver); }; });

  ReportFlags rep;
  auto* c_rep = app.add_subcommand("report", "Render score tables with averages and deltas");
  c_rep->add_option("--scores", rep.scores, "Score table json/csv files")->required()->check(CLI::ExistingFile);
  c_rep->add_option("--compare", rep.compare, "cft:ROW");
  c_rep->add_option("--against", rep.against, "ROW1,ROW2,...");
  c_rep->add_option("--format", rep.format, "markdown or csv")->capture_default_str();
  c_rep->add_option("--out", rep.out);
  c_rep->callback([&] { action = [&](Runner& r) { return cmd_report(r, rep); }; });

  DumpFlags dump;
  auto* c_dump = app.add_subcommand("dump-prompts", "Print the prompt templates");
  c_dump->add_option("--kind", dump.kind);
  c_dump->add_option("--out", dump.out);
  c_dump->callback([&] { action = [&](Runner& r) { return cmd_dump_prompts(r, dump); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitValidation;
  }

  // Restore the caller's logger on exit: ours writes to `err`, which may not
  // outlive this call.
  struct LoggerRestore {
    std::shared_ptr<spdlog::logger> previous = spdlog::default_logger();
    ~LoggerRestore() { spdlog::set_default_logger(previous); }
  } restore;

  bool logging_ready = false;
  const auto report_error = [&](const std::exception& e) {
    if (logging_ready) {
      spdlog::error("{}", e.what());
    } else {
      err << "cft-forge: " << e.what() << "\n";
    }
  };
  try {
    GlobalConfig cfg = g.config.empty() ? GlobalConfig{} : load_config(g.config);
    if (!g.cache_dir.empty()) cfg.cache_dir = g.cache_dir;
    if (!g.log_level.empty()) cfg.log_level = g.log_level;
    configure_logging(g.log_format == "json" ? LogFormat::Json : LogFormat::Text, cfg.log_level, err);
    logging_ready = true;
    std::vector<std::string> argv{"cft-forge"};
    argv.insert(argv.end(), args.begin(), args.end());
    Runner runner(env, std::move(cfg), std::move(argv));
    const int code = action(runner);
    spdlog::default_logger()->flush();
    return code;
  } catch (const TransportError& e) {
    report_error(e);
    return kExitTransport;
  } catch (const std::exception& e) {
    report_error(e);
    return kExitValidation;
  }
}

}  // namespace cftforge::cli
