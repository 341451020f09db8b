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

#include <set>
#include <sstream>

#include "cftforge/cli.hpp"
#include "cftforge/dataset_forge.hpp"
#include "cftforge/errors.hpp"
#include "cftforge/jsonl.hpp"
#include "cftforge/prompts.hpp"
#include "support/scripted.hpp"
#include "support/temp_dir.hpp"

using namespace cftforge;
using namespace cftforge::cli;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation invoke(const std::vector<std::string>& args, TransportFactory transport = {}) {
  std::ostringstream out, err;
  Environment env;
  env.out = &out;
  env.err = &err;
  env.transport = std::move(transport);
  env.sleep = testing::no_sleep();
  Invocation r;
  r.code = run(args, env);
  r.out = out.str();
  r.err = err.str();
  return r;
}

TransportFactory scripted(std::shared_ptr<testing::ScriptedTransport> t) {
  return [t](const teacher::EndpointConfig&) { return t; };
}

std::vector<std::string> endpoint_args() {
  return {"--base-url", "http://127.0.0.1:9/v1", "--model", "m"};
}

}  // namespace

TEST_CASE("dump-prompts prints every template with its anchor phrase") {
  const auto r = invoke({"dump-prompts"});
  CHECK(r.code == kExitOk);
  for (const auto kind : prompts::kAllKinds) {
    CHECK(r.out.find("### " + std::string(prompts::kind_name(kind))) != std::string::npos);
    CHECK(r.out.find(prompts::anchor_phrase(kind)) != std::string::npos);
  }
  const auto one = invoke({"dump-prompts", "--kind", "critique-teacher"});
  CHECK(one.out.starts_with("### critique-teacher\n"));
  CHECK(one.out.find("### direct-inference") == std::string::npos);
  CHECK(invoke({"dump-prompts", "--kind", "nope"}).code == kExitValidation);
}

TEST_CASE("usage errors exit 1") {
  CHECK(invoke({"frobnicate"}).code == kExitValidation);
  CHECK(invoke({}).code == kExitValidation);
  CHECK(invoke({"--version"}).code == kExitOk);

  testing::TempDir dir;
  testing::spit(dir / "s.jsonl", dump_line(to_json(make_sample("Q", "A", {}))) + "\n");
  const auto r = invoke({"build", "--variant", "cft", "--in", (dir / "s.jsonl").string(), "--out",
                         (dir / "t.jsonl").string()});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("--critiques") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "t.jsonl"));
}

TEST_CASE("ingest: dedup, blank questions, deterministic sampling, manifest") {
  testing::TempDir dir;
  const auto csv = testing::fixture("raw_corpus.csv").string();
  const auto all = invoke({"ingest", "--in", csv, "--out", (dir / "all.jsonl").string(), "--map", "response=answer",
                           "--map", "subject=topic"});
  REQUIRE(all.code == kExitOk);
  const auto samples = read_jsonl<Sample>(dir / "all.jsonl");
  std::set<std::string> ids;
  for (const auto& s : samples) {
    CHECK(ids.insert(s.id).second);
    CHECK(s.source == SampleSource{SourceKind::WebInstruct, {}});
  }
  CHECK(samples.size() == 11);

  const auto manifest = Json::parse(testing::slurp(dir / "all.jsonl.manifest.json"));
  CHECK(manifest["counts"]["duplicates"] == 1);
  CHECK(manifest["outputs"][0]["sha256"].get<std::string>().size() == 64);
  CHECK(manifest.find("created_at") == manifest.end());

  const std::vector<std::string> sampled{"ingest", "--in", csv, "--map", "response=answer", "--count", "5",
                                         "--seed", "3", "--out"};
  auto a = sampled;
  a.push_back((dir / "a.jsonl").string());
  auto b = sampled;
  b.push_back((dir / "b.jsonl").string());
  REQUIRE(invoke(a).code == kExitOk);
  REQUIRE(invoke(b).code == kExitOk);
  CHECK(testing::slurp(dir / "a.jsonl") == testing::slurp(dir / "b.jsonl"));
  const auto five = read_jsonl<Sample>(dir / "a.jsonl");
  REQUIRE(five.size() == 5);
  // Corpus order is preserved.
  std::size_t at = 0;
  for (const auto& x : five) {
    while (at < samples.size() && samples[at].id != x.id) ++at;
    CHECK(at < samples.size());
  }
  auto over = sampled;
  over[6] = "50";
  over.push_back((dir / "c.jsonl").string());
  const auto r = invoke(over);
  CHECK(r.code == kExitOk);
  CHECK(r.err.find("exceeds") != std::string::npos);
  CHECK(read_jsonl<Sample>(dir / "c.jsonl").size() == 11);
}

TEST_CASE("emit-config writes defaults plus overrides") {
  testing::TempDir dir;
  const auto out = (dir / "train_config.json").string();
  REQUIRE(invoke({"emit-config", "--out", out, "--epochs", "2"}).code == kExitOk);
  const auto e = forge::EmittedTrainConfig::from_json(Json::parse(testing::slurp(out)));
  CHECK(e.config.epochs == 2);
  CHECK(e.config.learning_rate == 5e-6);
  CHECK(e.overridden == std::vector<std::string>{"epochs"});
  CHECK(invoke({"emit-config", "--out", out, "--lr", "0"}).code == kExitValidation);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"(
cache_dir: /tmp/c
seed: 4
log_level: debug
endpoints:
  teacher:
    base_url: https://api.example.com/v1
    model: big
    api_key_env: TEACHER_KEY
    max_parallel: 8
    timeout_s: 30
)");
  CHECK(cfg.cache_dir == "/tmp/c");
  CHECK(cfg.seed == 4);
  const auto& t = cfg.endpoint("teacher");
  CHECK(t.model == "big");
  CHECK(t.max_parallel == 8);
  CHECK(t.timeout == std::chrono::seconds(30));
  CHECK_THROWS_AS(cfg.endpoint("student"), UsageError);

  CHECK_THROWS_AS(parse_config("endpoints:\n  t:\n    base_url: http://x\n    model: m\n    api_key: sk-1\n"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config("colour: blue\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("endpoints:\n  t:\n    model: m\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("seed: [1\n"), ValidationError);
  CHECK(parse_config("").endpoints.empty());
}

TEST_CASE("json logs are one object per line") {
  testing::TempDir dir;
  const auto csv = testing::fixture("raw_corpus.csv").string();
  const auto r = invoke({"--log", "json", "ingest", "--in", csv, "--map", "response=answer", "--out",
                         (dir / "s.jsonl").string()});
  REQUIRE(r.code == kExitOk);
  std::istringstream lines(r.err);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = Json::parse(line);
    CHECK(j.contains("ts"));
    CHECK(j.contains("level"));
    CHECK(j.contains("msg"));
    ++n;
  }
  CHECK(n >= 1);
}

TEST_CASE("critique: transport exhaustion exits 2 and keeps partial output") {
  testing::TempDir dir;
  const std::vector<Sample> s{make_sample("Q1", "R1", {}), make_sample("Q2", "R2", {}), make_sample("Q3", "R3", {})};
  write_jsonl(dir / "s.jsonl", s);
  auto t = std::make_shared<testing::ScriptedTransport>([](const Json& body) {
    if (testing::user_prompt(body).find("Q2") != std::string::npos) return testing::status(503);
    return testing::ok("Fine.\nConclusion: right [END]");
  });
  auto args = std::vector<std::string>{"--cache-dir", (dir / "cache").string(), "critique", "--in", (dir / "s.jsonl").string(), "--out",
                                       (dir / "c.jsonl").string()};
  for (const auto& a : endpoint_args()) args.push_back(a);
  const auto r = invoke(args, scripted(t));
  CHECK(r.code == kExitTransport);
  const auto crit = read_jsonl<CritiqueRecord>(dir / "c.jsonl");
  CHECK(crit.size() == 2);
  CHECK(std::filesystem::exists(dir / "c.jsonl.manifest.json"));
  const auto manifest = testing::slurp(dir / "c.jsonl.manifest.json");
  CHECK(manifest.find("\"api_key\"") == std::string::npos);

  // The warm cache answers the two good samples without the network.
  const auto before = t->calls.load();
  (void)invoke(args, scripted(t));
  CHECK(t->calls - before == 6);  // only Q2 is retried: 1 + 5 retries
}

TEST_CASE("build and mix from the command line") {
  testing::TempDir dir;
  const std::vector<Sample> s{make_sample("Q1", "R1", {}), make_sample("Q2", "R2", {})};
  write_jsonl(dir / "s.jsonl", s);
  std::vector<CritiqueRecord> c;
  for (const auto& x : s) {
    c.push_back({x.id, "t", std::string(64, 'a'), "ok\nConclusion: right [END]", Judgment::Correct,
                 "2025-01-01T00:00:00Z"});
  }
  write_jsonl(dir / "c.jsonl", c);
  const auto in = (dir / "s.jsonl").string();
  REQUIRE(invoke({"build", "--variant", "cft", "--in", in, "--critiques", (dir / "c.jsonl").string(), "--out",
                  (dir / "cft.jsonl").string()})
              .code == kExitOk);
  REQUIRE(invoke({"build", "--variant", "sft", "--in", in, "--out", (dir / "sft.jsonl").string()}).code == kExitOk);
  const auto cft = read_jsonl<TrainingExample>(dir / "cft.jsonl");
  CHECK(cft.size() == 2);
  const auto meta = Json::parse(testing::slurp(dir / "cft.jsonl.meta.json"));
  CHECK(meta["variant"] == "Cft");

  REQUIRE(invoke({"mix", "--a", (dir / "cft.jsonl").string(), "--b", (dir / "sft.jsonl").string(), "--order",
                  "two-stage", "--out", (dir / "mix.jsonl").string()})
              .code == kExitOk);
  const auto mixed = read_jsonl<TrainingExample>(dir / "mix.jsonl");
  REQUIRE(mixed.size() == 4);
  CHECK(mixed[0].variant() == Variant::Cft);
  CHECK(mixed[3].variant() == Variant::Sft);
  CHECK(Json::parse(testing::slurp(dir / "mix.jsonl.meta.json"))["stage_boundary"] == 2);
}

TEST_CASE("report renders tables and deltas") {
  testing::TempDir dir;
  testing::spit(dir / "t.csv",
                "Model,MATH,GSM8K,AVG\nsft,40.0,70.0,55.0\ncft,50.0,75.5,62.8\nbase,-,60.0,60.0\n");
  const auto r = invoke({"report", "--scores", (dir / "t.csv").string(), "--compare", "cft:cft", "--against",
                         "sft,base", "--format", "csv"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out ==
        "Model,MATH,GSM8K,AVG\n"
        "base,-,60.0,60.0\n"
        "cft,50.0,75.5,62.8\n"
        "sft,40.0,70.0,55.0\n"
        "Delta = CFT - SFT_best,10.0,5.5,2.8\n");
  CHECK_FALSE(std::filesystem::exists(dir / "t.csv.manifest.json"));
  CHECK(invoke({"report", "--scores", (dir / "t.csv").string(), "--compare", "cft:nope"}).code == kExitValidation);
}
