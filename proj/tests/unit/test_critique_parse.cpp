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

#include "cftforge/critique_parse.hpp"
#include "cftforge/jsonl.hpp"
#include "support/generators.hpp"
#include "support/temp_dir.hpp"

using namespace cftforge;
using namespace cftforge::critique;

TEST_CASE("corpus transcripts parse to their expected judgments") {
  const auto corpus = read_jsonl_values(testing::fixture("critique_corpus.jsonl"));
  REQUIRE(corpus.size() >= 25);
  for (const auto& c : corpus) {
    CAPTURE(c["name"].get<std::string>());
    CHECK(to_string(parse_judgment(c["text"].get<std::string>()).judgment) == c["expected"].get<std::string>());
  }
}

TEST_CASE("matched spans point into the original text") {
  const std::string text = "Fine.\n\n**Conclusion: Correct [END]**";
  const auto pc = parse_judgment(text);
  REQUIRE(pc.matched_span);
  CHECK(pc.matched_literal == "Conclusion: Correct [END]");
  CHECK(text.substr(pc.matched_span->first, pc.matched_span->second - pc.matched_span->first) ==
        pc.matched_literal);

  const auto q = parse_judgment("so it must be correct. Crituque Conclusion: correct [END]");
  CHECK(q.matched_literal == "Crituque Conclusion: correct [END]");

  CHECK_FALSE(parse_judgment("nothing here").matched_span);
}

TEST_CASE("strict mode requires the end marker") {
  const ParseOptions strict{true};
  CHECK(parse_judgment("Conclusion: correct", strict).judgment == Judgment::Unknown);
  CHECK(parse_judgment("Conclusion: correct [END]", strict).judgment == Judgment::Correct);
  CHECK(parse_judgment("Conclusion: wrong [END] Conclusion: right", strict).judgment == Judgment::Wrong);
  CHECK(parse_judgment("Conclusion: wrong [END] Conclusion: right").judgment == Judgment::Correct);
}

TEST_CASE("find_conclusions lists every match in order") {
  const auto all = find_conclusions("Conclusion: right [END]\nlater\nConclusion: wrong [END]");
  REQUIRE(all.size() == 2);
  CHECK(all[0].judgment == Judgment::Correct);
  CHECK(all[1].judgment == Judgment::Wrong);
}

TEST_CASE("property: an appended verdict line always decides") {
  testing::Gen g(21);
  for (int i = 0; i < 500; ++i) {
    const Judgment j = g.judgment();
    const auto text = testing::critique_text_for(g, j);
    CHECK(parse_judgment(text).judgment == j);
  }
}

TEST_CASE("property: text without the keyword is Unknown") {
  testing::Gen g(22);
  for (int i = 0; i < 500; ++i) {
    std::string text = g.sentence(0, 40);
    if (text.find("conclusion") != std::string::npos) continue;
    text += g.coin() ? " correct [END]" : " wrong";
    CHECK(parse_judgment(text).judgment == Judgment::Unknown);
  }
}

TEST_CASE("judgment stats partition the input") {
  const std::vector<Judgment> js{Judgment::Correct, Judgment::Wrong, Judgment::Correct, Judgment::Unknown};
  const auto st = judgment_stats(js);
  CHECK(st.n_correct == 2);
  CHECK(st.n_wrong == 1);
  CHECK(st.n_unknown == 1);
  REQUIRE(st.correct_rate);
  CHECK(*st.correct_rate == doctest::Approx(2.0 / 3.0));

  const std::vector<Judgment> unknown{Judgment::Unknown};
  CHECK_FALSE(judgment_stats(unknown).correct_rate);
  CHECK(judgment_stats(unknown).to_json()["correct_rate"].is_null());
}

TEST_CASE("reparse replaces a stale stored judgment") {
  CritiqueRecord r;
  r.critique_text = "Conclusion: wrong [END]";
  r.judgment = Judgment::Correct;
  CHECK(reparse(r).judgment == Judgment::Wrong);
  const std::vector<CritiqueRecord> rs{r};
  CHECK(judgment_stats(rs).n_wrong == 1);
}
