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

#include "cftforge/prompts.hpp"

#include <array>

#include "cftforge/errors.hpp"
#include "cftforge/hashing.hpp"
#include "prompt_assets.inc"  // generated from assets/prompts/*.txt

namespace cftforge::prompts {
namespace {

struct Entry {
  std::string_view name;
  std::string_view text;
  std::string_view anchor;
  bool needs_solution;
};

constexpr std::array<Entry, 6> kEntries = {{
    {"critique-teacher", assets::kCritiqueTeacher,
     "conclude your judgement with 'Conclusion: right/wrong [END]'", true},
    {"reference-answer", assets::kReferenceAnswer,
     "conclude your answer with 'Answer: [YOUR ANSWER]", false},
    {"direct-inference", assets::kDirectInference, "put your final answer within \\boxed{}", false},
    {"single-pass-self-critique", assets::kSinglePassSelfCritique,
     "critique your solution. If any errors are found, provide a corrected solution", false},
    {"two-stage-solve", assets::kTwoStageSolve, "put your final answer within \\boxed{}", false},
    {"two-stage-critique", assets::kTwoStageCritique,
     "critique whether the following solution to the question is correct", true},
}};

const Entry& entry(PromptKind kind) { return kEntries[static_cast<std::size_t>(kind)]; }

constexpr std::string_view kQuestionSlot = "{question}";
constexpr std::string_view kSolutionSlot = "{solution}";

}  // namespace

std::string_view kind_name(PromptKind kind) { return entry(kind).name; }

PromptKind kind_from_name(std::string_view name) {
  for (PromptKind k : kAllKinds) {
    if (entry(k).name == name) return k;
  }
  throw UsageError("unknown prompt kind \"" + std::string(name) + "\"");
}

std::string_view template_text(PromptKind kind) { return entry(kind).text; }
std::string_view anchor_phrase(PromptKind kind) { return entry(kind).anchor; }
bool requires_solution(PromptKind kind) { return entry(kind).needs_solution; }

std::string render(PromptKind kind, std::string_view question,
                   std::optional<std::string_view> solution) {
  const Entry& e = entry(kind);
  if (e.needs_solution && !solution) {
    throw UsageError(std::string(e.name) + " prompt requires a solution");
  }
  if (!e.needs_solution && solution) {
    throw UsageError(std::string(e.name) + " prompt does not take a solution");
  }
  // Single left-to-right pass over the template: placeholders that appear
  // inside the interpolated values are never expanded.
  std::string out;
  out.reserve(e.text.size() + question.size() + (solution ? solution->size() : 0));
  std::string_view rest = e.text;
  while (!rest.empty()) {
    const auto brace = rest.find('{');
    if (brace == std::string_view::npos) {
      out.append(rest);
      break;
    }
    out.append(rest.substr(0, brace));
    rest.remove_prefix(brace);
    if (rest.starts_with(kQuestionSlot)) {
      out.append(question);
      rest.remove_prefix(kQuestionSlot.size());
    } else if (solution && rest.starts_with(kSolutionSlot)) {
      out.append(*solution);
      rest.remove_prefix(kSolutionSlot.size());
    } else {
      out.push_back('{');
      rest.remove_prefix(1);
    }
  }
  return out;
}

std::string fingerprint(PromptKind kind, std::string_view question,
                        std::optional<std::string_view> solution) {
  return sha256_hex(render(kind, question, solution));
}

}  // namespace cftforge::prompts
