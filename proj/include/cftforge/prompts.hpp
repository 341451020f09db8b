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

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace cftforge::prompts {

enum class PromptKind {
  CritiqueTeacher,
  ReferenceAnswer,
  DirectInference,
  SinglePassSelfCritique,
  TwoStageSolve,
  TwoStageCritique,
};

inline constexpr PromptKind kAllKinds[] = {
    PromptKind::CritiqueTeacher,        PromptKind::ReferenceAnswer, PromptKind::DirectInference,
    PromptKind::SinglePassSelfCritique, PromptKind::TwoStageSolve,   PromptKind::TwoStageCritique,
};

// Bumped whenever a template asset changes; recorded in dataset metadata.
inline constexpr std::string_view kTemplateVersion = "prompts/v1";

std::string_view kind_name(PromptKind kind);
PromptKind kind_from_name(std::string_view name);

// The raw template with {question} / {solution} placeholders.
std::string_view template_text(PromptKind kind);

// The instruction sentence each template must carry verbatim.
std::string_view anchor_phrase(PromptKind kind);

bool requires_solution(PromptKind kind);

// Interpolates question (and solution) without escaping. Throws UsageError
// when a solution is missing for CritiqueTeacher / TwoStageCritique or
// supplied for any other kind.
std::string render(PromptKind kind, std::string_view question,
                   std::optional<std::string_view> solution = std::nullopt);

// sha256 of render(kind, question, solution).
std::string fingerprint(PromptKind kind, std::string_view question,
                        std::optional<std::string_view> solution = std::nullopt);

}  // namespace cftforge::prompts
