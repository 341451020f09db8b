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

#include "cftforge/critique_parse.hpp"

#include <array>
#include <vector>

namespace cftforge::critique {
namespace {

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_alnum(char c) { return is_alpha(c) || (c >= '0' && c <= '9'); }
bool is_hspace(char c) { return c == ' ' || c == '\t'; }

// Lowercased text with emphasis markers removed, plus the original byte
// offset of every kept character.
struct Stripped {
  std::string text;
  std::vector<std::size_t> origin;
};

Stripped strip_emphasis(std::string_view in) {
  Stripped s;
  s.text.reserve(in.size());
  s.origin.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '*') continue;
    if (in[i] == '_' && i + 1 < in.size() && in[i + 1] == '_') {
      ++i;
      continue;
    }
    s.text.push_back(lower(in[i]));
    s.origin.push_back(i);
  }
  return s;
}

struct VerdictWord {
  std::string_view word;
  Judgment judgment;
};

// "incorrect" must be tried before "correct".
constexpr std::array<VerdictWord, 4> kVerdicts = {{
    {"incorrect", Judgment::Wrong},
    {"correct", Judgment::Correct},
    {"wrong", Judgment::Wrong},
    {"right", Judgment::Correct},
}};

constexpr std::string_view kConclusion = "conclusion";
constexpr std::string_view kEnd = "[end]";
constexpr std::string_view kFullwidthColon = "\xEF\xBC\x9A";

std::size_t skip_hspace(std::string_view s, std::size_t i) {
  while (i < s.size() && is_hspace(s[i])) ++i;
  return i;
}

// Tries to read "<sep> <verdict> [[END]]" starting right after "conclusion".
// Returns (judgment, end offset) on success.
std::optional<std::pair<Judgment, std::size_t>> match_tail(std::string_view s, std::size_t i,
                                                           bool strict) {
  i = skip_hspace(s, i);
  if (i < s.size() && (s[i] == ':' || s[i] == '-')) {
    ++i;
  } else if (s.substr(i).starts_with(kFullwidthColon)) {
    i += kFullwidthColon.size();
  } else {
    return std::nullopt;
  }
  i = skip_hspace(s, i);
  for (const auto& v : kVerdicts) {
    if (!s.substr(i).starts_with(v.word)) continue;
    std::size_t end = i + v.word.size();
    if (end < s.size() && (is_alnum(s[end]) || s[end] == '/')) {
      // "correctly", or the template's own "right/wrong" choice list.
      return std::nullopt;
    }
    std::size_t j = skip_hspace(s, end);
    if (j < s.size() && s[j] == '.') j = skip_hspace(s, j + 1);
    if (s.substr(j).starts_with(kEnd)) {
      end = j + kEnd.size();
    } else if (strict) {
      return std::nullopt;
    }
    return std::make_pair(v.judgment, end);
  }
  return std::nullopt;
}

}  // namespace

std::vector<ParsedConclusion> find_conclusions(std::string_view critique_text,
                                               ParseOptions options) {
  const Stripped st = strip_emphasis(critique_text);
  const std::string_view s = st.text;
  std::vector<ParsedConclusion> out;

  for (std::size_t pos = s.find(kConclusion); pos != std::string_view::npos;
       pos = s.find(kConclusion, pos + 1)) {
    if (pos > 0 && is_alnum(s[pos - 1])) continue;
    const std::size_t after = pos + kConclusion.size();
    if (after < s.size() && is_alpha(s[after])) continue;

    const auto tail = match_tail(s, after, options.strict);
    if (!tail) continue;

    // Optional qualifier: one alphabetic word on the same line.
    std::size_t start = pos;
    std::size_t k = pos;
    while (k > 0 && is_hspace(s[k - 1])) --k;
    if (k < pos && k > 0 && is_alpha(s[k - 1])) {
      std::size_t w = k;
      while (w > 0 && is_alpha(s[w - 1])) --w;
      if (w == 0 || !is_alnum(s[w - 1])) start = w;
    }

    ParsedConclusion pc;
    pc.judgment = tail->first;
    const std::size_t begin_orig = st.origin[start];
    const std::size_t end_orig = st.origin[tail->second - 1] + 1;
    pc.matched_span = std::make_pair(begin_orig, end_orig);
    pc.matched_literal = std::string(critique_text.substr(begin_orig, end_orig - begin_orig));
    out.push_back(std::move(pc));
  }
  return out;
}

ParsedConclusion parse_judgment(std::string_view critique_text, ParseOptions options) {
  auto all = find_conclusions(critique_text, options);
  if (all.empty()) return {};
  return std::move(all.back());
}

Json JudgmentStats::to_json() const {
  Json j;
  j["n_correct"] = n_correct;
  j["n_wrong"] = n_wrong;
  j["n_unknown"] = n_unknown;
  j["correct_rate"] = correct_rate ? Json(*correct_rate) : Json(nullptr);
  return j;
}

JudgmentStats judgment_stats(std::span<const Judgment> judgments) {
  JudgmentStats st;
  for (Judgment j : judgments) {
    switch (j) {
      case Judgment::Correct: ++st.n_correct; break;
      case Judgment::Wrong: ++st.n_wrong; break;
      case Judgment::Unknown: ++st.n_unknown; break;
    }
  }
  const std::size_t judged = st.n_correct + st.n_wrong;
  if (judged > 0) st.correct_rate = static_cast<double>(st.n_correct) / static_cast<double>(judged);
  return st;
}

JudgmentStats judgment_stats(std::span<const CritiqueRecord> records, ParseOptions options) {
  std::vector<Judgment> js;
  js.reserve(records.size());
  for (const auto& r : records) js.push_back(parse_judgment(r.critique_text, options).judgment);
  return judgment_stats(js);
}

CritiqueRecord reparse(CritiqueRecord record, ParseOptions options) {
  record.judgment = parse_judgment(record.critique_text, options).judgment;
  return record;
}

}  // namespace cftforge::critique
