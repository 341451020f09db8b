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

// Hand-rolled random value generators for property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cftforge/core.hpp"

namespace cftforge::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_); }
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

  std::string word(int min_len = 1, int max_len = 8) {
    static const std::string letters = "abcdefghijklmnopqrstuvwxyz";
    std::string w;
    const int n = range(min_len, max_len);
    for (int i = 0; i < n; ++i) w.push_back(letters[below(letters.size())]);
    return w;
  }

  std::string sentence(int min_words = 1, int max_words = 12) {
    std::string s;
    const int n = range(min_words, max_words);
    for (int i = 0; i < n; ++i) {
      if (i) s.push_back(' ');
      s += word();
    }
    return s;
  }

  // Arbitrary text from an alphabet rich in the characters normalization
  // touches: braces, brackets, commas, dollars, backslash commands, spaces.
  std::string math_noise(int max_tokens = 12) {
    static const std::vector<std::string> tokens = {
        "1", "2", "0", "9", "42", ".", ",", " ", "  ", "\t", "(", ")", "[", "]", "{", "}", "$", "\\$",
        "\\left", "\\right", "\\frac", "\\dfrac", "\\tfrac", "\\sqrt", "\\text{", "\\mathrm{", "\\!",
        "\\,", "\\;", "\\quad", "\\pm", "\xC2\xB1", "+", "-", "/", "x", "y", "^", "_", "1,000", "\\cdot",
        "\\", "pi", "\\boxed{", "\\displaystyle", "a", "b", "=", "%", "\\infty"};
    std::string s;
    const int n = range(0, max_tokens);
    for (int i = 0; i < n; ++i) s += pick(tokens);
    return s;
  }

  SampleSource source() {
    switch (below(5)) {
      case 0: return {SourceKind::WebInstruct, {}};
      case 1: return {SourceKind::MetaMathQA, {}};
      case 2: return {SourceKind::NuminaMath, {}};
      case 3: return {SourceKind::SelfGenerated, {}};
      default: return SampleSource::other(word());
    }
  }

  Sample sample() {
    std::optional<std::string> subject;
    if (coin()) subject = word();
    return make_sample(sentence() + "?", sentence(0, 30), source(), subject);
  }

  Benchmark benchmark() { return kAllBenchmarks[below(std::size(kAllBenchmarks))]; }

  Judgment judgment() {
    switch (below(3)) {
      case 0: return Judgment::Correct;
      case 1: return Judgment::Wrong;
      default: return Judgment::Unknown;
    }
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// A critique whose conclusion line carries `j` (none for Unknown).
inline std::string critique_text_for(Gen& g, Judgment j) {
  std::string text = g.sentence(3, 20) + ".\n\n";
  switch (j) {
    case Judgment::Correct: text += g.coin() ? "Conclusion: right [END]" : "**Conclusion: Correct [END]**"; break;
    case Judgment::Wrong: text += g.coin() ? "Conclusion: wrong [END]" : "Critique Conclusion: Incorrect"; break;
    case Judgment::Unknown: text += "No verdict given."; break;
  }
  return text;
}

}  // namespace cftforge::testing
