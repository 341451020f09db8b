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

#include "cftforge/answer_verify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>

namespace cftforge::verify {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Index of the brace closing the one at `open`, honoring \{ and \} escapes.
std::optional<std::size_t> matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == '{' || s[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (s[i] == '{') ++depth;
    if (s[i] == '}' && --depth == 0) return i;
  }
  return std::nullopt;
}

bool command_at(std::string_view s, std::size_t i, std::string_view cmd) {
  if (!s.substr(i).starts_with(cmd)) return false;
  const std::size_t end = i + cmd.size();
  return end >= s.size() || !is_alpha(s[end]);
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

// Removes a LaTeX command when it is not the prefix of a longer command name.
void remove_command(std::string& s, std::string_view cmd) {
  std::size_t pos = s.find(cmd);
  while (pos != std::string::npos) {
    if (command_at(s, pos, cmd)) {
      s.erase(pos, cmd.size());
      pos = s.find(cmd, pos);
    } else {
      pos = s.find(cmd, pos + 1);
    }
  }
}

// \text{X} -> X for text-like wrappers.
void unwrap_command(std::string& s, std::string_view cmd) {
  std::size_t pos = s.find(cmd);
  while (pos != std::string::npos) {
    const std::size_t brace = pos + cmd.size();
    if (command_at(s, pos, cmd) && brace < s.size() && s[brace] == '{') {
      if (auto close = matching_brace(s, brace)) {
        s.erase(*close, 1);
        s.erase(pos, cmd.size() + 1);
        pos = s.find(cmd, pos);
        continue;
      }
    }
    pos = s.find(cmd, pos + 1);
  }
}

// "1,234,567" -> "1234567" when the commas are exactly thousands groupings
// of a standalone number.
void strip_thousands_separators(std::string& s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const bool boundary = i == 0 || !(is_digit(s[i - 1]) || s[i - 1] == '.' || is_alpha(s[i - 1]));
    if (!boundary || !is_digit(s[i])) {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) ++j;
    std::size_t k = j;
    std::size_t groups = 0;
    while (k + 3 < s.size() && s[k] == ',' && is_digit(s[k + 1]) && is_digit(s[k + 2]) &&
           is_digit(s[k + 3]) && (k + 4 == s.size() || !is_digit(s[k + 4]))) {
      k += 4;
      ++groups;
    }
    if (j - i <= 3 && groups > 0) {
      for (std::size_t p = i; p < k; ++p) {
        if (s[p] != ',') out.push_back(s[p]);
      }
      i = k;
    } else {
      out.append(s, i, j - i);
      i = j;
    }
  }
  s = std::move(out);
}

bool has_top_level_comma(std::string_view s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\\' && i + 1 < s.size()) {
      ++i;
      continue;
    }
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) return true;
  }
  return false;
}

char closer_for(char open) {
  switch (open) {
    case '(': return ')';
    case '[': return ']';
    case '{': return '}';
    default: return '\0';
  }
}

// True if s[0] opens a bracket whose match is the final character.
bool wrapped_by_outer_pair(std::string_view s) {
  if (s.size() < 2) return false;
  const char close = closer_for(s.front());
  if (close == '\0' || s.back() != close) return false;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      continue;
    }
    if (s[i] == s.front()) ++depth;
    if (s[i] == close) {
      --depth;
      if (depth == 0 && i + 1 != s.size()) return false;
    }
  }
  return depth == 0;
}

std::string normalize_once(std::string s) {
  s = std::string(trim(s));
  replace_all(s, "\xC2\xB1", "\\pm");  // U+00B1
  replace_all(s, "\\$", "");
  s.erase(std::remove(s.begin(), s.end(), '$'), s.end());
  remove_command(s, "\\left");
  remove_command(s, "\\right");
  for (std::string_view sp : {"\\!", "\\,", "\\;", "\\:", "\\ "}) replace_all(s, sp, "");
  remove_command(s, "\\quad");
  remove_command(s, "\\displaystyle");
  for (std::string_view frac : {"\\dfrac", "\\tfrac"}) {
    std::size_t pos = s.find(frac);
    while (pos != std::string::npos) {
      if (command_at(s, pos, frac)) s.erase(pos + 1, 1);  // drop the d/t
      pos = s.find(frac, pos + 1);
    }
  }
  for (std::string_view wrap : {"\\text", "\\textbf", "\\mathrm", "\\mathbf", "\\mbox"}) {
    unwrap_command(s, wrap);
  }
  s.erase(std::remove_if(s.begin(), s.end(), is_space), s.end());
  strip_thousands_separators(s);
  while (!s.empty() && s.back() == '.') s.pop_back();
  if (wrapped_by_outer_pair(s) && !has_top_level_comma(std::string_view(s).substr(1, s.size() - 2))) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::optional<long double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty() || !(is_digit(s.front()) || s.front() == '.')) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return negative ? -static_cast<long double>(v) : static_cast<long double>(v);
}

bool numbers_close(long double a, long double b) {
  if (a == b) return true;
  const long double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= static_cast<long double>(kRelativeTolerance) * scale;
}

// \sqrt{a} -> sqrt(a), then \frac{a}{b} -> a/b (parenthesized when not
// atomic), \cdot/\times -> *, leading '+' dropped.
std::string latex_lite(std::string_view in) {
  std::string s(in);
  auto plain = [](std::string_view x) {
    return std::all_of(x.begin(), x.end(), [](char c) {
      return is_digit(c) || is_alpha(c) || c == '.' || c == '\\';
    });
  };
  // Plain tokens, or name(...) / (...) whose first parenthesis closes last.
  auto atomic = [&](std::string_view x) {
    if (x.empty()) return false;
    const auto open = x.find('(');
    if (open == std::string_view::npos) return plain(x);
    if (x.back() != ')' || !plain(x.substr(0, open))) return false;
    int depth = 0;
    for (std::size_t i = open; i < x.size(); ++i) {
      if (x[i] == '(') ++depth;
      if (x[i] == ')' && --depth == 0) return i + 1 == x.size();
    }
    return false;
  };
  auto wrap = [&](std::string_view x) {
    return atomic(x) ? std::string(x) : "(" + std::string(x) + ")";
  };
  bool changed = true;
  while (changed) {
    changed = false;
    if (auto pos = s.rfind("\\sqrt"); pos != std::string::npos && command_at(s, pos, "\\sqrt")) {
      const std::size_t arg = pos + 5;
      if (arg < s.size() && s[arg] == '{') {
        if (auto close = matching_brace(s, arg)) {
          s.replace(pos, *close - pos + 1, "sqrt(" + s.substr(arg + 1, *close - arg - 1) + ")");
          changed = true;
          continue;
        }
      } else if (arg < s.size() && (is_digit(s[arg]) || is_alpha(s[arg]))) {
        s.replace(pos, 6, "sqrt(" + std::string(1, s[arg]) + ")");
        changed = true;
        continue;
      }
    }
    if (auto pos = s.rfind("\\frac{"); pos != std::string::npos) {
      const std::size_t open1 = pos + 5;
      if (auto close1 = matching_brace(s, open1); close1 && *close1 + 1 < s.size() && s[*close1 + 1] == '{') {
        if (auto close2 = matching_brace(s, *close1 + 1)) {
          const std::string num = s.substr(open1 + 1, *close1 - open1 - 1);
          const std::string den = s.substr(*close1 + 2, *close2 - *close1 - 2);
          s.replace(pos, *close2 - pos + 1, wrap(num) + "/" + wrap(den));
          changed = true;
          continue;
        }
      }
    }
  }
  replace_all(s, "\\cdot", "*");
  replace_all(s, "\\times", "*");
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  return s;
}

// Splits on top-level commas, then expands each \pm into + and -.
std::vector<std::string> answer_elements(const std::string& s) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\\' && i + 1 < s.size()) {
      cur.push_back(c);
      cur.push_back(s[++i]);
      continue;
    }
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(std::move(cur));

  std::vector<std::string> out;
  for (auto& p : parts) {
    std::vector<std::string> pending{normalize(p)};
    while (!pending.empty()) {
      std::string e = std::move(pending.back());
      pending.pop_back();
      const auto pm = e.find("\\pm");
      if (pm == std::string::npos || !command_at(e, pm, "\\pm")) {
        out.push_back(std::move(e));
        continue;
      }
      std::string plus = e, minus = e;
      plus.replace(pm, 3, "+");
      minus.replace(pm, 3, "-");
      pending.push_back(std::move(minus));
      pending.push_back(std::move(plus));
    }
  }
  return out;
}

bool atoms_equivalent(const std::string& a, const std::string& b) {
  if (a == b) return true;
  const auto na = numeric_value(a);
  const auto nb = numeric_value(b);
  if (na && nb) return numbers_close(*na, *nb);
  const std::string la = latex_lite(a);
  const std::string lb = latex_lite(b);
  if (la == lb) return true;
  const auto lna = numeric_value(la);
  const auto lnb = numeric_value(lb);
  return lna && lnb && numbers_close(*lna, *lnb);
}

// Perfect matching between the two element lists under atoms_equivalent.
bool sets_equivalent(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return false;
  constexpr std::size_t kMaxMatched = 12;
  if (a.size() > kMaxMatched) {
    auto sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa == sb;
  }
  std::vector<bool> used(b.size(), false);
  std::function<bool(std::size_t)> assign = [&](std::size_t i) {
    if (i == a.size()) return true;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j] || !atoms_equivalent(a[i], b[j])) continue;
      used[j] = true;
      if (assign(i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return assign(0);
}

}  // namespace

std::string_view to_string(ExtractMethod m) {
  switch (m) {
    case ExtractMethod::BoxedLast: return "BoxedLast";
    case ExtractMethod::AnswerLineLast: return "AnswerLineLast";
    case ExtractMethod::None: return "None";
  }
  return "None";
}

std::optional<std::string> last_boxed(std::string_view text) {
  std::optional<std::string> found;
  for (std::size_t pos = text.find('\\'); pos != std::string_view::npos;
       pos = text.find('\\', pos + 1)) {
    std::size_t after = 0;
    if (command_at(text, pos, "\\boxed")) {
      after = pos + 6;
    } else if (command_at(text, pos, "\\fbox")) {
      after = pos + 5;
    } else {
      continue;
    }
    while (after < text.size() && text[after] == ' ') ++after;
    if (after >= text.size() || text[after] != '{') continue;
    // Unbalanced groups (truncated output) are skipped, not half-read.
    if (auto close = matching_brace(text, after)) {
      found = std::string(text.substr(after + 1, *close - after - 1));
    }
  }
  return found;
}

ExtractedAnswer extract_answer(std::string_view raw_output) {
  if (auto boxed = last_boxed(raw_output)) {
    return {std::string(trim(*boxed)), ExtractMethod::BoxedLast};
  }
  std::optional<std::string_view> answer;
  std::size_t start = 0;
  while (start <= raw_output.size()) {
    const auto nl = raw_output.find('\n', start);
    std::string_view line = raw_output.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    std::string_view body = line;
    while (!body.empty() && is_space(body.front())) body.remove_prefix(1);
    if (body.starts_with("Answer:")) answer = trim(body.substr(7));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (answer && !answer->empty()) return {std::string(*answer), ExtractMethod::AnswerLineLast};
  return {};
}

std::string normalize(std::string_view answer) {
  std::string cur(answer);
  for (int i = 0; i < 64; ++i) {
    std::string next = normalize_once(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

std::optional<long double> numeric_value(std::string_view s) {
  if (auto v = parse_number(s)) return v;
  bool negative = false;
  std::string_view body = s;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  // \frac{a}{b}
  if (body.starts_with("\\frac{")) {
    const std::size_t open1 = 5;
    const auto close1 = matching_brace(body, open1);
    if (close1 && *close1 + 1 < body.size() && body[*close1 + 1] == '{') {
      const auto close2 = matching_brace(body, *close1 + 1);
      if (close2 && *close2 + 1 == body.size()) {
        const auto num = numeric_value(body.substr(open1 + 1, *close1 - open1 - 1));
        const auto den = numeric_value(body.substr(*close1 + 2, *close2 - *close1 - 2));
        if (num && den && *den != 0) return (negative ? -1 : 1) * *num / *den;
      }
    }
    return std::nullopt;
  }
  // a/b with plain numbers on both sides.
  if (const auto slash = s.find('/'); slash != std::string_view::npos && s.find('/', slash + 1) == std::string_view::npos) {
    const auto num = parse_number(s.substr(0, slash));
    const auto den = parse_number(s.substr(slash + 1));
    if (num && den && *den != 0) return *num / *den;
  }
  return std::nullopt;
}

bool equivalent(std::string_view candidate, std::string_view gold) {
  const std::string a = normalize(candidate);
  const std::string b = normalize(gold);
  if (a.empty() || b.empty()) return false;
  if (atoms_equivalent(a, b)) return true;
  const auto ea = answer_elements(a);
  const auto eb = answer_elements(b);
  if (ea.size() == 1 && eb.size() == 1) return false;
  return sets_equivalent(ea, eb);
}

double round_half_up_1(double value) {
  // The epsilon absorbs representation error, e.g. 37.35 stored as 37.3499...
  const double mag = std::floor(std::fabs(value) * 10.0 + 0.5 + 1e-9) / 10.0;
  return value < 0 ? -mag : mag;
}

std::map<Benchmark, ScoreEntry> score(std::span<const EvalRecord> records) {
  std::map<Benchmark, ScoreEntry> out;
  for (const auto& r : records) {
    auto& e = out[r.benchmark];
    ++e.total;
    if (r.verdict) ++e.correct;
  }
  for (auto& [bench, e] : out) {
    e.accuracy = round_half_up_1(100.0 * static_cast<double>(e.correct) / static_cast<double>(e.total));
  }
  return out;
}

}  // namespace cftforge::verify
