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

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "cftforge/core.hpp"
#include "cftforge/errors.hpp"

namespace cftforge {

// Reads one JSON object per line. Blank lines are skipped; a parse or schema
// failure is rethrown with the file name and 1-based line number prepended.
std::vector<Json> read_jsonl_values(const std::filesystem::path& path);

void write_jsonl_values(const std::filesystem::path& path, std::span<const Json> values);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);

template <class T>
std::vector<T> read_jsonl(const std::filesystem::path& path) {
  std::vector<T> out;
  std::size_t line = 0;
  for (const auto& value : read_jsonl_values(path)) {
    ++line;
    try {
      out.push_back(from_json<T>(value));
    } catch (const SchemaError& e) {
      throw SchemaError(e.field(), e.detail() + " (" + path.string() + " record " + std::to_string(line) + ")");
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + " record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

template <class T>
void write_jsonl(const std::filesystem::path& path, std::span<const T> records) {
  std::vector<Json> values;
  values.reserve(records.size());
  for (const auto& r : records) values.push_back(to_json(r));
  write_jsonl_values(path, values);
}

template <class T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& records) {
  write_jsonl(path, std::span<const T>(records));
}

}  // namespace cftforge
