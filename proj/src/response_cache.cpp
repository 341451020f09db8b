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

#include <fstream>

#include "cftforge/errors.hpp"
#include "cftforge/teacher_client.hpp"

namespace cftforge::teacher {

Json to_json(const CachedResponse& r) {
  Json j;
  j["request_fingerprint"] = r.request_fingerprint;
  j["content"] = r.content;
  if (r.usage) {
    j["usage"] = Json{{"prompt_tokens", r.usage->prompt_tokens},
                      {"completion_tokens", r.usage->completion_tokens}};
  }
  j["fetched_at"] = r.fetched_at;
  return j;
}

CachedResponse cached_response_from_json(const Json& j) {
  CachedResponse r;
  try {
    r.request_fingerprint = j.at("request_fingerprint").get<std::string>();
    r.content = j.at("content").get<std::string>();
    r.fetched_at = j.at("fetched_at").get<std::string>();
    if (auto it = j.find("usage"); it != j.end() && it->is_object()) {
      r.usage = Usage{it->value("prompt_tokens", std::int64_t{0}),
                      it->value("completion_tokens", std::int64_t{0})};
    }
  } catch (const Json::exception& e) {
    throw SchemaError("request_fingerprint", std::string("bad cache entry: ") + e.what());
  }
  return r;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (dir_.empty()) return;
  std::filesystem::create_directories(dir_);
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") load_shard(entry.path());
  }
}

void ResponseCache::load_shard(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto r = cached_response_from_json(Json::parse(line));
      // First entry for a fingerprint wins; later duplicates come from racing
      // processes and carry the same request.
      entries_.try_emplace(r.request_fingerprint, std::move(r));
    } catch (const std::exception&) {
      // A torn final line from an interrupted append: skip it.
    }
  }
}

std::optional<CachedResponse> ResponseCache::lookup(const std::string& fingerprint) const {
  std::shared_lock lock(mutex_);
  if (auto it = entries_.find(fingerprint); it != entries_.end()) return it->second;
  return std::nullopt;
}

void ResponseCache::store(const CachedResponse& response) {
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(response.request_fingerprint, response);
  if (!inserted || dir_.empty()) return;
  const auto shard = dir_ / (response.request_fingerprint.substr(0, 2) + ".jsonl");
  std::ofstream out(shard, std::ios::binary | std::ios::app);
  out << dump_line(to_json(response)) << '\n';
  out.flush();
  if (!out) throw Error("cache append failed: " + shard.string());
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace cftforge::teacher
