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

// Client for OpenAI-compatible chat-completions endpoints, used both for the
// teacher model (critiques, reference answers) and for student models under
// evaluation.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cftforge/core.hpp"

namespace cftforge::teacher {

inline constexpr std::string_view kDefaultApiKeyEnv = "CFT_FORGE_API_KEY";

struct EndpointConfig {
  std::string base_url;  // e.g. "http://localhost:8000/v1"
  std::string model;
  std::string api_key_env = std::string(kDefaultApiKeyEnv);
  int max_parallel = 4;
  std::chrono::milliseconds timeout{std::chrono::seconds(300)};
  int max_retries = 5;
  std::chrono::milliseconds retry_base_delay{1000};

  void validate() const;
  // Never includes the key itself.
  Json to_json() const;
};

struct ChatRequest {
  std::optional<std::string> system;
  std::string user;
  double temperature = 0.0;
  std::optional<int> max_output_tokens;
  std::optional<std::int64_t> seed;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  friend bool operator==(const Usage&, const Usage&) = default;
};

struct CachedResponse {
  std::string request_fingerprint;
  std::string content;
  std::optional<Usage> usage;
  std::string fetched_at;

  friend bool operator==(const CachedResponse&, const CachedResponse&) = default;
};

Json to_json(const CachedResponse&);
CachedResponse cached_response_from_json(const Json&);

// sha256 over (model, system, user, temperature, seed). max_output_tokens is
// deliberately not part of the key.
std::string request_fingerprint(std::string_view model, const ChatRequest& req);

// The chat-completions request body for `req`.
Json request_body(std::string_view model, const ChatRequest& req);

// ---------------------------------------------------------------------------
// Transport

struct HttpResponse {
  int status = 0;  // 0: connection failure or timeout
  std::string body;
  std::string error;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // POSTs a serialized chat-completions body. Must be callable concurrently.
  virtual HttpResponse post_chat(const std::string& body) = 0;
};

// cpp-httplib backed transport; POSTs to <base_url>/chat/completions.
class HttpTransport final : public ChatTransport {
 public:
  explicit HttpTransport(EndpointConfig config);
  HttpResponse post_chat(const std::string& body) override;

 private:
  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Cache

// Append-only on-disk store keyed by request fingerprint, sharded into
// <dir>/<first two hex chars>.jsonl. Reads take a shared lock; appends are
// serialized. An empty directory path keeps the cache in memory only.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir = {});

  std::optional<CachedResponse> lookup(const std::string& fingerprint) const;
  void store(const CachedResponse& response);
  std::size_t size() const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  void load_shard(const std::filesystem::path& file);

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, CachedResponse> entries_;
};

// ---------------------------------------------------------------------------
// Client

enum class CallErrorKind { Transport, Request, Protocol, Validation };

struct CallError {
  CallErrorKind kind = CallErrorKind::Transport;
  int status = 0;
  std::string message;
};

struct BatchItem {
  std::size_t index = 0;
  std::optional<CachedResponse> response;
  std::optional<CallError> error;

  bool ok() const noexcept { return response.has_value(); }
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;
using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

class ChatClient {
 public:
  ChatClient(EndpointConfig config, std::shared_ptr<ChatTransport> transport,
             std::shared_ptr<ResponseCache> cache, SleepFn sleep = {});

  // Cache hit: zero network calls. Otherwise POSTs with exponential backoff on
  // 429 / 5xx / timeout. Throws TransportError when retries run out,
  // RequestError on other 4xx, ProtocolError on a malformed 200 body.
  CachedResponse complete(const ChatRequest& req);

  // Results align with `reqs` by index. Per-item failures are reported in the
  // result, never thrown. At most max_parallel requests are in flight.
  std::vector<BatchItem> complete_batch(std::span<const ChatRequest> reqs,
                                        const ProgressFn& on_progress = {});

  // Delay before retry number `attempt` (0-based): base * 2^attempt, capped.
  std::chrono::milliseconds backoff_delay(int attempt) const;

  const EndpointConfig& config() const noexcept { return config_; }
  std::size_t network_calls() const noexcept { return network_calls_.load(); }
  std::string fingerprint(const ChatRequest& req) const;

 private:
  CachedResponse fetch(const ChatRequest& req, const std::string& fingerprint);

  EndpointConfig config_;
  std::shared_ptr<ChatTransport> transport_;
  std::shared_ptr<ResponseCache> cache_;
  SleepFn sleep_;
  std::counting_semaphore<> slots_;
  std::atomic<std::size_t> network_calls_{0};

  std::mutex inflight_mutex_;
  std::unordered_map<std::string, std::shared_future<CachedResponse>> inflight_;
};

// Maps an exception thrown by ChatClient::complete to a CallError.
CallError classify_exception(std::exception_ptr e);

}  // namespace cftforge::teacher
