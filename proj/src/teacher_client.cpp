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

#include "cftforge/teacher_client.hpp"

#include <algorithm>
#include <thread>

#include "cftforge/errors.hpp"
#include "cftforge/hashing.hpp"

namespace cftforge::teacher {
namespace {

constexpr std::chrono::milliseconds kMaxBackoff{60'000};

const EndpointConfig& validated(const EndpointConfig& c) {
  c.validate();
  return c;
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

std::string snippet(std::string_view body) {
  constexpr std::size_t kMax = 300;
  return std::string(body.substr(0, kMax)) + (body.size() > kMax ? "..." : "");
}

CachedResponse parse_completion(const std::string& body, const std::string& fingerprint) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error&) {
    throw ProtocolError("response body is not JSON: " + snippet(body));
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw ProtocolError("response has no choices: " + snippet(body));
  }
  const Json& first = (*choices)[0];
  const auto message = first.find("message");
  if (message == first.end() || !message->is_object()) {
    throw ProtocolError("choices[0] has no message: " + snippet(body));
  }
  const auto content = message->find("content");
  if (content == message->end() || !content->is_string()) {
    throw ProtocolError("choices[0].message.content is not a string: " + snippet(body));
  }
  CachedResponse r;
  r.request_fingerprint = fingerprint;
  r.content = content->get<std::string>();
  if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
    Usage usage;
    if (auto p = u->find("prompt_tokens"); p != u->end() && p->is_number_integer()) {
      usage.prompt_tokens = p->get<std::int64_t>();
    }
    if (auto c = u->find("completion_tokens"); c != u->end() && c->is_number_integer()) {
      usage.completion_tokens = c->get<std::int64_t>();
    }
    r.usage = usage;
  }
  r.fetched_at = utc_now_iso8601();
  return r;
}

}  // namespace

void EndpointConfig::validate() const {
  if (base_url.empty()) throw ValidationError("endpoint base_url is empty");
  if (model.empty()) throw ValidationError("endpoint model is empty");
  if (max_parallel < 1) throw ValidationError("endpoint max_parallel must be >= 1");
  if (max_retries < 0) throw ValidationError("endpoint max_retries must be >= 0");
  if (timeout.count() <= 0) throw ValidationError("endpoint timeout must be positive");
  if (retry_base_delay.count() < 0) throw ValidationError("endpoint retry_base_delay must be >= 0");
}

Json EndpointConfig::to_json() const {
  Json j;
  j["base_url"] = base_url;
  j["model"] = model;
  j["api_key_env"] = api_key_env;
  j["max_parallel"] = max_parallel;
  j["timeout_ms"] = timeout.count();
  j["max_retries"] = max_retries;
  j["retry_base_delay_ms"] = retry_base_delay.count();
  return j;
}

std::string request_fingerprint(std::string_view model, const ChatRequest& req) {
  Json key;
  key["v"] = 1;
  key["model"] = model;
  key["system"] = req.system ? Json(*req.system) : Json(nullptr);
  key["user"] = req.user;
  key["temperature"] = req.temperature;
  key["seed"] = req.seed ? Json(*req.seed) : Json(nullptr);
  return sha256_hex(dump_line(key));
}

Json request_body(std::string_view model, const ChatRequest& req) {
  Json messages = Json::array();
  if (req.system) messages.push_back(Json{{"role", "system"}, {"content", *req.system}});
  messages.push_back(Json{{"role", "user"}, {"content", req.user}});
  Json body;
  body["model"] = model;
  body["messages"] = std::move(messages);
  body["temperature"] = req.temperature;
  if (req.max_output_tokens) body["max_tokens"] = *req.max_output_tokens;
  if (req.seed) body["seed"] = *req.seed;
  body["stream"] = false;
  return body;
}

ChatClient::ChatClient(EndpointConfig config, std::shared_ptr<ChatTransport> transport,
                       std::shared_ptr<ResponseCache> cache, SleepFn sleep)
    : config_(validated(config)),
      transport_(std::move(transport)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      sleep_(sleep ? std::move(sleep)
                   : SleepFn([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      slots_(config_.max_parallel) {
  if (!transport_) throw ValidationError("chat client needs a transport");
}

std::string ChatClient::fingerprint(const ChatRequest& req) const {
  return request_fingerprint(config_.model, req);
}

std::chrono::milliseconds ChatClient::backoff_delay(int attempt) const {
  auto delay = config_.retry_base_delay;
  for (int i = 0; i < attempt && delay < kMaxBackoff; ++i) delay *= 2;
  return std::min(delay, std::max(kMaxBackoff, config_.retry_base_delay));
}

CachedResponse ChatClient::complete(const ChatRequest& req) {
  if (req.user.empty()) throw ValidationError("chat request user message is empty");
  const std::string fp = fingerprint(req);
  if (auto hit = cache_->lookup(fp)) return *hit;

  std::promise<CachedResponse> promise;
  std::optional<std::shared_future<CachedResponse>> pending;
  {
    std::lock_guard lock(inflight_mutex_);
    // Re-check under the lock: a finished fetch stores before it unregisters.
    if (auto hit = cache_->lookup(fp)) return *hit;
    if (auto it = inflight_.find(fp); it != inflight_.end()) {
      pending = it->second;
    } else {
      inflight_.emplace(fp, promise.get_future().share());
    }
  }
  // Identical request already on the wire: share its outcome.
  if (pending) return pending->get();

  try {
    CachedResponse r = fetch(req, fp);
    cache_->store(r);
    promise.set_value(r);
    std::lock_guard lock(inflight_mutex_);
    inflight_.erase(fp);
    return r;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(inflight_mutex_);
    inflight_.erase(fp);
    throw;
  }
}

CachedResponse ChatClient::fetch(const ChatRequest& req, const std::string& fp) {
  const std::string body = dump_line(request_body(config_.model, req));
  HttpResponse last;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    slots_.acquire();
    try {
      ++network_calls_;
      last = transport_->post_chat(body);
    } catch (...) {
      slots_.release();
      throw;
    }
    slots_.release();

    if (last.status >= 200 && last.status < 300) return parse_completion(last.body, fp);
    if (!retryable(last.status)) {
      throw RequestError(last.status, "endpoint rejected request with HTTP " +
                                          std::to_string(last.status) + ": " + snippet(last.body));
    }
    if (attempt < config_.max_retries) sleep_(backoff_delay(attempt));
  }
  const std::string detail = last.status == 0 ? last.error : "HTTP " + std::to_string(last.status);
  throw TransportError(last.status, "endpoint unavailable after " +
                                        std::to_string(config_.max_retries + 1) +
                                        " attempts; last: " + detail);
}

std::vector<BatchItem> ChatClient::complete_batch(std::span<const ChatRequest> reqs,
                                                  const ProgressFn& on_progress) {
  std::vector<BatchItem> results(reqs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < reqs.size(); i = next++) {
      results[i].index = i;
      try {
        results[i].response = complete(reqs[i]);
      } catch (...) {
        results[i].error = classify_exception(std::current_exception());
      }
      const std::size_t n = ++done;
      if (on_progress) {
        std::lock_guard lock(progress_mutex);
        on_progress(n, reqs.size());
      }
    }
  };

  const auto n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(config_.max_parallel), reqs.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }
  return results;
}

CallError classify_exception(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const TransportError& err) {
    return {CallErrorKind::Transport, err.last_status(), err.what()};
  } catch (const RequestError& err) {
    return {CallErrorKind::Request, err.status(), err.what()};
  } catch (const ProtocolError& err) {
    return {CallErrorKind::Protocol, 200, err.what()};
  } catch (const std::exception& err) {
    return {CallErrorKind::Validation, 0, err.what()};
  }
}

}  // namespace cftforge::teacher
