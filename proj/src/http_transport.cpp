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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cstdlib>

#include "cftforge/errors.hpp"
#include "cftforge/teacher_client.hpp"

namespace cftforge::teacher {

HttpTransport::HttpTransport(EndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("endpoint base_url needs a scheme: " + config_.base_url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = (path_start == std::string::npos ? std::string() : url.substr(path_start)) +
          "/chat/completions";
}

HttpResponse HttpTransport::post_chat(const std::string& body) {
  // httplib::Client is not safe for concurrent use; one per call is cheap
  // next to a model completion.
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) return HttpResponse{0, {}, "connection error: " + httplib::to_string(res.error())};
  return HttpResponse{res->status, res->body, {}};
}

}  // namespace cftforge::teacher
