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

// A localhost chat-completions server built on cpp-httplib.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <atomic>
#include <functional>
#include <stdexcept>
#include <thread>

#include "cftforge/teacher_client.hpp"

namespace cftforge::testing {

class FakeServer {
 public:
  // The handler sees the parsed body and the Authorization header.
  using Handler = std::function<teacher::HttpResponse(const Json& body, const std::string& auth)>;

  explicit FakeServer(Handler handler, std::chrono::milliseconds delay = {})
      : handler_(std::move(handler)), delay_(delay) {
    server_.new_task_queue = [] { return new httplib::ThreadPool(16); };
    server_.Post(R"(/v1/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      const int now = ++in_flight;
      int seen = max_in_flight.load();
      while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
      }
      if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
      const auto r = handler_(Json::parse(req.body), req.get_header_value("Authorization"));
      res.status = r.status;
      res.set_content(r.body, "application/json");
      --in_flight;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("fake server: bind failed");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  FakeServer(const FakeServer&) = delete;
  FakeServer& operator=(const FakeServer&) = delete;

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<int> requests{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> max_in_flight{0};

 private:
  Handler handler_;
  std::chrono::milliseconds delay_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace cftforge::testing
