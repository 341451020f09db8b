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

#include "doctest.h"

#include <cstdlib>

#include "cftforge/errors.hpp"
#include "cftforge/teacher_client.hpp"
#include "support/fake_server.hpp"
#include "support/scripted.hpp"
#include "support/temp_dir.hpp"

using namespace cftforge;
using namespace cftforge::teacher;
using testing::ScriptedTransport;

namespace {

ChatRequest req(std::string user, double temperature = 0.0) {
  ChatRequest r;
  r.user = std::move(user);
  r.temperature = temperature;
  return r;
}

struct Rig {
  explicit Rig(ScriptedTransport::Handler h, int max_parallel = 4, std::chrono::milliseconds delay = {})
      : transport(std::make_shared<ScriptedTransport>(std::move(h), delay)),
        cache(std::make_shared<ResponseCache>()),
        client(testing::test_endpoint(max_parallel), transport, cache,
               [this](std::chrono::milliseconds d) { sleeps.push_back(d); }) {}

  std::shared_ptr<ScriptedTransport> transport;
  std::shared_ptr<ResponseCache> cache;
  std::vector<std::chrono::milliseconds> sleeps;
  ChatClient client;
};

}  // namespace

TEST_CASE("request fingerprints key on model, prompts, temperature and seed") {
  const auto base = request_fingerprint("m", req("hi"));
  CHECK(base == request_fingerprint("m", req("hi")));
  CHECK(base != request_fingerprint("m2", req("hi")));
  CHECK(base != request_fingerprint("m", req("hi!")));
  CHECK(base != request_fingerprint("m", req("hi", 0.1)));
  auto seeded = req("hi");
  seeded.seed = 3;
  CHECK(base != request_fingerprint("m", seeded));
  auto sys = req("hi");
  sys.system = "be brief";
  CHECK(base != request_fingerprint("m", sys));
  auto capped = req("hi");
  capped.max_output_tokens = 17;
  CHECK(base == request_fingerprint("m", capped));
}

TEST_CASE("request body follows the chat-completions shape") {
  auto r = req("hello", 0.3);
  r.system = "sys";
  r.max_output_tokens = 64;
  r.seed = 5;
  const Json b = request_body("model-x", r);
  CHECK(b["model"] == "model-x");
  CHECK(b["messages"].size() == 2);
  CHECK(b["messages"][0]["role"] == "system");
  CHECK(b["messages"][1]["content"] == "hello");
  CHECK(b["temperature"] == 0.3);
  CHECK(b["max_tokens"] == 64);
  CHECK(b["seed"] == 5);
  CHECK(b["stream"] == false);
}

TEST_CASE("endpoint config never serializes a key") {
  ::setenv("CFT_FORGE_TEST_SECRET", "sk-very-secret", 1);
  EndpointConfig e = testing::test_endpoint();
  e.api_key_env = "CFT_FORGE_TEST_SECRET";
  const auto text = e.to_json().dump();
  CHECK(text.find("sk-very-secret") == std::string::npos);
  CHECK(text.find("CFT_FORGE_TEST_SECRET") != std::string::npos);
  EndpointConfig bad = e;
  bad.max_parallel = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("response cache: first write wins and survives reopening") {
  testing::TempDir dir;
  CachedResponse a{std::string(64, 'a'), "first", Usage{1, 2}, "2025-01-01T00:00:00Z"};
  CachedResponse a2 = a;
  a2.content = "second";
  CachedResponse b{"b" + std::string(63, '0'), "other", std::nullopt, "2025-01-01T00:00:01Z"};
  {
    ResponseCache cache(dir.path());
    cache.store(a);
    cache.store(a2);
    cache.store(b);
    CHECK(cache.size() == 2);
    CHECK(cache.lookup(a.request_fingerprint)->content == "first");
  }
  CHECK(std::filesystem::exists(dir / "aa.jsonl"));
  CHECK(std::filesystem::exists(dir / "b0.jsonl"));
  // A torn trailing line is ignored on load.
  {
    std::ofstream f(dir / "aa.jsonl", std::ios::app);
    f << "{\"request_fingerprint\":\"aa";
  }
  ResponseCache reopened(dir.path());
  CHECK(reopened.size() == 2);
  CHECK(*reopened.lookup(a.request_fingerprint) == a);
  CHECK(*reopened.lookup(b.request_fingerprint) == b);
  CHECK_FALSE(reopened.lookup("ff"));
}

TEST_CASE("cache hits make zero network calls") {
  Rig rig([](const Json&) { return testing::ok("pong"); });
  const auto first = rig.client.complete(req("ping"));
  CHECK(first.content == "pong");
  CHECK(rig.client.network_calls() == 1);
  const auto second = rig.client.complete(req("ping"));
  CHECK(second == first);
  CHECK(rig.client.network_calls() == 1);
  CHECK(rig.transport->calls == 1);
}

TEST_CASE("429 and 5xx are retried with exponential backoff") {
  std::atomic<int> n{0};
  Rig rig([&](const Json&) {
    const int i = n++;
    if (i == 0) return testing::status(429);
    if (i == 1) return testing::status(503);
    if (i == 2) return teacher::HttpResponse{0, {}, "connection reset"};
    return testing::ok("done");
  });
  CHECK(rig.client.complete(req("x")).content == "done");
  CHECK(rig.client.network_calls() == 4);
  REQUIRE(rig.sleeps.size() == 3);
  CHECK(rig.sleeps[0] == std::chrono::milliseconds(1));
  CHECK(rig.sleeps[1] == std::chrono::milliseconds(2));
  CHECK(rig.sleeps[2] == std::chrono::milliseconds(4));
}

TEST_CASE("retry exhaustion raises a transport error") {
  Rig rig([](const Json&) { return testing::status(500); });
  try {
    (void)rig.client.complete(req("x"));
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.last_status() == 500);
  }
  CHECK(rig.client.network_calls() == 4);  // 1 + max_retries
  CHECK(rig.cache->size() == 0);
}

TEST_CASE("other 4xx fail fast; malformed bodies are protocol errors") {
  Rig bad_request([](const Json&) { return testing::status(400); });
  CHECK_THROWS_AS((void)bad_request.client.complete(req("x")), RequestError);
  CHECK(bad_request.client.network_calls() == 1);

  Rig garbage([](const Json&) { return teacher::HttpResponse{200, "{\"choices\":[]}", {}}; });
  CHECK_THROWS_AS((void)garbage.client.complete(req("x")), ProtocolError);

  Rig not_json([](const Json&) { return teacher::HttpResponse{200, "<html>", {}}; });
  CHECK_THROWS_AS((void)not_json.client.complete(req("x")), ProtocolError);
}

TEST_CASE("backoff doubles and is capped") {
  auto cfg = testing::test_endpoint();
  cfg.retry_base_delay = std::chrono::milliseconds(1000);
  ChatClient c(cfg, std::make_shared<ScriptedTransport>([](const Json&) { return testing::ok(""); }),
               std::make_shared<ResponseCache>(), testing::no_sleep());
  CHECK(c.backoff_delay(0) == std::chrono::milliseconds(1000));
  CHECK(c.backoff_delay(3) == std::chrono::milliseconds(8000));
  CHECK(c.backoff_delay(30) == std::chrono::seconds(60));
}

TEST_CASE("batches align results, isolate failures and respect max_parallel") {
  Rig rig(
      [](const Json& body) {
        const auto u = testing::user_prompt(body);
        if (u == "fail") return testing::status(404);
        return testing::ok("echo:" + u);
      },
      3, std::chrono::milliseconds(5));
  std::vector<ChatRequest> reqs;
  for (int i = 0; i < 20; ++i) reqs.push_back(req(i == 7 ? "fail" : "q" + std::to_string(i)));
  std::size_t last_done = 0;
  const auto results = rig.client.complete_batch(reqs, [&](std::size_t done, std::size_t total) {
    CHECK(total == 20);
    CHECK(done == last_done + 1);
    last_done = done;
  });
  REQUIRE(results.size() == 20);
  for (std::size_t i = 0; i < results.size(); ++i) {
    CHECK(results[i].index == i);
    if (i == 7) {
      REQUIRE(results[i].error);
      CHECK(results[i].error->kind == CallErrorKind::Request);
      CHECK(results[i].error->status == 404);
    } else {
      REQUIRE(results[i].ok());
      CHECK(results[i].response->content == "echo:q" + std::to_string(i));
    }
  }
  CHECK(rig.transport->max_in_flight <= 3);
  CHECK(rig.transport->max_in_flight >= 2);
}

TEST_CASE("identical in-flight requests share one network call") {
  Rig rig([](const Json&) { return testing::ok("same"); }, 8, std::chrono::milliseconds(20));
  const std::vector<ChatRequest> reqs(8, req("dup"));
  const auto results = rig.client.complete_batch(reqs);
  for (const auto& r : results) CHECK(r.response->content == "same");
  CHECK(rig.transport->calls == 1);
}

TEST_CASE("http transport talks to a chat-completions server") {
  ::setenv("CFT_FORGE_TEST_KEY", "sk-test", 1);
  testing::FakeServer server([](const Json& body, const std::string& auth) {
    return testing::ok(auth + "|" + body["model"].get<std::string>() + "|" + testing::user_prompt(body));
  });
  auto cfg = testing::test_endpoint();
  cfg.base_url = server.base_url() + "/";
  cfg.api_key_env = "CFT_FORGE_TEST_KEY";
  ChatClient client(cfg, std::make_shared<HttpTransport>(cfg), std::make_shared<ResponseCache>(),
                    testing::no_sleep());
  CHECK(client.complete(req("hello")).content == "Bearer sk-test|scripted-model|hello");
  CHECK(server.requests == 1);
}

TEST_CASE("http transport reports connection failures as status 0") {
  auto cfg = testing::test_endpoint();
  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.timeout = std::chrono::milliseconds(500);
  HttpTransport t(cfg);
  const auto res = t.post_chat("{}");
  CHECK(res.status == 0);
  CHECK_FALSE(res.error.empty());
  CHECK_THROWS_AS(HttpTransport([] {
                    auto c = testing::test_endpoint();
                    c.base_url = "localhost:8000";
                    return c;
                  }()),
                  ValidationError);
}
