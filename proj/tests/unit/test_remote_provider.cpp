// Copyright 2026 The fincad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fincad/parallel.hpp"
#include "fincad/remote_provider.hpp"

using namespace fincad;
using json = nlohmann::json;

namespace {

// Completion endpoint stub on an ephemeral local port.
class StubServer {
 public:
  explicit StubServer(httplib::Server::Handler handler) {
    server_.Post("/v1/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/completions"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string completion(const json& top) {
  return json{{"choices", {{{"text", "x"}, {"logprobs", {{"top_logprobs", {top}}}}}}}}.dump();
}

RemoteConfig base_config(const std::string& url) {
  RemoteConfig c;
  c.endpoint = url;
  c.model = "stub-model";
  c.vocabulary = {"up", " up", "down", " down", "{", "}"};
  c.up_variants = {"up", " up"};
  c.down_variants = {"down", " down"};
  c.top_k = 5;
  c.timeout_seconds = 5;
  c.max_retries = 2;
  return c;
}

}  // namespace

TEST_CASE("completion parsing maps top logprobs onto the vocabulary") {
  const Vocabulary v({"up", "down", "{"});
  const auto l = logits_from_completion(completion({{"up", -0.1}, {"down", -2.5}, {"zzz", -0.01}}), v);
  CHECK(l[0] == -0.1);
  CHECK(l[1] == -2.5);
  CHECK(l[2] == kMissingLogit);
  try {
    logits_from_completion(R"({"choices":[{"text":"x"}]})", v);
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kNoLogitAccess);
  }
}

TEST_CASE("requests carry the prompt, model, token and logprob count") {
  json seen;
  std::string auth;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(completion({{" up", -0.2}, {"down", -1.7}}), "application/json");
  });
  auto cfg = base_config(server.url());
  cfg.api_token = "secret";
  const RemoteProvider p(cfg);
  const auto l = p.next_logits("After 2015-01-02, AAA stock went");
  CHECK(seen["prompt"] == "After 2015-01-02, AAA stock went");
  CHECK(seen["model"] == "stub-model");
  CHECK(seen["max_tokens"] == 1);
  CHECK(seen["logprobs"] == 5);
  CHECK(auth == "Bearer secret");
  CHECK(label_logit(l, p.labels().up()) == -0.2);
  CHECK(label_logit(l, p.labels().down()) == -1.7);
}

TEST_CASE("429 and 5xx are retried; other 4xx are not") {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    const int n = calls++;
    if (n == 0) {
      res.status = 429;
    } else if (n == 1) {
      res.status = 503;
    } else {
      res.set_content(completion({{"up", -1.0}}), "application/json");
    }
  });
  const RemoteProvider p(base_config(server.url()));
  CHECK(p.next_logits("x")[0] == -1.0);
  CHECK(calls == 3);

  std::atomic<int> bad_calls{0};
  StubServer bad([&](const httplib::Request&, httplib::Response& res) {
    ++bad_calls;
    res.status = 400;
    res.set_content("bad prompt", "text/plain");
  });
  const RemoteProvider q(base_config(bad.url()));
  try {
    q.next_logits("x");
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kRequest);
  }
  CHECK(bad_calls == 1);
}

TEST_CASE("retries are bounded") {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  auto cfg = base_config(server.url());
  cfg.max_retries = 1;
  const RemoteProvider p(cfg);
  CHECK_THROWS_AS(p.next_logits("x"), ProviderError);
  CHECK(calls == 2);
}

TEST_CASE("an endpoint without logprobs is reported as such") {
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[{"text":"up"}]})", "application/json");
  });
  const RemoteProvider p(base_config(server.url()));
  try {
    p.next_logits("x");
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kNoLogitAccess);
  }
}

TEST_CASE("transport failure") {
  std::string url;
  {
    StubServer s([](const httplib::Request&, httplib::Response&) {});
    url = s.url();
  }
  auto cfg = base_config(url);
  cfg.max_retries = 0;
  cfg.timeout_seconds = 1;
  const RemoteProvider p(cfg);
  try {
    p.next_logits("x");
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderErrorKind::kTransport);
  }
}

TEST_CASE("configuration checks") {
  auto cfg = base_config("http://127.0.0.1:1/v1/completions");
  cfg.top_k = 3;
  CHECK_THROWS_AS(RemoteProvider{cfg}, ProviderError);
  cfg = base_config("127.0.0.1/v1/completions");
  CHECK_THROWS_AS(RemoteProvider{cfg}, ProviderError);
  cfg = base_config("http://127.0.0.1:1/v1/completions");
  cfg.up_variants = {"nope"};
  CHECK_THROWS_AS(RemoteProvider{cfg}, ProviderError);
  cfg = base_config("http://127.0.0.1:1/v1/completions");
  CHECK_THROWS_AS(RemoteProvider{cfg}.next_logits(""), ProviderError);
}

TEST_CASE("in-flight requests are capped") {
  std::atomic<int> active{0}, peak{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    const int now = ++active;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    --active;
    res.set_content(completion({{"up", -1.0}}), "application/json");
  });
  auto cfg = base_config(server.url());
  cfg.max_in_flight = 2;
  const RemoteProvider p(cfg);
  parallel_for(12, 6, [&](std::size_t) { p.next_logits("x"); });
  CHECK(peak.load() <= 2);
  CHECK(peak.load() >= 1);
}
