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

#include "fincad/remote_provider.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace fincad {
namespace {

using json = nlohmann::json;

LabelPair resolve_labels(const Vocabulary& vocab, const RemoteConfig& c) {
  try {
    return LabelPair::from_tokens(vocab, c.up_variants, c.down_variants);
  } catch (const std::invalid_argument& e) {
    throw ProviderError(ProviderErrorKind::kBadInput, e.what());
  }
}

Vocabulary make_vocab(const RemoteConfig& c) {
  if (c.vocabulary.empty()) {
    throw ProviderError(ProviderErrorKind::kBadInput, "remote provider: empty vocabulary");
  }
  try {
    return Vocabulary(c.vocabulary);
  } catch (const std::invalid_argument& e) {
    throw ProviderError(ProviderErrorKind::kBadInput, e.what());
  }
}

}  // namespace

LogitVector logits_from_completion(const std::string& body, const Vocabulary& vocab) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProviderError(ProviderErrorKind::kServer,
                        std::string("unparseable completion response: ") + e.what());
  }
  const json* top = nullptr;
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const json& choice = j["choices"][0];
    if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
      const json& lp = choice["logprobs"];
      if (lp.contains("top_logprobs") && lp["top_logprobs"].is_array() &&
          !lp["top_logprobs"].empty() && lp["top_logprobs"][0].is_object()) {
        top = &lp["top_logprobs"][0];
      }
    }
  }
  if (top == nullptr) {
    throw ProviderError(ProviderErrorKind::kNoLogitAccess,
                        "endpoint response has no choices[0].logprobs.top_logprobs");
  }
  std::vector<double> values(vocab.size(), kMissingLogit);
  for (const auto& [token, value] : top->items()) {
    if (!value.is_number()) continue;
    if (auto i = vocab.find(token)) values[*i] = std::max(value.get<double>(), kMissingLogit);
  }
  return LogitVector(std::move(values));
}

RemoteProvider::RemoteProvider(RemoteConfig config)
    : config_(std::move(config)),
      vocab_(make_vocab(config_)),
      labels_(resolve_labels(vocab_, config_)),
      in_flight_(std::clamp(config_.max_in_flight, 1, 1024)) {
  const std::size_t variants = config_.up_variants.size() + config_.down_variants.size();
  if (config_.top_k < 1 || static_cast<std::size_t>(config_.top_k) < variants) {
    throw ProviderError(ProviderErrorKind::kBadInput,
                        "top_k=" + std::to_string(config_.top_k) + " cannot cover " +
                            std::to_string(variants) + " label variants");
  }
  if (config_.model.empty()) {
    throw ProviderError(ProviderErrorKind::kBadInput, "remote provider: model name required");
  }
  const auto scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw ProviderError(ProviderErrorKind::kBadInput,
                        "endpoint must be an absolute URL: '" + config_.endpoint + "'");
  }
  const auto slash = config_.endpoint.find('/', scheme + 3);
  host_ = config_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/v1/completions" : config_.endpoint.substr(slash);
}

LogitVector RemoteProvider::request_once(std::string_view input) const {
  httplib::Client client(host_);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  if (!config_.api_token.empty()) client.set_bearer_token_auth(config_.api_token);

  const json req{{"model", config_.model},   {"prompt", std::string(input)},
                 {"max_tokens", 1},          {"temperature", 0},
                 {"logprobs", config_.top_k}};
  auto res = client.Post(path_, req.dump(), "application/json");
  if (!res) {
    throw ProviderError(ProviderErrorKind::kTransport,
                        "request to " + config_.endpoint + " failed: " +
                            httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw ProviderError(ProviderErrorKind::kServer,
                        "endpoint returned HTTP " + std::to_string(res->status));
  }
  if (res->status >= 400) {
    throw ProviderError(ProviderErrorKind::kRequest, "endpoint returned HTTP " +
                                                         std::to_string(res->status) + ": " +
                                                         res->body.substr(0, 200));
  }
  return logits_from_completion(res->body, vocab_);
}

LogitVector RemoteProvider::next_logits(std::string_view input) const {
  if (input.empty()) throw ProviderError(ProviderErrorKind::kBadInput, "empty input");
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  for (int attempt = 0;; ++attempt) {
    try {
      return request_once(input);
    } catch (const ProviderError& e) {
      if (!e.retryable() || attempt >= config_.max_retries) throw;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100 << std::min(attempt, 6)));
  }
}

ProviderHandle build_remote(RemoteConfig config) {
  return std::make_shared<const RemoteProvider>(std::move(config));
}

}  // namespace fincad
