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

#pragma once

#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include "fincad/model_gateway.hpp"

namespace fincad {

struct RemoteConfig {
  // Full completion URL, e.g. "http://127.0.0.1:8000/v1/completions".
  std::string endpoint;
  std::string model;
  std::string api_token;  // sent as a bearer token when non-empty
  int top_k = 20;
  double timeout_seconds = 60.0;
  int max_in_flight = 4;
  int max_retries = 3;
  // Tokens the decoder may emit. Anything the endpoint returns outside this
  // list is ignored; listed tokens absent from the top-k get kMissingLogit.
  std::vector<std::string> vocabulary;
  std::vector<std::string> up_variants;
  std::vector<std::string> down_variants;
};

inline constexpr double kMissingLogit = -1e4;

// Maps one OpenAI-style completion response onto `vocab`, reading
// choices[0].logprobs.top_logprobs[0]. Throws ProviderError(kNoLogitAccess)
// when the response carries no logprobs.
LogitVector logits_from_completion(const std::string& body, const Vocabulary& vocab);

class RemoteProvider final : public LogitProvider {
 public:
  // Throws ProviderError(kBadInput) if top_k cannot cover every label variant
  // or the configuration is incomplete.
  explicit RemoteProvider(RemoteConfig config);

  std::string model_id() const override { return config_.model; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  LabelPair labels() const override { return labels_; }
  LogitVector next_logits(std::string_view input) const override;

 private:
  LogitVector request_once(std::string_view input) const;

  RemoteConfig config_;
  Vocabulary vocab_;
  LabelPair labels_;
  std::string host_;  // scheme://host[:port]
  std::string path_;
  mutable std::counting_semaphore<1024> in_flight_;
};

ProviderHandle build_remote(RemoteConfig config);

}  // namespace fincad
