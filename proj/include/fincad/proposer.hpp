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

#include <cstdint>
#include <string>
#include <vector>

#include "fincad/prompt_forge.hpp"

namespace fincad {

// Rule-based rewrites of the seed: synonym swaps, scenario framings and
// imperative/hypothetical recastings. Deterministic for a given rng seed.
class MutationProposer final : public CandidateProposer {
 public:
  explicit MutationProposer(std::uint64_t rng_seed = 42) : rng_seed_(rng_seed) {}
  std::vector<std::string> propose(const std::string& seed, std::size_t count) override;

 private:
  std::uint64_t rng_seed_;
};

// Asks an OpenAI-style completion endpoint to rewrite the seed. The request
// carries the seed text and nothing else from the calibration data.
struct HttpProposerConfig {
  std::string endpoint;  // full completion URL
  std::string model;
  std::string api_token;
  double timeout_seconds = 60.0;
  double temperature = 0.9;
};

class HttpProposer final : public CandidateProposer {
 public:
  explicit HttpProposer(HttpProposerConfig config) : config_(std::move(config)) {}
  // Throws ProviderError on transport or protocol failure.
  std::vector<std::string> propose(const std::string& seed, std::size_t count) override;

 private:
  HttpProposerConfig config_;
};

}  // namespace fincad
