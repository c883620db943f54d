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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fincad/date.hpp"
#include "fincad/json_extract.hpp"
#include "fincad/model_gateway.hpp"
#include "fincad/rng.hpp"

namespace fincad {

struct DecodeConfig {
  double temperature = 1.0;
  std::uint64_t seed = 42;
  int max_tokens = 256;
  double retry_factor = 0.8;
  int max_retries = 5;

  void validate() const;  // throws UsageError
};

// (1 + alpha) * ctx - alpha * prior, elementwise. Throws std::invalid_argument
// on a length mismatch.
LogitVector blend_logits(const LogitVector& ctx, const LogitVector& prior, double alpha);

// softmax(logits / temperature), max-shifted.
std::vector<double> softmax(std::span<const double> logits, double temperature);

// Inverse-CDF draw from softmax(logits / temperature) using one rng.uniform().
std::size_t sample_token(const LogitVector& logits, double temperature, Rng& rng);

struct DecodeResult {
  TradeDecision decision;
  double initial_alpha = 0.0;
  double final_alpha = 0.0;  // alpha used by the attempt that parsed
  int retries = 0;
  std::string raw_text;  // generation of the final attempt
  std::size_t tokens = 0;
};

// Contrastive decoding loop. Both branches receive every sampled token. An
// attempt ends at the first balanced JSON object or max_tokens; if it does not
// parse, alpha is scaled by retry_factor and the loop retries. Exhausting the
// retries yields a hold fallback. With alpha == 0 the prior branch is never
// queried, which is bit-identical because the blend reduces to ctx.
DecodeResult decode_decision(const LogitProvider& provider, std::string_view x_ctx,
                             std::string_view x_prior, double alpha, const DecodeConfig& config,
                             Rng& rng);

// Plain single-branch sampling of the context prompt (alpha = 0).
DecodeResult decode_baseline(const LogitProvider& provider, std::string_view x_ctx,
                             const DecodeConfig& config, Rng& rng);

struct DecisionTraceRow {
  std::string ticker;
  Date date;
  double alpha = 0.0;
  double final_alpha = 0.0;
  int retries = 0;
  Action action = Action::kHold;
  std::int64_t quantity = 0;
  int confidence = 0;
  bool fallback = false;
};

std::string decision_trace_jsonl(const std::vector<DecisionTraceRow>& rows);

}  // namespace fincad
