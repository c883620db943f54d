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

#include "fincad/cad_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "fincad/error.hpp"

namespace fincad {

void DecodeConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw UsageError("temperature must be > 0");
  }
  if (max_tokens < 1) throw UsageError("max_tokens must be >= 1");
  if (!(retry_factor > 0.0 && retry_factor < 1.0)) {
    throw UsageError("retry_factor must lie in (0, 1)");
  }
  if (max_retries < 0) throw UsageError("max_retries must be >= 0");
}

LogitVector blend_logits(const LogitVector& ctx, const LogitVector& prior, double alpha) {
  if (ctx.size() != prior.size()) {
    throw std::invalid_argument("blend_logits: length mismatch " + std::to_string(ctx.size()) +
                                " vs " + std::to_string(prior.size()));
  }
  std::vector<double> out(ctx.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 + alpha) * ctx[i] - alpha * prior[i];
  }
  return LogitVector(std::move(out));
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((logits[i] - m) / temperature);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

std::size_t sample_token(const LogitVector& logits, double temperature, Rng& rng) {
  const auto p = softmax(logits.values(), temperature);
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last_nonzero = i;
    if (u < acc) return i;
  }
  return last_nonzero;  // rounding left u just above the total
}

DecodeResult decode_decision(const LogitProvider& provider, std::string_view x_ctx,
                             std::string_view x_prior, double alpha, const DecodeConfig& config,
                             Rng& rng) {
  config.validate();
  const Vocabulary& vocab = provider.vocabulary();
  DecodeResult result;
  result.initial_alpha = alpha;

  double a = alpha;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    std::string ctx(x_ctx);
    std::string prior(x_prior);
    std::string gen;
    std::size_t steps = 0;
    for (; steps < static_cast<std::size_t>(config.max_tokens); ++steps) {
      const LogitVector lc = next_logits(provider, ctx);
      const LogitVector blended =
          a == 0.0 ? lc : blend_logits(lc, next_logits(provider, prior), a);
      const std::string& tok = vocab.token(sample_token(blended, config.temperature, rng));
      ctx += tok;
      prior += tok;
      gen += tok;
      if (balanced_object_end(gen)) {
        ++steps;
        break;
      }
    }
    result.final_alpha = a;
    result.retries = attempt;
    result.raw_text = gen;
    result.tokens = steps;
    try {
      result.decision = extract_json(gen);
      return result;
    } catch (const ParseError&) {
      a *= config.retry_factor;
    }
  }
  result.decision = TradeDecision::hold_fallback();
  return result;
}

DecodeResult decode_baseline(const LogitProvider& provider, std::string_view x_ctx,
                             const DecodeConfig& config, Rng& rng) {
  return decode_decision(provider, x_ctx, x_ctx, 0.0, config, rng);
}

std::string decision_trace_jsonl(const std::vector<DecisionTraceRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["ticker"] = r.ticker;
    j["date"] = r.date.to_string();
    j["alpha"] = r.alpha;
    j["final_alpha"] = r.final_alpha;
    j["retries"] = r.retries;
    j["action"] = to_string(r.action);
    j["quantity"] = r.quantity;
    j["confidence"] = r.confidence;
    j["fallback"] = r.fallback;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace fincad
