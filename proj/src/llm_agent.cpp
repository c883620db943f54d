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

#include "fincad/llm_agent.hpp"

#include "fincad/error.hpp"

namespace fincad {

LlmAgent::LlmAgent(AgentSetup setup) : setup_(std::move(setup)), rng_(setup_.decode.seed) {
  if (!setup_.provider) throw UsageError("agent needs a provider");
  setup_.decode.validate();
  if (setup_.mode != MitigationMode::kFincad) return;
  if (!setup_.artifact) throw CalibrationError("fincad mode needs a prior artifact");
  if (!setup_.profile) throw CalibrationError("fincad mode needs a model profile");
  if (!setup_.stats) throw CalibrationError("fincad mode needs entity calibration stats");
  const std::string model = setup_.provider->model_id();
  if (setup_.artifact->model_id != model) {
    throw CalibrationError("prior artifact belongs to model '" + setup_.artifact->model_id +
                           "', not '" + model + "'");
  }
  if (!setup_.profile->model_id.empty() && setup_.profile->model_id != model) {
    throw CalibrationError("model profile belongs to '" + setup_.profile->model_id + "', not '" +
                           model + "'");
  }
  setup_.profile->validate();
}

void LlmAgent::begin_run(const std::string& ticker) {
  rng_ = Rng(setup_.decode.seed);
  trace_.clear();
  if (setup_.mode == MitigationMode::kAnonymisation) {
    auto entities = setup_.entities;
    const bool known = std::any_of(entities.begin(), entities.end(),
                                   [&](const EntityName& e) { return e.ticker == ticker; });
    if (!known) entities.push_back({ticker, {}});
    registry_.emplace(std::move(entities));
  }
  if (setup_.mode == MitigationMode::kFincad && setup_.stats->ticker != ticker) {
    throw CalibrationError("calibration stats are for " + setup_.stats->ticker + ", not " +
                           ticker);
  }
}

std::string data_block_for(const DecisionRequest& r) {
  PortfolioView view;
  view.cash = r.portfolio.cash.to_string();
  view.shares = r.portfolio.shares;
  view.portfolio_value = r.portfolio.value.to_string();
  view.max_buy = r.max_buy;
  view.max_sell = r.max_sell;
  return render_data_block(r.summary.ticker, r.date, render_summary(r.summary), view);
}

AgentDecision LlmAgent::decide(const DecisionRequest& r) {
  const LogitProvider& provider = *setup_.provider;
  const std::string& ticker = r.summary.ticker;
  PromptParts parts = context_parts(ticker, r.date, data_block_for(r));

  AgentDecision out;
  DecodeResult res;
  switch (setup_.mode) {
    case MitigationMode::kBaseline:
      res = decode_baseline(provider, assemble_context(parts), setup_.decode, rng_);
      break;
    case MitigationMode::kAnonymisation: {
      if (!registry_) begin_run(ticker);
      const std::string x = registry_->apply(assemble_context(parts));
      res = decode_baseline(provider, x, setup_.decode, rng_);
      break;
    }
    case MitigationMode::kPromptInjection: {
      const std::string sys = apply_prompt_injection(render_system_message(ticker, r.date));
      res = decode_baseline(provider, context_prompt(sys, *parts.data_block), setup_.decode, rng_);
      break;
    }
    case MitigationMode::kFincad: {
      const auto& instruction = setup_.artifact->instruction;
      const ProbeResult probe =
          probe_entropy(provider, instruction, ticker, r.date, provider.labels());
      const double alpha = setup_.force_alpha
                               ? *setup_.force_alpha
                               : adaptive_alpha(*setup_.stats, probe, *setup_.profile);
      trace_.push_back({ticker, r.date, probe.l_up, probe.l_down, probe.entropy, alpha});
      out.entropy = probe.entropy;
      res = decode_decision(provider, assemble_context(parts), assemble_prior(parts, instruction),
                            alpha, setup_.decode, rng_);
      break;
    }
  }
  out.decision = res.decision;
  out.alpha = res.initial_alpha;
  out.final_alpha = res.final_alpha;
  out.retries = res.retries;
  return out;
}

}  // namespace fincad
