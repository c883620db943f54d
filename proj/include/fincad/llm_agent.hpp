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
#include <optional>
#include <string>
#include <vector>

#include "fincad/backtester.hpp"
#include "fincad/cad_decoder.hpp"
#include "fincad/calibrator.hpp"
#include "fincad/model_gateway.hpp"
#include "fincad/prompt_forge.hpp"

namespace fincad {

// What a mode needs beyond the provider. FinCAD requires the prior artifact,
// the model profile and the entity's calibration stats.
struct AgentSetup {
  ProviderHandle provider;
  MitigationMode mode = MitigationMode::kBaseline;
  DecodeConfig decode;
  std::optional<PriorArtifact> artifact;
  std::optional<ModelProfile> profile;
  std::optional<EntityStats> stats;
  std::vector<EntityName> entities;  // anonymisation registry seed
  // FinCAD only: replaces the adaptive alpha (probes still run and are traced).
  std::optional<double> force_alpha;
};

// Turns each DecisionRequest into prompts for the configured mode and decodes
// a trade decision. One RNG stream per backtest, seeded by decode.seed.
class LlmAgent final : public DecisionSource {
 public:
  // Throws CalibrationError when FinCAD inputs are missing or were produced
  // for a different model.
  explicit LlmAgent(AgentSetup setup);

  void begin_run(const std::string& ticker) override;
  AgentDecision decide(const DecisionRequest& request) override;

  const std::vector<ProbeTraceRow>& probe_trace() const noexcept { return trace_; }

 private:
  AgentSetup setup_;
  Rng rng_;
  std::optional<AnonymisationRegistry> registry_;
  std::vector<ProbeTraceRow> trace_;
};

// Data block for a request, with the portfolio rendered in dollars.
std::string data_block_for(const DecisionRequest& request);

}  // namespace fincad
