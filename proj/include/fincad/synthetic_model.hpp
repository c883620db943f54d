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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fincad/date.hpp"
#include "fincad/market_data.hpp"
#include "fincad/model_gateway.hpp"

namespace fincad {

struct MemoryEntry {
  Direction direction = Direction::kUp;
  double strength = 0.0;  // >= 0, logit units

  double signed_strength() const {
    return direction == Direction::kUp ? strength : -strength;
  }
};

// Deterministic stand-in for an LLM that has memorised some (ticker, quarter)
// outcomes before its cutoff and may hold date-independent brand beliefs.
struct SyntheticModelSpec {
  std::string model_id = "synthetic";
  Date cutoff = Date::from_ymd(2024, 6, 30);
  // (ticker, quarter label "YYYY-Qn") -> memorised outcome.
  std::map<std::pair<std::string, std::string>, MemoryEntry> memorized;
  std::map<std::string, MemoryEntry> brand_prior;
  std::uint64_t noise_seed = 0;
  // Every logit gets uniform noise in [-noise_scale, noise_scale].
  double noise_scale = 0.05;
  // A prior/probe prompt unlocks memory only if it contains one of these
  // (case-insensitive). Empty means memory is always unlocked.
  std::vector<std::string> activation_keywords;
  // How strongly memory leaks into ordinary context prompts, relative to an
  // explicit recall prompt.
  double context_memory_weight = 0.5;
  // Weight of the 1m-momentum signal read from the data block.
  double context_signal_weight = 1.0;
  double structure_logit = 20.0;
  double hold_logit = 0.0;

  // Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

std::string to_json(const SyntheticModelSpec& spec);
SyntheticModelSpec synthetic_spec_from_json(const std::string& text);

// ~200 tokens: JSON punctuation, digits, action words, direction-label case
// and leading-space variants, and filler.
const Vocabulary& synthetic_vocabulary();
std::vector<std::string> synthetic_up_variants();
std::vector<std::string> synthetic_down_variants();

class SyntheticProvider final : public LogitProvider {
 public:
  explicit SyntheticProvider(SyntheticModelSpec spec);

  std::string model_id() const override { return spec_.model_id; }
  const Vocabulary& vocabulary() const override { return synthetic_vocabulary(); }
  LabelPair labels() const override;
  LogitVector next_logits(std::string_view input) const override;

  const SyntheticModelSpec& spec() const noexcept { return spec_; }

  // Signed memory signal (up positive) for the quarter containing date + 1,
  // zero past cutoff or when nothing is memorised for that quarter.
  double memory_signal(const std::string& ticker, Date date) const;
  double brand_signal(const std::string& ticker) const;

 private:
  SyntheticModelSpec spec_;
  std::vector<std::string> lowered_keywords_;
};

ProviderHandle build_synthetic(SyntheticModelSpec spec);

}  // namespace fincad
