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

#include "fincad/date.hpp"
#include "fincad/market_data.hpp"
#include "fincad/synthetic_model.hpp"

namespace fincad {

// Regime-switching price path on weekdays. Each calendar quarter has a drift
// sign that persists into the next quarter with probability `persistence`, so
// knowing a quarter's outcome is worth something to a trader.
struct SyntheticSeriesOptions {
  Date start = Date::from_ymd(2005, 1, 3);
  Date end = Date::from_ymd(2025, 12, 31);
  double start_price = 50.0;
  double daily_vol = 0.012;
  double quarter_drift = 0.12;  // |expected log return| per quarter
  double persistence = 0.75;
  bool with_volume = true;
  std::uint64_t seed = 1;
};

PriceSeries make_synthetic_series(const std::string& ticker, const SyntheticSeriesOptions& opt);

struct MemorizeOptions {
  double strength_per_return = 20.0;  // logit units per unit of quarter return
  double min_strength = 0.5;
  double max_strength = 4.0;
};

// Adds one memory entry per quarter that starts on or before spec.cutoff,
// holding the sign of the quarter's close-to-close return.
void memorize_series(SyntheticModelSpec& spec, const PriceSeries& series,
                     const MemorizeOptions& opt = {});

// Ready-made world used by the CLI's make-synthetic command and the tests:
// `n_memorized` tickers fully memorised, plus one brand-only ticker.
struct SyntheticWorld {
  std::vector<PriceSeries> universe;
  SyntheticModelSpec spec;
};

SyntheticWorld make_synthetic_world(std::size_t n_memorized = 4, std::uint64_t seed = 7);

}  // namespace fincad
