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

#include "fincad/synthetic_world.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fincad/rng.hpp"

namespace fincad {
namespace {

// Irwin-Hall approximation to a standard normal; portable and good enough for
// test paths.
double gauss(Rng& rng) {
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += rng.uniform();
  return s - 6.0;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

PriceSeries make_synthetic_series(const std::string& ticker, const SyntheticSeriesOptions& opt) {
  Rng rng(opt.seed);
  std::vector<PriceBar> bars;
  double close = opt.start_price;
  int sign = rng.uniform() < 0.5 ? 1 : -1;
  std::string quarter;
  for (Date d = opt.start; d <= opt.end; d = d + 1) {
    if (d.iso_weekday() > 5) continue;
    if (const auto q = quarter_label(d); q != quarter) {
      if (!quarter.empty() && rng.uniform() >= opt.persistence) sign = -sign;
      quarter = q;
    }
    const double drift = sign * opt.quarter_drift / 63.0;
    const double open = round4(close * std::exp(0.25 * opt.daily_vol * gauss(rng)));
    const double next = close * std::exp(drift + opt.daily_vol * gauss(rng));
    close = std::max(0.01, round4(next));
    PriceBar bar{d, std::max(0.01, open), close, std::nullopt};
    if (opt.with_volume) bar.volume = std::round(1e6 * (0.5 + rng.uniform()));
    bars.push_back(bar);
  }
  return PriceSeries(ticker, std::move(bars));
}

void memorize_series(SyntheticModelSpec& spec, const PriceSeries& series,
                     const MemorizeOptions& opt) {
  // Last close of each quarter, in order.
  std::vector<std::pair<std::string, double>> quarter_close;
  std::map<std::string, Date> quarter_first;
  for (const auto& bar : series.bars()) {
    const auto q = quarter_label(bar.date);
    if (quarter_close.empty() || quarter_close.back().first != q) {
      quarter_close.emplace_back(q, bar.close);
      quarter_first[q] = bar.date;
    } else {
      quarter_close.back().second = bar.close;
    }
  }
  for (std::size_t i = 1; i < quarter_close.size(); ++i) {
    const auto& [q, c] = quarter_close[i];
    const Date first = quarter_first[q];
    if (Date::from_ymd(first.year(), 3 * first.quarter() - 2, 1) > spec.cutoff) break;
    const double r = c / quarter_close[i - 1].second - 1.0;
    const double strength =
        std::clamp(opt.strength_per_return * std::abs(r), opt.min_strength, opt.max_strength);
    spec.memorized[{series.ticker(), q}] =
        MemoryEntry{r >= 0 ? Direction::kUp : Direction::kDown, strength};
  }
}

SyntheticWorld make_synthetic_world(std::size_t n_memorized, std::uint64_t seed) {
  SyntheticWorld world;
  world.spec.model_id = "synthetic-memorizer";
  world.spec.cutoff = Date::from_ymd(2024, 6, 30);
  world.spec.noise_seed = seed;
  world.spec.activation_keywords = {"recall", "remember", "training data", "memory"};
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < n_memorized; ++i) {
    SyntheticSeriesOptions opt;
    opt.seed = splitmix64(state);
    opt.start_price = 20.0 + 15.0 * static_cast<double>(i);
    const std::string ticker = "MEM" + std::to_string(i + 1);
    world.universe.push_back(make_synthetic_series(ticker, opt));
    memorize_series(world.spec, world.universe.back());
  }
  SyntheticSeriesOptions brand_opt;
  brand_opt.seed = splitmix64(state);
  world.universe.push_back(make_synthetic_series("BRND", brand_opt));
  world.spec.brand_prior["BRND"] = MemoryEntry{Direction::kUp, 2.0};
  return world;
}

}  // namespace fincad
