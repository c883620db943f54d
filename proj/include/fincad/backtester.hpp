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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fincad/cad_decoder.hpp"
#include "fincad/date.hpp"
#include "fincad/json_extract.hpp"
#include "fincad/market_data.hpp"
#include "fincad/money.hpp"
#include "fincad/prompt_forge.hpp"

namespace fincad {

inline constexpr Money kDefaultCapital = Money::from_cents(100'000'00);

struct PortfolioState {
  Money cash;
  std::int64_t shares = 0;
  Money value;  // cash + shares marked at the latest close
};

// 10 bps of notional, rounded half-up to the cent. Throws on negative input.
Money apply_commission(Money notional);

// min(requested, floor(0.01 * adv20)); unchanged when adv20 is absent.
std::int64_t apply_liquidity_cap(std::int64_t requested, std::optional<double> adv20);

// Largest q <= requested with notional(q) + commission <= cash.
std::int64_t fit_to_cash(std::int64_t requested, Price price, Money cash);

// Mean volume of the 20 bars before index `idx`; absent if any is missing or
// there are fewer than 20.
std::optional<double> trailing_adv(const PriceSeries& series, std::size_t idx, int window = 20);

struct Metrics {
  double total_return = 0.0;
  double cagr = 0.0;
  double vol_annualized = 0.0;
  double sharpe = 0.0;
  double sortino = 0.0;
  double max_drawdown = 0.0;
  bool zero_volatility = false;  // Sharpe reported as 0
  bool zero_downside = false;    // Sortino reported as 0
};

// Throws StatsError with fewer than two values.
Metrics compute_metrics(std::span<const double> daily_values, double risk_free = 0.03,
                        int days_per_year = 252);

// Window bars [first, last] with at least one bar; throws DataError(kWindow).
std::pair<std::size_t, std::size_t> window_bounds(const PriceSeries& series, DateRange window);

// All-in purchase at the first window open (commission charged, no liquidity
// cap), held to the last window close.
Money buy_and_hold(const PriceSeries& series, DateRange window, Money capital = kDefaultCapital);

struct DecisionRequest {
  const PriceSeries* series = nullptr;
  Date date;  // execution session; only bars before it are visible
  FinancialSummary summary;
  PortfolioState portfolio;  // marked at the previous close
  std::int64_t max_buy = 0;
  std::int64_t max_sell = 0;
};

struct AgentDecision {
  TradeDecision decision;
  double alpha = 0.0;
  double final_alpha = 0.0;
  int retries = 0;
  std::optional<double> entropy;
};

class DecisionSource {
 public:
  virtual ~DecisionSource() = default;
  // Called once before the first decision of a backtest.
  virtual void begin_run(const std::string& /*ticker*/) {}
  virtual AgentDecision decide(const DecisionRequest& request) = 0;
};

enum class WindowKind { kInSample, kOutOfSample };

struct BacktestConfig {
  Money capital = kDefaultCapital;
  double risk_free = 0.03;
  int days_per_year = 252;
  int rebalance_every = 1;  // trading days between decisions
  WindowKind kind = WindowKind::kInSample;
};

struct BacktestReport {
  std::string ticker;
  std::string model_id;
  MitigationMode mode = MitigationMode::kBaseline;
  DateRange window;
  std::vector<Date> dates;           // dates[0] is the session before the window
  std::vector<Money> daily_values;   // daily_values[0] = capital
  Metrics metrics;
  Money ending_value;
  Money buy_and_hold_ending;
  std::optional<double> mean_alpha_is;
  std::optional<double> mean_alpha_oos;
  int trades = 0;
  int fallbacks = 0;
  std::vector<DecisionTraceRow> decisions;
};

BacktestReport run_backtest(const PriceSeries& series, DecisionSource& agent, DateRange window,
                            MitigationMode mode, const BacktestConfig& config = {});

std::string to_json(const BacktestReport& report);
// "date,value" per day.
std::string equity_csv(const BacktestReport& report);

}  // namespace fincad
