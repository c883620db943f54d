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

#include "fincad/backtester.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "fincad/error.hpp"
#include "fincad/io.hpp"

namespace fincad {
namespace {

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Cash needed to buy q shares at p, fee included.
Money buy_cost(std::int64_t q, Price p) {
  const Money n = notional(q, p);
  return n + apply_commission(n);
}

}  // namespace

Money apply_commission(Money n) {
  if (n.cents() < 0) throw std::invalid_argument("commission on negative notional");
  // 10 bps: cents * 10 / 10000, half-up.
  return Money::from_cents((n.cents() * 10 + 5000) / 10000);
}

std::int64_t apply_liquidity_cap(std::int64_t requested, std::optional<double> adv20) {
  if (requested <= 0) return 0;
  if (!adv20) return requested;
  const double cap = std::floor(0.01 * *adv20);
  if (cap >= static_cast<double>(requested)) return requested;
  return std::max<std::int64_t>(0, static_cast<std::int64_t>(cap));
}

std::int64_t fit_to_cash(std::int64_t requested, Price price, Money cash) {
  if (price.micros() <= 0) throw std::invalid_argument("fit_to_cash: price must be > 0");
  if (requested <= 0 || cash.cents() <= 0) return 0;
  // Fee-free upper bound: cash / price.
  const __int128 bound = static_cast<__int128>(cash.cents()) * 10000 / price.micros();
  std::int64_t hi = static_cast<std::int64_t>(std::min<__int128>(bound, requested));
  std::int64_t lo = 0;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    if (buy_cost(mid, price) <= cash) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

std::optional<double> trailing_adv(const PriceSeries& series, std::size_t idx, int window) {
  if (idx < static_cast<std::size_t>(window)) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = idx - window; i < idx; ++i) {
    if (!series[i].volume) return std::nullopt;
    sum += *series[i].volume;
  }
  return sum / window;
}

Metrics compute_metrics(std::span<const double> v, double risk_free, int days_per_year) {
  if (v.size() < 2) throw StatsError("metrics need at least two daily values");
  Metrics m;
  const double rf = risk_free / days_per_year;
  std::vector<double> r;
  r.reserve(v.size() - 1);
  for (std::size_t i = 1; i < v.size(); ++i) r.push_back(v[i] / v[i - 1] - 1.0);
  const double n = static_cast<double>(r.size());

  double mean = 0.0;
  for (double x : r) mean += x;
  mean /= n;
  const double sd = sample_std(r, mean);
  const double ann = std::sqrt(static_cast<double>(days_per_year));

  m.total_return = v.back() / v.front() - 1.0;
  m.cagr = std::pow(v.back() / v.front(), days_per_year / n) - 1.0;
  m.vol_annualized = sd * ann;
  if (sd > 0.0) {
    m.sharpe = (mean - rf) * ann / sd;
  } else {
    m.zero_volatility = true;
  }
  double down = 0.0;
  for (double x : r) {
    const double e = std::min(0.0, x - rf);
    down += e * e;
  }
  const double dd = std::sqrt(down / n);
  if (dd > 0.0) {
    m.sortino = (mean - rf) * ann / dd;
  } else {
    m.zero_downside = true;
  }
  double peak = v.front();
  for (double x : v) {
    peak = std::max(peak, x);
    if (peak > 0) m.max_drawdown = std::max(m.max_drawdown, (peak - x) / peak);
  }
  m.max_drawdown = std::clamp(m.max_drawdown, 0.0, 1.0);
  return m;
}

std::pair<std::size_t, std::size_t> window_bounds(const PriceSeries& series, DateRange window) {
  if (series.empty()) throw DataError(DataErrorKind::kWindow, "empty price series");
  if (window.end < window.start) {
    throw DataError(DataErrorKind::kWindow, "window end precedes its start");
  }
  if (window.start < series[0].date) {
    throw DataError(DataErrorKind::kWindow, series.ticker() + ": window starts " +
                                                window.start.to_string() +
                                                " before the series does");
  }
  const std::size_t first = series.count_before(window.start);
  const std::size_t stop = series.count_before(window.end + 1);
  if (first >= stop) {
    throw DataError(DataErrorKind::kWindow, series.ticker() + ": no trading days in window");
  }
  if (first == 0) {
    throw DataError(DataErrorKind::kWindow,
                    series.ticker() + ": window needs at least one bar before its start");
  }
  return {first, stop - 1};
}

Money buy_and_hold(const PriceSeries& series, DateRange window, Money capital) {
  const auto [first, last] = window_bounds(series, window);
  const Price open = Price::from_dollars(series[first].open);
  const std::int64_t q =
      fit_to_cash(std::numeric_limits<std::int64_t>::max() / 2, open, capital);
  const Money cash = capital - buy_cost(q, open);
  return cash + notional(q, Price::from_dollars(series[last].close));
}

BacktestReport run_backtest(const PriceSeries& series, DecisionSource& agent, DateRange window,
                            MitigationMode mode, const BacktestConfig& config) {
  if (config.rebalance_every < 1) throw UsageError("rebalance_every must be >= 1");
  const auto [first, last] = window_bounds(series, window);

  BacktestReport rep;
  rep.ticker = series.ticker();
  rep.mode = mode;
  rep.window = window;
  rep.buy_and_hold_ending = buy_and_hold(series, window, config.capital);

  Money cash = config.capital;
  std::int64_t shares = 0;
  rep.dates.push_back(series[first - 1].date);
  rep.daily_values.push_back(config.capital);

  agent.begin_run(series.ticker());
  double alpha_sum = 0.0;
  int decisions = 0;
  for (std::size_t i = first; i <= last; ++i) {
    const PriceBar& bar = series[i];
    if ((i - first) % static_cast<std::size_t>(config.rebalance_every) == 0) {
      const Price prev_close = Price::from_dollars(series[i - 1].close);
      const auto adv = trailing_adv(series, i);

      DecisionRequest req;
      req.series = &series;
      req.date = bar.date;
      req.summary = build_summary(series, bar.date);
      req.portfolio = {cash, shares, cash + notional(shares, prev_close)};
      req.max_buy = apply_liquidity_cap(
          fit_to_cash(std::numeric_limits<std::int64_t>::max() / 2, prev_close, cash), adv);
      req.max_sell = apply_liquidity_cap(shares, adv);

      const AgentDecision ad = agent.decide(req);
      const TradeDecision& d = ad.decision;
      const Price open = Price::from_dollars(bar.open);
      std::int64_t filled = 0;
      if (d.action == Action::kBuy) {
        filled = fit_to_cash(apply_liquidity_cap(d.quantity, adv), open, cash);
        cash -= buy_cost(filled, open);
        shares += filled;
      } else if (d.action == Action::kSell) {
        filled = apply_liquidity_cap(std::min(d.quantity, shares), adv);
        const Money n = notional(filled, open);
        cash += n - apply_commission(n);
        shares -= filled;
      }
      if (filled > 0) ++rep.trades;
      if (d.fallback) ++rep.fallbacks;
      alpha_sum += ad.alpha;
      ++decisions;
      rep.decisions.push_back({series.ticker(), bar.date, ad.alpha, ad.final_alpha, ad.retries,
                               d.action, filled, d.confidence, d.fallback});
    }
    rep.dates.push_back(bar.date);
    rep.daily_values.push_back(cash + notional(shares, Price::from_dollars(bar.close)));
  }

  std::vector<double> values;
  values.reserve(rep.daily_values.size());
  for (Money m : rep.daily_values) values.push_back(m.dollars());
  rep.metrics = compute_metrics(values, config.risk_free, config.days_per_year);
  rep.ending_value = rep.daily_values.back();
  const double mean_alpha = decisions > 0 ? alpha_sum / decisions : 0.0;
  if (config.kind == WindowKind::kInSample) {
    rep.mean_alpha_is = mean_alpha;
  } else {
    rep.mean_alpha_oos = mean_alpha;
  }
  return rep;
}

std::string to_json(const BacktestReport& r) {
  nlohmann::ordered_json j;
  j["ticker"] = r.ticker;
  j["model_id"] = r.model_id;
  j["mode"] = to_string(r.mode);
  j["window"] = {{"start", r.window.start.to_string()}, {"end", r.window.end.to_string()}};
  j["ending_value"] = r.ending_value.dollars();
  j["buy_and_hold_ending"] = r.buy_and_hold_ending.dollars();
  j["total_return"] = r.metrics.total_return;
  j["cagr"] = r.metrics.cagr;
  j["vol_annualized"] = r.metrics.vol_annualized;
  j["sharpe"] = r.metrics.sharpe;
  j["sortino"] = r.metrics.sortino;
  j["max_drawdown"] = r.metrics.max_drawdown;
  j["zero_volatility"] = r.metrics.zero_volatility;
  j["zero_downside"] = r.metrics.zero_downside;
  j["mean_alpha_is"] = r.mean_alpha_is ? nlohmann::ordered_json(*r.mean_alpha_is) : nullptr;
  j["mean_alpha_oos"] = r.mean_alpha_oos ? nlohmann::ordered_json(*r.mean_alpha_oos) : nullptr;
  j["trades"] = r.trades;
  j["fallbacks"] = r.fallbacks;
  j["decisions"] = r.decisions.size();
  nlohmann::ordered_json values = nlohmann::ordered_json::array();
  for (Money m : r.daily_values) values.push_back(m.dollars());
  j["daily_values"] = std::move(values);
  return j.dump(2) + "\n";
}

std::string equity_csv(const BacktestReport& r) {
  std::string out = "date,value\n";
  for (std::size_t i = 0; i < r.dates.size(); ++i) {
    out += r.dates[i].to_string() + "," + r.daily_values[i].to_string() + "\n";
  }
  return out;
}

}  // namespace fincad
