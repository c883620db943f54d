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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "fincad/backtester.hpp"
#include "fincad/error.hpp"
#include "fincad/rng.hpp"
#include "fincad/synthetic_world.hpp"
#include "../support/ledger_oracle.hpp"

using namespace fincad;
using oracle::Ledger;
using oracle::RandomTrader;

namespace {

class AlwaysHold final : public DecisionSource {
 public:
  AgentDecision decide(const DecisionRequest&) override { return {}; }
};

PriceSeries series(std::uint64_t seed) {
  SyntheticSeriesOptions o;
  o.seed = seed;
  o.start = Date::from_ymd(2019, 1, 1);
  o.end = Date::from_ymd(2021, 12, 31);
  return make_synthetic_series("RND", o);
}

}  // namespace

TEST_CASE("commission, liquidity cap and cash fitting") {
  CHECK(apply_commission(Money::from_cents(1'000'000)).cents() == 1000);
  CHECK(apply_commission(Money::from_cents(5)).cents() == 0);
  CHECK(apply_commission(Money::from_cents(500)).cents() == 1);  // 0.5 cents rounds up
  CHECK(apply_commission(Money::from_cents(499)).cents() == 0);
  CHECK_THROWS_AS(apply_commission(Money::from_cents(-1)), std::invalid_argument);

  CHECK(apply_liquidity_cap(50'000, 1'000'000.0) == 10'000);
  CHECK(apply_liquidity_cap(500, 1'000'000.0) == 500);
  CHECK(apply_liquidity_cap(500, std::nullopt) == 500);
  CHECK(apply_liquidity_cap(500, 1'099.0) == 10);

  // 100 shares at 10.00 cost 1000.00 + 1.00 fee.
  CHECK(fit_to_cash(1000, Price::from_dollars(10.0), Money::from_cents(100'100)) == 100);
  CHECK(fit_to_cash(1000, Price::from_dollars(10.0), Money::from_cents(100'099)) == 99);
  CHECK(fit_to_cash(50, Price::from_dollars(10.0), Money::from_cents(100'100)) == 50);
  CHECK(fit_to_cash(10, Price::from_dollars(10.0), Money::from_cents(0)) == 0);
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    Ledger l;
    l.cash = static_cast<std::int64_t>(rng.below(10'000'000'00));
    const std::int64_t px = 1 + static_cast<std::int64_t>(rng.below(500'000'000));
    CHECK(fit_to_cash(std::numeric_limits<std::int64_t>::max() / 2, Price::from_micros(px),
                      Money::from_cents(l.cash)) == l.affordable(px));
  }
}

TEST_CASE("trailing ADV uses the 20 bars before the index") {
  const auto s = series(3);
  CHECK_FALSE(trailing_adv(s, 19).has_value());
  double sum = 0;
  for (std::size_t k = 10; k < 30; ++k) sum += *s[k].volume;
  CHECK(*trailing_adv(s, 30) == doctest::Approx(sum / 20.0));
}

TEST_CASE("randomised trade sequences keep the ledger identity exactly") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto s = series(1000 + seed);
    RandomTrader t(seed, s);
    const DateRange w{Date::from_ymd(2020, 2, 1), Date::from_ymd(2020, 9, 30)};
    const auto rep = run_backtest(s, t, w, MitigationMode::kBaseline);
    CHECK(t.ok);
    const auto [first, last] = window_bounds(s, w);
    CHECK(rep.ending_value.cents() == t.ledger.mark(Ledger::micros(s[last].close)));
    CHECK(rep.daily_values.front() == kDefaultCapital);
    CHECK(rep.dates.front() == s[first - 1].date);
    CHECK(rep.daily_values.size() == last - first + 2);
  }
}

TEST_CASE("always-hold ends at the starting capital") {
  const auto s = series(9);
  AlwaysHold h;
  const auto rep =
      run_backtest(s, h, {Date::from_ymd(2020, 1, 1), Date::from_ymd(2020, 12, 31)}, MitigationMode::kBaseline);
  CHECK(rep.ending_value.cents() == 100'000'00);
  CHECK(rep.trades == 0);
  CHECK(rep.metrics.zero_volatility);
  CHECK(rep.metrics.sharpe == 0.0);
  CHECK(rep.mean_alpha_is.has_value());
  CHECK_FALSE(rep.mean_alpha_oos.has_value());
}

TEST_CASE("decisions see only prior bars") {
  class Peek final : public DecisionSource {
   public:
    AgentDecision decide(const DecisionRequest& r) override {
      ok &= r.summary.as_of == r.date;
      ok &= r.summary.latest_close == (*r.series)[r.series->count_before(r.date) - 1].close;
      return {};
    }
    bool ok = true;
  } peek;
  run_backtest(series(4), peek, {Date::from_ymd(2020, 3, 1), Date::from_ymd(2020, 4, 1)},
               MitigationMode::kBaseline);
  CHECK(peek.ok);
}

TEST_CASE("buy and hold reference") {
  const auto s = series(2);
  const DateRange w{Date::from_ymd(2020, 1, 1), Date::from_ymd(2020, 6, 30)};
  const auto [first, last] = window_bounds(s, w);
  Ledger l;
  const auto open = Ledger::micros(s[first].open);
  const auto q = l.affordable(open);
  const auto n = Ledger::value_cents(q, open);
  l.cash -= n + Ledger::fee(n);
  l.shares = q;
  CHECK(buy_and_hold(s, w).cents() == l.mark(Ledger::micros(s[last].close)));
}

TEST_CASE("metrics against hand-computed values") {
  const std::vector<double> v{100.0, 110.0, 99.0, 108.9};
  const auto m = compute_metrics(v, 0.0, 252);
  const double r[3] = {0.1, -0.1, 0.1};
  const double mean = 0.1 / 3.0;
  double ss = 0;
  for (double x : r) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / 2.0);
  CHECK(m.total_return == doctest::Approx(0.089));
  CHECK(m.sharpe == doctest::Approx(mean / sd * std::sqrt(252.0)));
  CHECK(m.sortino == doctest::Approx(mean / std::sqrt(0.01 / 3.0) * std::sqrt(252.0)));
  CHECK(m.max_drawdown == doctest::Approx(0.1));
  CHECK(m.cagr == doctest::Approx(std::pow(1.089, 252.0 / 3.0) - 1.0));
  CHECK(m.vol_annualized == doctest::Approx(sd * std::sqrt(252.0)));

  const auto up = compute_metrics(std::vector<double>{1.0, 1.1, 1.21}, 0.0);
  CHECK(up.zero_downside);
  CHECK(up.sortino == 0.0);
  CHECK(up.max_drawdown == 0.0);
  CHECK_THROWS_AS(compute_metrics(std::vector<double>{1.0}), StatsError);
}

TEST_CASE("window validation") {
  const auto s = series(1);
  auto kind = [&](DateRange w) {
    try {
      window_bounds(s, w);
    } catch (const DataError& e) {
      return e.kind();
    }
    return DataErrorKind::kIo;
  };
  CHECK(kind({Date::from_ymd(2018, 1, 1), Date::from_ymd(2019, 6, 1)}) == DataErrorKind::kWindow);
  CHECK(kind({Date::from_ymd(2019, 1, 1), Date::from_ymd(2019, 1, 31)}) == DataErrorKind::kWindow);
  CHECK(kind({Date::from_ymd(2020, 6, 6), Date::from_ymd(2020, 6, 7)}) == DataErrorKind::kWindow);
  CHECK(kind({Date::from_ymd(2020, 6, 1), Date::from_ymd(2020, 5, 1)}) == DataErrorKind::kWindow);
}

TEST_CASE("report serialisation") {
  const auto s = series(8);
  AlwaysHold h;
  BacktestConfig cfg;
  cfg.kind = WindowKind::kOutOfSample;
  const auto rep = run_backtest(s, h, {Date::from_ymd(2020, 1, 1), Date::from_ymd(2020, 1, 31)},
                                MitigationMode::kFincad, cfg);
  CHECK(*rep.mean_alpha_oos == 0.0);
  const auto csv = equity_csv(rep);
  CHECK(csv.starts_with("date,value\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rep.dates.size() + 1));
  CHECK(to_json(rep).find("\"mode\": \"fincad\"") != std::string::npos);
}
