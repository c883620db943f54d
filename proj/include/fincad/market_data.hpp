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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fincad/date.hpp"

namespace fincad {

struct PriceBar {
  Date date;
  double open = 0.0;   // split/dividend adjusted
  double close = 0.0;  // split/dividend adjusted
  std::optional<double> volume;
};

// Daily bars for one ticker, ascending by date with no duplicates. Immutable
// once constructed.
class PriceSeries {
 public:
  PriceSeries() = default;
  // Validates every PriceBar/PriceSeries invariant; throws DataError.
  PriceSeries(std::string ticker, std::vector<PriceBar> bars);

  const std::string& ticker() const noexcept { return ticker_; }
  const std::vector<PriceBar>& bars() const noexcept { return bars_; }
  std::size_t size() const noexcept { return bars_.size(); }
  bool empty() const noexcept { return bars_.empty(); }
  const PriceBar& operator[](std::size_t i) const { return bars_[i]; }

  // Index of the bar dated exactly `d`.
  std::optional<std::size_t> index_of(Date d) const;
  // Number of bars with date < d (also the index of the first bar >= d).
  std::size_t count_before(Date d) const;

 private:
  std::string ticker_;
  std::vector<PriceBar> bars_;
};

// Reads `date,open,close[,volume]` with a header row (any column order). The
// ticker defaults to the file stem.
PriceSeries load_price_csv(const std::filesystem::path& path,
                           std::optional<std::string> ticker = std::nullopt);
PriceSeries parse_price_csv(const std::string& text, const std::string& ticker);
// Inverse of parse_price_csv; the volume column is written only when every bar
// has one.
std::string to_price_csv(const PriceSeries& series);

// Trading-day windows used by the summary.
inline constexpr int kWindow1m = 21;
inline constexpr int kWindow3m = 63;
inline constexpr int kWindow6m = 126;
inline constexpr int kWindow1y = 252;
inline constexpr int kMinSummaryBars = 21;

struct FinancialSummary {
  std::string ticker;
  Date as_of;
  double latest_close = 0.0;
  // Keys "1m", "3m", "6m", "1y"; a window is omitted when history is short.
  std::map<std::string, double> trailing_returns;
  std::map<int, double> sma;  // windows 20, 50, 200
  std::map<int, double> ema;  // windows 12, 26
  double realized_vol_annualized = 0.0;
  double high_52w = 0.0;
  double low_52w = 0.0;
  double range_position = 0.5;
  int positive_days_21 = 0;
  std::optional<double> avg_dollar_volume_21;
};

// Uses only bars dated strictly before `as_of`. Throws
// DataError(kInsufficientHistory) with fewer than 21 such bars.
FinancialSummary build_summary(const PriceSeries& series, Date as_of);

// Human-readable block that fills the {financial_summary} prompt slot.
std::string render_summary(const FinancialSummary& summary);

// (close[t+h] - close[t]) / close[t]. `t` must be a trading day in the series.
double forward_return(const PriceSeries& series, Date t, int horizon = 63);

enum class Direction { kUp, kDown };
std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

struct CalibrationExample {
  std::string ticker;
  Date date;
  Direction label = Direction::kUp;
  double forward_return = 0.0;

  friend bool operator==(const CalibrationExample&, const CalibrationExample&) = default;
};

struct CalibrationOptions {
  DateRange period{Date::from_ymd(2005, 1, 1), Date::from_ymd(2015, 12, 31)};
  std::size_t cap = 200;
  double train_fraction = 0.8;
  double min_abs_return = 0.05;
  int horizon = 63;
  std::uint64_t seed = 42;
};

struct CalibrationSplit {
  std::vector<CalibrationExample> train;
  std::vector<CalibrationExample> val;
};

// Quarter-end candidates -> magnitude filter -> class balance -> cap -> split.
std::vector<CalibrationExample> calibration_candidates(
    const std::vector<PriceSeries>& universe, const CalibrationOptions& options);
CalibrationSplit build_calibration_dataset(const std::vector<PriceSeries>& universe,
                                           const CalibrationOptions& options = {});

std::string to_jsonl(const std::vector<CalibrationExample>& examples);
std::vector<CalibrationExample> calibration_from_jsonl(const std::string& text);

}  // namespace fincad
