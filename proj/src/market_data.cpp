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

#include "fincad/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <span>

#include <json.hpp>

#include "fincad/error.hpp"
#include "fincad/io.hpp"
#include "fincad/rng.hpp"

namespace fincad {

PriceSeries::PriceSeries(std::string ticker, std::vector<PriceBar> bars)
    : ticker_(std::move(ticker)), bars_(std::move(bars)) {
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    const PriceBar& b = bars_[i];
    const std::string where = ticker_ + " " + b.date.to_string();
    if (!(b.open > 0.0) || !std::isfinite(b.open)) {
      throw DataError(DataErrorKind::kInvalidValue, where + ": open must be > 0");
    }
    if (!(b.close > 0.0) || !std::isfinite(b.close)) {
      throw DataError(DataErrorKind::kInvalidValue, where + ": close must be > 0");
    }
    if (b.volume && (!(*b.volume >= 0.0) || !std::isfinite(*b.volume))) {
      throw DataError(DataErrorKind::kInvalidValue, where + ": volume must be >= 0");
    }
    if (i > 0) {
      if (bars_[i - 1].date == b.date) {
        throw DataError(DataErrorKind::kDuplicateDate,
                        ticker_ + ": duplicate date " + b.date.to_string());
      }
      if (bars_[i - 1].date > b.date) {
        throw DataError(DataErrorKind::kInvalidValue,
                        ticker_ + ": bars out of order at " + b.date.to_string());
      }
    }
  }
}

std::optional<std::size_t> PriceSeries::index_of(Date d) const {
  const std::size_t i = count_before(d);
  if (i < bars_.size() && bars_[i].date == d) return i;
  return std::nullopt;
}

std::size_t PriceSeries::count_before(Date d) const {
  const auto it = std::lower_bound(bars_.begin(), bars_.end(), d,
                                   [](const PriceBar& b, Date x) { return b.date < x; });
  return static_cast<std::size_t>(it - bars_.begin());
}

namespace {

double parse_number(const std::string& field, const std::string& what, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v)) {
    throw DataError(DataErrorKind::kBadNumber, "line " + std::to_string(line) +
                                                   ": unparseable " + what + " '" +
                                                   field + "'");
  }
  return v;
}

}  // namespace

PriceSeries parse_price_csv(const std::string& text, const std::string& ticker) {
  const auto lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) {
    throw DataError(DataErrorKind::kEmptyFile, ticker + ": price file is empty");
  }

  const auto header = split_csv_row(lines[first]);
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string h = header[i];
      std::transform(h.begin(), h.end(), h.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (h == name) return i;
    }
    return std::nullopt;
  };
  const auto date_col = column("date");
  const auto open_col = column("open");
  const auto close_col = column("close");
  const auto volume_col = column("volume");
  for (auto [col, name] : {std::pair{date_col, "date"}, std::pair{open_col, "open"},
                           std::pair{close_col, "close"}}) {
    if (!col) {
      throw DataError(DataErrorKind::kMissingColumn,
                      ticker + ": missing required column '" + name + "'");
    }
  }

  std::vector<PriceBar> bars;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_csv_row(lines[li]);
    const std::size_t line_no = li + 1;
    const std::size_t needed =
        std::max({*date_col, *open_col, *close_col, volume_col.value_or(0)}) + 1;
    if (fields.size() < needed) {
      throw DataError(DataErrorKind::kMissingColumn,
                      "line " + std::to_string(line_no) + ": expected " +
                          std::to_string(needed) + " fields, got " +
                          std::to_string(fields.size()));
    }
    PriceBar bar;
    const auto date = Date::try_parse(fields[*date_col]);
    if (!date) {
      throw DataError(DataErrorKind::kBadDate, "line " + std::to_string(line_no) +
                                                   ": unparseable date '" +
                                                   fields[*date_col] + "'");
    }
    bar.date = *date;
    bar.open = parse_number(fields[*open_col], "open", line_no);
    bar.close = parse_number(fields[*close_col], "close", line_no);
    if (volume_col && !fields[*volume_col].empty()) {
      bar.volume = parse_number(fields[*volume_col], "volume", line_no);
    }
    bars.push_back(bar);
  }
  if (bars.empty()) {
    throw DataError(DataErrorKind::kEmptyFile, ticker + ": price file has no data rows");
  }
  std::stable_sort(bars.begin(), bars.end(),
                   [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < bars.size(); ++i) {
    if (bars[i].date == bars[i - 1].date) {
      throw DataError(DataErrorKind::kDuplicateDate,
                      ticker + ": duplicate date " + bars[i].date.to_string());
    }
  }
  return PriceSeries(ticker, std::move(bars));
}

std::string to_price_csv(const PriceSeries& series) {
  const bool vol = std::all_of(series.bars().begin(), series.bars().end(),
                               [](const PriceBar& b) { return b.volume.has_value(); });
  std::string out = vol ? "date,open,close,volume\n" : "date,open,close\n";
  for (const auto& b : series.bars()) {
    out += b.date.to_string() + "," + format_double(b.open) + "," + format_double(b.close);
    if (vol) out += "," + format_double(*b.volume);
    out += "\n";
  }
  return out;
}

PriceSeries load_price_csv(const std::filesystem::path& path,
                           std::optional<std::string> ticker) {
  return parse_price_csv(read_file(path), ticker.value_or(path.stem().string()));
}

FinancialSummary build_summary(const PriceSeries& series, Date as_of) {
  const std::size_t n = series.count_before(as_of);
  if (n < static_cast<std::size_t>(kMinSummaryBars)) {
    throw DataError(DataErrorKind::kInsufficientHistory,
                    series.ticker() + ": " + std::to_string(n) + " bars before " +
                        as_of.to_string() + ", need at least " +
                        std::to_string(kMinSummaryBars));
  }
  const std::span<const PriceBar> prior(series.bars().data(), n);
  auto close_at = [&](std::size_t i) { return prior[i].close; };

  FinancialSummary s;
  s.ticker = series.ticker();
  s.as_of = as_of;
  s.latest_close = close_at(n - 1);

  const std::pair<const char*, int> windows[] = {
      {"1m", kWindow1m}, {"3m", kWindow3m}, {"6m", kWindow6m}, {"1y", kWindow1y}};
  for (auto [name, w] : windows) {
    if (n > static_cast<std::size_t>(w)) {
      s.trailing_returns[name] = s.latest_close / close_at(n - 1 - w) - 1.0;
    }
  }

  for (int w : {20, 50, 200}) {
    if (n >= static_cast<std::size_t>(w)) {
      double sum = 0.0;
      for (std::size_t i = n - w; i < n; ++i) sum += close_at(i);
      s.sma[w] = sum / w;
    }
  }
  // EMA seeded with the SMA of the first `w` available closes.
  for (int w : {12, 26}) {
    if (n >= static_cast<std::size_t>(w)) {
      double ema = 0.0;
      for (int i = 0; i < w; ++i) ema += close_at(i);
      ema /= w;
      const double k = 2.0 / (w + 1.0);
      for (std::size_t i = w; i < n; ++i) ema = close_at(i) * k + ema * (1.0 - k);
      s.ema[w] = ema;
    }
  }

  // Sample std of daily simple returns over up to one year.
  const std::size_t ret_count = std::min<std::size_t>(n - 1, kWindow1y);
  std::vector<double> rets;
  rets.reserve(ret_count);
  for (std::size_t i = n - ret_count; i < n; ++i) {
    rets.push_back(close_at(i) / close_at(i - 1) - 1.0);
  }
  if (rets.size() >= 2) {
    const double mean = std::accumulate(rets.begin(), rets.end(), 0.0) / rets.size();
    double ss = 0.0;
    for (double r : rets) ss += (r - mean) * (r - mean);
    s.realized_vol_annualized = std::sqrt(ss / (rets.size() - 1)) * std::sqrt(252.0);
  }

  const std::size_t range_len = std::min<std::size_t>(n, kWindow1y);
  s.high_52w = close_at(n - range_len);
  s.low_52w = close_at(n - range_len);
  for (std::size_t i = n - range_len; i < n; ++i) {
    s.high_52w = std::max(s.high_52w, close_at(i));
    s.low_52w = std::min(s.low_52w, close_at(i));
  }
  s.range_position = s.high_52w > s.low_52w
                         ? (s.latest_close - s.low_52w) / (s.high_52w - s.low_52w)
                         : 0.5;

  // A positive session closes above its open.
  bool all_volume = true;
  double dollar_volume = 0.0;
  for (std::size_t i = n - kWindow1m; i < n; ++i) {
    if (prior[i].close > prior[i].open) ++s.positive_days_21;
    if (prior[i].volume) {
      dollar_volume += prior[i].close * *prior[i].volume;
    } else {
      all_volume = false;
    }
  }
  if (all_volume) s.avg_dollar_volume_21 = dollar_volume / kWindow1m;
  return s;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.2f%%", v * 100.0);
  return buf;
}

}  // namespace

std::string render_summary(const FinancialSummary& s) {
  std::string out;
  out += "Latest close: " + fixed(s.latest_close, 2) + "\n";
  for (const char* w : {"1m", "3m", "6m", "1y"}) {
    if (auto it = s.trailing_returns.find(w); it != s.trailing_returns.end()) {
      out += std::string("Trailing return ") + w + ": " + percent(it->second) + "\n";
    }
  }
  for (const auto& [w, v] : s.sma) out += "SMA " + std::to_string(w) + ": " + fixed(v, 2) + "\n";
  for (const auto& [w, v] : s.ema) out += "EMA " + std::to_string(w) + ": " + fixed(v, 2) + "\n";
  out += "Realized volatility (annualized): " + fixed(s.realized_vol_annualized * 100.0, 2) +
         "%\n";
  out += "52-week high: " + fixed(s.high_52w, 2) + "\n";
  out += "52-week low: " + fixed(s.low_52w, 2) + "\n";
  out += "Position in 52-week range: " + fixed(s.range_position, 2) + "\n";
  out += "Positive days (last 21 sessions): " + std::to_string(s.positive_days_21);
  if (s.avg_dollar_volume_21) {
    out += "\nAverage dollar volume (21 days): " + fixed(*s.avg_dollar_volume_21, 0);
  }
  return out;
}

double forward_return(const PriceSeries& series, Date t, int horizon) {
  const auto idx = series.index_of(t);
  if (!idx) {
    throw DataError(DataErrorKind::kNotTradingDay,
                    series.ticker() + ": " + t.to_string() + " is not a trading day");
  }
  if (horizon < 1 || *idx + static_cast<std::size_t>(horizon) >= series.size()) {
    throw DataError(DataErrorKind::kHorizon,
                    series.ticker() + ": fewer than " + std::to_string(horizon) +
                        " bars after " + t.to_string());
  }
  const double p0 = series[*idx].close;
  return (series[*idx + horizon].close - p0) / p0;
}

std::string to_string(Direction d) { return d == Direction::kUp ? "up" : "down"; }

Direction direction_from_string(const std::string& s) {
  if (s == "up") return Direction::kUp;
  if (s == "down") return Direction::kDown;
  throw DataError(DataErrorKind::kInvalidValue, "unknown direction '" + s + "'");
}

std::vector<CalibrationExample> calibration_candidates(
    const std::vector<PriceSeries>& universe, const CalibrationOptions& options) {
  std::vector<CalibrationExample> out;
  for (const PriceSeries& series : universe) {
    if (series.empty()) continue;
    // Walk calendar quarters overlapping the period.
    Date qe = options.period.start.quarter_end();
    while (qe <= options.period.end.quarter_end()) {
      const Date q_start = Date::from_ymd(qe.year(), qe.month() - 2, 1);
      const Date last = std::min(qe, options.period.end);
      const std::size_t upto = series.count_before(last + 1);
      if (upto > 0) {
        const std::size_t idx = upto - 1;
        const Date t = series[idx].date;
        const bool in_quarter = t >= q_start && t >= options.period.start;
        if (in_quarter && idx + options.horizon < series.size()) {
          const double r = forward_return(series, t, options.horizon);
          if (std::abs(r) >= options.min_abs_return) {
            out.push_back({series.ticker(), t, r > 0.0 ? Direction::kUp : Direction::kDown, r});
          }
        }
      }
      qe = (qe + 1).quarter_end();
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.ticker, a.date) < std::tie(b.ticker, b.date);
  });
  return out;
}

CalibrationSplit build_calibration_dataset(const std::vector<PriceSeries>& universe,
                                           const CalibrationOptions& options) {
  if (universe.empty()) {
    throw DataError(DataErrorKind::kEmptyDataset, "calibration universe is empty");
  }
  const auto candidates = calibration_candidates(universe, options);
  std::vector<CalibrationExample> ups;
  std::vector<CalibrationExample> downs;
  for (const auto& c : candidates) (c.label == Direction::kUp ? ups : downs).push_back(c);

  const std::size_t per_class = std::min({ups.size(), downs.size(), options.cap / 2});
  if (per_class == 0) {
    throw DataError(DataErrorKind::kEmptyDataset,
                    "no calibration examples survive filtering (" +
                        std::to_string(ups.size()) + " up, " +
                        std::to_string(downs.size()) + " down)");
  }
  // Deterministic downsampling: keep the first k in (ticker, date) order.
  ups.resize(per_class);
  downs.resize(per_class);

  Rng rng(options.seed);
  rng.shuffle(std::span(ups));
  rng.shuffle(std::span(downs));
  const auto n_train = static_cast<std::size_t>(
      std::llround(options.train_fraction * static_cast<double>(per_class)));

  CalibrationSplit split;
  for (const auto* cls : {&ups, &downs}) {
    split.train.insert(split.train.end(), cls->begin(), cls->begin() + n_train);
    split.val.insert(split.val.end(), cls->begin() + n_train, cls->end());
  }
  auto by_key = [](const auto& a, const auto& b) {
    return std::tie(a.ticker, a.date) < std::tie(b.ticker, b.date);
  };
  std::sort(split.train.begin(), split.train.end(), by_key);
  std::sort(split.val.begin(), split.val.end(), by_key);
  return split;
}

std::string to_jsonl(const std::vector<CalibrationExample>& examples) {
  std::string out;
  for (const auto& e : examples) {
    nlohmann::ordered_json j;
    j["ticker"] = e.ticker;
    j["date"] = e.date.to_string();
    j["label"] = to_string(e.label);
    j["forward_return"] = e.forward_return;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<CalibrationExample> calibration_from_jsonl(const std::string& text) {
  std::vector<CalibrationExample> out;
  for (const auto& line : split_lines(text)) {
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("ticker").get<std::string>(),
                     Date::parse(j.at("date").get<std::string>()),
                     direction_from_string(j.at("label").get<std::string>()),
                     j.at("forward_return").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataErrorKind::kInvalidValue,
                      std::string("bad calibration record: ") + e.what());
    }
  }
  return out;
}

}  // namespace fincad
