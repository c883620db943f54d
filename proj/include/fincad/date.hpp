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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fincad {

// Proleptic Gregorian calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;

  static Date from_ymd(int year, unsigned month, unsigned day);
  static constexpr Date from_serial(std::int32_t days) { return Date(days); }

  // Strict ISO-8601 "YYYY-MM-DD"; throws DataError(kBadDate) otherwise.
  static Date parse(std::string_view text);
  static std::optional<Date> try_parse(std::string_view text);

  std::int32_t serial() const noexcept { return days_; }
  int year() const;
  unsigned month() const;
  unsigned day() const;
  // 1 = Monday ... 7 = Sunday.
  unsigned iso_weekday() const;
  // 1..4
  unsigned quarter() const { return (month() - 1) / 3 + 1; }

  // Last calendar day of this date's quarter.
  Date quarter_end() const;

  std::string to_string() const;

  Date operator+(std::int32_t days) const { return Date(days_ + days); }
  Date operator-(std::int32_t days) const { return Date(days_ - days); }
  std::int32_t operator-(Date other) const { return days_ - other.days_; }

  friend constexpr auto operator<=>(Date, Date) = default;

 private:
  constexpr explicit Date(std::int32_t days) : days_(days) {}
  std::int32_t days_ = 0;
};

// Calendar quarter label such as "2015-Q2".
std::string quarter_label(Date d);

struct DateRange {
  Date start;
  Date end;  // inclusive

  bool contains(Date d) const { return start <= d && d <= end; }
};

}  // namespace fincad
