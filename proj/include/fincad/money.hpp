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
#include <string>

namespace fincad {

// Ledger currency in integer cents.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }
  static Money from_dollars(double dollars);  // rounds half away from zero

  constexpr std::int64_t cents() const noexcept { return cents_; }
  double dollars() const noexcept { return static_cast<double>(cents_) / 100.0; }

  // "1234.56", no thousands separators.
  std::string to_string() const;

  constexpr Money operator+(Money o) const { return Money(cents_ + o.cents_); }
  constexpr Money operator-(Money o) const { return Money(cents_ - o.cents_); }
  constexpr Money& operator+=(Money o) {
    cents_ += o.cents_;
    return *this;
  }
  constexpr Money& operator-=(Money o) {
    cents_ -= o.cents_;
    return *this;
  }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

// Execution and mark price in integer micro-dollars. Split-adjusted prices can
// sit well below one dollar, so cents are too coarse here.
class Price {
 public:
  constexpr Price() = default;
  static constexpr Price from_micros(std::int64_t micros) { return Price(micros); }
  static Price from_dollars(double dollars);

  constexpr std::int64_t micros() const noexcept { return micros_; }
  double dollars() const noexcept { return static_cast<double>(micros_) / 1e6; }

  friend constexpr auto operator<=>(Price, Price) = default;

 private:
  constexpr explicit Price(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

// shares * price rounded half-up to the cent. This is the single rounding
// point for notionals and position marks.
Money notional(std::int64_t shares, Price price);

}  // namespace fincad
