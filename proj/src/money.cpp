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

#include "fincad/money.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace fincad {

Money Money::from_dollars(double dollars) {
  return Money(static_cast<std::int64_t>(std::llround(dollars * 100.0)));
}

std::string Money::to_string() const {
  const std::int64_t a = std::llabs(cents_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents_ < 0 ? "-" : "",
                static_cast<long long>(a / 100), static_cast<long long>(a % 100));
  return buf;
}

Price Price::from_dollars(double dollars) {
  return Price(static_cast<std::int64_t>(std::llround(dollars * 1e6)));
}

Money notional(std::int64_t shares, Price price) {
  if (shares < 0 || price.micros() < 0) {
    throw std::invalid_argument("notional: negative shares or price");
  }
  // micros * shares / 10^4 = cents; 128-bit intermediate keeps this exact.
  const __int128 raw = static_cast<__int128>(shares) * price.micros();
  const __int128 cents = (raw + 5000) / 10000;
  return Money::from_cents(static_cast<std::int64_t>(cents));
}

}  // namespace fincad
