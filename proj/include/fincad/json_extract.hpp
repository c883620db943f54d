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
#include <string>
#include <string_view>
#include <vector>

namespace fincad {

enum class Action { kBuy, kSell, kHold };
std::string to_string(Action a);
std::optional<Action> action_from_string(std::string_view s);  // case-insensitive

struct TradeDecision {
  Action action = Action::kHold;
  std::int64_t quantity = 0;  // 0 whenever action is hold
  int confidence = 0;         // [0, 100]
  std::string reasoning;      // at most 100 characters
  bool fallback = false;      // produced by retry exhaustion, not by the model
  std::vector<std::string> warnings;

  static TradeDecision hold_fallback();
};

inline constexpr std::size_t kMaxReasoningChars = 100;

// Index one past the closing brace of the first balanced {...} block in
// `text`, ignoring braces inside quoted strings; nullopt while unbalanced.
std::optional<std::size_t> balanced_object_end(std::string_view text);

// Finds the first balanced object that satisfies the decision schema.
// Tolerates code fences, surrounding prose and single-quoted JSON. Throws
// ParseError when nothing usable is found.
TradeDecision extract_json(std::string_view raw);

}  // namespace fincad
