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

#include "fincad/json_extract.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <json.hpp>

#include "fincad/error.hpp"

namespace fincad {
namespace {

using json = nlohmann::json;

// Brace scan starting at text[start] == '{'. Honours both quote styles so a
// single-quoted blob is delimited the same way as a JSON one.
std::optional<std::size_t> block_end(std::string_view text, std::size_t start) {
  int depth = 0;
  char quote = 0;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (quote) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

// 'single' quoted JSON -> "double" quoted, leaving apostrophes inside double
// quoted strings alone.
std::string requote(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote == '"') {
      out += c;
      if (c == '\\' && i + 1 < s.size()) out += s[++i];
      else if (c == '"') quote = 0;
    } else if (quote == '\'') {
      if (c == '\\' && i + 1 < s.size()) {
        out += c;
        out += s[++i];
      } else if (c == '\'') {
        out += '"';
        quote = 0;
      } else if (c == '"') {
        out += "\\\"";
      } else {
        out += c;
      }
    } else if (c == '\'') {
      out += '"';
      quote = '\'';
    } else {
      if (c == '"') quote = '"';
      out += c;
    }
  }
  return out;
}

std::optional<json> parse_block(std::string_view block) {
  for (const std::string& candidate : {std::string(block), requote(block)}) {
    try {
      json j = json::parse(candidate);
      if (j.is_object()) return j;
    } catch (const json::exception&) {
    }
  }
  return std::nullopt;
}

std::optional<std::int64_t> as_count(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) {
      return static_cast<std::int64_t>(d);
    }
    return std::nullopt;
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (!s.empty() && s.size() < 16 && std::all_of(s.begin(), s.end(), ::isdigit)) {
      return std::stoll(s);
    }
  }
  return std::nullopt;
}

// Schema check and repairs. Returns nullopt if the object is not a decision.
std::optional<TradeDecision> to_decision(const json& j) {
  TradeDecision d;
  if (!j.contains("action") || !j["action"].is_string()) return std::nullopt;
  const auto action = action_from_string(j["action"].get<std::string>());
  if (!action) return std::nullopt;
  d.action = *action;

  if (j.contains("quantity") && !j["quantity"].is_null()) {
    const auto q = as_count(j["quantity"]);
    if (!q || *q < 0) return std::nullopt;
    d.quantity = *q;
  } else if (d.action != Action::kHold) {
    return std::nullopt;
  }
  if (d.action == Action::kHold && d.quantity != 0) {
    d.warnings.push_back("hold with quantity " + std::to_string(d.quantity) + " set to 0");
    d.quantity = 0;
  }

  if (j.contains("confidence") && j["confidence"].is_number()) {
    const double c = j["confidence"].get<double>();
    if (!std::isfinite(c)) return std::nullopt;
    const double clamped = std::clamp(std::round(c), 0.0, 100.0);
    if (clamped != c) d.warnings.push_back("confidence clamped into [0, 100]");
    d.confidence = static_cast<int>(clamped);
  } else {
    d.warnings.push_back("missing confidence set to 0");
  }

  if (j.contains("reasoning") && j["reasoning"].is_string()) {
    d.reasoning = j["reasoning"].get<std::string>();
    if (d.reasoning.size() > kMaxReasoningChars) {
      d.reasoning.resize(kMaxReasoningChars);
      d.warnings.push_back("reasoning truncated");
    }
  }
  return d;
}

}  // namespace

std::string to_string(Action a) {
  switch (a) {
    case Action::kBuy: return "buy";
    case Action::kSell: return "sell";
    case Action::kHold: return "hold";
  }
  return "hold";
}

std::optional<Action> action_from_string(std::string_view s) {
  std::string low(s);
  for (char& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low == "buy") return Action::kBuy;
  if (low == "sell") return Action::kSell;
  if (low == "hold") return Action::kHold;
  return std::nullopt;
}

TradeDecision TradeDecision::hold_fallback() {
  TradeDecision d;
  d.reasoning = "fallback";
  d.fallback = true;
  return d;
}

std::optional<std::size_t> balanced_object_end(std::string_view text) {
  const auto open = text.find('{');
  if (open == std::string_view::npos) return std::nullopt;
  return block_end(text, open);
}

TradeDecision extract_json(std::string_view raw) {
  for (std::size_t open = raw.find('{'); open != std::string_view::npos;
       open = raw.find('{', open + 1)) {
    const auto end = block_end(raw, open);
    if (!end) continue;
    if (auto j = parse_block(raw.substr(open, *end - open))) {
      if (auto d = to_decision(*j)) return *d;
    }
  }
  throw ParseError("no parsable decision object in model output");
}

}  // namespace fincad
