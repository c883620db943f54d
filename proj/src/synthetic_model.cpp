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

#include "fincad/synthetic_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <json.hpp>

#include "fincad/rng.hpp"
#include "fincad/templates.hpp"

namespace fincad {
namespace {

using json = nlohmann::ordered_json;

// Tokens the scripted JSON answer is spelled with.
constexpr const char* kOpen = "{\"";
constexpr const char* kKeyAction = "action";
constexpr const char* kColonQuote = "\":\"";
constexpr const char* kQuoteComma = "\",\"";
constexpr const char* kKeyQuantity = "quantity";
constexpr const char* kColon = "\":";
constexpr const char* kCommaQuote = ",\"";
constexpr const char* kKeyConfidence = "confidence";
constexpr const char* kKeyReasoning = "reasoning";
constexpr const char* kClose = "\"}";

const std::vector<std::string>& up_tokens() {
  static const std::vector<std::string> v{"up", " up", "Up", " Up", "UP"};
  return v;
}

const std::vector<std::string>& down_tokens() {
  static const std::vector<std::string> v{"down", " down", "Down", " Down", "DOWN"};
  return v;
}

std::vector<std::string> build_tokens() {
  std::vector<std::string> t{kOpen,  kKeyAction,     kColonQuote,   kQuoteComma,
                             kKeyQuantity, kColon,   kCommaQuote,   kKeyConfidence,
                             kKeyReasoning, kClose,  "{",           "}",
                             "\"",   ":",            ",",           " ",
                             "\n",   "[",            "]",           ".",
                             "-",    "!",            "?",           "'",
                             "(",    ")",            "%",           "$",
                             "```",  "```json",      "buy",         "sell",
                             "hold", "<eos>"};
  for (char c = '0'; c <= '9'; ++c) t.emplace_back(1, c);
  for (const auto& s : up_tokens()) t.push_back(s);
  for (const auto& s : down_tokens()) t.push_back(s);
  for (char c = 'a'; c <= 'z'; ++c) {
    std::string s(1, c);
    if (std::find(t.begin(), t.end(), s) == t.end()) t.push_back(s);
  }
  for (char c = 'A'; c <= 'Z'; ++c) {
    std::string s(1, c);
    if (std::find(t.begin(), t.end(), s) == t.end()) t.push_back(s);
  }
  const char* words[] = {
      "positive", " momentum", "downside", " risk",     "mixed",     " signals",
      "the",      " the",      " stock",   " price",    " market",   " trend",
      " value",   " volatility", " range", " return",   " earnings", " growth",
      " strong",  " weak",     " rally",   " decline",  " support",  " resistance",
      " high",    " low",      " average", " volume",   " shares",   " cash",
      " and",     " of",       " to",      " in",       " is",       " was",
      " went",    " after",    " before",  " quarter",  " year",     " month",
      " recent",  " data",     " signal",  " buy",      " sell",     " hold",
      " not",     " no",       " yes",     " maybe",    " likely",   " unlikely",
      " bullish", " bearish",  " neutral", " position", " portfolio", " trade",
      " entry",   " exit",     " gain",    " loss",     " cautious", " outlook",
      " sector",  " company",  " index",   " over",     " under",    " above",
      " below",   " moving",   " day",     " week",
  };
  for (const char* w : words) t.emplace_back(w);
  return t;
}

std::string lowered(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Text after the last instance of `marker`, or npos if absent.
std::size_t end_of_last(std::string_view hay, std::string_view marker) {
  const auto p = hay.rfind(marker);
  return p == std::string_view::npos ? p : p + marker.size();
}

std::string_view last_line(std::string_view text) {
  const auto nl = text.rfind('\n');
  return nl == std::string_view::npos ? text : text.substr(nl + 1);
}

struct Subject {
  std::string ticker;
  std::optional<Date> date;
};

// Recognises the three ways prompts name an entity and date.
Subject find_entity_date(std::string_view in) {
  Subject out;
  if (auto p = in.rfind("After "); p != std::string_view::npos) {
    const auto comma = in.find(", ", p);
    const auto went = in.find(" stock went", p);
    if (comma != std::string_view::npos && went != std::string_view::npos && comma < went) {
      out.date = Date::try_parse(in.substr(p + 6, comma - p - 6));
      out.ticker = std::string(in.substr(comma + 2, went - comma - 2));
      if (out.date) return out;
    }
  }
  if (auto p = in.find("Entity: "); p != std::string_view::npos) {
    const auto nl = in.find('\n', p);
    const auto d = in.find("Date: ", p);
    if (nl != std::string_view::npos && d != std::string_view::npos) {
      out.ticker = std::string(in.substr(p + 8, nl - p - 8));
      out.date = Date::try_parse(in.substr(d + 6, 10));
      if (out.date) return out;
    }
  }
  if (auto p = in.find("financial data for "); p != std::string_view::npos) {
    const auto start = p + 19;
    const auto asof = in.find(" as of ", start);
    if (asof != std::string_view::npos) {
      out.ticker = std::string(in.substr(start, asof - start));
      out.date = Date::try_parse(in.substr(asof + 7, 10));
      if (out.date) return out;
    }
  }
  return {};
}

std::optional<double> number_after(std::string_view in, std::string_view label) {
  const auto p = in.find(label);
  if (p == std::string_view::npos) return std::nullopt;
  const std::string rest(in.substr(p + label.size(), 32));
  char* end = nullptr;
  const double v = std::strtod(rest.c_str(), &end);
  if (end == rest.c_str()) return std::nullopt;
  return v;
}

int clamp_int(double v, int lo, int hi) {
  return static_cast<int>(std::clamp(std::llround(v), static_cast<long long>(lo),
                                     static_cast<long long>(hi)));
}

}  // namespace

const Vocabulary& synthetic_vocabulary() {
  static const Vocabulary vocab(build_tokens());
  return vocab;
}

std::vector<std::string> synthetic_up_variants() { return up_tokens(); }
std::vector<std::string> synthetic_down_variants() { return down_tokens(); }

void SyntheticModelSpec::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (model_id.empty()) throw std::invalid_argument("synthetic spec: empty model_id");
  if (!finite(noise_scale) || noise_scale < 0) {
    throw std::invalid_argument("synthetic spec: noise_scale must be finite and >= 0");
  }
  if (!finite(context_memory_weight) || !finite(context_signal_weight) ||
      !finite(hold_logit)) {
    throw std::invalid_argument("synthetic spec: weights must be finite");
  }
  if (!finite(structure_logit) || structure_logit <= 0) {
    throw std::invalid_argument("synthetic spec: structure_logit must be > 0");
  }
  for (const auto& [key, entry] : memorized) {
    if (!finite(entry.strength) || entry.strength < 0) {
      throw std::invalid_argument("synthetic spec: bad strength for " + key.first);
    }
    const auto& bucket = key.second;
    if (bucket.size() != 7 || bucket[4] != '-' || bucket[5] != 'Q' || bucket[6] < '1' ||
        bucket[6] > '4') {
      throw std::invalid_argument("synthetic spec: bad quarter label '" + bucket + "'");
    }
    const int year = std::stoi(bucket.substr(0, 4));
    const unsigned q = static_cast<unsigned>(bucket[6] - '0');
    if (Date::from_ymd(year, 3 * q - 2, 1) > cutoff) {
      throw std::invalid_argument("synthetic spec: memorised quarter " + bucket +
                                  " lies after the cutoff");
    }
  }
  for (const auto& [ticker, entry] : brand_prior) {
    if (!finite(entry.strength) || entry.strength < 0) {
      throw std::invalid_argument("synthetic spec: bad brand strength for " + ticker);
    }
  }
  for (const auto& k : activation_keywords) {
    if (k.empty()) throw std::invalid_argument("synthetic spec: empty activation keyword");
  }
}

std::string to_json(const SyntheticModelSpec& spec) {
  json j;
  j["model_id"] = spec.model_id;
  j["cutoff"] = spec.cutoff.to_string();
  j["noise_seed"] = spec.noise_seed;
  j["noise_scale"] = spec.noise_scale;
  j["activation_keywords"] = spec.activation_keywords;
  j["context_memory_weight"] = spec.context_memory_weight;
  j["context_signal_weight"] = spec.context_signal_weight;
  j["structure_logit"] = spec.structure_logit;
  j["hold_logit"] = spec.hold_logit;
  json mem = json::array();
  for (const auto& [key, e] : spec.memorized) {
    mem.push_back({{"ticker", key.first},
                   {"quarter", key.second},
                   {"direction", to_string(e.direction)},
                   {"strength", e.strength}});
  }
  j["memorized"] = std::move(mem);
  json brand = json::array();
  for (const auto& [ticker, e] : spec.brand_prior) {
    brand.push_back(
        {{"ticker", ticker}, {"direction", to_string(e.direction)}, {"strength", e.strength}});
  }
  j["brand_prior"] = std::move(brand);
  return j.dump(2) + "\n";
}

SyntheticModelSpec synthetic_spec_from_json(const std::string& text) {
  SyntheticModelSpec spec;
  try {
    const json j = json::parse(text);
    spec.model_id = j.value("model_id", spec.model_id);
    if (j.contains("cutoff")) spec.cutoff = Date::parse(j.at("cutoff").get<std::string>());
    spec.noise_seed = j.value("noise_seed", spec.noise_seed);
    spec.noise_scale = j.value("noise_scale", spec.noise_scale);
    spec.activation_keywords = j.value("activation_keywords", spec.activation_keywords);
    spec.context_memory_weight = j.value("context_memory_weight", spec.context_memory_weight);
    spec.context_signal_weight = j.value("context_signal_weight", spec.context_signal_weight);
    spec.structure_logit = j.value("structure_logit", spec.structure_logit);
    spec.hold_logit = j.value("hold_logit", spec.hold_logit);
    for (const auto& m : j.value("memorized", json::array())) {
      spec.memorized[{m.at("ticker").get<std::string>(), m.at("quarter").get<std::string>()}] =
          MemoryEntry{direction_from_string(m.at("direction").get<std::string>()),
                      m.at("strength").get<double>()};
    }
    for (const auto& b : j.value("brand_prior", json::array())) {
      spec.brand_prior[b.at("ticker").get<std::string>()] =
          MemoryEntry{direction_from_string(b.at("direction").get<std::string>()),
                      b.at("strength").get<double>()};
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("synthetic spec JSON: ") + e.what());
  }
  spec.validate();
  return spec;
}

SyntheticProvider::SyntheticProvider(SyntheticModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (const auto& k : spec_.activation_keywords) lowered_keywords_.push_back(lowered(k));
}

LabelPair SyntheticProvider::labels() const {
  return LabelPair::from_tokens(synthetic_vocabulary(), up_tokens(), down_tokens());
}

double SyntheticProvider::memory_signal(const std::string& ticker, Date date) const {
  // The model remembers what happened *after* `date`, so a quarter-end date
  // looks up the following quarter.
  const Date next = date + 1;
  if (next > spec_.cutoff) return 0.0;
  const auto it = spec_.memorized.find({ticker, quarter_label(next)});
  return it == spec_.memorized.end() ? 0.0 : it->second.signed_strength();
}

double SyntheticProvider::brand_signal(const std::string& ticker) const {
  const auto it = spec_.brand_prior.find(ticker);
  return it == spec_.brand_prior.end() ? 0.0 : it->second.signed_strength();
}

LogitVector SyntheticProvider::next_logits(std::string_view in) const {
  if (in.empty()) throw ProviderError(ProviderErrorKind::kBadInput, "empty input");
  const Vocabulary& vocab = synthetic_vocabulary();
  const std::size_t n = vocab.size();

  const Subject who = find_entity_date(in);
  auto activated = [&] {
    if (lowered_keywords_.empty()) return true;
    const std::string low = lowered(in);
    return std::any_of(lowered_keywords_.begin(), lowered_keywords_.end(),
                       [&](const std::string& k) { return low.find(k) != std::string::npos; });
  };
  auto recall_signal = [&] {
    if (!who.date) return 0.0;
    const double mem = activated() ? memory_signal(who.ticker, *who.date) : 0.0;
    return mem + brand_signal(who.ticker);
  };

  // Where a JSON answer would begin: after the context body's closing question
  // or, for a bare instruction prompt, after the system message's last line.
  static const std::string ctx_cue = std::string(last_line(templates::kContextBody)) + "\n";
  static const std::string sys_cue = std::string(last_line(templates::kSystemMessage)) + "\n";
  const std::size_t ctx_end = end_of_last(in, ctx_cue);
  const std::size_t sys_end = end_of_last(in, sys_cue);
  const bool is_ctx = ctx_end != std::string_view::npos;
  const std::size_t gen_start =
      is_ctx ? ctx_end : (sys_end != std::string_view::npos ? sys_end : std::string_view::npos);

  // Decision prompts key their noise on (branch, date, generated text) so that
  // rewording the instructions or masking the entity leaves the noise alone;
  // anything else keys on the full input.
  std::vector<double> logits(n, 0.0);
  {
    std::string key;
    if (gen_start != std::string_view::npos && who.date) {
      key = (is_ctx ? "ctx|" : "prior|") + who.date->to_string() + "|";
      key += in.substr(gen_start);
    } else {
      key = std::string(in);
    }
    std::uint64_t mix = spec_.noise_seed;
    Rng rng(fnv1a64(key) ^ splitmix64(mix));
    for (double& v : logits) v = spec_.noise_scale * (2.0 * rng.uniform() - 1.0);
  }

  if (gen_start == std::string_view::npos) {
    // Direction query: probe or calibration shell.
    const double d = recall_signal();
    for (const auto& t : up_tokens()) logits[vocab.index_of(t)] += d / 2.0;
    for (const auto& t : down_tokens()) logits[vocab.index_of(t)] -= d / 2.0;
    return LogitVector(std::move(logits));
  }

  const std::string_view gen = in.substr(gen_start);
  const double force = spec_.structure_logit;

  double x = 0.0;  // buy-vs-sell preference
  if (is_ctx) {
    const double m1 = number_after(in, "Trailing return 1m: ").value_or(0.0) / 100.0;
    x = spec_.context_signal_weight * std::clamp(m1 * 20.0, -2.0, 2.0);
    if (who.date) {
      x += spec_.context_memory_weight *
           (memory_signal(who.ticker, *who.date) + brand_signal(who.ticker));
    }
  } else {
    x = recall_signal();
  }

  const std::vector<std::string> preamble{kOpen, kKeyAction, kColonQuote};
  std::string acc;
  for (const auto& tok : preamble) {
    if (acc == gen) {
      if (is_ctx) logits[vocab.index_of(tok)] += force;
      return LogitVector(std::move(logits));
    }
    acc += tok;
  }
  if (acc == gen) {
    // Action slot: both branches express their preference here.
    for (std::size_t i = 0; i < n; ++i) logits[i] -= force;
    logits[vocab.index_of("buy")] += force + x;
    logits[vocab.index_of("sell")] += force - x;
    logits[vocab.index_of("hold")] += force + spec_.hold_logit;
    return LogitVector(std::move(logits));
  }
  if (!is_ctx) return LogitVector(std::move(logits));

  std::string action;
  for (const char* a : {"buy", "sell", "hold"}) {
    if (gen.substr(acc.size()).starts_with(a)) action = a;
  }
  if (action.empty()) return LogitVector(std::move(logits));

  int quantity = 0;
  if (action == "buy") {
    quantity = clamp_int(number_after(in, "- buy: up to ").value_or(0.0), 0, 1'000'000'000);
  } else if (action == "sell") {
    quantity = clamp_int(number_after(in, "Current Shares: ").value_or(0.0), 0, 1'000'000'000);
  }
  const double pb = std::exp(x), ps = std::exp(-x), ph = std::exp(spec_.hold_logit);
  const double chosen = action == "buy" ? pb : (action == "sell" ? ps : ph);
  const int confidence = clamp_int(100.0 * chosen / (pb + ps + ph), 0, 100);

  std::vector<std::string> plan{action, kQuoteComma, kKeyQuantity, kColon};
  for (char c : std::to_string(quantity)) plan.emplace_back(1, c);
  plan.insert(plan.end(), {kCommaQuote, kKeyConfidence, kColon});
  for (char c : std::to_string(confidence)) plan.emplace_back(1, c);
  plan.insert(plan.end(), {kCommaQuote, kKeyReasoning, kColonQuote});
  if (action == "buy") {
    plan.insert(plan.end(), {"positive", " momentum"});
  } else if (action == "sell") {
    plan.insert(plan.end(), {"downside", " risk"});
  } else {
    plan.insert(plan.end(), {"mixed", " signals"});
  }
  plan.emplace_back(kClose);
  plan.emplace_back("<eos>");

  for (const auto& tok : plan) {
    if (acc == gen) {
      logits[vocab.index_of(tok)] += force;
      return LogitVector(std::move(logits));
    }
    acc += tok;
    if (acc.size() > gen.size()) break;
  }
  return LogitVector(std::move(logits));
}

ProviderHandle build_synthetic(SyntheticModelSpec spec) {
  return std::make_shared<const SyntheticProvider>(std::move(spec));
}

}  // namespace fincad
