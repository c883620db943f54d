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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fincad/error.hpp"
#include "fincad/market_data.hpp"

namespace fincad {

class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws std::invalid_argument on duplicate tokens.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::optional<std::size_t> find(std::string_view token) const;
  // Throws ProviderError(kVocabularyMismatch) if absent.
  std::size_t index_of(std::string_view token) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One real number per vocabulary entry; all finite.
class LogitVector {
 public:
  LogitVector() = default;
  explicit LogitVector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// The vocabulary variants ("up", " Up", ...) that spell one direction label.
struct LabelSet {
  Direction label = Direction::kUp;
  std::vector<std::size_t> variants;
};

// Validated pair of up/down label sets: non-empty and disjoint.
class LabelPair {
 public:
  LabelPair(LabelSet up, LabelSet down);
  // Resolves variant token strings against a vocabulary.
  static LabelPair from_tokens(const Vocabulary& vocab, const std::vector<std::string>& up,
                               const std::vector<std::string>& down);

  const LabelSet& up() const noexcept { return up_; }
  const LabelSet& down() const noexcept { return down_; }
  std::size_t variant_count() const { return up_.variants.size() + down_.variants.size(); }

 private:
  LabelSet up_;
  LabelSet down_;
};

// Maximum logit over the label's variant indices.
double label_logit(const LogitVector& vec, const LabelSet& labels);

enum class ProviderErrorKind {
  kTransport,        // connection / timeout; retryable
  kServer,           // 5xx or 429; retryable
  kRequest,          // 4xx other than 429
  kNoLogitAccess,    // endpoint does not return logprobs
  kVocabularyMismatch,
  kBadInput,
};

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& what)
      : Error(ErrorClass::kProvider, what), kind_(kind) {}

  ProviderErrorKind kind() const noexcept { return kind_; }
  bool retryable() const noexcept {
    return kind_ == ProviderErrorKind::kTransport || kind_ == ProviderErrorKind::kServer;
  }

 private:
  ProviderErrorKind kind_;
};

// "input string -> next-token logits". Implementations must be safe to call
// concurrently from several decode loops.
class LogitProvider {
 public:
  virtual ~LogitProvider() = default;

  virtual std::string model_id() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  virtual LabelPair labels() const = 0;
  // Throws ProviderError. `input` must be non-empty.
  virtual LogitVector next_logits(std::string_view input) const = 0;
};

using ProviderHandle = std::shared_ptr<const LogitProvider>;

inline LogitVector next_logits(const LogitProvider& provider, std::string_view input) {
  if (input.empty()) {
    throw ProviderError(ProviderErrorKind::kBadInput, "next_logits: empty input");
  }
  return provider.next_logits(input);
}

}  // namespace fincad
