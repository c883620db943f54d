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

#include "fincad/model_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fincad {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw std::invalid_argument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::index_of(std::string_view token) const {
  if (auto i = find(token)) return *i;
  throw ProviderError(ProviderErrorKind::kVocabularyMismatch,
                      "token '" + std::string(token) + "' not in vocabulary");
}

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("LogitVector: non-finite logit");
  }
}

LabelPair::LabelPair(LabelSet up, LabelSet down) : up_(std::move(up)), down_(std::move(down)) {
  if (up_.variants.empty() || down_.variants.empty()) {
    throw std::invalid_argument("label variant sets must be non-empty");
  }
  for (std::size_t u : up_.variants) {
    if (std::find(down_.variants.begin(), down_.variants.end(), u) != down_.variants.end()) {
      throw std::invalid_argument("up/down label variant sets overlap");
    }
  }
  up_.label = Direction::kUp;
  down_.label = Direction::kDown;
}

LabelPair LabelPair::from_tokens(const Vocabulary& vocab, const std::vector<std::string>& up,
                                 const std::vector<std::string>& down) {
  LabelSet u{Direction::kUp, {}};
  LabelSet d{Direction::kDown, {}};
  for (const auto& t : up) u.variants.push_back(vocab.index_of(t));
  for (const auto& t : down) d.variants.push_back(vocab.index_of(t));
  return LabelPair(std::move(u), std::move(d));
}

double label_logit(const LogitVector& vec, const LabelSet& labels) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i : labels.variants) best = std::max(best, vec[i]);
  return best;
}

}  // namespace fincad
