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
#include <string_view>
#include <vector>

#include "fincad/date.hpp"
#include "fincad/market_data.hpp"
#include "fincad/model_gateway.hpp"

namespace fincad {

// One decision's prompt pieces. The entity/date pair and task_format are shared
// byte-for-byte between the context and prior branches.
struct PromptParts {
  std::string system_instruction;  // role line for context prompts
  std::string entity;
  Date date;
  std::string task_format;
  std::optional<std::string> data_block;
};

inline constexpr int kPriorArtifactSchema = 1;

struct PriorArtifact {
  std::string model_id;
  std::string instruction;
  std::string seed_instruction;
  double val_accuracy = 0.0;
  std::optional<double> train_accuracy;
  std::string created;  // ISO-8601 UTC timestamp

  void validate() const;  // throws PromptError
};

std::string to_json(const PriorArtifact& artifact);
// Throws PromptError on schema problems, and when `expected_model_id` is given
// and differs from the artifact's.
PriorArtifact prior_artifact_from_json(const std::string& text,
                                       const std::optional<std::string>& expected_model_id = {});
PriorArtifact load_prior_artifact(const std::filesystem::path& path,
                                  const std::optional<std::string>& expected_model_id = {});
void save_prior_artifact(const std::filesystem::path& path, const PriorArtifact& artifact);

enum class MitigationMode { kBaseline, kAnonymisation, kPromptInjection, kFincad };
std::string to_string(MitigationMode mode);
MitigationMode mitigation_from_string(const std::string& s);  // throws UsageError

// Substitutes {name} slots. Every slot in the template must have a value;
// throws PromptError naming the first missing one.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& slots);

// "You will be given financial data for {s} as of {t}."
std::string entity_line(std::string_view entity, Date date);

// Baseline system message with slots filled.
std::string render_system_message(std::string_view ticker, Date date);

struct PortfolioView {
  std::string cash;             // "12345.67"
  std::int64_t shares = 0;
  std::string portfolio_value;  // "12345.67"
  std::int64_t max_buy = 0;
  std::int64_t max_sell = 0;
};

// Context body D(s,t).
std::string render_data_block(std::string_view ticker, Date date, std::string_view summary,
                              const PortfolioView& portfolio);

// Parts for a context prompt: the filled baseline system message split into
// role line, entity line and the remaining task format.
PromptParts context_parts(std::string_view ticker, Date date, std::string data_block);

// T_ctx + (s,t) + F_task + D(s,t), followed by a newline.
std::string assemble_context(const PromptParts& parts);
// Context prompt around an already-built system message (used for the
// prompt-injection variant, whose system message is not in parts form).
std::string context_prompt(std::string_view system_message, std::string_view data_block);
// T* + (s,t) + F_task with the same bytes as the context branch.
std::string assemble_prior(const PromptParts& parts, const PriorArtifact& artifact);
std::string assemble_prior(const PromptParts& parts, std::string_view instruction);
// T* + "After {t}, {s} stock went"; the suffix alone when T* is empty.
std::string assemble_probe(std::string_view instruction, std::string_view entity, Date date);
// T + "Entity: s\nDate: t" + calibration task shell.
std::string assemble_calibration(std::string_view instruction, std::string_view entity,
                                 Date date);

struct EntityName {
  std::string ticker;
  std::string company;  // may be empty
};

// Placeholder registry. Entities are numbered in the order they are first
// seen; the same number is used for the ticker and the company name.
class AnonymisationRegistry {
 public:
  explicit AnonymisationRegistry(std::vector<EntityName> known);

  std::string apply(std::string_view text);
  std::string invert(std::string_view text) const;
  const std::vector<EntityName>& entities() const noexcept { return known_; }

 private:
  std::vector<EntityName> known_;
  std::vector<int> number_;  // 0 = not yet seen
  int next_ = 1;
};

std::string apply_anonymisation(std::string_view text, AnonymisationRegistry& registry);

// Replaces the role-and-disclaimer block (everything before the action
// instructions) with the strengthened temporal-isolation text. Idempotent.
std::string apply_prompt_injection(std::string_view system_message);

// Fraction of examples whose argmax label (ties -> up) matches. Throws
// PromptError on an empty dataset; provider errors are rethrown with the
// failing example index in the message.
double score_candidate(std::string_view candidate, const std::vector<CalibrationExample>& dataset,
                       const LogitProvider& provider, const LabelPair& labels,
                       std::size_t jobs = 1);

// Source of candidate instructions. Only the seed text is visible to it.
class CandidateProposer {
 public:
  virtual ~CandidateProposer() = default;
  virtual std::vector<std::string> propose(const std::string& seed, std::size_t count) = 0;
};

struct CandidateScore {
  std::string instruction;
  std::optional<double> train_accuracy;
  std::optional<double> val_accuracy;
  std::string error;
};

struct DiscoveryOptions {
  std::size_t budget = 16;  // pool size including the seed
  std::size_t jobs = 1;
  std::string created;  // timestamp stamped on the artifact; now() if empty
};

// Raised when no candidate could be scored.
class DiscoveryError : public PromptError {
 public:
  using PromptError::PromptError;
};

PriorArtifact discover_prior(const std::string& seed, CandidateProposer& proposer,
                             const std::vector<CalibrationExample>& train,
                             const std::vector<CalibrationExample>& val,
                             const LogitProvider& provider, const DiscoveryOptions& options,
                             std::vector<CandidateScore>* scores = nullptr);

std::string utc_timestamp_now();

}  // namespace fincad
