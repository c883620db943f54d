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

#include "fincad/prompt_forge.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <set>

#include <json.hpp>

#include "fincad/error.hpp"
#include "fincad/io.hpp"
#include "fincad/parallel.hpp"
#include "fincad/templates.hpp"

namespace fincad {
namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kActionAnchor = "You must pick one action";
constexpr std::string_view kEntityLead = "financial data for ";

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool whole_word_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (word.empty() || text.compare(pos, word.size(), word) != 0) return false;
  if (pos > 0 && word_char(text[pos - 1]) && word_char(word.front())) return false;
  const std::size_t end = pos + word.size();
  if (end < text.size() && word_char(text[end]) && word_char(word.back())) return false;
  return true;
}

}  // namespace

void PriorArtifact::validate() const {
  if (instruction.empty()) throw PromptError("prior artifact: empty instruction");
  if (!(val_accuracy >= 0.0 && val_accuracy <= 1.0)) {
    throw PromptError("prior artifact: val_accuracy outside [0, 1]");
  }
  if (train_accuracy && !(*train_accuracy >= 0.0 && *train_accuracy <= 1.0)) {
    throw PromptError("prior artifact: train_accuracy outside [0, 1]");
  }
}

std::string to_json(const PriorArtifact& a) {
  json j;
  j["schema_version"] = kPriorArtifactSchema;
  j["model_id"] = a.model_id;
  j["instruction"] = a.instruction;
  j["seed_instruction"] = a.seed_instruction;
  j["val_accuracy"] = a.val_accuracy;
  if (a.train_accuracy) j["train_accuracy"] = *a.train_accuracy;
  j["created"] = a.created;
  return j.dump(2) + "\n";
}

PriorArtifact prior_artifact_from_json(const std::string& text,
                                       const std::optional<std::string>& expected_model_id) {
  PriorArtifact a;
  try {
    const json j = json::parse(text);
    const int schema = j.value("schema_version", kPriorArtifactSchema);
    if (schema != kPriorArtifactSchema) {
      throw PromptError("prior artifact: unsupported schema_version " + std::to_string(schema));
    }
    a.model_id = j.at("model_id").get<std::string>();
    a.instruction = j.at("instruction").get<std::string>();
    a.seed_instruction = j.value("seed_instruction", std::string());
    a.val_accuracy = j.at("val_accuracy").get<double>();
    if (j.contains("train_accuracy") && !j["train_accuracy"].is_null()) {
      a.train_accuracy = j["train_accuracy"].get<double>();
    }
    a.created = j.value("created", std::string());
  } catch (const json::exception& e) {
    throw PromptError(std::string("prior artifact: ") + e.what());
  }
  a.validate();
  if (expected_model_id && a.model_id != *expected_model_id) {
    throw PromptError("prior artifact was discovered for model '" + a.model_id +
                      "' but the run uses '" + *expected_model_id + "'");
  }
  return a;
}

PriorArtifact load_prior_artifact(const std::filesystem::path& path,
                                  const std::optional<std::string>& expected_model_id) {
  return prior_artifact_from_json(read_file(path), expected_model_id);
}

void save_prior_artifact(const std::filesystem::path& path, const PriorArtifact& artifact) {
  artifact.validate();
  write_file_atomic(path, to_json(artifact));
}

std::string to_string(MitigationMode mode) {
  switch (mode) {
    case MitigationMode::kBaseline: return "baseline";
    case MitigationMode::kAnonymisation: return "anonymisation";
    case MitigationMode::kPromptInjection: return "prompt_injection";
    case MitigationMode::kFincad: return "fincad";
  }
  return "baseline";
}

MitigationMode mitigation_from_string(const std::string& s) {
  if (s == "baseline") return MitigationMode::kBaseline;
  if (s == "anonymisation" || s == "anonymization") return MitigationMode::kAnonymisation;
  if (s == "prompt_injection") return MitigationMode::kPromptInjection;
  if (s == "fincad") return MitigationMode::kFincad;
  throw UsageError("unknown mode '" + s +
                   "' (expected baseline, anonymisation, prompt_injection or fincad)");
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) break;
    const std::string_view name = tmpl.substr(open + 1, close - open - 1);
    const bool is_slot =
        !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
          return std::islower(static_cast<unsigned char>(c)) || c == '_';
        });
    out.append(tmpl.substr(pos, open - pos));
    if (!is_slot) {
      out += '{';
      pos = open + 1;
      continue;
    }
    const auto it = slots.find(std::string(name));
    if (it == slots.end()) throw PromptError("missing slot value {" + std::string(name) + "}");
    out += it->second;
    pos = close + 1;
  }
  out.append(tmpl.substr(std::min(pos, tmpl.size())));
  return out;
}

std::string entity_line(std::string_view entity, Date date) {
  return "You will be given financial data for " + std::string(entity) + " as of " +
         date.to_string() + ".";
}

std::string render_system_message(std::string_view ticker, Date date) {
  return fill_template(templates::kSystemMessage,
                       {{"ticker", std::string(ticker)}, {"date", date.to_string()}});
}

std::string render_data_block(std::string_view ticker, Date date, std::string_view summary,
                              const PortfolioView& p) {
  const std::string allowed = "- buy: up to " + std::to_string(p.max_buy) + " shares\n" +
                              "- sell: up to " + std::to_string(p.max_sell) + " shares\n" +
                              "- hold";
  return fill_template(templates::kContextBody, {{"ticker", std::string(ticker)},
                                                 {"date", date.to_string()},
                                                 {"financial_summary", std::string(summary)},
                                                 {"cash", p.cash},
                                                 {"shares", std::to_string(p.shares)},
                                                 {"portfolio_value", p.portfolio_value},
                                                 {"allowed_actions", allowed}});
}

PromptParts context_parts(std::string_view ticker, Date date, std::string data_block) {
  const std::string sys = render_system_message(ticker, date);
  const auto nl1 = sys.find('\n');
  const auto nl2 = sys.find('\n', nl1 + 1);
  if (nl1 == std::string::npos || nl2 == std::string::npos ||
      sys.substr(nl1 + 1, nl2 - nl1 - 1) != entity_line(ticker, date)) {
    throw PromptError("system message template does not have a role line then an entity line");
  }
  PromptParts parts;
  parts.system_instruction = sys.substr(0, nl1);
  parts.entity = std::string(ticker);
  parts.date = date;
  parts.task_format = sys.substr(nl2 + 1);
  parts.data_block = std::move(data_block);
  return parts;
}

std::string assemble_context(const PromptParts& parts) {
  if (!parts.data_block || parts.data_block->empty()) {
    throw PromptError("context prompt needs a data block");
  }
  if (parts.entity.empty()) throw PromptError("missing slot value {ticker}");
  return context_prompt(parts.system_instruction + "\n" + entity_line(parts.entity, parts.date) +
                            "\n" + parts.task_format,
                        *parts.data_block);
}

std::string context_prompt(std::string_view system_message, std::string_view data_block) {
  std::string out(system_message);
  out += "\n\n";
  out += data_block;
  out += "\n";
  return out;
}

std::string assemble_prior(const PromptParts& parts, const PriorArtifact& artifact) {
  return assemble_prior(parts, artifact.instruction);
}

std::string assemble_prior(const PromptParts& parts, std::string_view instruction) {
  std::string out;
  if (!instruction.empty()) {
    out += instruction;
    out += "\n";
  }
  out += entity_line(parts.entity, parts.date);
  out += "\n";
  out += parts.task_format;
  out += "\n";
  return out;
}

std::string assemble_probe(std::string_view instruction, std::string_view entity, Date date) {
  std::string out;
  if (!instruction.empty()) {
    out += instruction;
    out += "\n";
  }
  out += "After " + date.to_string() + ", " + std::string(entity) + " stock went";
  return out;
}

std::string assemble_calibration(std::string_view instruction, std::string_view entity,
                                 Date date) {
  std::string out;
  if (!instruction.empty()) {
    out += instruction;
    out += "\n";
  }
  out += "Entity: " + std::string(entity) + "\nDate: " + date.to_string() + "\n";
  out += templates::kCalibrationTask;
  return out;
}

AnonymisationRegistry::AnonymisationRegistry(std::vector<EntityName> known)
    : known_(std::move(known)), number_(known_.size(), 0) {
  for (const auto& e : known_) {
    if (e.ticker.empty()) throw PromptError("anonymisation registry: empty ticker");
  }
}

std::string AnonymisationRegistry::apply(std::string_view text) {
  // Longest names first so "Tesla Motors" wins over "Tesla".
  struct Name {
    std::string_view text;
    std::size_t entity;
    bool company;
  };
  std::vector<Name> names;
  for (std::size_t i = 0; i < known_.size(); ++i) {
    names.push_back({known_[i].ticker, i, false});
    if (!known_[i].company.empty()) names.push_back({known_[i].company, i, true});
  }
  std::stable_sort(names.begin(), names.end(),
                   [](const Name& a, const Name& b) { return a.text.size() > b.text.size(); });

  std::string out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    const Name* hit = nullptr;
    for (const auto& n : names) {
      if (whole_word_at(text, pos, n.text)) {
        hit = &n;
        break;
      }
    }
    if (hit == nullptr) {
      out += text[pos++];
      continue;
    }
    int& num = number_[hit->entity];
    if (num == 0) num = next_++;
    out += (hit->company ? "[company " : "[ticker ") + std::to_string(num) + "]";
    pos += hit->text.size();
  }
  return out;
}

std::string AnonymisationRegistry::invert(std::string_view text) const {
  std::string out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    bool replaced = false;
    for (const std::string_view kind : {"[ticker ", "[company "}) {
      if (text.compare(pos, kind.size(), kind) != 0) continue;
      const auto close = text.find(']', pos);
      if (close == std::string_view::npos) break;
      const std::string digits(text.substr(pos + kind.size(), close - pos - kind.size()));
      if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) break;
      const int num = std::stoi(digits);
      const auto it = std::find(number_.begin(), number_.end(), num);
      if (it == number_.end()) break;
      const auto& e = known_[static_cast<std::size_t>(it - number_.begin())];
      out += kind == "[ticker " ? e.ticker : e.company;
      pos = close + 1;
      replaced = true;
      break;
    }
    if (!replaced) out += text[pos++];
  }
  return out;
}

std::string apply_anonymisation(std::string_view text, AnonymisationRegistry& registry) {
  return registry.apply(text);
}

std::string apply_prompt_injection(std::string_view system_message) {
  const auto anchor = system_message.find(kActionAnchor);
  if (anchor == std::string_view::npos) {
    throw PromptError("system message has no action-instruction block to keep");
  }
  const std::string_view head = system_message.substr(0, anchor);
  const auto lead = head.find(kEntityLead);
  const auto asof = lead == std::string_view::npos ? lead : head.find(" as of ", lead);
  if (asof == std::string_view::npos) {
    throw PromptError("system message does not name the entity and date");
  }
  const std::string ticker(head.substr(lead + kEntityLead.size(), asof - lead - kEntityLead.size()));
  const auto date_start = asof + 7;
  const auto date_end = head.find('.', date_start);
  const auto date = Date::try_parse(head.substr(date_start, date_end - date_start));
  if (!date) throw PromptError("system message has an unreadable as-of date");
  return fill_template(templates::kInjectionHead,
                       {{"ticker", ticker}, {"date", date->to_string()}}) +
         "\n" + std::string(system_message.substr(anchor));
}

double score_candidate(std::string_view candidate, const std::vector<CalibrationExample>& dataset,
                       const LogitProvider& provider, const LabelPair& labels, std::size_t jobs) {
  if (dataset.empty()) throw PromptError("score_candidate: empty dataset");
  std::vector<char> correct(dataset.size(), 0);
  parallel_for(dataset.size(), jobs, [&](std::size_t i) {
    const auto& ex = dataset[i];
    try {
      const auto logits =
          next_logits(provider, assemble_calibration(candidate, ex.ticker, ex.date));
      const Direction pred = label_logit(logits, labels.up()) >= label_logit(logits, labels.down())
                                 ? Direction::kUp
                                 : Direction::kDown;
      correct[i] = pred == ex.label;
    } catch (const ProviderError& e) {
      throw ProviderError(e.kind(), "example " + std::to_string(i) + " (" + ex.ticker + " " +
                                        ex.date.to_string() + "): " + e.what());
    }
  });
  const auto hits = std::count(correct.begin(), correct.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(dataset.size());
}

PriorArtifact discover_prior(const std::string& seed, CandidateProposer& proposer,
                             const std::vector<CalibrationExample>& train,
                             const std::vector<CalibrationExample>& val,
                             const LogitProvider& provider, const DiscoveryOptions& options,
                             std::vector<CandidateScore>* scores) {
  if (options.budget < 1) throw UsageError("discovery budget must be >= 1");
  if (train.empty() || val.empty()) throw PromptError("discovery needs non-empty train and val");

  std::vector<std::string> pool{seed};
  if (options.budget > 1) {
    std::set<std::string> seen{seed};
    for (auto& c : proposer.propose(seed, options.budget - 1)) {
      if (pool.size() >= options.budget) break;
      if (seen.insert(c).second) pool.push_back(std::move(c));
    }
  }

  const LabelPair labels = provider.labels();
  std::vector<CandidateScore> results;
  for (const auto& cand : pool) {
    CandidateScore s{cand, std::nullopt, std::nullopt, {}};
    try {
      s.train_accuracy = score_candidate(cand, train, provider, labels, options.jobs);
      s.val_accuracy = score_candidate(cand, val, provider, labels, options.jobs);
    } catch (const ProviderError& e) {
      s.train_accuracy.reset();
      s.val_accuracy.reset();
      s.error = e.what();
    }
    results.push_back(std::move(s));
  }

  const CandidateScore* best = nullptr;
  for (const auto& s : results) {
    if (!s.val_accuracy) continue;
    if (best == nullptr || *s.val_accuracy > *best->val_accuracy) {
      best = &s;
    } else if (*s.val_accuracy == *best->val_accuracy && best->instruction != seed &&
               (s.instruction == seed || s.instruction < best->instruction)) {
      best = &s;
    }
  }
  if (scores) *scores = results;
  if (best == nullptr) {
    throw DiscoveryError("every candidate instruction failed to score (first error: " +
                         results.front().error + ")");
  }

  PriorArtifact a;
  a.model_id = provider.model_id();
  a.instruction = best->instruction;
  a.seed_instruction = seed;
  a.val_accuracy = *best->val_accuracy;
  a.train_accuracy = best->train_accuracy;
  a.created = options.created.empty() ? utc_timestamp_now() : options.created;
  if (a.instruction.empty()) throw DiscoveryError("selected instruction is empty");
  return a;
}

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace fincad
