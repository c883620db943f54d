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

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <set>

#include "fincad/error.hpp"
#include "fincad/io.hpp"
#include "fincad/prompt_forge.hpp"
#include "fincad/proposer.hpp"
#include "fincad/synthetic_model.hpp"
#include "fincad/synthetic_world.hpp"
#include "fincad/templates.hpp"

using namespace fincad;
namespace fs = std::filesystem;

namespace {

const Date kDay = Date::from_ymd(2015, 6, 30);

PortfolioView view() { return {"100000.00", 0, "100000.00", 250, 0}; }

// Answers "up" for instructions containing `good`, "down" otherwise; fails on
// instructions containing "boom".
class KeywordProvider final : public LogitProvider {
 public:
  explicit KeywordProvider(std::string good) : good_(std::move(good)) {}
  std::string model_id() const override { return "kw"; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  LabelPair labels() const override { return LabelPair::from_tokens(vocab_, {"up"}, {"down"}); }
  LogitVector next_logits(std::string_view in) const override {
    ++calls;
    if (in.find("boom") != std::string_view::npos) {
      throw ProviderError(ProviderErrorKind::kServer, "boom");
    }
    const bool up = in.find(good_) != std::string_view::npos;
    return LogitVector({up ? 1.0 : 0.0, up ? 0.0 : 1.0});
  }
  mutable std::atomic<int> calls{0};

 private:
  std::string good_;
  Vocabulary vocab_{{"up", "down"}};
};

class FixedProposer final : public CandidateProposer {
 public:
  explicit FixedProposer(std::vector<std::string> c) : c_(std::move(c)) {}
  // Ignores `count`; the pool builder enforces the budget.
  std::vector<std::string> propose(const std::string&, std::size_t) override { return c_; }

 private:
  std::vector<std::string> c_;
};

std::vector<CalibrationExample> all_up(std::size_t n) {
  std::vector<CalibrationExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"T" + std::to_string(i), kDay, Direction::kUp, 0.1});
  }
  return out;
}

}  // namespace

TEST_CASE("fill_template substitutes every slot and names a missing one") {
  CHECK(fill_template("a {x} b {y} {x}", {{"x", "1"}, {"y", "2"}}) == "a 1 b 2 1");
  try {
    fill_template("{x} {zz}", {{"x", "1"}});
    FAIL("expected PromptError");
  } catch (const PromptError& e) {
    CHECK(std::string(e.what()).find("zz") != std::string::npos);
  }
}

TEST_CASE("context and prior prompts share entity line and task format byte-for-byte") {
  const std::string data = render_data_block("AAPL", kDay, "Latest close: 1.00", view());
  CHECK(data.find("- buy: up to 250 shares\n- sell: up to 0 shares\n- hold") != std::string::npos);
  const auto parts = context_parts("AAPL", kDay, data);
  const std::string ctx = assemble_context(parts);
  const std::string prior = assemble_prior(parts, "Recall it.");

  // The context prompt is exactly the rendered system message plus the data block.
  CHECK(ctx == render_system_message("AAPL", kDay) + "\n\n" + data + "\n");
  const std::string shared = entity_line("AAPL", kDay) + "\n" + parts.task_format;
  CHECK(ctx.find(shared) != std::string::npos);
  CHECK(prior == "Recall it.\n" + shared + "\n");
  CHECK(prior.find("Financial Data") == std::string::npos);
  CHECK(assemble_prior(parts, "") == shared + "\n");

  PromptParts no_data = parts;
  no_data.data_block.reset();
  CHECK_THROWS_AS(assemble_context(no_data), PromptError);
}

TEST_CASE("probe and calibration prompts") {
  CHECK(assemble_probe("Recall.", "MSFT", kDay) == "Recall.\nAfter 2015-06-30, MSFT stock went");
  CHECK(assemble_probe("", "MSFT", kDay) == "After 2015-06-30, MSFT stock went");
  const auto cal = assemble_calibration("", "MSFT", kDay);
  CHECK(cal.rfind("Entity: MSFT\nDate: 2015-06-30\n", 0) == 0);
  CHECK(cal.ends_with(templates::kCalibrationTask));
}

TEST_CASE("anonymisation masks whole words, longest first, and inverts") {
  AnonymisationRegistry reg({{"TSLA", "Tesla"}, {"T", ""}, {"TM", "Tesla Motors"}});
  const std::string in = "Tesla Motors and Tesla (TSLA) vs T; TEST stays, Teslas stays.";
  const std::string out = reg.apply(in);
  CHECK(out == "[company 1] and [company 2] ([ticker 2]) vs [ticker 3]; TEST stays, Teslas stays.");
  CHECK(reg.invert(out) == in);
  // Numbers are stable for the life of the registry.
  CHECK(reg.apply("T") == "[ticker 3]");
  CHECK(apply_anonymisation("Tesla", reg) == "[company 2]");
}

TEST_CASE("prompt injection rewrites the head, keeps the task, and is idempotent") {
  const std::string sys = render_system_message("NVDA", kDay);
  const std::string pi = apply_prompt_injection(sys);
  CHECK(pi != sys);
  CHECK(pi.find("NO knowledge of anything that happened after that date") != std::string::npos);
  CHECK(pi.find("NVDA") != std::string::npos);
  const auto task = sys.substr(sys.find("You must pick one action"));
  CHECK(pi.ends_with(task));
  CHECK(apply_prompt_injection(pi) == pi);
  CHECK_THROWS_AS(apply_prompt_injection("no anchor here"), PromptError);
}

TEST_CASE("mitigation mode names") {
  for (auto m : {MitigationMode::kBaseline, MitigationMode::kAnonymisation,
                 MitigationMode::kPromptInjection, MitigationMode::kFincad}) {
    CHECK(mitigation_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(mitigation_from_string("cad"), UsageError);
}

TEST_CASE("score_candidate counts argmax hits; ties go to up") {
  const KeywordProvider p("good");
  const auto data = all_up(10);
  CHECK(score_candidate("good one", data, p, p.labels()) == 1.0);
  CHECK(score_candidate("bad one", data, p, p.labels(), 3) == 0.0);
  CHECK_THROWS_AS(score_candidate("x", {}, p, p.labels()), PromptError);
  try {
    score_candidate("boom", data, p, p.labels());
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(std::string(e.what()).find("example 0") != std::string::npos);
  }
}

TEST_CASE("discovery picks the best validation score and skips failing candidates") {
  const KeywordProvider p("good");
  FixedProposer prop({"meh", "boom", "good idea", "good idea", "also good"});
  DiscoveryOptions opt;
  opt.budget = 5;
  opt.created = "2026-01-01T00:00:00Z";
  std::vector<CandidateScore> scores;
  const auto a = discover_prior("seed text", prop, all_up(4), all_up(4), p, opt, &scores);
  // Pool: seed + meh, boom, good idea, also good (duplicate dropped).
  CHECK(scores.size() == 5);
  CHECK(scores[2].instruction == "boom");
  CHECK_FALSE(scores[2].val_accuracy.has_value());
  CHECK_FALSE(scores[2].error.empty());
  // Tie between "good idea" and "also good" goes to the lexicographically smaller.
  CHECK(a.instruction == "also good");
  CHECK(a.val_accuracy == 1.0);
  CHECK(a.seed_instruction == "seed text");
  CHECK(a.model_id == "kw");

  opt.budget = 1;
  const auto only_seed = discover_prior("seed text", prop, all_up(4), all_up(4), p, opt);
  CHECK(only_seed.instruction == "seed text");

  // Seed wins ties.
  opt.budget = 3;
  FixedProposer tie({"good b", "good a"});
  CHECK(discover_prior("good seed", tie, all_up(2), all_up(2), p, opt).instruction == "good seed");

  FixedProposer bad({"boom 2"});
  opt.budget = 2;
  CHECK_THROWS_AS(discover_prior("boom", bad, all_up(2), all_up(2), p, opt), DiscoveryError);
}

TEST_CASE("discovery on the synthetic memoriser finds a recall instruction") {
  const auto world = make_synthetic_world(4, 7);
  const auto provider = build_synthetic(world.spec);
  const auto split = build_calibration_dataset(world.universe);
  MutationProposer prop(42);
  DiscoveryOptions opt;
  opt.budget = 8;
  opt.created = "fixed";
  const auto a = discover_prior(std::string(templates::kSeedInstruction), prop, split.train,
                                split.val, *provider, opt);
  CHECK(a.val_accuracy > 0.7);
  // Deterministic: a rerun produces the same artifact bytes.
  MutationProposer prop2(42);
  CHECK(to_json(discover_prior(std::string(templates::kSeedInstruction), prop2, split.train,
                               split.val, *provider, opt)) == to_json(a));
}

TEST_CASE("mutation proposer is deterministic and returns distinct non-seed candidates") {
  MutationProposer a(1), b(1);
  const std::string seed(templates::kSeedInstruction);
  const auto x = a.propose(seed, 10);
  CHECK(x == b.propose(seed, 10));
  CHECK(x.size() == 10);
  std::set<std::string> uniq(x.begin(), x.end());
  CHECK(uniq.size() == x.size());
  CHECK(uniq.count(seed) == 0);
}

TEST_CASE("prior artifact persistence checks schema and model") {
  PriorArtifact a{"m1", "Recall.", "Seed.", 0.75, 0.8, "2026-01-01T00:00:00Z"};
  const fs::path dir = fs::temp_directory_path() / "fincad_prior_test";
  fs::remove_all(dir);
  save_prior_artifact(dir / "prior.json", a);
  const auto back = load_prior_artifact(dir / "prior.json", std::string("m1"));
  CHECK(back.instruction == "Recall.");
  CHECK(*back.train_accuracy == 0.8);
  CHECK_THROWS_AS(load_prior_artifact(dir / "prior.json", std::string("m2")), PromptError);
  CHECK_THROWS_AS(prior_artifact_from_json(R"({"schema_version":1})"), PromptError);
  a.val_accuracy = 1.5;
  CHECK_THROWS_AS(a.validate(), PromptError);
  fs::remove_all(dir);
}
