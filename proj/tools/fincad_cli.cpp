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

// Command-line driver: discover, calibrate-entity, profile, backtest, align,
// plot-data, plus make-synthetic for a self-contained demo world.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fincad/backtester.hpp"
#include "fincad/calibrator.hpp"
#include "fincad/error.hpp"
#include "fincad/io.hpp"
#include "fincad/leaderboard.hpp"
#include "fincad/llm_agent.hpp"
#include "fincad/market_data.hpp"
#include "fincad/parallel.hpp"
#include "fincad/prompt_forge.hpp"
#include "fincad/proposer.hpp"
#include "fincad/remote_provider.hpp"
#include "fincad/rng.hpp"
#include "fincad/synthetic_model.hpp"
#include "fincad/synthetic_world.hpp"
#include "fincad/templates.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fincad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitProvider = 4;
constexpr int kExitCalibration = 5;
constexpr const char* kTokenEnv = "FINCAD_API_TOKEN";

// Flags shared by every command. Empty/unset values defer to the config file.
struct Flags {
  std::string config;
  std::string run_dir;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  std::string data_dir;
  std::vector<std::string> tickers;
  std::string artifact;
  std::string calibration_dir;
};

struct RunConfig {
  json raw;  // effective config, hashed into the manifest
  fs::path base;
  fs::path run_dir;
  fs::path data_dir;
  std::vector<std::string> tickers;
  std::map<std::string, std::string> companies;
  DateRange is_window{Date::from_ymd(2010, 1, 1), Date::from_ymd(2020, 12, 31)};
  DateRange oos_window{Date::from_ymd(2025, 1, 1), Date::from_ymd(2026, 12, 31)};
  DecodeConfig decode;
  AlphaBounds bounds;
  fs::path artifact;
  fs::path calibration_dir;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

DateRange parse_window(const json& j, DateRange fallback) {
  if (j.is_null()) return fallback;
  return {Date::parse(j.at("start").get<std::string>()), Date::parse(j.at("end").get<std::string>())};
}

RunConfig load_config(const Flags& f) {
  RunConfig c;
  c.raw = json::object();
  c.base = fs::current_path();
  if (!f.config.empty()) {
    try {
      c.raw = json::parse(read_file(f.config));
    } catch (const json::exception& e) {
      throw UsageError("config " + f.config + ": " + e.what());
    }
    c.base = fs::absolute(f.config).parent_path();
  }
  const json& r = c.raw;
  try {
    c.run_dir = f.run_dir.empty() ? resolve(c.base, r.value("output_dir", std::string("runs/default")))
                                  : fs::path(f.run_dir);
    c.data_dir = f.data_dir.empty() ? resolve(c.base, r.value("data_dir", std::string("data")))
                                    : fs::path(f.data_dir);
    c.tickers = f.tickers.empty() ? r.value("tickers", std::vector<std::string>{}) : f.tickers;
    c.companies = r.value("companies", std::map<std::string, std::string>{});
    c.is_window = parse_window(r.value("is_window", json()), c.is_window);
    c.oos_window = parse_window(r.value("oos_window", json()), c.oos_window);
    if (c.is_window.end >= c.oos_window.start && c.oos_window.end >= c.is_window.start) {
      throw UsageError("is_window and oos_window overlap");
    }
    c.seed = f.seed ? *f.seed : r.value("seed", std::uint64_t{42});
    const json d = r.value("decode", json::object());
    c.decode.temperature = d.value("temperature", c.decode.temperature);
    c.decode.seed = f.seed ? *f.seed : d.value("seed", c.seed);
    c.decode.max_tokens = d.value("max_tokens", c.decode.max_tokens);
    c.decode.retry_factor = d.value("retry_factor", c.decode.retry_factor);
    c.decode.max_retries = d.value("max_retries", c.decode.max_retries);
    c.decode.validate();
    const json a = r.value("alpha_bounds", json::object());
    c.bounds.alpha_min = a.value("alpha_min", c.bounds.alpha_min);
    c.bounds.alpha_max = a.value("alpha_max", c.bounds.alpha_max);
    c.bounds.alpha_cap = a.value("alpha_cap", c.bounds.alpha_cap);
    c.artifact = f.artifact.empty()
                     ? resolve(c.base, r.value("artifact", std::string()))
                     : fs::path(f.artifact);
    if (c.artifact.empty()) c.artifact = c.run_dir / "prior.json";
    c.calibration_dir = f.calibration_dir.empty()
                            ? resolve(c.base, r.value("calibration_dir", std::string()))
                            : fs::path(f.calibration_dir);
    if (c.calibration_dir.empty()) c.calibration_dir = c.run_dir / "calibration";
    c.jobs = std::max<std::size_t>(1, f.jobs);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

ProviderHandle make_provider(const RunConfig& c) {
  const json p = c.raw.value("provider", json::object());
  const std::string kind = p.value("kind", std::string("synthetic"));
  if (kind == "synthetic") {
    const std::string spec = p.value("spec", std::string());
    if (spec.empty()) throw UsageError("provider.spec (synthetic spec JSON path) is required");
    try {
      return build_synthetic(synthetic_spec_from_json(read_file(resolve(c.base, spec))));
    } catch (const std::invalid_argument& e) {
      throw DataError(DataErrorKind::kInvalidValue, e.what());
    }
  }
  if (kind == "remote") {
    RemoteConfig rc;
    rc.endpoint = p.value("endpoint", std::string());
    rc.model = p.value("model", c.raw.value("model_id", std::string()));
    if (const char* tok = std::getenv(kTokenEnv)) rc.api_token = tok;
    rc.top_k = p.value("top_k", rc.top_k);
    rc.timeout_seconds = p.value("timeout_seconds", rc.timeout_seconds);
    rc.max_in_flight = p.value("max_in_flight", rc.max_in_flight);
    rc.max_retries = p.value("max_retries", rc.max_retries);
    rc.vocabulary = p.value("vocabulary", synthetic_vocabulary().tokens());
    rc.up_variants = p.value("up_variants", synthetic_up_variants());
    rc.down_variants = p.value("down_variants", synthetic_down_variants());
    return build_remote(std::move(rc));
  }
  throw UsageError("provider.kind must be 'synthetic' or 'remote'");
}

std::vector<PriceSeries> load_universe(const RunConfig& c) {
  if (c.tickers.empty()) throw UsageError("no tickers configured");
  std::vector<PriceSeries> out;
  for (const auto& t : c.tickers) out.push_back(load_price_csv(c.data_dir / (t + ".csv"), t));
  return out;
}

CalibrationOptions calibration_options(const RunConfig& c) {
  CalibrationOptions o;
  const json j = c.raw.value("calibration", json::object());
  o.period = parse_window(j.value("period", json()), o.period);
  o.cap = j.value("cap", o.cap);
  o.train_fraction = j.value("train_fraction", o.train_fraction);
  o.min_abs_return = j.value("min_abs_return", o.min_abs_return);
  o.horizon = j.value("horizon", o.horizon);
  o.seed = c.seed;
  return o;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// The manifest keeps one entry per command so a run directory documents the
// whole pipeline that produced it.
void update_manifest(const RunConfig& c, const std::string& command, const json& outputs) {
  const fs::path path = c.run_dir / "manifest.json";
  json m = json::object();
  if (fs::exists(path)) {
    try {
      m = json::parse(read_file(path));
    } catch (const json::exception&) {
      m = json::object();
    }
  }
  const nlohmann::json canonical = nlohmann::json::parse(c.raw.dump());
  m["config_hash"] = hex64(fnv1a64(canonical.dump()));
  m["seed"] = c.seed;
  m["decode_seed"] = c.decode.seed;
  json entry;
  entry["created"] = utc_timestamp_now();
  entry["outputs"] = outputs;
  m["commands"][command] = std::move(entry);
  write_file_atomic(path, m.dump(2) + "\n");
}

// Last trading day of each calendar month inside the window, per ticker.
std::vector<EntityDate> month_end_pairs(const std::vector<PriceSeries>& universe, DateRange w) {
  std::vector<EntityDate> out;
  for (const auto& s : universe) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Date d = s[i].date;
      if (!w.contains(d)) continue;
      const bool last_of_month = i + 1 == s.size() || s[i + 1].date.month() != d.month();
      if (last_of_month) out.emplace_back(s.ticker(), d);
    }
  }
  return out;
}

std::vector<EntityDate> pairs_from_json(const json& j) {
  std::vector<EntityDate> out;
  for (const auto& p : j) out.emplace_back(p.at(0).get<std::string>(), Date::parse(p.at(1).get<std::string>()));
  return out;
}

// ---- commands -------------------------------------------------------------

int cmd_make_synthetic(const std::string& out_dir, std::size_t n_memorized, std::uint64_t seed) {
  const fs::path dir(out_dir);
  SyntheticWorld world = make_synthetic_world(n_memorized, seed);
  json tickers = json::array();
  for (const auto& s : world.universe) {
    write_file_atomic(dir / "prices" / (s.ticker() + ".csv"), to_price_csv(s));
    tickers.push_back(s.ticker());
  }
  write_file_atomic(dir / "synthetic_spec.json", to_json(world.spec));
  json cfg;
  cfg["provider"] = {{"kind", "synthetic"}, {"spec", "synthetic_spec.json"}};
  cfg["data_dir"] = "prices";
  cfg["output_dir"] = "run";
  cfg["tickers"] = tickers;
  cfg["is_window"] = {{"start", "2012-01-01"}, {"end", "2013-12-31"}};
  cfg["oos_window"] = {{"start", "2025-01-01"}, {"end", "2025-12-31"}};
  cfg["seed"] = 42;
  cfg["decode"] = {{"temperature", 1.0}, {"max_tokens", 256}, {"retry_factor", 0.8}, {"max_retries", 5}};
  cfg["alpha_bounds"] = {{"alpha_min", 0.0}, {"alpha_max", 2.0}, {"alpha_cap", 4.0}};
  cfg["discovery"] = {{"budget", 8}, {"proposer", "mutation"}};
  write_file_atomic(dir / "config.json", cfg.dump(2) + "\n");
  std::cout << "wrote " << world.universe.size() << " price files, synthetic_spec.json and config.json to "
            << dir.string() << "\n";
  return kExitOk;
}

int cmd_discover(const RunConfig& c, std::optional<std::size_t> budget_flag,
                 const std::string& seed_flag) {
  const auto provider = make_provider(c);
  const auto universe = load_universe(c);
  const CalibrationSplit split = build_calibration_dataset(universe, calibration_options(c));

  const json d = c.raw.value("discovery", json::object());
  DiscoveryOptions opt;
  opt.budget = budget_flag ? *budget_flag : d.value("budget", std::size_t{16});
  opt.jobs = c.jobs;
  const std::string seed = !seed_flag.empty()
                               ? seed_flag
                               : d.value("seed_instruction", std::string(templates::kSeedInstruction));
  std::unique_ptr<CandidateProposer> proposer;
  if (d.value("proposer", std::string("mutation")) == "http") {
    HttpProposerConfig hc;
    hc.endpoint = d.value("proposer_endpoint", std::string());
    hc.model = d.value("proposer_model", std::string());
    if (const char* tok = std::getenv(kTokenEnv)) hc.api_token = tok;
    proposer = std::make_unique<HttpProposer>(hc);
  } else {
    proposer = std::make_unique<MutationProposer>(c.seed);
  }

  std::vector<CandidateScore> scores;
  const PriorArtifact a =
      discover_prior(seed, *proposer, split.train, split.val, *provider, opt, &scores);
  save_prior_artifact(c.artifact, a);
  write_file_atomic(c.run_dir / "calibration_train.jsonl", to_jsonl(split.train));
  write_file_atomic(c.run_dir / "calibration_val.jsonl", to_jsonl(split.val));

  json cands = json::array();
  for (const auto& s : scores) {
    cands.push_back({{"instruction", s.instruction},
                     {"train_accuracy", s.train_accuracy ? json(*s.train_accuracy) : json()},
                     {"val_accuracy", s.val_accuracy ? json(*s.val_accuracy) : json()},
                     {"error", s.error}});
  }
  write_file_atomic(c.run_dir / "discovery_candidates.json", cands.dump(2) + "\n");
  update_manifest(c, "discover", {c.artifact.string()});

  std::printf("examples: %zu train / %zu val, candidates scored: %zu\n", split.train.size(),
              split.val.size(), scores.size());
  std::printf("selected instruction: %s\n", a.instruction.c_str());
  std::printf("train accuracy: %.4f\nval accuracy: %.4f\n", a.train_accuracy.value_or(0.0),
              a.val_accuracy);
  std::printf("artifact: %s\n", c.artifact.string().c_str());
  return kExitOk;
}

PriorArtifact require_artifact(const RunConfig& c, const LogitProvider& provider) {
  if (!fs::exists(c.artifact)) {
    throw CalibrationError("no prior artifact at " + c.artifact.string() +
                           "; run `fincad discover` first");
  }
  try {
    return load_prior_artifact(c.artifact, provider.model_id());
  } catch (const PromptError& e) {
    throw CalibrationError(e.what());
  }
}

int cmd_calibrate_entity(const RunConfig& c) {
  const auto provider = make_provider(c);
  const PriorArtifact a = require_artifact(c, *provider);
  const auto labels = provider->labels();
  std::vector<Date> dates = default_calibration_dates();
  if (const json j = c.raw.value("calibration_dates", json()); j.is_array()) {
    dates.clear();
    for (const auto& d : j) dates.push_back(Date::parse(d.get<std::string>()));
  }
  if (c.tickers.empty()) throw UsageError("no tickers configured");
  std::vector<EntityStats> stats(c.tickers.size());
  parallel_for(c.tickers.size(), c.jobs, [&](std::size_t i) {
    stats[i] = calibrate_entity(*provider, a.instruction, c.tickers[i], dates, labels);
  });
  json outputs = json::array();
  for (const auto& s : stats) {
    save_entity_stats(c.calibration_dir, s);
    outputs.push_back(entity_stats_path(c.calibration_dir, s.ticker).string());
    std::printf("%-10s mean_entropy=%.4f std_entropy=%.4f n=%zu\n", s.ticker.c_str(),
                s.mean_entropy, s.std_entropy, s.n_dates);
  }
  update_manifest(c, "calibrate-entity", outputs);
  return kExitOk;
}

int cmd_profile(const RunConfig& c) {
  const auto provider = make_provider(c);
  const PriorArtifact a = require_artifact(c, *provider);
  const json pj = c.raw.value("profile", json::object());

  std::vector<EntityDate> is_pairs, oos_pairs;
  std::vector<PriceSeries> universe;
  auto universe_once = [&]() -> const std::vector<PriceSeries>& {
    if (universe.empty()) universe = load_universe(c);
    return universe;
  };
  if (pj.contains("in_sample_pairs")) {
    is_pairs = pairs_from_json(pj["in_sample_pairs"]);
  } else {
    const auto split = build_calibration_dataset(universe_once(), calibration_options(c));
    for (const auto* part : {&split.train, &split.val}) {
      for (const auto& ex : *part) is_pairs.emplace_back(ex.ticker, ex.date);
    }
  }
  if (pj.contains("out_of_sample_pairs")) {
    oos_pairs = pairs_from_json(pj["out_of_sample_pairs"]);
  } else {
    oos_pairs = month_end_pairs(universe_once(), c.oos_window);
  }
  if (is_pairs.empty() || oos_pairs.empty()) {
    throw DataError(DataErrorKind::kEmptyDataset,
                    "profiling needs in-sample and out-of-sample (entity, date) pairs");
  }
  const ModelProfile p =
      profile_model(*provider, a.instruction, is_pairs, oos_pairs, provider->labels(), c.bounds, c.jobs);
  save_profile(c.calibration_dir, p);
  update_manifest(c, "profile", {profile_path(c.calibration_dir).string()});
  std::printf("sigma_ref=%.6f delta_range=%.6f (in-sample %zu pairs, out-of-sample %zu pairs)\n",
              p.sigma_ref, p.delta_range, p.n_in_sample, p.n_out_of_sample);
  return kExitOk;
}

struct BacktestJob {
  std::string ticker;
  MitigationMode mode;
  WindowKind kind;
};

int cmd_backtest(const RunConfig& c, const std::vector<std::string>& mode_flags,
                 const std::string& window_flag, bool force_zero_alpha) {
  const auto provider = make_provider(c);
  const auto universe = load_universe(c);

  std::vector<std::string> mode_names = mode_flags;
  if (mode_names.empty()) mode_names = {c.raw.value("mode", std::string("baseline"))};
  std::vector<MitigationMode> modes;
  for (const auto& m : mode_names) {
    if (m == "all") {
      modes = {MitigationMode::kBaseline, MitigationMode::kAnonymisation,
               MitigationMode::kPromptInjection, MitigationMode::kFincad};
      break;
    }
    modes.push_back(mitigation_from_string(m));
  }
  std::vector<WindowKind> kinds;
  if (window_flag == "is" || window_flag == "both") kinds.push_back(WindowKind::kInSample);
  if (window_flag == "oos" || window_flag == "both") kinds.push_back(WindowKind::kOutOfSample);
  if (kinds.empty()) throw UsageError("--window must be is, oos or both");

  // FinCAD dependency chain: artifact -> profile -> entity stats.
  std::optional<PriorArtifact> artifact;
  std::optional<ModelProfile> profile;
  std::map<std::string, EntityStats> stats;
  const bool needs_fincad =
      std::find(modes.begin(), modes.end(), MitigationMode::kFincad) != modes.end();
  if (needs_fincad) {
    artifact = require_artifact(c, *provider);
    profile = load_profile(c.calibration_dir);
    if (!profile->model_id.empty() && profile->model_id != provider->model_id()) {
      throw CalibrationError("profile was built for '" + profile->model_id + "'");
    }
    for (const auto& t : c.tickers) stats.emplace(t, load_entity_stats(c.calibration_dir, t));
  }
  std::vector<EntityName> entities;
  for (const auto& t : c.tickers) {
    const auto it = c.companies.find(t);
    entities.push_back({t, it == c.companies.end() ? std::string() : it->second});
  }

  std::vector<BacktestJob> jobs;
  for (const auto& t : c.tickers) {
    for (MitigationMode m : modes) {
      for (WindowKind k : kinds) jobs.push_back({t, m, k});
    }
  }
  std::vector<BacktestReport> reports(jobs.size());
  std::vector<std::vector<ProbeTraceRow>> traces(jobs.size());
  parallel_for(jobs.size(), c.jobs, [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto& series = *std::find_if(universe.begin(), universe.end(),
                                       [&](const PriceSeries& s) { return s.ticker() == job.ticker; });
    AgentSetup setup;
    setup.provider = provider;
    setup.mode = job.mode;
    setup.decode = c.decode;
    setup.entities = entities;
    if (job.mode == MitigationMode::kFincad) {
      setup.artifact = artifact;
      setup.profile = profile;
      setup.stats = stats.at(job.ticker);
      if (force_zero_alpha) setup.force_alpha = 0.0;
    }
    LlmAgent agent(std::move(setup));
    BacktestConfig bc;
    bc.kind = job.kind;
    const DateRange w = job.kind == WindowKind::kInSample ? c.is_window : c.oos_window;
    reports[i] = run_backtest(series, agent, w, job.mode, bc);
    reports[i].model_id = provider->model_id();
    traces[i] = agent.probe_trace();
  });

  json outputs = json::array();
  json summary = json::array();
  std::printf("%-8s %-17s %-4s %14s %14s %8s %8s\n", "ticker", "mode", "win", "ending", "buy&hold",
              "sharpe", "alpha");
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = reports[i];
    const std::string win = jobs[i].kind == WindowKind::kInSample ? "is" : "oos";
    const fs::path stem = c.run_dir / "backtest" / r.ticker / (to_string(r.mode) + "_" + win);
    write_file_atomic(stem.string() + ".json", to_json(r));
    write_file_atomic(stem.string() + "_equity.csv", equity_csv(r));
    write_file_atomic(stem.string() + "_decisions.jsonl", decision_trace_jsonl(r.decisions));
    if (!traces[i].empty()) write_file_atomic(stem.string() + "_probes.csv", probe_trace_csv(traces[i]));
    outputs.push_back(stem.string() + ".json");
    const double alpha = r.mean_alpha_is ? *r.mean_alpha_is : r.mean_alpha_oos.value_or(0.0);
    summary.push_back({{"ticker", r.ticker},
                       {"mode", to_string(r.mode)},
                       {"window", win},
                       {"ending_value", r.ending_value.dollars()},
                       {"buy_and_hold_ending", r.buy_and_hold_ending.dollars()},
                       {"sharpe", r.metrics.sharpe},
                       {"sortino", r.metrics.sortino},
                       {"mean_alpha", alpha}});
    std::printf("%-8s %-17s %-4s %14s %14s %8.3f %8.3f\n", r.ticker.c_str(),
                to_string(r.mode).c_str(), win.c_str(), r.ending_value.to_string().c_str(),
                r.buy_and_hold_ending.to_string().c_str(), r.metrics.sharpe, alpha);
  }
  write_file_atomic(c.run_dir / "backtest" / "summary.json", summary.dump(2) + "\n");
  update_manifest(c, "backtest", outputs);
  return kExitOk;
}

std::vector<std::size_t> parse_k(const std::string& spec) {
  auto num = [&](const std::string& s) -> std::size_t {
    if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) {
      throw UsageError("bad subset size '" + spec + "' (use 7 or 5..11)");
    }
    return std::stoul(s);
  };
  const auto dots = spec.find("..");
  if (dots == std::string::npos) return {num(spec)};
  const std::size_t lo = num(spec.substr(0, dots)), hi = num(spec.substr(dots + 2));
  if (lo > hi) throw UsageError("empty k range '" + spec + "'");
  std::vector<std::size_t> out;
  for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

int cmd_align(const RunConfig& c, const std::string& rows_path, const std::string& k_spec,
              const std::string& metric_name) {
  if (rows_path.empty()) throw UsageError("--rows is required");
  const auto rows = parse_model_rows(read_file(rows_path));
  const Metric metric = metric_from_string(metric_name);
  const auto ks = parse_k(k_spec);
  for (std::size_t k : ks) {
    if (k < 2 || k > rows.size()) {
      throw UsageError("k=" + std::to_string(k) + " outside [2, " + std::to_string(rows.size()) + "]");
    }
  }
  std::vector<AlignmentReport> reports;
  json outputs = json::array();
  for (std::size_t k : ks) {
    reports.push_back(subset_alignment(rows, k, metric));
    const fs::path out = c.run_dir / "align" / ("k" + std::to_string(k) + "_" + to_string(metric) + ".json");
    write_file_atomic(out, to_json(reports.back()));
    outputs.push_back(out.string());
  }
  write_file_atomic(c.run_dir / "align" / ("scatter_" + to_string(metric) + ".csv"), scatter_csv(rows, metric));
  update_manifest(c, "align", outputs);
  std::cout << summary_table(reports);
  return kExitOk;
}

// Merges per-mode equity curves into one wide CSV per (ticker, window) and
// copies probe traces next to them.
int cmd_plot_data(const RunConfig& c) {
  const fs::path src = c.run_dir / "backtest";
  if (!fs::exists(src)) throw DataError(DataErrorKind::kIo, "no backtest outputs under " + src.string());
  const fs::path dst = c.run_dir / "plot";
  json outputs = json::array();
  for (const auto& tdir : fs::directory_iterator(src)) {
    if (!tdir.is_directory()) continue;
    const std::string ticker = tdir.path().filename().string();
    // window -> mode -> (date -> value)
    std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> curves;
    for (const auto& f : fs::directory_iterator(tdir.path())) {
      const std::string name = f.path().filename().string();
      const std::string suffix = "_equity.csv";
      if (name.size() > suffix.size() && name.ends_with(suffix)) {
        const std::string stem = name.substr(0, name.size() - suffix.size());
        const auto us = stem.rfind('_');
        const std::string mode = stem.substr(0, us), win = stem.substr(us + 1);
        const auto lines = split_lines(read_file(f.path()));
        for (std::size_t i = 1; i < lines.size(); ++i) {
          const auto cells = split_csv_row(lines[i]);
          if (cells.size() == 2) curves[win][mode][cells[0]] = cells[1];
        }
      } else if (name.ends_with("_probes.csv")) {
        const fs::path out = dst / (ticker + "_" + name);
        write_file_atomic(out, read_file(f.path()));
        outputs.push_back(out.string());
      }
    }
    for (const auto& [win, modes] : curves) {
      std::set<std::string> dates;
      for (const auto& [m, series] : modes) {
        for (const auto& [d, v] : series) dates.insert(d);
      }
      std::string csv = "date";
      for (const auto& [m, series] : modes) csv += "," + m;
      csv += "\n";
      for (const auto& d : dates) {
        csv += d;
        for (const auto& [m, series] : modes) {
          const auto it = series.find(d);
          csv += "," + (it == series.end() ? std::string() : it->second);
        }
        csv += "\n";
      }
      const fs::path out = dst / ("equity_" + ticker + "_" + win + ".csv");
      write_file_atomic(out, csv);
      outputs.push_back(out.string());
    }
  }
  update_manifest(c, "plot-data", outputs);
  std::printf("wrote %zu plot files under %s\n", outputs.size(), dst.string().c_str());
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.error_class()) {
    case ErrorClass::kUsage: return kExitUsage;
    case ErrorClass::kProvider: return kExitProvider;
    case ErrorClass::kCalibration: return kExitCalibration;
    case ErrorClass::kData:
    case ErrorClass::kPrompt:
    case ErrorClass::kStats:
    case ErrorClass::kParse: return kExitData;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fincad: contrastive decoding against look-ahead bias in LLM trading backtests"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", flags.config, "JSON run configuration");
    sub->add_option("--run-dir", flags.run_dir, "Output directory (overrides output_dir)");
    sub->add_option("-j,--jobs", flags.jobs, "Parallel worker limit")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed_value, "Seed for sampling and dataset splits")
        ->each([&](const std::string&) { flags.seed = seed_value; });
    sub->add_option("--data-dir", flags.data_dir, "Directory of <TICKER>.csv price files");
    sub->add_option("-t,--tickers", flags.tickers, "Tickers (overrides the config list)");
    sub->add_option("--artifact", flags.artifact, "Prior artifact path");
    sub->add_option("--calibration-dir", flags.calibration_dir, "Profile/entity sidecar directory");
  };

  std::string synth_out = "synthetic";
  std::size_t synth_n = 4;
  std::uint64_t synth_seed = 7;
  auto* make = app.add_subcommand("make-synthetic", "Write a synthetic price universe, model spec and config");
  make->add_option("-o,--out", synth_out, "Output directory");
  make->add_option("-n,--memorized", synth_n, "Number of memorised tickers");
  make->add_option("--world-seed", synth_seed, "Seed for the generated world");

  auto* discover = app.add_subcommand("discover", "Search for the memory-activation instruction");
  add_common(discover);
  std::optional<std::size_t> budget;
  std::string seed_instruction;
  discover->add_option("--budget", budget, "Candidate pool size including the seed");
  discover->add_option("--seed-instruction", seed_instruction, "Seed instruction text");

  auto* calibrate = app.add_subcommand("calibrate-entity", "Probe entropies over the calibration dates");
  add_common(calibrate);

  auto* profile = app.add_subcommand("profile", "Model-level entropy spread (sigma_ref, delta_range)");
  add_common(profile);

  auto* backtest = app.add_subcommand("backtest", "Run single-stock backtests");
  add_common(backtest);
  std::vector<std::string> modes;
  std::string window = "both";
  bool zero_alpha = false;
  backtest->add_option("-m,--mode", modes, "baseline, anonymisation, prompt_injection, fincad or all");
  backtest->add_option("-w,--window", window, "is, oos or both");
  backtest->add_flag("--force-zero-alpha", zero_alpha, "FinCAD with alpha pinned to 0 (identity check)");

  auto* align = app.add_subcommand("align", "Subset ranking alignment of IS vs OOS metrics");
  add_common(align);
  std::string rows_path, k_spec = "7", metric = "sharpe";
  align->add_option("--rows", rows_path, "CSV of per-model metrics");
  align->add_option("-k,--k", k_spec, "Subset size or range such as 5..11");
  align->add_option("--metric", metric, "sharpe or sortino");

  auto* plot = app.add_subcommand("plot-data", "Collect plot-ready CSVs from a run directory");
  add_common(plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (make->parsed()) return cmd_make_synthetic(synth_out, synth_n, synth_seed);
    const RunConfig cfg = load_config(flags);
    if (discover->parsed()) return cmd_discover(cfg, budget, seed_instruction);
    if (calibrate->parsed()) return cmd_calibrate_entity(cfg);
    if (profile->parsed()) return cmd_profile(cfg);
    if (backtest->parsed()) return cmd_backtest(cfg, modes, window, zero_alpha);
    if (align->parsed()) return cmd_align(cfg, rows_path, k_spec, metric);
    if (plot->parsed()) return cmd_plot_data(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
