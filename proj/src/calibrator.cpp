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

#include "fincad/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "fincad/error.hpp"
#include "fincad/io.hpp"
#include "fincad/parallel.hpp"
#include "fincad/prompt_forge.hpp"

namespace fincad {
namespace {

using json = nlohmann::ordered_json;

template <typename T>
T parse_sidecar(const std::string& text, const char* what, T (*from_json)(const json&)) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw CalibrationError(std::string(what) + ": " + e.what());
  }
}

EntityStats stats_from(const json& j) {
  EntityStats s;
  s.ticker = j.at("ticker").get<std::string>();
  s.mean_entropy = j.at("mean_entropy").get<double>();
  s.std_entropy = j.at("std_entropy").get<double>();
  s.n_dates = j.at("n_dates").get<std::size_t>();
  for (const auto& d : j.value("dates", json::array())) s.dates.push_back(Date::parse(d.get<std::string>()));
  s.entropies = j.value("entropies", std::vector<double>{});
  if (s.std_entropy < 0 || !std::isfinite(s.mean_entropy) || !std::isfinite(s.std_entropy)) {
    throw CalibrationError("entity stats for " + s.ticker + " are invalid");
  }
  return s;
}

ModelProfile profile_from(const json& j) {
  ModelProfile p;
  p.model_id = j.value("model_id", std::string());
  p.sigma_ref = j.at("sigma_ref").get<double>();
  p.delta_range = j.at("delta_range").get<double>();
  p.alpha_min = j.value("alpha_min", p.alpha_min);
  p.alpha_max = j.value("alpha_max", p.alpha_max);
  p.alpha_cap = j.value("alpha_cap", p.alpha_cap);
  p.n_in_sample = j.value("n_in_sample", std::size_t{0});
  p.n_out_of_sample = j.value("n_out_of_sample", std::size_t{0});
  p.validate();
  return p;
}

}  // namespace

ProbeResult probe_from_logits(double l_up, double l_down) {
  ProbeResult r;
  r.l_up = l_up;
  r.l_down = l_down;
  const double d = std::abs(l_up - l_down);
  if (d == 0.0) return r;  // p = 0.5, entropy exactly 1
  const double e = std::exp(-d);
  const double small = e / (1.0 + e);
  const double big = 1.0 - small;
  const double log_big = -std::log1p(e);
  const double log_small = -d - std::log1p(e);
  // 0 log 0 := 0: once e underflows the small term is zero as well.
  const double h = -(big * log_big + (small > 0 ? small * log_small : 0.0)) / std::numbers::ln2;
  r.entropy = std::clamp(h, 0.0, 1.0);
  r.p_up = l_up > l_down ? big : small;
  r.p_down = l_up > l_down ? small : big;
  return r;
}

ProbeResult probe_entropy(const LogitProvider& provider, std::string_view instruction,
                          std::string_view ticker, Date date, const LabelPair& labels) {
  const auto logits = next_logits(provider, assemble_probe(instruction, ticker, date));
  return probe_from_logits(label_logit(logits, labels.up()), label_logit(logits, labels.down()));
}

std::pair<double, double> mean_and_population_std(const std::vector<double>& xs) {
  if (xs.empty()) throw CalibrationError("cannot take statistics of an empty sample");
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) {
    return {xs.front(), 0.0};
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

EntityStats entity_stats_from_entropies(std::string ticker, std::vector<Date> dates,
                                        std::vector<double> entropies) {
  const auto [mean, sd] = mean_and_population_std(entropies);
  EntityStats s;
  s.ticker = std::move(ticker);
  s.mean_entropy = mean;
  s.std_entropy = sd;
  s.n_dates = entropies.size();
  s.dates = std::move(dates);
  s.entropies = std::move(entropies);
  return s;
}

std::vector<Date> default_calibration_dates() {
  std::vector<Date> out;
  for (int year : {2007, 2008, 2009, 2012, 2013, 2014}) {
    for (unsigned month : {5u, 11u}) {
      Date d = Date::from_ymd(year, month, 15);
      while (d.iso_weekday() > 5) d = d - 1;
      out.push_back(d);
    }
  }
  return out;
}

EntityStats calibrate_entity(const LogitProvider& provider, std::string_view instruction,
                             const std::string& ticker, const std::vector<Date>& dates,
                             const LabelPair& labels) {
  if (dates.empty()) throw CalibrationError("calibrate_entity: no dates");
  std::vector<double> h;
  h.reserve(dates.size());
  for (Date d : dates) {
    try {
      h.push_back(probe_entropy(provider, instruction, ticker, d, labels).entropy);
    } catch (const ProviderError& e) {
      throw ProviderError(e.kind(), "calibration of " + ticker + " aborted at " + d.to_string() +
                                        ": " + e.what());
    }
  }
  return entity_stats_from_entropies(ticker, dates, std::move(h));
}

void ModelProfile::validate() const {
  if (!(sigma_ref > 0.0) || !std::isfinite(sigma_ref)) {
    throw CalibrationError("profile: sigma_ref must be > 0");
  }
  if (!(delta_range > 0.0) || !std::isfinite(delta_range)) {
    throw CalibrationError("profile: delta_range must be > 0");
  }
  if (!(alpha_min >= 0.0) || !(alpha_max > 0.0) || !(alpha_cap > 0.0) || alpha_min > alpha_cap) {
    throw CalibrationError("profile: need 0 <= alpha_min <= alpha_cap, alpha_max > 0");
  }
}

ModelProfile profile_from_entropies(const std::vector<double>& in_sample,
                                    const std::vector<double>& out_of_sample,
                                    const AlphaBounds& bounds) {
  if (in_sample.empty() || out_of_sample.empty()) {
    throw CalibrationError("profiling needs non-empty in-sample and out-of-sample pair sets");
  }
  ModelProfile p;
  p.sigma_ref = mean_and_population_std(out_of_sample).second;
  p.delta_range = mean_and_population_std(in_sample).second;
  p.alpha_min = bounds.alpha_min;
  p.alpha_max = bounds.alpha_max;
  p.alpha_cap = bounds.alpha_cap;
  p.n_in_sample = in_sample.size();
  p.n_out_of_sample = out_of_sample.size();
  if (p.sigma_ref == 0.0) {
    throw CalibrationError(
        "profile: out-of-sample probe entropies have zero spread (sigma_ref = 0); add more "
        "post-cutoff (entity, date) pairs or check that the provider's logits vary");
  }
  if (p.delta_range == 0.0) {
    throw CalibrationError(
        "profile: in-sample probe entropies have zero spread (delta_range = 0); add more "
        "calibration pairs or check that the prior instruction elicits recall");
  }
  p.validate();
  return p;
}

ModelProfile profile_model(const LogitProvider& provider, std::string_view instruction,
                           const std::vector<EntityDate>& in_sample,
                           const std::vector<EntityDate>& out_of_sample, const LabelPair& labels,
                           const AlphaBounds& bounds, std::size_t jobs) {
  auto run = [&](const std::vector<EntityDate>& pairs) {
    std::vector<double> h(pairs.size());
    parallel_for(pairs.size(), jobs, [&](std::size_t i) {
      h[i] = probe_entropy(provider, instruction, pairs[i].first, pairs[i].second, labels).entropy;
    });
    return h;
  };
  ModelProfile p = profile_from_entropies(run(in_sample), run(out_of_sample), bounds);
  p.model_id = provider.model_id();
  return p;
}

double adaptive_alpha(const EntityStats& stats, double entropy, const ModelProfile& p) {
  const double s_sigma = std::min(1.0, stats.std_entropy / p.sigma_ref);
  const double s_h = std::max(0.0, (stats.mean_entropy - entropy) / p.delta_range);
  return std::max(p.alpha_min, std::min(p.alpha_max * s_sigma * s_h, p.alpha_cap));
}

std::string to_json(const EntityStats& s) {
  json j;
  j["ticker"] = s.ticker;
  j["mean_entropy"] = s.mean_entropy;
  j["std_entropy"] = s.std_entropy;
  j["n_dates"] = s.n_dates;
  json dates = json::array();
  for (Date d : s.dates) dates.push_back(d.to_string());
  j["dates"] = std::move(dates);
  j["entropies"] = s.entropies;
  return j.dump(2) + "\n";
}

EntityStats entity_stats_from_json(const std::string& text) {
  return parse_sidecar(text, "entity stats", &stats_from);
}

std::string to_json(const ModelProfile& p) {
  json j;
  j["model_id"] = p.model_id;
  j["sigma_ref"] = p.sigma_ref;
  j["delta_range"] = p.delta_range;
  j["alpha_min"] = p.alpha_min;
  j["alpha_max"] = p.alpha_max;
  j["alpha_cap"] = p.alpha_cap;
  j["n_in_sample"] = p.n_in_sample;
  j["n_out_of_sample"] = p.n_out_of_sample;
  return j.dump(2) + "\n";
}

ModelProfile model_profile_from_json(const std::string& text) {
  return parse_sidecar(text, "model profile", &profile_from);
}

std::filesystem::path profile_path(const std::filesystem::path& dir) {
  return dir / "profile.json";
}

std::filesystem::path entity_stats_path(const std::filesystem::path& dir,
                                        std::string_view ticker) {
  return dir / "entities" / (std::string(ticker) + ".json");
}

void save_profile(const std::filesystem::path& dir, const ModelProfile& profile) {
  profile.validate();
  write_file_atomic(profile_path(dir), to_json(profile));
}

void save_entity_stats(const std::filesystem::path& dir, const EntityStats& stats) {
  write_file_atomic(entity_stats_path(dir, stats.ticker), to_json(stats));
}

ModelProfile load_profile(const std::filesystem::path& dir) {
  const auto path = profile_path(dir);
  if (!std::filesystem::exists(path)) {
    throw CalibrationError("no model profile at " + path.string() + "; run `fincad profile` first");
  }
  return model_profile_from_json(read_file(path));
}

EntityStats load_entity_stats(const std::filesystem::path& dir, std::string_view ticker) {
  const auto path = entity_stats_path(dir, ticker);
  if (!std::filesystem::exists(path)) {
    throw CalibrationError("no calibration for " + std::string(ticker) + " at " + path.string() +
                           "; run `fincad calibrate-entity` first");
  }
  return entity_stats_from_json(read_file(path));
}

std::string probe_trace_csv(const std::vector<ProbeTraceRow>& rows) {
  std::string out = "ticker,date,l_up,l_down,entropy,alpha\n";
  for (const auto& r : rows) {
    out += r.ticker + "," + r.date.to_string() + "," + format_double(r.l_up) + "," +
           format_double(r.l_down) + "," + format_double(r.entropy) + "," +
           format_double(r.alpha) + "\n";
  }
  return out;
}

}  // namespace fincad
