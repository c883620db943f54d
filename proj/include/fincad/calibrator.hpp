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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fincad/date.hpp"
#include "fincad/model_gateway.hpp"

namespace fincad {

struct ProbeResult {
  double l_up = 0.0;
  double l_down = 0.0;
  double p_up = 0.5;
  double p_down = 0.5;
  double entropy = 1.0;  // normalised binary entropy in [0, 1]
};

// Two-way softmax and normalised entropy of a pair of label logits. Computed
// from |l_up - l_down| so swapping the labels leaves the entropy bit-identical.
ProbeResult probe_from_logits(double l_up, double l_down);

// One forward pass on the probe prompt for (s, t) under `instruction`.
ProbeResult probe_entropy(const LogitProvider& provider, std::string_view instruction,
                          std::string_view ticker, Date date, const LabelPair& labels);

struct EntityStats {
  std::string ticker;
  double mean_entropy = 0.0;
  double std_entropy = 0.0;  // population std
  std::size_t n_dates = 0;
  std::vector<Date> dates;
  std::vector<double> entropies;
};

// Mean and population standard deviation. A constant sample has std exactly 0.
std::pair<double, double> mean_and_population_std(const std::vector<double>& xs);

EntityStats entity_stats_from_entropies(std::string ticker, std::vector<Date> dates,
                                        std::vector<double> entropies);

// Twelve fixed, entity-agnostic dates: the last weekday on or before May 15
// and November 15 of 2007, 2008, 2009, 2012, 2013 and 2014.
std::vector<Date> default_calibration_dates();

// Any probe failure aborts the entity.
EntityStats calibrate_entity(const LogitProvider& provider, std::string_view instruction,
                             const std::string& ticker, const std::vector<Date>& dates,
                             const LabelPair& labels);

struct AlphaBounds {
  double alpha_min = 0.0;
  double alpha_max = 2.0;
  double alpha_cap = 4.0;
};

struct ModelProfile {
  std::string model_id;
  double sigma_ref = 0.0;
  double delta_range = 0.0;
  double alpha_min = 0.0;
  double alpha_max = 2.0;
  double alpha_cap = 4.0;
  std::size_t n_in_sample = 0;
  std::size_t n_out_of_sample = 0;

  void validate() const;  // throws CalibrationError
};

using EntityDate = std::pair<std::string, Date>;

// sigma_ref = std of out-of-sample entropies; delta_range = std of in-sample
// entropies. Zero spread in either throws CalibrationError with a hint.
ModelProfile profile_from_entropies(const std::vector<double>& in_sample,
                                    const std::vector<double>& out_of_sample,
                                    const AlphaBounds& bounds = {});
ModelProfile profile_model(const LogitProvider& provider, std::string_view instruction,
                           const std::vector<EntityDate>& in_sample,
                           const std::vector<EntityDate>& out_of_sample, const LabelPair& labels,
                           const AlphaBounds& bounds = {}, std::size_t jobs = 1);

// alpha = max(a_min, min(a_max * s_sigma * s_H, a_cap)) with
// s_sigma = min(1, sigma_s / sigma_ref) and s_H = max(0, (H_s - H) / delta_range).
double adaptive_alpha(const EntityStats& stats, double entropy, const ModelProfile& profile);
inline double adaptive_alpha(const EntityStats& stats, const ProbeResult& probe,
                             const ModelProfile& profile) {
  return adaptive_alpha(stats, probe.entropy, profile);
}

std::string to_json(const EntityStats& stats);
EntityStats entity_stats_from_json(const std::string& text);
std::string to_json(const ModelProfile& profile);
ModelProfile model_profile_from_json(const std::string& text);

// Sidecar layout next to the prior artifact:
//   <dir>/profile.json and <dir>/entities/<ticker>.json
std::filesystem::path profile_path(const std::filesystem::path& dir);
std::filesystem::path entity_stats_path(const std::filesystem::path& dir, std::string_view ticker);
void save_profile(const std::filesystem::path& dir, const ModelProfile& profile);
void save_entity_stats(const std::filesystem::path& dir, const EntityStats& stats);
// Throw CalibrationError when the sidecar is missing or malformed.
ModelProfile load_profile(const std::filesystem::path& dir);
EntityStats load_entity_stats(const std::filesystem::path& dir, std::string_view ticker);

struct ProbeTraceRow {
  std::string ticker;
  Date date;
  double l_up = 0.0;
  double l_down = 0.0;
  double entropy = 0.0;
  double alpha = 0.0;
};

// CSV with header ticker,date,l_up,l_down,entropy,alpha.
std::string probe_trace_csv(const std::vector<ProbeTraceRow>& rows);

}  // namespace fincad
