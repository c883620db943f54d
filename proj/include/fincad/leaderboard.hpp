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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fincad {

// In-sample conditions, in table order, plus the out-of-sample column.
enum class Condition { kBaseline, kAnonymisation, kPromptInjection, kFincad };
inline constexpr std::array<Condition, 4> kConditions{
    Condition::kBaseline, Condition::kAnonymisation, Condition::kPromptInjection,
    Condition::kFincad};
std::string to_string(Condition c);  // "IS-B", "IS-An", "IS-PI", "IS-C"

struct MetricColumns {
  std::array<double, 4> in_sample{};  // indexed by Condition
  double oos = 0.0;
};

struct ModelRow {
  std::string model_id;
  MetricColumns sharpe;
  std::optional<MetricColumns> sortino;
};

enum class Metric { kSharpe, kSortino };
std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);  // throws UsageError

// CSV with header model_id,is_b,is_an,is_pi,is_c,oos and optionally the same
// five columns prefixed "sortino_". Throws DataError.
std::vector<ModelRow> parse_model_rows(const std::string& csv);

// Average ranks for ties, doubled so they stay integral (rank 1.5 -> 3).
std::vector<long long> doubled_average_ranks(std::span<const double> x);

// Pearson correlation of average ranks, accumulated in exact integer
// arithmetic so inputs with the same rank pattern give bit-identical results.
// Throws StatsError on length mismatch, n < 2 or zero rank variance.
double spearman(std::span<const double> x, std::span<const double> y);

// Kendall tau-b. Same error contract as spearman.
double kendall(std::span<const double> x, std::span<const double> y);

enum class Alternative { kGreater, kLess };

struct WilcoxonResult {
  double p = 1.0;
  double w_plus = 0.0;  // sum of ranks of positive deltas
  std::size_t n = 0;    // non-zero deltas used
  std::size_t zeros = 0;
  bool exact = false;
  bool degenerate = false;  // every delta was zero
  Alternative alternative = Alternative::kGreater;
};

inline constexpr std::size_t kWilcoxonExactMax = 25;

// One-sided signed-rank test. Exact zeros are dropped; tied magnitudes get
// average ranks. Exact null distribution for n <= 25, otherwise a normal
// approximation with continuity and tie correction. Throws StatsError on an
// empty input.
WilcoxonResult wilcoxon_one_sided(std::span<const double> deltas,
                                  Alternative alternative = Alternative::kGreater);

struct ConditionSummary {
  double mean_rho = 0.0;
  double mean_tau = 0.0;
  double frac_positive = 0.0;
  std::size_t n_positive = 0;
  // Paired test of (rho_condition - rho_baseline), in the direction of the
  // mean delta. Absent for the baseline itself.
  std::optional<WilcoxonResult> vs_baseline;
  double mean_delta = 0.0;
};

struct AlignmentReport {
  std::size_t k = 0;
  std::size_t n_models = 0;
  std::size_t n_subsets = 0;  // C(n, k)
  std::size_t n_excluded = 0;  // subsets with zero rank variance
  Metric metric = Metric::kSharpe;
  std::map<Condition, ConditionSummary> conditions;
};

// Every size-k subset of rows; per condition, rank correlation of in-sample
// against OOS. Throws UsageError unless 2 <= k <= n.
AlignmentReport subset_alignment(const std::vector<ModelRow>& rows, std::size_t k,
                                 Metric metric = Metric::kSharpe);

std::string to_json(const AlignmentReport& report);
// model_id,is_metric,oos_metric,condition
std::string scatter_csv(const std::vector<ModelRow>& rows, Metric metric = Metric::kSharpe);
// Fixed-width table of mean rho / tau per condition for several reports.
std::string summary_table(const std::vector<AlignmentReport>& reports);

}  // namespace fincad
