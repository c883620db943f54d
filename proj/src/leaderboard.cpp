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

#include "fincad/leaderboard.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include <json.hpp>

#include "fincad/error.hpp"
#include "fincad/io.hpp"

namespace fincad {
namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw StatsError("length mismatch: " + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()));
  }
  if (x.size() < 2) throw StatsError("need at least two observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw StatsError("non-finite input");
  }
}

const MetricColumns& columns(const ModelRow& row, Metric metric) {
  if (metric == Metric::kSharpe) return row.sharpe;
  if (!row.sortino) throw DataError(DataErrorKind::kMissingColumn, row.model_id + ": no Sortino");
  return *row.sortino;
}

double parse_cell(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw DataError(DataErrorKind::kBadNumber,
                    "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::string fmt(double v, const char* spec) {
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string to_string(Condition c) {
  switch (c) {
    case Condition::kBaseline: return "IS-B";
    case Condition::kAnonymisation: return "IS-An";
    case Condition::kPromptInjection: return "IS-PI";
    case Condition::kFincad: return "IS-C";
  }
  return "IS-B";
}

std::string to_string(Metric m) { return m == Metric::kSharpe ? "sharpe" : "sortino"; }

Metric metric_from_string(const std::string& s) {
  if (s == "sharpe") return Metric::kSharpe;
  if (s == "sortino") return Metric::kSortino;
  throw UsageError("unknown metric '" + s + "' (expected sharpe or sortino)");
}

std::vector<ModelRow> parse_model_rows(const std::string& csv) {
  const auto lines = split_lines(csv);
  if (lines.empty()) throw DataError(DataErrorKind::kEmptyFile, "model rows file is empty");
  const auto header = split_csv_row(lines[0]);
  auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const char* names[] = {"is_b", "is_an", "is_pi", "is_c", "oos"};
  auto required = [&](const std::string& name) {
    if (auto c = col(name)) return *c;
    throw DataError(DataErrorKind::kMissingColumn, "model rows: missing column '" + name + "'");
  };
  const std::size_t id_col = required("model_id");
  std::array<std::size_t, 5> sharpe_cols{};
  for (int i = 0; i < 5; ++i) sharpe_cols[i] = required(names[i]);
  std::optional<std::array<std::size_t, 5>> sortino_cols;
  if (col("sortino_is_b")) {
    sortino_cols.emplace();
    for (int i = 0; i < 5; ++i) (*sortino_cols)[i] = required(std::string("sortino_") + names[i]);
  }

  std::vector<ModelRow> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto cells = split_csv_row(lines[ln]);
    if (cells.size() != header.size()) {
      throw DataError(DataErrorKind::kInvalidValue,
                      "line " + std::to_string(ln + 1) + ": expected " +
                          std::to_string(header.size()) + " fields");
    }
    auto read = [&](const std::array<std::size_t, 5>& cols) {
      MetricColumns m;
      for (int i = 0; i < 4; ++i) m.in_sample[i] = parse_cell(cells[cols[i]], ln + 1);
      m.oos = parse_cell(cells[cols[4]], ln + 1);
      return m;
    };
    ModelRow row;
    row.model_id = cells[id_col];
    if (row.model_id.empty()) {
      throw DataError(DataErrorKind::kInvalidValue, "line " + std::to_string(ln + 1) + ": empty model_id");
    }
    row.sharpe = read(sharpe_cols);
    if (sortino_cols) row.sortino = read(*sortino_cols);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(DataErrorKind::kEmptyDataset, "model rows file has no rows");
  return rows;
}

std::vector<long long> doubled_average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<long long> r(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    // Positions i..j (0-based) share the average rank ((i+1)+(j+1))/2.
    const long long doubled = static_cast<long long>(i + j + 2);
    for (std::size_t m = i; m <= j; ++m) r[order[m]] = doubled;
    i = j + 1;
  }
  return r;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = doubled_average_ranks(x);
  const auto ry = doubled_average_ranks(y);
  const long long n = static_cast<long long>(x.size());
  long long sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += rx[i];
    sy += ry[i];
    sxx += rx[i] * rx[i];
    syy += ry[i] * ry[i];
    sxy += rx[i] * ry[i];
  }
  const long long num = n * sxy - sx * sy;
  const long long dx = n * sxx - sx * sx;
  const long long dy = n * syy - sy * sy;
  if (dx == 0 || dy == 0) throw StatsError("spearman: zero rank variance");
  return static_cast<double>(num) / std::sqrt(static_cast<double>(dx) * static_cast<double>(dy));
}

double kendall(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const std::size_t n = x.size();
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool tx = x[i] == x[j];
      const bool ty = y[i] == y[j];
      if (tx) ++ties_x;
      if (ty) ++ties_y;
      if (tx || ty) continue;
      if ((x[i] < x[j]) == (y[i] < y[j])) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const long long n0 = static_cast<long long>(n * (n - 1) / 2);
  const long long a = n0 - ties_x;
  const long long b = n0 - ties_y;
  if (a == 0 || b == 0) throw StatsError("kendall: zero rank variance");
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(a) * static_cast<double>(b));
}

WilcoxonResult wilcoxon_one_sided(std::span<const double> deltas, Alternative alternative) {
  if (deltas.empty()) throw StatsError("wilcoxon: no deltas");
  WilcoxonResult res;
  res.alternative = alternative;
  std::vector<double> mags;
  std::vector<bool> positive;
  for (double d : deltas) {
    if (!std::isfinite(d)) throw StatsError("wilcoxon: non-finite delta");
    if (d == 0.0) {
      ++res.zeros;
      continue;
    }
    mags.push_back(std::abs(d));
    positive.push_back(d > 0);
  }
  res.n = mags.size();
  if (res.n == 0) {
    res.degenerate = true;
    res.p = 1.0;
    return res;
  }

  const auto r2 = doubled_average_ranks(mags);
  long long w2 = 0;  // doubled W+
  for (std::size_t i = 0; i < res.n; ++i) {
    if (positive[i]) w2 += r2[i];
  }
  res.w_plus = static_cast<double>(w2) / 2.0;

  if (res.n <= kWilcoxonExactMax) {
    // counts[s] = number of sign patterns whose doubled positive-rank sum is s.
    const long long total = std::accumulate(r2.begin(), r2.end(), 0LL);
    std::vector<long long> counts(static_cast<std::size_t>(total) + 1, 0);
    counts[0] = 1;
    long long reach = 0;
    for (long long r : r2) {
      for (long long s = reach; s >= 0; --s) {
        if (counts[s]) counts[s + r] += counts[s];
      }
      reach += r;
    }
    long long tail = 0;
    for (long long s = 0; s <= total; ++s) {
      if (alternative == Alternative::kGreater ? s >= w2 : s <= w2) tail += counts[s];
    }
    res.exact = true;
    res.p = static_cast<double>(tail) / std::ldexp(1.0, static_cast<int>(res.n));
    return res;
  }

  const double n = static_cast<double>(res.n);
  const double mean = n * (n + 1) / 4.0;
  double tie_term = 0.0;
  {
    auto sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
  }
  const double var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) {
    res.degenerate = true;
    res.p = 1.0;
    return res;
  }
  const double sd = std::sqrt(var);
  if (alternative == Alternative::kGreater) {
    const double z = (res.w_plus - mean - 0.5) / sd;
    res.p = 0.5 * std::erfc(z / std::sqrt(2.0));
  } else {
    const double z = (res.w_plus - mean + 0.5) / sd;
    res.p = 0.5 * std::erfc(-z / std::sqrt(2.0));
  }
  res.p = std::min(res.p, 1.0);
  return res;
}

AlignmentReport subset_alignment(const std::vector<ModelRow>& rows, std::size_t k, Metric metric) {
  const std::size_t n = rows.size();
  if (k < 2 || k > n) {
    throw UsageError("subset size k=" + std::to_string(k) + " must lie in [2, " +
                     std::to_string(n) + "]");
  }
  AlignmentReport rep;
  rep.k = k;
  rep.n_models = n;
  rep.metric = metric;

  std::array<std::vector<double>, 4> rho;
  std::array<std::vector<double>, 4> tau;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> is(k), oos(k);
  while (true) {
    ++rep.n_subsets;
    std::array<double, 4> r{}, t{};
    bool ok = true;
    try {
      for (std::size_t i = 0; i < k; ++i) oos[i] = columns(rows[idx[i]], metric).oos;
      for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t i = 0; i < k; ++i) is[i] = columns(rows[idx[i]], metric).in_sample[c];
        r[c] = spearman(is, oos);
        t[c] = kendall(is, oos);
      }
    } catch (const StatsError&) {
      ok = false;
    }
    if (ok) {
      for (std::size_t c = 0; c < 4; ++c) {
        rho[c].push_back(r[c]);
        tau[c].push_back(t[c]);
      }
    } else {
      ++rep.n_excluded;
    }
    // Next combination in lexicographic order.
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }

  const std::size_t used = rho[0].size();
  for (std::size_t c = 0; c < 4; ++c) {
    ConditionSummary s;
    if (used > 0) {
      s.mean_rho = std::accumulate(rho[c].begin(), rho[c].end(), 0.0) / used;
      s.mean_tau = std::accumulate(tau[c].begin(), tau[c].end(), 0.0) / used;
      s.n_positive = static_cast<std::size_t>(
          std::count_if(rho[c].begin(), rho[c].end(), [](double v) { return v > 0; }));
      s.frac_positive = static_cast<double>(s.n_positive) / used;
      if (c != 0) {
        std::vector<double> deltas(used);
        for (std::size_t i = 0; i < used; ++i) deltas[i] = rho[c][i] - rho[0][i];
        s.mean_delta = std::accumulate(deltas.begin(), deltas.end(), 0.0) / used;
        s.vs_baseline = wilcoxon_one_sided(
            deltas, s.mean_delta >= 0 ? Alternative::kGreater : Alternative::kLess);
      }
    }
    rep.conditions[kConditions[c]] = s;
  }
  return rep;
}

std::string to_json(const AlignmentReport& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["metric"] = to_string(r.metric);
  j["n_models"] = r.n_models;
  j["n_subsets"] = r.n_subsets;
  j["n_excluded"] = r.n_excluded;
  nlohmann::ordered_json conds;
  for (const auto& [c, s] : r.conditions) {
    nlohmann::ordered_json cj;
    cj["mean_rho"] = s.mean_rho;
    cj["mean_tau"] = s.mean_tau;
    cj["n_positive"] = s.n_positive;
    cj["frac_positive"] = s.frac_positive;
    if (s.vs_baseline) {
      const auto& w = *s.vs_baseline;
      cj["vs_baseline"] = {
          {"mean_delta", s.mean_delta},
          {"alternative", w.alternative == Alternative::kGreater ? "greater" : "less"},
          {"p", w.p},
          {"w_plus", w.w_plus},
          {"n", w.n},
          {"zeros", w.zeros},
          {"exact", w.exact},
          {"degenerate", w.degenerate}};
    }
    conds[to_string(c)] = std::move(cj);
  }
  j["conditions"] = std::move(conds);
  return j.dump(2) + "\n";
}

std::string scatter_csv(const std::vector<ModelRow>& rows, Metric metric) {
  std::string out = "model_id,is_metric,oos_metric,condition\n";
  for (Condition c : kConditions) {
    for (const auto& row : rows) {
      const auto& m = columns(row, metric);
      out += row.model_id + "," + format_double(m.in_sample[static_cast<std::size_t>(c)]) + "," +
             format_double(m.oos) + "," + to_string(c) + "\n";
    }
  }
  return out;
}

std::string summary_table(const std::vector<AlignmentReport>& reports) {
  std::string out = " k  subsets   rho_B   rho_An  rho_PI   rho_C   tau_B   tau_C  p(C>B)\n";
  for (const auto& r : reports) {
    const auto& b = r.conditions.at(Condition::kBaseline);
    const auto& an = r.conditions.at(Condition::kAnonymisation);
    const auto& pi = r.conditions.at(Condition::kPromptInjection);
    const auto& c = r.conditions.at(Condition::kFincad);
    char line[160];
    std::snprintf(line, sizeof line, "%2zu  %7zu  %+.3f  %+.3f  %+.3f  %+.3f  %+.3f  %+.3f  %s\n",
                  r.k, r.n_subsets, b.mean_rho, an.mean_rho, pi.mean_rho, c.mean_rho, b.mean_tau,
                  c.mean_tau, c.vs_baseline ? fmt(c.vs_baseline->p, "%.2e").c_str() : "-");
    out += line;
  }
  return out;
}

}  // namespace fincad
