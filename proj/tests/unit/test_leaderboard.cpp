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

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "../support/stat_oracles.hpp"
#include "fincad/error.hpp"
#include "fincad/io.hpp"
#include "fincad/leaderboard.hpp"
#include "fincad/rng.hpp"

using namespace fincad;

namespace {

std::vector<ModelRow> fixture() {
  return parse_model_rows(read_file(std::string(FINCAD_DATA_DIR) + "/leaderboard_sharpe.csv"));
}

template <class F>
std::optional<double> guarded(F f) {
  try {
    return f();
  } catch (const StatsError&) {
    return std::nullopt;
  }
}

// Calls `visit` with every vector of length n over `alphabet`.
void each_vector(std::size_t n, const std::vector<double>& alphabet,
                 const std::function<void(const std::vector<double>&)>& visit) {
  std::vector<std::size_t> digit(n, 0);
  std::vector<double> v(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) v[i] = alphabet[digit[i]];
    visit(v);
    std::size_t i = 0;
    while (i < n && ++digit[i] == alphabet.size()) digit[i++] = 0;
    if (i == n) return;
  }
}

std::size_t choose(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("doubled average ranks") {
  const std::vector<double> x{3.0, 1.0, 3.0, 2.0, 3.0};
  CHECK(doubled_average_ranks(x) == std::vector<long long>{8, 2, 8, 4, 8});
  CHECK(doubled_average_ranks(x) == oracle::doubled_ranks(x));
}

TEST_CASE("spearman and kendall equal brute force on every small input") {
  const std::vector<double> alphabet{0.0, 1.0, 2.0};
  std::size_t compared = 0, degenerate = 0;
  for (std::size_t n = 2; n <= 5; ++n) {
    each_vector(n, alphabet, [&](const std::vector<double>& x) {
      each_vector(n, alphabet, [&](const std::vector<double>& y) {
        const auto rho = guarded([&] { return spearman(x, y); });
        const auto tau = guarded([&] { return kendall(x, y); });
        const auto want_rho = oracle::spearman(x, y);
        const auto want_tau = oracle::kendall_b(x, y);
        REQUIRE(rho.has_value() == want_rho.has_value());
        REQUIRE(tau.has_value() == want_tau.has_value());
        if (rho) {
          REQUIRE(*rho == *want_rho);
          REQUIRE(*tau == *want_tau);
          ++compared;
        } else {
          ++degenerate;
        }
      });
    });
  }
  CHECK(compared > 50'000);
  CHECK(degenerate > 0);

  // Length 6 over a wider alphabet, sampled.
  Rng rng(17);
  for (int t = 0; t < 20'000; ++t) {
    std::vector<double> x(6), y(6);
    for (auto& v : x) v = static_cast<double>(rng.below(5)) - 2.0;
    for (auto& v : y) v = static_cast<double>(rng.below(5)) - 2.0;
    const auto rho = guarded([&] { return spearman(x, y); });
    const auto tau = guarded([&] { return kendall(x, y); });
    REQUIRE(rho.has_value() == oracle::spearman(x, y).has_value());
    if (rho) {
      REQUIRE(*rho == *oracle::spearman(x, y));
      REQUIRE(*tau == *oracle::kendall_b(x, y));
    }
  }
}

TEST_CASE("wilcoxon equals sign-pattern enumeration on every small input") {
  const std::vector<double> alphabet{-2.0, -1.0, 0.0, 1.0, 2.0};
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    each_vector(n, alphabet, [&](const std::vector<double>& d) {
      for (bool greater : {true, false}) {
        const auto got = wilcoxon_one_sided(d, greater ? Alternative::kGreater : Alternative::kLess);
        const auto want = oracle::wilcoxon(d, greater);
        REQUIRE(got.degenerate == want.degenerate);
        REQUIRE(got.n == want.n);
        REQUIRE(got.zeros == d.size() - want.n);
        REQUIRE(got.p == want.p);
        REQUIRE(got.w_plus == want.w_plus);
        if (!want.degenerate) REQUIRE(got.exact);
        ++cases;
      }
    });
  }
  CHECK(cases == 2 * (5 + 25 + 125 + 625 + 3125 + 15625));
  // Textbook: five positive distinct deltas give p = 1/32.
  CHECK(wilcoxon_one_sided(std::vector<double>{1, 2, 3, 4, 5}).p == 1.0 / 32.0);
  CHECK_THROWS_AS(wilcoxon_one_sided(std::vector<double>{}), StatsError);
  CHECK_THROWS_AS(wilcoxon_one_sided(std::vector<double>{1.0, NAN}), StatsError);
}

TEST_CASE("wilcoxon switches to the normal approximation above the exact limit") {
  std::vector<double> d;
  for (int i = 1; i <= 30; ++i) d.push_back(i % 4 == 0 ? -i : i);
  const auto r = wilcoxon_one_sided(d);
  CHECK_FALSE(r.exact);
  // W+ = 465 - (4 + 8 + ... + 28) = 465 - 112.
  CHECK(r.w_plus == 353.0);
  const double mean = 30.0 * 31.0 / 4.0, sd = std::sqrt(30.0 * 31.0 * 61.0 / 24.0);
  CHECK(r.p == doctest::Approx(0.5 * std::erfc((353.0 - mean - 0.5) / sd / std::sqrt(2.0))));
  const auto less = wilcoxon_one_sided(d, Alternative::kLess);
  CHECK(less.p + r.p > 1.0);
}

TEST_CASE("rank statistics are invariant under strictly increasing transforms") {
  Rng rng(23);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x(8), y(8), fx(8);
    for (std::size_t i = 0; i < 8; ++i) {
      x[i] = rng.uniform() * 4.0 - 2.0;
      y[i] = rng.uniform();
      fx[i] = std::exp(3.0 * x[i]) + 7.0;
    }
    CHECK(spearman(x, y) == spearman(fx, y));
    CHECK(kendall(x, y) == kendall(fx, y));
  }
  const std::vector<double> a{1, 2, 3, 4}, b{10, 20, 30, 40}, c{4, 3, 2, 1};
  CHECK(spearman(a, b) == 1.0);
  CHECK(spearman(a, c) == -1.0);
  CHECK(kendall(a, c) == -1.0);
  CHECK_THROWS_AS(spearman(a, std::vector<double>{1, 2}), StatsError);
  CHECK_THROWS_AS(kendall(a, std::vector<double>{5, 5, 5, 5}), StatsError);
}

TEST_CASE("fixture: subset alignment across subset sizes") {
  const auto rows = fixture();
  REQUIRE(rows.size() == 11);
  const std::map<std::size_t, std::pair<double, double>> expected{
      {5, {0.758, 0.818}}, {6, {0.770, 0.834}}, {7, {0.779, 0.846}}, {8, {0.786, 0.855}},
      {9, {0.792, 0.862}}, {10, {0.796, 0.868}}, {11, {0.800, 0.873}}};
  for (const auto& [k, rb_rc] : expected) {
    const auto r = subset_alignment(rows, k);
    CHECK(r.n_subsets == choose(11, k));
    CHECK(r.n_excluded == 0);
    CHECK(std::abs(r.conditions.at(Condition::kBaseline).mean_rho - rb_rc.first) <= 0.005);
    CHECK(std::abs(r.conditions.at(Condition::kFincad).mean_rho - rb_rc.second) <= 0.005);
  }

  const auto k7 = subset_alignment(rows, 7);
  const auto& an = k7.conditions.at(Condition::kAnonymisation);
  const auto& pi = k7.conditions.at(Condition::kPromptInjection);
  const auto& c = k7.conditions.at(Condition::kFincad);
  CHECK(std::abs(an.mean_rho - 0.547) <= 0.005);
  CHECK(std::abs(pi.mean_rho - 0.482) <= 0.005);
  CHECK(std::abs(k7.conditions.at(Condition::kBaseline).mean_tau - 0.673) <= 0.005);
  CHECK(std::abs(an.mean_tau - 0.418) <= 0.005);
  CHECK(std::abs(pi.mean_tau - 0.345) <= 0.005);
  CHECK(std::abs(c.mean_tau - 0.709) <= 0.005);
  CHECK(c.n_positive == 330);
  CHECK(c.frac_positive == 1.0);
  REQUIRE(c.vs_baseline.has_value());
  CHECK(c.vs_baseline->alternative == Alternative::kGreater);
  CHECK(c.vs_baseline->p >= 1e-20);
  CHECK(c.vs_baseline->p <= 1e-17);
  CHECK_FALSE(k7.conditions.at(Condition::kBaseline).vs_baseline.has_value());

  const auto k10 = subset_alignment(rows, 10);
  const auto& w10 = *k10.conditions.at(Condition::kFincad).vs_baseline;
  CHECK(w10.exact);
  CHECK(w10.p >= 1e-4);
  CHECK(w10.p <= 1e-2);

  const auto k11 = subset_alignment(rows, 11);
  CHECK(k11.n_subsets == 1);
  std::vector<double> b, o;
  for (const auto& r : rows) {
    b.push_back(r.sharpe.in_sample[0]);
    o.push_back(r.sharpe.oos);
  }
  CHECK(k11.conditions.at(Condition::kBaseline).mean_rho == *oracle::spearman(b, o));

  CHECK_THROWS_AS(subset_alignment(rows, 12), UsageError);
  CHECK_THROWS_AS(subset_alignment(rows, 1), UsageError);
  CHECK_THROWS_AS(subset_alignment(rows, 5, Metric::kSortino), DataError);
}

TEST_CASE("subset means equal an independent enumeration") {
  // Small synthetic leaderboard; compare the k=4 mean rho with a direct
  // bitmask enumeration through the oracle.
  Rng rng(3);
  std::vector<ModelRow> rows(7);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].model_id = "m" + std::to_string(i);
    for (auto& v : rows[i].sharpe.in_sample) v = rng.uniform();
    rows[i].sharpe.oos = rng.uniform();
  }
  const auto rep = subset_alignment(rows, 4);
  for (std::size_t c = 0; c < 4; ++c) {
    double sum = 0;
    std::size_t count = 0;
    for (unsigned mask = 0; mask < (1u << 7); ++mask) {
      if (__builtin_popcount(mask) != 4) continue;
      std::vector<double> is, oos;
      for (std::size_t i = 0; i < 7; ++i) {
        if (mask >> i & 1) {
          is.push_back(rows[i].sharpe.in_sample[c]);
          oos.push_back(rows[i].sharpe.oos);
        }
      }
      sum += *oracle::spearman(is, oos);
      ++count;
    }
    CHECK(count == 35);
    CHECK(rep.conditions.at(kConditions[c]).mean_rho == doctest::Approx(sum / 35.0).epsilon(1e-12));
  }
}

TEST_CASE("zero-variance subsets are excluded and counted") {
  std::vector<ModelRow> rows(4);
  const double is_b[4] = {1.0, 1.0, 1.0, 2.0};
  for (std::size_t i = 0; i < 4; ++i) {
    rows[i].model_id = "m" + std::to_string(i);
    rows[i].sharpe.in_sample = {is_b[i], double(i), double(i), double(i)};
    rows[i].sharpe.oos = double(i);
  }
  const auto r = subset_alignment(rows, 2);
  CHECK(r.n_subsets == 6);
  CHECK(r.n_excluded == 3);  // pairs drawn from the three tied models
}

TEST_CASE("model row parsing") {
  const auto rows = parse_model_rows(
      "model_id,is_b,is_an,is_pi,is_c,oos,sortino_is_b,sortino_is_an,sortino_is_pi,sortino_is_c,"
      "sortino_oos\nA,1,2,3,4,5,6,7,8,9,10\n\nB,0,0,0,0,0,0,0,0,0,0\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].sharpe.in_sample[3] == 4.0);
  CHECK(rows[0].sortino->oos == 10.0);

  auto kind = [](const std::string& csv) {
    try {
      parse_model_rows(csv);
    } catch (const DataError& e) {
      return e.kind();
    }
    return DataErrorKind::kIo;
  };
  CHECK(kind("") == DataErrorKind::kEmptyFile);
  CHECK(kind("model_id,is_b,is_an,is_pi,oos\nA,1,2,3,4\n") == DataErrorKind::kMissingColumn);
  CHECK(kind("model_id,is_b,is_an,is_pi,is_c,oos\nA,1,2,x,4,5\n") == DataErrorKind::kBadNumber);
  CHECK(kind("model_id,is_b,is_an,is_pi,is_c,oos\n") == DataErrorKind::kEmptyDataset);

  CHECK(metric_from_string("sortino") == Metric::kSortino);
  CHECK_THROWS_AS(metric_from_string("calmar"), UsageError);
}

TEST_CASE("report serialisation") {
  const auto rows = fixture();
  const auto csv = scatter_csv(rows);
  CHECK(csv.starts_with("model_id,is_metric,oos_metric,condition\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 45);
  CHECK(csv.find("Mistral-7B,0.682,0.926,IS-C") != std::string::npos);

  const auto r = subset_alignment(rows, 10);
  const auto js = to_json(r);
  CHECK(js.find("\"n_subsets\": 11") != std::string::npos);
  CHECK(js.find("\"IS-C\"") != std::string::npos);
  const auto table = summary_table({r, subset_alignment(rows, 11)});
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
  CHECK(table.find("+0.800") != std::string::npos);
}
